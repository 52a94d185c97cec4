#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rkwave {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Point in hodograph space (length q of the owning model).
using State = Vec;
/// Point in physical space (length p of the owning model).
using Space = Vec;

/// An evaluatable field u(x); throws on points it cannot resolve.
using FieldFn = std::function<State(const Space&)>;

/// One axis of a rectangular grid: n nodes spanning [lo, hi].
struct AxisSpec {
  double lo = 0.0;
  double hi = 0.0;
  int n = 1;

  double step() const { return n > 1 ? (hi - lo) / (n - 1) : 0.0; }
  double node(int i) const { return n > 1 ? lo + step() * i : lo; }
};

/// Rectangular grid over several axes. Flat node indices are row-major:
/// axis 0 varies slowest, the last axis fastest.
struct GridSpec {
  std::vector<AxisSpec> axes;

  int dim() const { return static_cast<int>(axes.size()); }

  std::size_t node_count() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= static_cast<std::size_t>(a.n);
    return n;
  }

  std::size_t flat(const std::vector<int>& idx) const;
  std::vector<int> unflatten(std::size_t flat_idx) const;
  Vec node_coords(const std::vector<int>& idx) const;

  /// True if r lies inside the grid box, with a per-axis slack of
  /// tol_rel * max(1, span).
  bool contains(const Vec& r, double tol_rel = 1e-9) const;
  /// Clamp r onto the grid box (used after a contains() pass to absorb
  /// roundoff at the edges).
  Vec clamp(const Vec& r) const;

  /// Parse "lo:hi:n[,lo:hi:n...]".
  static GridSpec parse(const std::string& text);
  std::string to_string() const;
};

// ---------------------------------------------------------------------------
// Error types. The CLI maps these onto exit codes; library callers can
// catch the specific failure they care about.
// ---------------------------------------------------------------------------

/// State outside the model's closed domain box.
struct DomainError : std::domain_error {
  DomainError(std::string bound_desc, State u)
      : std::domain_error("state outside model domain: " + bound_desc),
        bound(std::move(bound_desc)),
        state(std::move(u)) {}
  std::string bound;
  State state;
};

/// Complex characteristic pair encountered.
struct NonHyperbolicError : std::runtime_error {
  explicit NonHyperbolicError(State u, std::string what_suffix = "")
      : std::runtime_error("non-hyperbolic state" + what_suffix), state(std::move(u)) {}
  State state;
};

/// kernel_vector called with a lambda whose matrix is numerically full rank.
struct NotAWaveVector : std::runtime_error {
  explicit NotAWaveVector(double smallest_sv)
      : std::runtime_error("not a wave vector: smallest singular value " +
                           std::to_string(smallest_sv)),
        sigma_min(smallest_sv) {}
  double sigma_min;
};

/// Frame fields linearly dependent at a state.
struct DegenerateFrameError : std::runtime_error {
  explicit DegenerateFrameError(State u)
      : std::runtime_error("frame degenerate at sampled state"), state(std::move(u)) {}
  State state;
};

/// A precondition of an operation was violated by the caller.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Surface integration left the model domain before covering the grid.
struct PartialSurfaceError : std::runtime_error {
  PartialSurfaceError(std::vector<double> lo, std::vector<double> hi)
      : std::runtime_error("surface trajectory exited model domain"),
        reached_lo(std::move(lo)),
        reached_hi(std::move(hi)) {}
  std::vector<double> reached_lo;  // per-axis extent actually covered
  std::vector<double> reached_hi;
};

/// Newton continuation failure.
struct SolveError : std::runtime_error {
  enum class Kind { no_convergence, catastrophe, coverage };

  SolveError(Kind k, Vec last, int iters, double cond)
      : std::runtime_error(describe(k)),
        kind(k),
        last_iterate(std::move(last)),
        iterations(iters),
        condition(cond) {}

  static const char* describe(Kind k) {
    switch (k) {
      case Kind::no_convergence: return "newton did not converge";
      case Kind::catastrophe: return "gradient catastrophe: singular implicit jacobian";
      case Kind::coverage: return "invariant left the tabulated surface grid";
    }
    return "solve error";
  }

  Kind kind;
  Vec last_iterate;
  int iterations;
  double condition;
};

/// JSON input violated the published schema. `pointer` is the JSON pointer
/// of the offending key.
struct ConfigError : std::runtime_error {
  ConfigError(std::string json_pointer, const std::string& message)
      : std::runtime_error(message + " (at " + json_pointer + ")"),
        pointer(std::move(json_pointer)) {}
  std::string pointer;
};

}  // namespace rkwave
