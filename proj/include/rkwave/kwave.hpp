#pragma once

#include "rkwave/geometry.hpp"

namespace rkwave::kwave {

struct IntegrateOptions {
  int substeps = 1;  // RK4 sub-intervals per grid cell
};

/// Tabulated integral surface f(r^1..r^k) of df/dr^s = gamma_s(f), with the
/// composed wave vectors lambda^s(f(r)) and grid-difference derivative
/// tables for interpolation queries. Immutable after construction.
struct WaveSurface {
  geometry::Frame frame;
  State base_state;
  GridSpec grid;  // k axes, origin on a node

  // Node-major storage, axis 0 slowest. Per node: q values of f,
  // k*p values of lambda (s major), q*k of df/dr, k*p*k of dlambda/dr.
  std::vector<double> values;
  std::vector<double> lambda_values;
  std::vector<double> df_values;
  std::vector<double> dlambda_values;
  double path_independence_error = 0.0;

  int k() const { return grid.dim(); }
  int pdim() const { return frame.model.p; }
  int qdim() const { return frame.model.q; }

  Vec f_at(std::size_t node) const;
  Mat lambda_at(std::size_t node) const;  // k x p

  Vec interp_f(const Vec& r) const;
  Mat interp_lambda(const Vec& r) const;            // k x p
  Mat interp_df(const Vec& r) const;                // q x k
  std::vector<Mat> interp_dlambda(const Vec& r) const;  // k entries, each p x k

  /// Populate derivative tables from the node values (central differences
  /// inside, one-sided on the edges).
  void build_tables();
};

/// Integrate the surface from base_state over the r-grid: axis 1 from the
/// origin, then fanning out along axis 2 from every axis-1 node, and so on.
/// Runs the dual-order path-independence check and stores its error.
/// Requires a commuting-certified frame.
WaveSurface integrate_surface(const geometry::Frame& frame, const State& base_state,
                              const GridSpec& grid, const IntegrateOptions& opts = {});

/// Max node distance between the surfaces integrated with axis orders
/// (1..k) and (k..1). Does not require certification: this is the
/// diagnostic that exposes a non-commuting frame.
double path_independence_error(const geometry::Frame& frame, const State& base_state,
                               const GridSpec& grid, const IntegrateOptions& opts = {});

/// Max over interior nodes and families of the relative mismatch between
/// the grid central difference of f along r^s and gamma_s(f).
double surface_consistency(const WaveSurface& surface);

/// Serializable profile psi^s for the implicit equations.
struct ImplicitProfile {
  enum class Kind { linear, gaussian, polynomial };

  struct Term {
    std::vector<int> powers;  // one exponent per invariant, total degree <= 3
    double coef = 0.0;
  };

  Kind kind = Kind::linear;
  Vec slope;          // linear
  double offset = 0.0;
  double amplitude = 0.0;  // gaussian
  Vec center;
  double width = 1.0;
  std::vector<Term> terms;  // polynomial

  double value(const Vec& r) const;
  Vec gradient(const Vec& r) const;
  void validate(int k) const;

  static ImplicitProfile linear_profile(Vec slope, double offset = 0.0);
  static ImplicitProfile gaussian_profile(double amplitude, Vec center, double width);
  static ImplicitProfile polynomial_profile(std::vector<Term> terms);
};

struct NewtonSettings {
  double tolerance = 1e-12;
  int max_iterations = 50;
  double damping = 0.5;
  double condition_limit = 1e12;
};

struct QueryDiagnostics {
  int iterations = 0;
  double jacobian_condition = 0.0;
  double jacobian_det = 0.0;
  bool resolved = false;
};

/// A Riemann k-wave: surface + implicit profiles + Newton policy. Queries
/// solve lambda^s_mu(r) x^mu = psi^s(r) for r and return u = f(r).
struct KWaveSolution {
  WaveSurface surface;
  std::vector<ImplicitProfile> profiles;
  NewtonSettings newton;

  /// Scratch from the most recent solve on this handle. Single-query
  /// convenience only; concurrent queries must each use their own handle.
  mutable QueryDiagnostics last_diagnostics;

  int k() const { return surface.k(); }

  Vec residual_g(const Vec& r, const Space& x) const;   // g^s = lambda^s.x - psi^s
  Mat newton_jacobian(const Vec& r, const Space& x) const;

  /// Jacobian together with its singularity diagnostics. `condition` is
  /// scale / sigma_min where scale is the magnitude of the Jacobian's
  /// ingredient terms before cancellation; unlike sigma_max / sigma_min it
  /// detects the k = 1 gradient catastrophe (a 1x1 matrix is otherwise
  /// perfectly conditioned).
  struct JacobianInfo {
    Mat jac;
    double scale = 0.0;
    double sigma_min = 0.0;
    double condition = 0.0;
    double det = 0.0;
  };
  JacobianInfo jacobian_info(const Vec& r, const Space& x) const;

  /// Damped Newton from warm start (or the grid origin). Throws SolveError
  /// on divergence, singular Jacobian, or leaving the surface grid.
  Vec solve_invariants(const Space& x, const Vec* warm_start = nullptr) const;
  State evaluate(const Space& x) const;

  /// Exception-free query core used by grid sweeps.
  struct Query {
    Vec r;
    State u;
    QueryDiagnostics diag;
    SolveError::Kind failure = SolveError::Kind::no_convergence;  // valid when !diag.resolved
  };
  Query query(const Space& x, const Vec* warm_start = nullptr) const;

  void validate() const;
};

/// Pointwise least-squares fit of the second-order wave-vector constraints:
/// at interior nodes, minimize ||d2 lambda^s/(dr^s dr^l) + alpha d_s lambda^s
/// + beta d_l lambda^s|| over the p components.
struct LambdaConstraintPair {
  int s = 0, l = 0;
  std::vector<double> alpha, beta, residual;  // one entry per interior node
  double max_residual = 0.0;
};
struct LambdaConstraintReport {
  bool vacuous = false;  // k = 1
  std::vector<LambdaConstraintPair> pairs;
  double max_residual = 0.0;
};
LambdaConstraintReport check_lambda_constraints(const WaveSurface& surface);

struct FieldSample {
  std::vector<int> idx;
  Space x;
  Vec r;
  State u;
  QueryDiagnostics diag;
};

struct CatastropheCell {
  int axis = 0;
  std::vector<int> idx_lo, idx_hi;
  Space x_lo, x_hi;
  double det_lo = 0.0, det_hi = 0.0;
  double locus_estimate = 0.0;  // coordinate along `axis`
  std::string reason;           // "det-sign-change" or "condition"
};

struct CatastropheReport {
  std::vector<CatastropheCell> cells;
  double condition_threshold = 0.0;
};

struct FieldTable {
  GridSpec grid;
  std::vector<FieldSample> samples;  // node-major
  CatastropheReport catastrophes;
};

/// Evaluate u over an x-grid with warm-start continuation (a spine down
/// the leading axes, then sweeps along the last axis; rows are independent
/// so results do not depend on `threads`). Unresolved points are marked,
/// never extrapolated.
FieldTable sample_grid(const KWaveSolution& solution, const GridSpec& xgrid, int threads = 1);

}  // namespace rkwave::kwave
