#pragma once

#include "rkwave/models.hpp"

#include <cstdint>

namespace rkwave::geometry {

/// Vector field on hodograph space.
using VField = std::function<Vec(const State&)>;

/// Frame evaluation at one state: k wave vectors stacked as rows of
/// `lambda` (k x p) and the k polarizations as columns of `gamma` (q x k).
struct FrameEval {
  Mat lambda;
  Mat gamma;
};

/// k selected characteristic families of a model, evaluatable at any state.
struct Frame {
  models::HydroModel model;
  int k = 0;
  std::vector<std::string> selectors;
  std::function<FrameEval(const State&)> eval;
  bool commuting_certified = false;
  std::string source;  // "analytic", "tracked" or "custom"
};

/// Build a frame from branch selectors ("fast", "slow", or "b<i>" picking
/// the i-th branch by ascending speed). source: "auto" uses catalogue
/// analytic closed forms when available, "tracked" forces raw unit kernel
/// vectors from the dispersion solve, "analytic" requires closed forms.
Frame make_frame(const models::HydroModel& model, const std::vector<std::string>& selectors,
                 const std::string& source = "auto");

/// [v, w]^a = v^b dw^a/du^b - w^b dv^a/du^b with Jacobians by central
/// differences of step h. Exactly antisymmetric (same stencils both ways).
Vec lie_bracket(const VField& v, const VField& w, const State& u, double h);

/// Least-squares distance of `target` from span(basis) and the minimizing
/// coefficients (minimum-norm when the basis is rank-deficient). An empty
/// basis yields (||target||, {}).
std::pair<double, Vec> span_distance(const Vec& target, const std::vector<Vec>& basis);

struct PairCheck {
  int s = 0, r = 0;
  double bracket_residual = 0.0;   // dist([g_s, g_r], span{g_s, g_r})
  Vec bracket_coefficients;
  double lambda_span_residual = 0.0;  // dist(d lambda^s along g_r, span{lambda^s, lambda^r})
  Vec lambda_coefficients;
  double commutation = 0.0;        // ||[g_s, g_r]||
};

struct InvolutivityReport {
  std::vector<State> sample_states;
  std::vector<std::vector<PairCheck>> checks;  // one vector per state, all pairs s < r
  double max_bracket_residual = 0.0;   // relative to local field magnitude
  double max_lambda_residual = 0.0;
  double max_commutation = 0.0;
  double h = 0.0;
  double tol = 0.0;
  bool pass = false;
};

/// Evaluates both involutivity conditions at every state; pass iff every
/// residual is at most tol times the local field magnitude.
InvolutivityReport check_involutivity(const Frame& frame, const std::vector<State>& states,
                                      double h, double tol);

/// Max over states and pairs of ||[g_s, g_r]||; certifies the frame
/// (sets commuting_certified) iff the max is <= 1e-6 times the largest
/// field magnitude seen.
double commutation_residual(Frame& frame, const std::vector<State>& states, double h);

/// Deterministic sample of n states uniform in the model's sampling box.
std::vector<State> sample_states(const models::HydroModel& model, int n, std::uint64_t seed);

}  // namespace rkwave::geometry
