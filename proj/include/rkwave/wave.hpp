#pragma once

#include "rkwave/models.hpp"

namespace rkwave::wave {

/// One characteristic branch at a state: wave vector, unit polarization,
/// speed (for p = 2 the root c with lambda = (-c, 1)), root multiplicity.
struct WaveBranch {
  Vec lambda;
  Vec gamma;
  double speed = 0.0;
  int multiplicity = 1;
};

/// All real characteristic branches of a p = 2 model at u, sorted by
/// ascending speed; coalescing roots are merged and reported once with
/// their multiplicity. Throws NonHyperbolicError on a complex pair.
std::vector<WaveBranch> characteristic_branches(const models::HydroModel& model, const State& u);

/// ||(lambda_i A^i(u)) gamma||_2. Zero lambda or gamma is an argument error.
double wave_relation_residual(const models::HydroModel& model, const State& u, const Vec& lambda,
                              const Vec& gamma);

/// Unit vector spanning the smallest-singular-value direction of
/// lambda_i A^i(u), sign-normalized so its first nonzero component is
/// positive. Throws NotAWaveVector if the matrix is full rank to
/// `rank_tol` (relative to the largest singular value).
Vec kernel_vector(const models::HydroModel& model, const State& u, const Vec& lambda,
                  double rank_tol = 1e-8);

/// p > 2 dispersion along a pencil lambda = offset + mu * direction: real
/// roots mu of det(lambda_i A^i(u)) found by scanning [mu_lo, mu_hi] and
/// bisecting sign changes.
struct PencilOptions {
  double mu_lo = -10.0;
  double mu_hi = 10.0;
  int scan_points = 4001;
  double tol = 1e-13;
};
std::vector<WaveBranch> pencil_branches(const models::HydroModel& model, const State& u,
                                        const Vec& offset, const Vec& direction,
                                        const PencilOptions& opts = {});

/// Normalizations shared with geometry: last nonzero component of lambda
/// scaled to 1; gamma unit with first nonzero component positive.
Vec normalize_lambda(Vec lambda);
Vec sign_normalize_unit(Vec v);

}  // namespace rkwave::wave
