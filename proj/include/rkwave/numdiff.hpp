#pragma once

#include "rkwave/types.hpp"

namespace rkwave {

/// Jacobian of f at x by central differences, one column per axis, with
/// per-axis step h * (1 + |x_i|). Every module that differentiates a
/// solution field goes through this so cross-module residual comparisons
/// see the identical scheme.
Mat jacobian_central(const FieldFn& f, const Vec& x, double h);

/// Default differentiation step for hodograph-space fields.
inline double default_step(const Vec& u) { return 1e-5 * (1.0 + u.lpNorm<Eigen::Infinity>()); }

}  // namespace rkwave
