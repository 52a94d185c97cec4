#pragma once

#include "rkwave/kwave.hpp"

namespace rkwave::symmetry {

/// Annihilating directions of a stack of k wave vectors at one state: an
/// orthonormal null-space basis xi_a (lambda^j . xi_a = 0), the pivoted
/// k x k submatrix of the stack, and the same fields renormalized to the
/// unit-coefficient form X_a = d/dx^a - sum_l (Lambda^{-1} lambda_a)^l d/dx^l.
struct Annihilators {
  Mat lambda_stack;               // k x p
  Mat xi;                         // p x (p-k), orthonormal columns
  std::vector<int> selected_columns;  // Lambda column choice (greedy pivoting)
  Mat lambda_square;              // k x k, invertible by pivot choice
  double det_lambda_square = 0.0;
  Mat unit_coefficient_basis;     // p x (p-k), unit coefficient on the free axes
};

Annihilators annihilating_fields(const Mat& lambda_stack);
Annihilators annihilating_fields(const geometry::Frame& frame, const State& u);

/// Rectified coordinates at a resolved point: xbar carries the k solved
/// invariants first, then the x components of the non-pivot axes (the
/// directions the annihilating fields straighten onto); ubar = u.
struct RectifiedPoint {
  Vec xbar;
  State ubar;
  std::vector<int> invariant_axes;  // original x-axes kept as coordinates
};
RectifiedPoint rectified_point(const kwave::KWaveSolution& solution, const Space& x);

/// max_a || xi_a^i du/dx^i || at x, with du/dx by the shared central
/// differences of step h and xi built from the frame's wave vectors at u(x).
double invariance_residual(const FieldFn& field, const geometry::Frame& frame, const Space& x,
                           double h);
double invariance_residual(const kwave::KWaveSolution& solution, const Space& x, double h);

/// Compare u at x and at x + eps*xi_a over a grid; on an exact k-wave the
/// state is constant along every annihilating direction.
struct RectificationReport {
  double max_discrepancy = 0.0;   // max ||u(x + eps xi) - u(x)||
  double max_normalized = 0.0;    // same, divided by the scaled eps used
  std::size_t points_tested = 0;
  bool vacuous = false;           // p - k = 0
  double epsilon = 0.0;
};
RectificationReport rectification_check(const kwave::KWaveSolution& solution, const GridSpec& xgrid,
                                        double epsilon = 1e-3);

/// Norm of sum_{s<=k, l<=p} M^s_l A^l(u) f_{,s} where M = -J^{-1} Lambda is
/// the total derivative Dr/Dx from the implicit-system Jacobian; agrees with
/// the full PDE residual on k-wave fields.
double reduced_system_residual(const kwave::KWaveSolution& solution, const Space& x, double h);

}  // namespace rkwave::symmetry
