#include "rkwave/symmetry.hpp"

#include "rkwave/numdiff.hpp"

#include <algorithm>
#include <cmath>

namespace rkwave::symmetry {

namespace {

// Greedy column pivoting: pick k columns of the k x p stack so the selected
// square submatrix keeps the largest pivots under Gaussian elimination.
std::vector<int> pivot_columns(Mat work) {
  const int k = static_cast<int>(work.rows());
  const int p = static_cast<int>(work.cols());
  std::vector<int> chosen;
  std::vector<bool> used(p, false);
  for (int row = 0; row < k; ++row) {
    int best = -1;
    double best_abs = 0.0;
    for (int c = 0; c < p; ++c) {
      if (used[c]) continue;
      if (std::abs(work(row, c)) > best_abs) {
        best_abs = std::abs(work(row, c));
        best = c;
      }
    }
    if (best < 0) break;
    used[best] = true;
    chosen.push_back(best);
    for (int r2 = row + 1; r2 < k; ++r2) {
      const double f = work(r2, best) / work(row, best);
      work.row(r2) -= f * work.row(row);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace

Annihilators annihilating_fields(const Mat& lambda_stack) {
  const int k = static_cast<int>(lambda_stack.rows());
  const int p = static_cast<int>(lambda_stack.cols());
  if (k < 1 || k > p) throw ContractError("annihilating_fields: need 1 <= k <= p");

  Annihilators out;
  out.lambda_stack = lambda_stack;

  Eigen::JacobiSVD<Mat> svd(lambda_stack, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv[k - 1] <= 1e-8 * sv[0]) {
    throw DegenerateFrameError(State());
  }
  out.xi = svd.matrixV().rightCols(p - k);
  // deterministic sign: first nonzero component of each basis vector positive
  for (int c = 0; c < out.xi.cols(); ++c) {
    for (int i = 0; i < p; ++i) {
      if (out.xi(i, c) != 0.0) {
        if (out.xi(i, c) < 0.0) out.xi.col(c) = -out.xi.col(c);
        break;
      }
    }
  }

  out.selected_columns = pivot_columns(lambda_stack);
  if (static_cast<int>(out.selected_columns.size()) != k) {
    throw DegenerateFrameError(State());
  }
  out.lambda_square.resize(k, k);
  for (int c = 0; c < k; ++c) out.lambda_square.col(c) = lambda_stack.col(out.selected_columns[c]);
  out.det_lambda_square = out.lambda_square.determinant();
  double row_scale = 1.0;
  for (int s = 0; s < k; ++s) row_scale *= std::max(lambda_stack.row(s).norm(), 1e-300);
  if (std::abs(out.det_lambda_square) <= 1e-10 * row_scale) {
    throw DegenerateFrameError(State());
  }

  // Unit-coefficient normalization: for each non-selected column a, the
  // field has coefficient 1 on axis a and -(Lambda^{-1} lambda_a) on the
  // selected axes.
  out.unit_coefficient_basis = Mat::Zero(p, p - k);
  const auto lu = out.lambda_square.partialPivLu();
  int col = 0;
  for (int a = 0; a < p; ++a) {
    if (std::find(out.selected_columns.begin(), out.selected_columns.end(), a) !=
        out.selected_columns.end()) {
      continue;
    }
    const Vec coeff = lu.solve(lambda_stack.col(a));
    out.unit_coefficient_basis(a, col) = 1.0;
    for (int l = 0; l < k; ++l) out.unit_coefficient_basis(out.selected_columns[l], col) = -coeff[l];
    ++col;
  }
  return out;
}

Annihilators annihilating_fields(const geometry::Frame& frame, const State& u) {
  return annihilating_fields(frame.eval(u).lambda);
}

RectifiedPoint rectified_point(const kwave::KWaveSolution& solution, const Space& x) {
  const int p = solution.surface.pdim();
  const int k = solution.k();
  const Vec r = solution.solve_invariants(x);
  const State u = solution.surface.interp_f(r);
  const auto ann = annihilating_fields(solution.surface.frame, u);

  RectifiedPoint out;
  out.ubar = u;
  out.xbar.resize(p);
  for (int s = 0; s < k; ++s) out.xbar[s] = r[s];
  int col = k;
  for (int a = 0; a < p; ++a) {
    if (std::find(ann.selected_columns.begin(), ann.selected_columns.end(), a) ==
        ann.selected_columns.end()) {
      out.xbar[col++] = x[a];
      out.invariant_axes.push_back(a);
    }
  }
  return out;
}

double invariance_residual(const FieldFn& field, const geometry::Frame& frame, const Space& x,
                           double h) {
  const State u = field(x);
  const Mat du = jacobian_central(field, x, h);  // q x p
  const auto ann = annihilating_fields(frame, u);
  double worst = 0.0;
  for (int a = 0; a < ann.xi.cols(); ++a) {
    worst = std::max(worst, (du * ann.xi.col(a)).norm());
  }
  return worst;
}

double invariance_residual(const kwave::KWaveSolution& solution, const Space& x, double h) {
  const FieldFn field = [&solution](const Space& xx) { return solution.evaluate(xx); };
  return invariance_residual(field, solution.surface.frame, x, h);
}

RectificationReport rectification_check(const kwave::KWaveSolution& solution, const GridSpec& xgrid,
                                        double epsilon) {
  RectificationReport rep;
  rep.epsilon = epsilon;
  const int p = solution.surface.pdim();
  const int k = solution.k();
  if (p == k) {
    rep.vacuous = true;
    return rep;
  }

  const std::size_t nodes = xgrid.node_count();
  for (std::size_t n = 0; n < nodes; ++n) {
    const Space x = xgrid.node_coords(xgrid.unflatten(n));
    State u0;
    try {
      u0 = solution.evaluate(x);
    } catch (const SolveError&) {
      continue;  // unresolved probe point, skip
    }
    const auto ann = annihilating_fields(solution.surface.frame, u0);
    const double eps = epsilon * (1.0 + x.lpNorm<Eigen::Infinity>());
    for (int a = 0; a < ann.xi.cols(); ++a) {
      const State u1 = solution.evaluate(x + eps * ann.xi.col(a));
      const double d = (u1 - u0).norm();
      rep.max_discrepancy = std::max(rep.max_discrepancy, d);
      rep.max_normalized = std::max(rep.max_normalized, d / eps);
    }
    ++rep.points_tested;
  }
  return rep;
}

double reduced_system_residual(const kwave::KWaveSolution& solution, const Space& x, double h) {
  const int p = solution.surface.pdim();

  const Vec r = solution.solve_invariants(x);
  const auto info = solution.jacobian_info(r, x);
  if (!std::isfinite(info.condition) || info.condition > solution.newton.condition_limit) {
    throw SolveError(SolveError::Kind::catastrophe, r, 0, info.condition);
  }

  // Total derivative Dr/Dx from the implicit function theorem on
  // g(r; x) = 0: M = -J^{-1} Lambda, the tabulated analogue of
  // phi^{-1} Lambda.
  const Mat lam = solution.surface.interp_lambda(r);  // k x p
  const Mat m = -info.jac.partialPivLu().solve(lam);  // k x p

  // du/dx by the shared stencil, then the k wave amplitudes u_{,s} that
  // reproduce it through du/dx = F M (exact on k-wave fields).
  const FieldFn field = [&solution](const Space& xx) { return solution.evaluate(xx); };
  const Mat du = jacobian_central(field, x, h);  // q x p
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(m.transpose());  // p x k
  const Mat f_amp = cod.solve(du.transpose()).transpose();         // q x k
  const Mat du_kwave = f_amp * m;                                  // q x p

  const State u = solution.evaluate(x);
  const auto a = models::eval_matrices(solution.surface.frame.model, u);
  Vec residual = Vec::Zero(solution.surface.qdim());
  for (int i = 0; i < p; ++i) residual += a[i] * du_kwave.col(i);
  return residual.norm();
}

}  // namespace rkwave::symmetry
