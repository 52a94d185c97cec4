#include "rkwave/verify.hpp"

#include "rkwave/numdiff.hpp"

#include <cmath>

namespace rkwave::verify {

double pde_residual(const models::HydroModel& model, const FieldFn& field, const Space& x,
                    double h) {
  const State u = field(x);
  const Mat du = jacobian_central(field, x, h);
  const auto a = models::eval_matrices(model, u);
  Vec residual = Vec::Zero(model.q);
  for (int i = 0; i < model.p; ++i) residual += a[i] * du.col(i);
  return residual.norm();
}

std::pair<int, Vec> solution_rank(const FieldFn& field, const Space& x, double h,
                                  double rank_tol) {
  const Mat du = jacobian_central(field, x, h);
  Eigen::JacobiSVD<Mat> svd(du);
  const Vec sv = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  int rank = 0;
  if (smax > 1e-12) {
    for (int i = 0; i < sv.size(); ++i) {
      if (sv[i] > rank_tol * smax) ++rank;
    }
  }
  return {rank, sv};
}

VerificationReport verify_field(const models::HydroModel& model, const FieldFn& field, int k_bound,
                                const GridSpec& xgrid, const VerifyOptions& opts) {
  VerificationReport rep;
  rep.grid = xgrid;
  rep.residual_tol = opts.residual_tol;
  rep.rank_tol = opts.rank_tol;
  rep.k_bound = k_bound;

  double sum = 0.0;
  const std::size_t nodes = xgrid.node_count();
  for (std::size_t n = 0; n < nodes; ++n) {
    PointRow row;
    row.x = xgrid.node_coords(xgrid.unflatten(n));
    try {
      row.residual = pde_residual(model, field, row.x, opts.h);
      auto [rank, sv] = solution_rank(field, row.x, opts.h, opts.rank_tol);
      row.rank = rank;
      row.singular_values = sv;
      row.resolved = true;
    } catch (const SolveError&) {
      row.resolved = false;
    } catch (const DomainError&) {
      row.resolved = false;
    }
    if (row.resolved) {
      rep.max_residual = std::max(rep.max_residual, row.residual);
      rep.max_rank = std::max(rep.max_rank, row.rank);
      sum += row.residual;
      ++rep.resolved;
    } else {
      ++rep.unresolved;
    }
    rep.rows.push_back(std::move(row));
  }
  rep.mean_residual = rep.resolved ? sum / static_cast<double>(rep.resolved) : 0.0;
  rep.pass = rep.resolved > 0 && rep.max_residual <= opts.residual_tol && rep.max_rank <= k_bound;
  return rep;
}

VerificationReport verify_grid(const models::HydroModel& model,
                               const kwave::KWaveSolution& solution, const GridSpec& xgrid,
                               const VerifyOptions& opts) {
  const FieldFn field = [&solution](const Space& x) { return solution.evaluate(x); };
  return verify_field(model, field, solution.k(), xgrid, opts);
}

}  // namespace rkwave::verify
