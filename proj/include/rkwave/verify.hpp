#pragma once

#include "rkwave/kwave.hpp"

namespace rkwave::verify {

/// ||sum_i A^i(u(x)) du/dx^i||_2 with the shared central-difference scheme,
/// per-axis step h*(1+|x^i|).
double pde_residual(const models::HydroModel& model, const FieldFn& field, const Space& x,
                    double h);

/// Numerical rank of du/dx: singular values sigma, rank = #{sigma_i >
/// rank_tol * sigma_max}, rank 0 when sigma_max <= 1e-12.
std::pair<int, Vec> solution_rank(const FieldFn& field, const Space& x, double h, double rank_tol);

struct PointRow {
  Space x;
  double residual = 0.0;
  int rank = 0;
  Vec singular_values;
  bool resolved = false;
};

struct VerificationReport {
  GridSpec grid;
  std::vector<PointRow> rows;  // lexicographic by grid index
  double max_residual = 0.0;
  double mean_residual = 0.0;
  int max_rank = 0;
  std::size_t unresolved = 0;
  std::size_t resolved = 0;
  double residual_tol = 0.0;
  double rank_tol = 0.0;
  int k_bound = 0;
  bool pass = false;
};

struct VerifyOptions {
  double h = 1e-5;
  double residual_tol = 1e-6;
  double rank_tol = 1e-6;
};

/// Residual + rank over every grid point for a generic field with rank
/// bound k_bound. Unresolved stencils are counted, not extrapolated.
VerificationReport verify_field(const models::HydroModel& model, const FieldFn& field, int k_bound,
                                const GridSpec& xgrid, const VerifyOptions& opts = {});

/// Same for a constructed solution (k bound taken from the solution).
VerificationReport verify_grid(const models::HydroModel& model,
                               const kwave::KWaveSolution& solution, const GridSpec& xgrid,
                               const VerifyOptions& opts = {});

}  // namespace rkwave::verify
