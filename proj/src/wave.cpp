#include "rkwave/wave.hpp"

#include <algorithm>
#include <cmath>

namespace rkwave::wave {

namespace {

Mat pencil_matrix(const std::vector<Mat>& a, const Vec& lambda) {
  Mat m = lambda[0] * a[0];
  for (int i = 1; i < lambda.size(); ++i) m += lambda[i] * a[i];
  return m;
}

double matrix_scale(const std::vector<Mat>& a) {
  double s = 0.0;
  for (const auto& m : a) s = std::max(s, m.cwiseAbs().maxCoeff());
  return std::max(s, 1.0);
}

// Real roots of det(A^2 - c I) = 0, for models with A^1 = I. q = 2 goes
// through the quadratic formula; larger q falls back to the eigenvalues
// of A^2 (same polynomial, Eigen does the root finding).
std::vector<std::pair<double, int>> speed_roots(const Mat& a2, const State& u) {
  const int q = static_cast<int>(a2.rows());
  std::vector<double> roots;
  const double scale = std::max(1.0, a2.cwiseAbs().maxCoeff());

  if (q == 2) {
    const double tr = a2(0, 0) + a2(1, 1);
    const double det = a2(0, 0) * a2(1, 1) - a2(0, 1) * a2(1, 0);
    double disc = tr * tr - 4.0 * det;
    const double disc_tol = 1e-12 * scale * scale;
    if (disc < -disc_tol) throw NonHyperbolicError(u, ": complex characteristic pair");
    if (disc < 0.0) disc = 0.0;
    const double s = std::sqrt(disc);
    roots = {0.5 * (tr - s), 0.5 * (tr + s)};
  } else {
    Eigen::EigenSolver<Mat> es(a2);
    const double imag_tol = 1e-9 * scale;
    for (int i = 0; i < q; ++i) {
      const auto ev = es.eigenvalues()[i];
      if (std::abs(ev.imag()) > imag_tol) {
        throw NonHyperbolicError(u, ": complex characteristic pair");
      }
      roots.push_back(ev.real());
    }
  }

  std::sort(roots.begin(), roots.end());
  std::vector<std::pair<double, int>> merged;
  const double merge_tol = 1e-9 * scale;
  for (double c : roots) {
    if (!merged.empty() && std::abs(c - merged.back().first) <= merge_tol) {
      merged.back().second += 1;
    } else {
      merged.emplace_back(c, 1);
    }
  }
  return merged;
}

Vec smallest_singular_direction(const Mat& m, double rank_tol, bool* full_rank,
                                double* sigma_min_out) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  const double smin = sv.size() ? sv[sv.size() - 1] : 0.0;
  if (sigma_min_out) *sigma_min_out = smin;
  *full_rank = smax > 0.0 && smin > rank_tol * smax;
  return svd.matrixV().col(sv.size() - 1);
}

}  // namespace

Vec sign_normalize_unit(Vec v) {
  const double n = v.norm();
  if (n == 0.0) throw ContractError("cannot normalize a zero vector");
  v /= n;
  for (int i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) {
      if (v[i] < 0.0) v = -v;
      break;
    }
  }
  return v;
}

Vec normalize_lambda(Vec lambda) {
  int last = -1;
  for (int i = 0; i < lambda.size(); ++i) {
    if (lambda[i] != 0.0) last = i;
  }
  if (last < 0) throw ContractError("zero wave vector");
  return lambda / lambda[last];
}

std::vector<WaveBranch> characteristic_branches(const models::HydroModel& model, const State& u) {
  const auto a = models::eval_matrices(model, u);
  if (model.p != 2) {
    throw ContractError("characteristic_branches requires p = 2; use pencil_branches");
  }
  // Catalogued p = 2 models have A^1 = I; the dispersion reduces to the
  // characteristic polynomial of A^2.
  if (!a[0].isIdentity(1e-14)) {
    throw ContractError("characteristic_branches requires A^1 = I");
  }

  std::vector<WaveBranch> out;
  for (const auto& [c, mult] : speed_roots(a[1], u)) {
    WaveBranch b;
    b.speed = c;
    b.multiplicity = mult;
    b.lambda = (Vec(2) << -c, 1.0).finished();
    b.gamma = kernel_vector(model, u, b.lambda, 1e-6);
    out.push_back(std::move(b));
  }
  std::stable_sort(out.begin(), out.end(), [](const WaveBranch& l, const WaveBranch& r) {
    if (l.speed != r.speed) return l.speed < r.speed;
    return std::lexicographical_compare(l.gamma.data(), l.gamma.data() + l.gamma.size(),
                                        r.gamma.data(), r.gamma.data() + r.gamma.size());
  });
  return out;
}

double wave_relation_residual(const models::HydroModel& model, const State& u, const Vec& lambda,
                              const Vec& gamma) {
  if (lambda.size() != model.p || gamma.size() != model.q) {
    throw ContractError("wave_relation_residual: lambda/gamma of wrong length");
  }
  if (lambda.norm() == 0.0 || gamma.norm() == 0.0) {
    throw ContractError("wave_relation_residual: zero lambda or gamma");
  }
  const auto a = models::eval_matrices(model, u);
  return (pencil_matrix(a, lambda) * gamma).norm();
}

Vec kernel_vector(const models::HydroModel& model, const State& u, const Vec& lambda,
                  double rank_tol) {
  if (lambda.size() != model.p) throw ContractError("kernel_vector: lambda of wrong length");
  if (lambda.norm() == 0.0) throw ContractError("kernel_vector: zero lambda");
  const auto a = models::eval_matrices(model, u);
  bool full_rank = false;
  double sigma_min = 0.0;
  Vec v = smallest_singular_direction(pencil_matrix(a, lambda), rank_tol, &full_rank, &sigma_min);
  if (full_rank) throw NotAWaveVector(sigma_min);
  return sign_normalize_unit(std::move(v));
}

std::vector<WaveBranch> pencil_branches(const models::HydroModel& model, const State& u,
                                        const Vec& offset, const Vec& direction,
                                        const PencilOptions& opts) {
  if (offset.size() != model.p || direction.size() != model.p) {
    throw ContractError("pencil_branches: offset/direction of wrong length");
  }
  if (direction.norm() == 0.0) throw ContractError("pencil_branches: zero direction");
  const auto a = models::eval_matrices(model, u);
  const double scale = std::pow(matrix_scale(a) * std::max(1.0, direction.norm()), model.q);

  const auto det_at = [&](double mu) {
    return pencil_matrix(a, offset + mu * direction).determinant();
  };

  std::vector<double> roots;
  const int n = std::max(opts.scan_points, 3);
  const double dx = (opts.mu_hi - opts.mu_lo) / (n - 1);
  double prev_mu = opts.mu_lo;
  double prev_det = det_at(prev_mu);
  const double zero_tol = 1e-12 * scale;
  for (int i = 1; i < n; ++i) {
    const double mu = opts.mu_lo + i * dx;
    const double det = det_at(mu);
    if (std::abs(prev_det) <= zero_tol) {
      roots.push_back(prev_mu);
    } else if (prev_det * det < 0.0) {
      double lo = prev_mu, hi = mu, flo = prev_det;
      while (hi - lo > opts.tol * std::max(1.0, std::abs(lo) + std::abs(hi))) {
        const double mid = 0.5 * (lo + hi);
        const double fm = det_at(mid);
        if (flo * fm <= 0.0) {
          hi = mid;
        } else {
          lo = mid;
          flo = fm;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_mu = mu;
    prev_det = det;
  }
  if (std::abs(prev_det) <= zero_tol) roots.push_back(prev_mu);

  std::sort(roots.begin(), roots.end());
  std::vector<WaveBranch> out;
  const double merge_tol = 1e-8 * std::max(1.0, std::abs(opts.mu_hi - opts.mu_lo));
  for (double mu : roots) {
    if (!out.empty() && std::abs(mu - out.back().speed) <= merge_tol) {
      out.back().multiplicity += 1;
      continue;
    }
    WaveBranch b;
    b.speed = mu;  // pencil parameter, not a p=2 speed
    b.lambda = normalize_lambda(offset + mu * direction);
    b.gamma = kernel_vector(model, u, b.lambda, 1e-6);
    b.multiplicity = 1;
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace rkwave::wave
