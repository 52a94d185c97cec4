#include "rkwave/geometry.hpp"

#include "rkwave/wave.hpp"

#include <cmath>
#include <random>

namespace rkwave::geometry {

namespace {

int selector_index(const std::string& sel, int q) {
  if (sel == "slow") return 0;
  if (sel == "fast") return q - 1;
  if (sel.size() > 1 && sel[0] == 'b') {
    const int i = std::stoi(sel.substr(1));
    if (i >= 0 && i < q) return i;
  }
  throw ContractError("unknown branch selector '" + sel + "'");
}

Mat frame_jacobian(const std::function<Vec(const State&)>& field, const State& u, double h) {
  Mat jac;
  for (int b = 0; b < u.size(); ++b) {
    State up = u, um = u;
    up[b] += h;
    um[b] -= h;
    const Vec fp = field(up);
    const Vec fm = field(um);
    if (jac.size() == 0) jac.resize(fp.size(), u.size());
    jac.col(b) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

void require_independent(const Mat& m, const State& u) {
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[sv.size() - 1] <= 1e-8 * sv[0]) throw DegenerateFrameError(u);
}

}  // namespace

Frame make_frame(const models::HydroModel& model, const std::vector<std::string>& selectors,
                 const std::string& source) {
  if (selectors.empty() || static_cast<int>(selectors.size()) > model.p) {
    throw ContractError("frame needs 1..p branch selectors");
  }
  Frame f;
  f.model = model;
  f.k = static_cast<int>(selectors.size());
  f.selectors = selectors;

  bool all_analytic = true;
  for (const auto& sel : selectors) {
    if (!model.analytic_frames.count(sel)) all_analytic = false;
  }
  if (source == "analytic" && !all_analytic) {
    throw ContractError("model '" + model.name + "' has no analytic frame for all selectors");
  }
  const bool use_analytic = source != "tracked" && all_analytic;
  f.source = use_analytic ? "analytic" : "tracked";

  const auto selectors_copy = selectors;
  const auto model_copy = model;
  const int k = f.k;
  if (use_analytic) {
    f.eval = [model_copy, selectors_copy, k](const State& u) {
      model_copy.require_in_domain(u);
      FrameEval fe;
      fe.lambda.resize(k, model_copy.p);
      fe.gamma.resize(model_copy.q, k);
      for (int s = 0; s < k; ++s) {
        const auto& br = model_copy.analytic_frames.at(selectors_copy[s]);
        fe.lambda.row(s) << -br.speed(u), 1.0;
        fe.gamma.col(s) = br.gamma(u);
      }
      return fe;
    };
  } else {
    f.eval = [model_copy, selectors_copy, k](const State& u) {
      const auto branches = wave::characteristic_branches(model_copy, u);
      FrameEval fe;
      fe.lambda.resize(k, model_copy.p);
      fe.gamma.resize(model_copy.q, k);
      for (int s = 0; s < k; ++s) {
        const int idx = selector_index(selectors_copy[s], model_copy.q);
        if (idx >= static_cast<int>(branches.size())) throw DegenerateFrameError(u);
        fe.lambda.row(s) = branches[idx].lambda;
        fe.gamma.col(s) = branches[idx].gamma;
      }
      return fe;
    };
  }
  return f;
}

Vec lie_bracket(const VField& v, const VField& w, const State& u, double h) {
  if (h <= 0.0) throw ContractError("lie_bracket: step must be positive");
  const Vec vu = v(u);
  const Vec wu = w(u);
  const Mat jv = frame_jacobian(v, u, h);
  const Mat jw = frame_jacobian(w, u, h);
  return jw * vu - jv * wu;
}

std::pair<double, Vec> span_distance(const Vec& target, const std::vector<Vec>& basis) {
  if (basis.empty()) return {target.norm(), Vec(0)};
  Mat b(target.size(), basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (basis[i].norm() == 0.0) throw ContractError("span_distance: zero basis vector");
    b.col(static_cast<int>(i)) = basis[i];
  }
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(b);
  const Vec coeffs = cod.solve(target);
  return {(target - b * coeffs).norm(), coeffs};
}

InvolutivityReport check_involutivity(const Frame& frame, const std::vector<State>& states,
                                      double h, double tol) {
  InvolutivityReport rep;
  rep.sample_states = states;
  rep.h = h;
  rep.tol = tol;

  const auto gamma_field = [&frame](int s) {
    return [&frame, s](const State& u) -> Vec { return frame.eval(u).gamma.col(s); };
  };
  const auto lambda_field = [&frame](int s) {
    return [&frame, s](const State& u) -> Vec { return frame.eval(u).lambda.row(s).transpose(); };
  };

  bool pass = true;
  for (const auto& u : states) {
    const FrameEval fe = frame.eval(u);
    require_independent(fe.lambda, u);
    require_independent(fe.gamma, u);

    std::vector<PairCheck> row;
    for (int s = 0; s < frame.k; ++s) {
      for (int r = s + 1; r < frame.k; ++r) {
        PairCheck pc;
        pc.s = s;
        pc.r = r;

        const Vec bracket = lie_bracket(gamma_field(s), gamma_field(r), u, h);
        auto [bres, bcoef] = span_distance(bracket, {fe.gamma.col(s), fe.gamma.col(r)});
        pc.bracket_residual = bres;
        pc.bracket_coefficients = bcoef;
        pc.commutation = bracket.norm();

        const double gscale = std::max(fe.gamma.col(s).norm(), fe.gamma.col(r).norm());
        rep.max_bracket_residual = std::max(rep.max_bracket_residual, bres / gscale);
        rep.max_commutation = std::max(rep.max_commutation, pc.commutation);
        if (bres > tol * gscale) pass = false;

        // Directional derivative lambda^s_{,gamma_r} by a central stencil
        // along the gamma_r direction, both orderings of (s, r).
        for (const auto& [a, bidx] : {std::pair{s, r}, std::pair{r, s}}) {
          const Vec dir = fe.gamma.col(bidx);
          State up = u + h * dir;
          State um = u - h * dir;
          const Vec lp = lambda_field(a)(up);
          const Vec lm = lambda_field(a)(um);
          const Vec dlam = (lp - lm) / (2.0 * h);
          auto [lres, lcoef] = span_distance(
              dlam, {fe.lambda.row(s).transpose(), fe.lambda.row(r).transpose()});
          const double lscale = std::max(fe.lambda.row(s).norm(), fe.lambda.row(r).norm());
          rep.max_lambda_residual = std::max(rep.max_lambda_residual, lres / lscale);
          if (lres > tol * lscale) pass = false;
          if (a == s) {
            pc.lambda_span_residual = lres;
            pc.lambda_coefficients = lcoef;
          } else {
            pc.lambda_span_residual = std::max(pc.lambda_span_residual, lres);
          }
        }
        row.push_back(std::move(pc));
      }
    }
    rep.checks.push_back(std::move(row));
  }
  rep.pass = pass;
  return rep;
}

double commutation_residual(Frame& frame, const std::vector<State>& states, double h) {
  const auto gamma_field = [&frame](int s) {
    return [&frame, s](const State& u) -> Vec { return frame.eval(u).gamma.col(s); };
  };

  double worst = 0.0;
  double field_scale = 0.0;
  for (const auto& u : states) {
    const FrameEval fe = frame.eval(u);
    require_independent(fe.lambda, u);
    require_independent(fe.gamma, u);
    for (int s = 0; s < frame.k; ++s) field_scale = std::max(field_scale, fe.gamma.col(s).norm());
    for (int s = 0; s < frame.k; ++s) {
      for (int r = s + 1; r < frame.k; ++r) {
        worst = std::max(worst, lie_bracket(gamma_field(s), gamma_field(r), u, h).norm());
      }
    }
  }
  frame.commuting_certified = worst <= 1e-6 * std::max(field_scale, 1e-300);
  return worst;
}

std::vector<State> sample_states(const models::HydroModel& model, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // Map raw 64-bit draws to [0,1) ourselves so sequences are identical
  // across standard libraries.
  const auto unit = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<State> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    State u(model.q);
    for (int c = 0; c < model.q; ++c) {
      const double lo = model.sampling_box(c, 0), hi = model.sampling_box(c, 1);
      u[c] = lo + (hi - lo) * unit();
    }
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace rkwave::geometry
