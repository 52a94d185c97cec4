#include "rkwave/kwave.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

namespace rkwave::kwave {

namespace {

constexpr double kGridSlack = 1e-9;

int origin_index(const AxisSpec& a) {
  for (int i = 0; i < a.n; ++i) {
    if (std::abs(a.node(i)) <= 1e-9 * std::max({1.0, std::abs(a.lo), std::abs(a.hi)})) return i;
  }
  throw ContractError("r-grid axis [" + std::to_string(a.lo) + ", " + std::to_string(a.hi) +
                      "] does not contain the origin as a node");
}

// One RK4 march along family s from r_from to r_to.
State rk4_along(const geometry::Frame& frame, int s, State u, double r_from, double r_to,
                int substeps) {
  const double h = (r_to - r_from) / substeps;
  const auto field = [&frame, s](const State& v) -> Vec { return frame.eval(v).gamma.col(s); };
  for (int m = 0; m < substeps; ++m) {
    const Vec k1 = field(u);
    const Vec k2 = field(u + 0.5 * h * k1);
    const Vec k3 = field(u + 0.5 * h * k2);
    const Vec k4 = field(u + h * k3);
    u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return u;
}

// Fill f over the grid sweeping the axes in `order`. Throws
// PartialSurfaceError carrying the r-extent actually covered.
std::vector<double> integrate_values(const geometry::Frame& frame, const State& base_state,
                                     const GridSpec& grid, const std::vector<int>& order,
                                     const IntegrateOptions& opts) {
  const int k = grid.dim();
  const int q = frame.model.q;
  const std::size_t nodes = grid.node_count();
  std::vector<double> values(nodes * q, std::numeric_limits<double>::quiet_NaN());

  std::vector<int> oi(k);
  for (int a = 0; a < k; ++a) oi[a] = origin_index(grid.axes[a]);

  std::vector<double> reached_lo(k), reached_hi(k);
  for (int a = 0; a < k; ++a) reached_lo[a] = reached_hi[a] = grid.axes[a].node(oi[a]);

  const auto store = [&](const std::vector<int>& idx, const State& u) {
    frame.model.require_in_domain(u);
    const std::size_t f = grid.flat(idx);
    for (int c = 0; c < q; ++c) values[f * q + c] = u[c];
    for (int a = 0; a < k; ++a) {
      reached_lo[a] = std::min(reached_lo[a], grid.axes[a].node(idx[a]));
      reached_hi[a] = std::max(reached_hi[a], grid.axes[a].node(idx[a]));
    }
  };

  const auto fetch = [&](const std::vector<int>& idx) {
    const std::size_t f = grid.flat(idx);
    State u(q);
    for (int c = 0; c < q; ++c) u[c] = values[f * q + c];
    return u;
  };

  std::vector<std::vector<int>> frontier = {oi};
  try {
    store(oi, base_state);
    for (int s : order) {
      const AxisSpec& axis = grid.axes[s];
      std::vector<std::vector<int>> next_frontier;
      for (const auto& idx : frontier) {
        for (int dir : {+1, -1}) {
          std::vector<int> cur = idx;
          State u = fetch(idx);
          for (int j = oi[s] + dir; j >= 0 && j < axis.n; j += dir) {
            u = rk4_along(frame, s, u, axis.node(j - dir), axis.node(j), opts.substeps);
            cur[s] = j;
            store(cur, u);
          }
        }
        for (int j = 0; j < axis.n; ++j) {
          auto nf = idx;
          nf[s] = j;
          next_frontier.push_back(std::move(nf));
        }
      }
      frontier = std::move(next_frontier);
    }
  } catch (const DomainError&) {
    throw PartialSurfaceError(reached_lo, reached_hi);
  }
  return values;
}

double dual_order_error(const std::vector<double>& fwd, const std::vector<double>& rev, int q) {
  double worst = 0.0;
  for (std::size_t n = 0; n < fwd.size() / q; ++n) {
    double d2 = 0.0;
    for (int c = 0; c < q; ++c) {
      const double d = fwd[n * q + c] - rev[n * q + c];
      d2 += d * d;
    }
    worst = std::max(worst, std::sqrt(d2));
  }
  return worst;
}

// Multilinear interpolation over a node-major table with m components.
void interp_table(const GridSpec& grid, const std::vector<double>& table, int m, const Vec& r,
                  double* out) {
  const int k = grid.dim();
  std::vector<int> base(k);
  std::vector<double> frac(k);
  for (int a = 0; a < k; ++a) {
    const AxisSpec& ax = grid.axes[a];
    const double t = (r[a] - ax.lo) / ax.step();
    int i = static_cast<int>(std::floor(t));
    i = std::clamp(i, 0, ax.n - 2);
    base[a] = i;
    frac[a] = t - i;
  }
  std::fill(out, out + m, 0.0);
  std::vector<int> idx(k);
  for (int corner = 0; corner < (1 << k); ++corner) {
    double w = 1.0;
    for (int a = 0; a < k; ++a) {
      const int bit = (corner >> a) & 1;
      idx[a] = base[a] + bit;
      w *= bit ? frac[a] : 1.0 - frac[a];
    }
    if (w == 0.0) continue;
    const double* row = table.data() + grid.flat(idx) * m;
    for (int c = 0; c < m; ++c) out[c] += w * row[c];
  }
}

}  // namespace

Vec WaveSurface::f_at(std::size_t node) const {
  const int q = qdim();
  Vec u(q);
  for (int c = 0; c < q; ++c) u[c] = values[node * q + c];
  return u;
}

Mat WaveSurface::lambda_at(std::size_t node) const {
  const int kk = k(), p = pdim();
  Mat lam(kk, p);
  for (int s = 0; s < kk; ++s)
    for (int mu = 0; mu < p; ++mu) lam(s, mu) = lambda_values[(node * kk + s) * p + mu];
  return lam;
}

Vec WaveSurface::interp_f(const Vec& r) const {
  Vec out(qdim());
  interp_table(grid, values, qdim(), r, out.data());
  return out;
}

Mat WaveSurface::interp_lambda(const Vec& r) const {
  const int kk = k(), p = pdim();
  std::vector<double> buf(static_cast<std::size_t>(kk) * p);
  interp_table(grid, lambda_values, kk * p, r, buf.data());
  Mat lam(kk, p);
  for (int s = 0; s < kk; ++s)
    for (int mu = 0; mu < p; ++mu) lam(s, mu) = buf[s * p + mu];
  return lam;
}

Mat WaveSurface::interp_df(const Vec& r) const {
  const int q = qdim(), kk = k();
  std::vector<double> buf(static_cast<std::size_t>(q) * kk);
  interp_table(grid, df_values, q * kk, r, buf.data());
  Mat df(q, kk);
  for (int c = 0; c < q; ++c)
    for (int l = 0; l < kk; ++l) df(c, l) = buf[c * kk + l];
  return df;
}

std::vector<Mat> WaveSurface::interp_dlambda(const Vec& r) const {
  const int kk = k(), p = pdim();
  std::vector<double> buf(static_cast<std::size_t>(kk) * p * kk);
  interp_table(grid, dlambda_values, kk * p * kk, r, buf.data());
  std::vector<Mat> out(kk, Mat(p, kk));
  for (int s = 0; s < kk; ++s)
    for (int mu = 0; mu < p; ++mu)
      for (int l = 0; l < kk; ++l) out[s](mu, l) = buf[(s * p + mu) * kk + l];
  return out;
}

void WaveSurface::build_tables() {
  const int kk = k(), p = pdim(), q = qdim();
  const std::size_t nodes = grid.node_count();
  df_values.assign(nodes * q * kk, 0.0);
  dlambda_values.assign(nodes * static_cast<std::size_t>(kk) * p * kk, 0.0);

  // d/dr^l of a node-major table entry, central inside, one-sided at edges.
  const auto diff = [&](const std::vector<double>& table, int m, std::vector<int> idx, int l,
                        int comp) {
    const AxisSpec& ax = grid.axes[l];
    const double h = ax.step();
    const int i = idx[l];
    auto at = [&](int j) {
      idx[l] = j;
      return table[grid.flat(idx) * m + comp];
    };
    if (i > 0 && i + 1 < ax.n) return (at(i + 1) - at(i - 1)) / (2.0 * h);
    if (i == 0) return (at(1) - at(0)) / h;
    return (at(i) - at(i - 1)) / h;
  };

  for (std::size_t n = 0; n < nodes; ++n) {
    const auto idx = grid.unflatten(n);
    for (int c = 0; c < q; ++c)
      for (int l = 0; l < kk; ++l) df_values[(n * q + c) * kk + l] = diff(values, q, idx, l, c);
    for (int s = 0; s < kk; ++s)
      for (int mu = 0; mu < p; ++mu)
        for (int l = 0; l < kk; ++l)
          dlambda_values[((n * kk + s) * p + mu) * kk + l] =
              diff(lambda_values, kk * p, idx, l, s * p + mu);
  }
}

WaveSurface integrate_surface(const geometry::Frame& frame, const State& base_state,
                              const GridSpec& grid, const IntegrateOptions& opts) {
  if (!frame.commuting_certified) {
    throw ContractError("integrate_surface requires a commuting-certified frame");
  }
  if (grid.dim() != frame.k) throw ContractError("r-grid dimension must equal frame k");
  for (const auto& a : grid.axes) {
    if (a.n < 2) throw ContractError("each r-grid axis needs at least 2 nodes");
  }
  frame.model.require_in_domain(base_state);
  if (opts.substeps < 1) throw ContractError("substeps must be >= 1");

  std::vector<int> fwd(grid.dim());
  std::iota(fwd.begin(), fwd.end(), 0);
  std::vector<int> rev(fwd.rbegin(), fwd.rend());

  WaveSurface s;
  s.frame = frame;
  s.base_state = base_state;
  s.grid = grid;
  s.values = integrate_values(frame, base_state, grid, fwd, opts);
  if (grid.dim() > 1) {
    const auto rvals = integrate_values(frame, base_state, grid, rev, opts);
    s.path_independence_error = dual_order_error(s.values, rvals, frame.model.q);
  }

  const std::size_t nodes = grid.node_count();
  const int kk = frame.k, p = frame.model.p;
  s.lambda_values.resize(nodes * kk * p);
  for (std::size_t n = 0; n < nodes; ++n) {
    const Mat lam = frame.eval(s.f_at(n)).lambda;
    for (int i = 0; i < kk; ++i)
      for (int mu = 0; mu < p; ++mu) s.lambda_values[(n * kk + i) * p + mu] = lam(i, mu);
  }
  s.build_tables();
  return s;
}

double path_independence_error(const geometry::Frame& frame, const State& base_state,
                               const GridSpec& grid, const IntegrateOptions& opts) {
  if (grid.dim() != frame.k) throw ContractError("r-grid dimension must equal frame k");
  std::vector<int> fwd(grid.dim());
  std::iota(fwd.begin(), fwd.end(), 0);
  std::vector<int> rev(fwd.rbegin(), fwd.rend());
  const auto a = integrate_values(frame, base_state, grid, fwd, opts);
  const auto b = integrate_values(frame, base_state, grid, rev, opts);
  return dual_order_error(a, b, frame.model.q);
}

double surface_consistency(const WaveSurface& surface) {
  const int kk = surface.k(), q = surface.qdim();
  double worst = 0.0;
  const std::size_t nodes = surface.grid.node_count();
  for (std::size_t n = 0; n < nodes; ++n) {
    const auto idx = surface.grid.unflatten(n);
    bool interior = true;
    for (int a = 0; a < kk; ++a) {
      if (idx[a] == 0 || idx[a] + 1 == surface.grid.axes[a].n) interior = false;
    }
    if (!interior) continue;
    const State u = surface.f_at(n);
    const Mat gamma = surface.frame.eval(u).gamma;
    for (int s = 0; s < kk; ++s) {
      Vec dfd(q);
      for (int c = 0; c < q; ++c) dfd[c] = surface.df_values[(n * q + c) * kk + s];
      const double scale = std::max(gamma.col(s).norm(), 1e-300);
      worst = std::max(worst, (dfd - gamma.col(s)).norm() / scale);
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Implicit profiles
// ---------------------------------------------------------------------------

double ImplicitProfile::value(const Vec& r) const {
  switch (kind) {
    case Kind::linear:
      return slope.dot(r) + offset;
    case Kind::gaussian: {
      const Vec d = r - center;
      return amplitude * std::exp(-0.5 * d.squaredNorm() / (width * width));
    }
    case Kind::polynomial: {
      double v = 0.0;
      for (const auto& t : terms) {
        double m = t.coef;
        for (int a = 0; a < r.size(); ++a)
          for (int e = 0; e < t.powers[a]; ++e) m *= r[a];
        v += m;
      }
      return v;
    }
  }
  return 0.0;
}

Vec ImplicitProfile::gradient(const Vec& r) const {
  switch (kind) {
    case Kind::linear:
      return slope;
    case Kind::gaussian: {
      const Vec d = r - center;
      return value(r) * (-d / (width * width));
    }
    case Kind::polynomial: {
      Vec g = Vec::Zero(r.size());
      for (const auto& t : terms) {
        for (int a = 0; a < r.size(); ++a) {
          if (t.powers[a] == 0) continue;
          double m = t.coef * t.powers[a];
          for (int b = 0; b < r.size(); ++b) {
            const int e = t.powers[b] - (b == a ? 1 : 0);
            for (int i = 0; i < e; ++i) m *= r[b];
          }
          g[a] += m;
        }
      }
      return g;
    }
  }
  return Vec::Zero(r.size());
}

void ImplicitProfile::validate(int k) const {
  switch (kind) {
    case Kind::linear:
      if (slope.size() != k) throw ContractError("linear profile: slope length must equal k");
      if (slope.norm() == 0.0 && offset == 0.0)
        throw ContractError("profile needs at least one nonzero parameter");
      break;
    case Kind::gaussian:
      if (center.size() != k) throw ContractError("gaussian profile: center length must equal k");
      if (!(width > 0.0)) throw ContractError("gaussian profile: width must be positive");
      if (amplitude == 0.0) throw ContractError("profile needs at least one nonzero parameter");
      break;
    case Kind::polynomial: {
      if (terms.empty()) throw ContractError("profile needs at least one nonzero parameter");
      bool nonzero = false;
      for (const auto& t : terms) {
        if (static_cast<int>(t.powers.size()) != k)
          throw ContractError("polynomial term: powers length must equal k");
        int deg = 0;
        for (int e : t.powers) {
          if (e < 0) throw ContractError("polynomial term: negative exponent");
          deg += e;
        }
        if (deg > 3) throw ContractError("polynomial term: total degree exceeds 3");
        if (t.coef != 0.0) nonzero = true;
      }
      if (!nonzero) throw ContractError("profile needs at least one nonzero parameter");
      break;
    }
  }
}

ImplicitProfile ImplicitProfile::linear_profile(Vec slope, double offset) {
  ImplicitProfile p;
  p.kind = Kind::linear;
  p.slope = std::move(slope);
  p.offset = offset;
  return p;
}

ImplicitProfile ImplicitProfile::gaussian_profile(double amplitude, Vec center, double width) {
  ImplicitProfile p;
  p.kind = Kind::gaussian;
  p.amplitude = amplitude;
  p.center = std::move(center);
  p.width = width;
  return p;
}

ImplicitProfile ImplicitProfile::polynomial_profile(std::vector<Term> terms) {
  ImplicitProfile p;
  p.kind = Kind::polynomial;
  p.terms = std::move(terms);
  return p;
}

// ---------------------------------------------------------------------------
// KWaveSolution
// ---------------------------------------------------------------------------

void KWaveSolution::validate() const {
  if (static_cast<int>(profiles.size()) != k()) {
    throw ContractError("profile count must equal frame k");
  }
  for (const auto& pr : profiles) pr.validate(k());
  if (!(newton.tolerance > 0.0) || newton.max_iterations < 1 || !(newton.damping > 0.0) ||
      !(newton.damping < 1.0)) {
    throw ContractError("invalid newton settings");
  }
}

Vec KWaveSolution::residual_g(const Vec& r, const Space& x) const {
  const Mat lam = surface.interp_lambda(r);
  Vec g(k());
  for (int s = 0; s < k(); ++s) g[s] = lam.row(s).dot(x) - profiles[s].value(r);
  return g;
}

Mat KWaveSolution::newton_jacobian(const Vec& r, const Space& x) const {
  const auto dlam = surface.interp_dlambda(r);
  Mat jac(k(), k());
  for (int s = 0; s < k(); ++s) {
    const Vec dpsi = profiles[s].gradient(r);
    for (int l = 0; l < k(); ++l) jac(s, l) = dlam[s].col(l).dot(x) - dpsi[l];
  }
  return jac;
}

KWaveSolution::JacobianInfo KWaveSolution::jacobian_info(const Vec& r, const Space& x) const {
  JacobianInfo info;
  const auto dlam = surface.interp_dlambda(r);
  info.jac.resize(k(), k());
  for (int s = 0; s < k(); ++s) {
    const Vec dpsi = profiles[s].gradient(r);
    for (int l = 0; l < k(); ++l) {
      const double lam_term = dlam[s].col(l).dot(x);
      info.jac(s, l) = lam_term - dpsi[l];
      info.scale = std::max(info.scale, std::abs(lam_term) + std::abs(dpsi[l]));
    }
  }
  Eigen::JacobiSVD<Mat> svd(info.jac);
  info.sigma_min = svd.singularValues()[k() - 1];
  info.scale = std::max({info.scale, svd.singularValues()[0], 1e-300});
  info.condition = info.sigma_min > 0.0 ? info.scale / info.sigma_min
                                        : std::numeric_limits<double>::infinity();
  info.det = info.jac.determinant();
  return info;
}

KWaveSolution::Query KWaveSolution::query(const Space& x, const Vec* warm_start) const {
  Query out;
  if (x.size() != surface.pdim()) throw ContractError("query point of wrong dimension");

  Vec r = Vec::Zero(k());
  if (warm_start && warm_start->size() == k() && warm_start->allFinite()) {
    r = surface.grid.clamp(*warm_start);
  }

  Vec g = residual_g(r, x);
  double gn = g.lpNorm<Eigen::Infinity>();
  double cond = 0.0;
  int it = 0;
  bool full_step_out = false;  // undamped target outside the grid

  const auto fail = [&](SolveError::Kind kind) {
    out.r = r;
    out.u = State::Constant(surface.qdim(), std::numeric_limits<double>::quiet_NaN());
    out.diag = {it, cond, 0.0, false};
    out.failure = kind;
    return out;
  };

  while (gn > newton.tolerance) {
    if (it >= newton.max_iterations) {
      // Stalled against the grid boundary with the Newton target outside:
      // the sought invariant is not covered by the tabulated surface.
      return fail(full_step_out ? SolveError::Kind::coverage
                                : SolveError::Kind::no_convergence);
    }
    ++it;

    const JacobianInfo info = jacobian_info(r, x);
    cond = info.condition;
    if (!std::isfinite(cond) || cond > newton.condition_limit) {
      return fail(SolveError::Kind::catastrophe);
    }

    const Vec delta = info.jac.fullPivLu().solve(-g);
    full_step_out = !surface.grid.contains(r + delta, kGridSlack);
    double t = 1.0;
    bool stepped = false;
    bool all_out = true;
    for (int ls = 0; ls < 60; ++ls) {
      Vec cand = r + t * delta;
      if (!surface.grid.contains(cand, kGridSlack)) {
        t *= newton.damping;
        continue;
      }
      all_out = false;
      cand = surface.grid.clamp(cand);
      const Vec gc = residual_g(cand, x);
      const double gcn = gc.lpNorm<Eigen::Infinity>();
      if (gcn <= (1.0 - 1e-4 * t) * gn) {
        r = cand;
        g = gc;
        gn = gcn;
        stepped = true;
        break;
      }
      t *= newton.damping;
    }
    if (!stepped) {
      return fail(all_out ? SolveError::Kind::coverage : SolveError::Kind::no_convergence);
    }
  }

  const JacobianInfo info = jacobian_info(r, x);
  out.r = r;
  out.u = surface.interp_f(r);
  out.diag.iterations = it;
  out.diag.jacobian_condition = info.condition;
  out.diag.jacobian_det = info.det;
  out.diag.resolved = true;
  return out;
}

Vec KWaveSolution::solve_invariants(const Space& x, const Vec* warm_start) const {
  const Query qr = query(x, warm_start);
  last_diagnostics = qr.diag;
  if (!qr.diag.resolved) {
    throw SolveError(qr.failure, qr.r, qr.diag.iterations, qr.diag.jacobian_condition);
  }
  return qr.r;
}

State KWaveSolution::evaluate(const Space& x) const {
  return surface.interp_f(solve_invariants(x));
}

// ---------------------------------------------------------------------------
// Lambda constraint diagnostic
// ---------------------------------------------------------------------------

LambdaConstraintReport check_lambda_constraints(const WaveSurface& surface) {
  LambdaConstraintReport rep;
  const int kk = surface.k(), p = surface.pdim();
  if (kk < 2) {
    rep.vacuous = true;
    return rep;
  }
  for (const auto& a : surface.grid.axes) {
    if (a.n < 3) throw ContractError("lambda-constraint check needs >= 3 nodes per axis");
  }

  const auto lambda_comp = [&](const std::vector<int>& idx, int s, int mu) {
    return surface.lambda_values[(surface.grid.flat(idx) * kk + s) * p + mu];
  };

  for (int s = 0; s < kk; ++s) {
    for (int l = 0; l < kk; ++l) {
      if (l == s) continue;
      LambdaConstraintPair pair;
      pair.s = s;
      pair.l = l;
      const double hs = surface.grid.axes[s].step();
      const double hl = surface.grid.axes[l].step();

      const std::size_t nodes = surface.grid.node_count();
      for (std::size_t n = 0; n < nodes; ++n) {
        auto idx = surface.grid.unflatten(n);
        bool interior = true;
        for (int a = 0; a < kk; ++a) {
          if (idx[a] == 0 || idx[a] + 1 == surface.grid.axes[a].n) interior = false;
        }
        if (!interior) continue;

        Vec d2(p), ds(p), dl(p);
        for (int mu = 0; mu < p; ++mu) {
          auto at = [&](int es, int el) {
            auto j = idx;
            j[s] += es;
            j[l] += el;
            return lambda_comp(j, s, mu);
          };
          d2[mu] = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hs * hl);
          ds[mu] = (at(1, 0) - at(-1, 0)) / (2.0 * hs);
          dl[mu] = (at(0, 1) - at(0, -1)) / (2.0 * hl);
        }

        Mat a(p, 2);
        a.col(0) = ds;
        a.col(1) = dl;
        Eigen::CompleteOrthogonalDecomposition<Mat> cod(a);
        const Vec coef = cod.solve(-d2);
        const double res = (d2 + a * coef).norm();
        pair.alpha.push_back(coef[0]);
        pair.beta.push_back(coef[1]);
        pair.residual.push_back(res);
        pair.max_residual = std::max(pair.max_residual, res);
      }
      rep.max_residual = std::max(rep.max_residual, pair.max_residual);
      rep.pairs.push_back(std::move(pair));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Grid sweep with warm-start continuation
// ---------------------------------------------------------------------------

FieldTable sample_grid(const KWaveSolution& solution, const GridSpec& xgrid, int threads) {
  solution.validate();
  if (xgrid.dim() != solution.surface.pdim()) {
    throw ContractError("x-grid dimension must equal model p");
  }

  FieldTable table;
  table.grid = xgrid;
  table.samples.resize(xgrid.node_count());
  table.catastrophes.condition_threshold = solution.newton.condition_limit;

  const int p = xgrid.dim();
  const int inner_n = xgrid.axes[p - 1].n;
  std::size_t row_count = 1;
  for (int a = 0; a + 1 < p; ++a) row_count *= static_cast<std::size_t>(xgrid.axes[a].n);

  const auto sample_at = [&](const std::vector<int>& idx, const Vec* warm) {
    FieldSample smp;
    smp.idx = idx;
    smp.x = xgrid.node_coords(idx);
    const auto qr = solution.query(smp.x, warm);
    smp.r = qr.r;
    smp.u = qr.u;
    smp.diag = qr.diag;
    if (!qr.diag.resolved) {
      smp.r = Vec::Constant(solution.k(), std::numeric_limits<double>::quiet_NaN());
    }
    return smp;
  };

  const auto row_start_idx = [&](std::size_t row) {
    std::vector<int> idx(p, 0);
    std::size_t rest = row;
    for (int a = p - 2; a >= 0; --a) {
      idx[a] = static_cast<int>(rest % static_cast<std::size_t>(xgrid.axes[a].n));
      rest /= static_cast<std::size_t>(xgrid.axes[a].n);
    }
    return idx;
  };

  // Spine: first node of every row, sequential warm-start chain. Row
  // sweeps depend only on their spine point, so the parallel section below
  // is deterministic for any thread count.
  {
    const Vec* warm = nullptr;
    Vec last;
    for (std::size_t row = 0; row < row_count; ++row) {
      const auto idx = row_start_idx(row);
      auto smp = sample_at(idx, warm);
      if (smp.diag.resolved) {
        last = smp.r;
        warm = &last;
      }
      table.samples[xgrid.flat(idx)] = std::move(smp);
    }
  }

  const auto sweep_row = [&](std::size_t row) {
    auto idx = row_start_idx(row);
    const FieldSample& spine = table.samples[xgrid.flat(idx)];
    Vec last = spine.diag.resolved ? spine.r : Vec();
    for (int j = 1; j < inner_n; ++j) {
      idx[p - 1] = j;
      const Vec* warm = last.size() ? &last : nullptr;
      auto smp = sample_at(idx, warm);
      if (smp.diag.resolved) last = smp.r;
      table.samples[xgrid.flat(idx)] = std::move(smp);
    }
  };

  threads = std::max(1, threads);
  if (threads == 1 || row_count <= 1) {
    for (std::size_t row = 0; row < row_count; ++row) sweep_row(row);
  } else {
    std::vector<std::thread> pool;
    const std::size_t nt = std::min<std::size_t>(threads, row_count);
    for (std::size_t t = 0; t < nt; ++t) {
      pool.emplace_back([&, t]() {
        for (std::size_t row = t; row < row_count; row += nt) sweep_row(row);
      });
    }
    for (auto& th : pool) th.join();
  }

  // Catastrophe cells: adjacent resolved pairs along each axis with a
  // Jacobian-determinant sign change, or with the condition number past the
  // threshold. Rechecked on emit.
  auto& cells = table.catastrophes.cells;
  const double climit = solution.newton.condition_limit;
  for (int a = 0; a < p; ++a) {
    const std::size_t nodes = xgrid.node_count();
    for (std::size_t n = 0; n < nodes; ++n) {
      auto idx = xgrid.unflatten(n);
      if (idx[a] + 1 >= xgrid.axes[a].n) continue;
      auto idx2 = idx;
      idx2[a] += 1;
      const FieldSample& s1 = table.samples[xgrid.flat(idx)];
      const FieldSample& s2 = table.samples[xgrid.flat(idx2)];
      if (!s1.diag.resolved || !s2.diag.resolved) continue;

      const bool sign_change = s1.diag.jacobian_det * s2.diag.jacobian_det < 0.0;
      const bool cond_hit =
          s1.diag.jacobian_condition > climit || s2.diag.jacobian_condition > climit;
      if (!sign_change && !cond_hit) continue;

      CatastropheCell cell;
      cell.axis = a;
      cell.idx_lo = idx;
      cell.idx_hi = idx2;
      cell.x_lo = s1.x;
      cell.x_hi = s2.x;
      cell.det_lo = s1.diag.jacobian_det;
      cell.det_hi = s2.diag.jacobian_det;
      cell.reason = sign_change ? "det-sign-change" : "condition";
      if (sign_change) {
        const double frac = cell.det_lo / (cell.det_lo - cell.det_hi);
        cell.locus_estimate = s1.x[a] + frac * (s2.x[a] - s1.x[a]);
      } else {
        cell.locus_estimate = 0.5 * (s1.x[a] + s2.x[a]);
      }
      cells.push_back(std::move(cell));
    }
  }
  cells.erase(std::remove_if(cells.begin(), cells.end(),
                             [&](const CatastropheCell& c) {
                               const auto& d1 = table.samples[xgrid.flat(c.idx_lo)].diag;
                               const auto& d2 = table.samples[xgrid.flat(c.idx_hi)].diag;
                               const bool sign = d1.jacobian_det * d2.jacobian_det < 0.0;
                               const bool cond = d1.jacobian_condition > climit ||
                                                 d2.jacobian_condition > climit;
                               return !(sign || cond);
                             }),
              cells.end());
  return table;
}

}  // namespace rkwave::kwave
