#include <doctest.h>

#include "test_helpers.hpp"

#include <cmath>

using namespace rkwave;
using namespace rkwave::kwave;
using rkwave::testing::certified_frame;
using rkwave::testing::closed_form_r;
using rkwave::testing::closed_form_u;

TEST_CASE("surface integration of constant fields is the linear map") {
  const auto model = models::make_model("shallow-water");
  const auto frame = certified_frame(model, {"fast", "slow"});
  GridSpec grid;
  grid.axes = {{-0.2, 0.2, 5}, {-0.2, 0.2, 5}};
  const auto surf = integrate_surface(frame, (Vec(2) << 0.0, 1.0).finished(), grid);

  // f(0.1, 0.2) = u0 + (2,1)*0.1 + (2,-1)*0.2 = (0.6, 0.9)
  const Vec f = surf.f_at(grid.flat({3, 4}));
  CHECK(f[0] == doctest::Approx(0.6).epsilon(1e-13));
  CHECK(f[1] == doctest::Approx(0.9).epsilon(1e-13));

  // f(0,...,0) = base exactly
  const Vec f0 = surf.f_at(grid.flat({2, 2}));
  CHECK(f0[0] == 0.0);
  CHECK(f0[1] == 1.0);

  CHECK(surf.path_independence_error <= 1e-13);
  CHECK(surface_consistency(surf) <= 1e-12);

  // multilinear interpolation reproduces linear data between nodes
  const Vec fi = surf.interp_f((Vec(2) << 0.05, -0.13).finished());
  CHECK(fi[0] == doctest::Approx(2.0 * 0.05 + 2.0 * -0.13).epsilon(1e-12));
  CHECK(fi[1] == doctest::Approx(1.0 + 0.05 + 0.13).epsilon(1e-12));
}

TEST_CASE("surface preconditions") {
  const auto model = models::make_model("shallow-water");
  GridSpec grid;
  grid.axes = {{-0.2, 0.2, 5}};

  SUBCASE("uncertified frame is refused") {
    const auto frame = geometry::make_frame(model, {"fast"});
    CHECK_THROWS_AS(integrate_surface(frame, (Vec(2) << 0.0, 1.0).finished(), grid),
                    ContractError);
  }

  SUBCASE("grid must contain the origin as a node") {
    const auto frame = certified_frame(model, {"fast"});
    GridSpec off;
    off.axes = {{0.05, 1.0, 20}};
    CHECK_THROWS_AS(integrate_surface(frame, (Vec(2) << 0.0, 1.0).finished(), off),
                    ContractError);
  }
}

TEST_CASE("gas surface: path independence and consistency") {
  const auto gas = models::make_model("gas-polytropic");
  const auto frame = certified_frame(gas, {"fast", "slow"});
  GridSpec grid;
  grid.axes = {{-0.1, 0.1, 21}, {-0.1, 0.1, 21}};
  const auto surf = integrate_surface(frame, (Vec(2) << 1.0, 0.0).finished(), grid);
  CHECK(surf.path_independence_error <= 1e-8);
  CHECK(surface_consistency(surf) <= 1e-4);

  // closed form: sqrt(rho) = 1 + (r1 - r2)/2, u = r1 + r2
  const Vec f = surf.interp_f((Vec(2) << 0.1, -0.1).finished());
  CHECK(f[0] == doctest::Approx(1.21).epsilon(1e-9));
  CHECK(f[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));

  // interpolated derivative tables reproduce the fields away from the edges
  const Vec rq = (Vec(2) << 0.033, -0.047).finished();
  const Mat df = surf.interp_df(rq);
  const Mat gamma = frame.eval(surf.interp_f(rq)).gamma;
  CHECK((df - gamma).cwiseAbs().maxCoeff() <= 1e-4);
}

TEST_CASE("surface consistency drops by >= 3 when the grid is refined") {
  const auto gas = models::make_model("gas-polytropic", {{"kappa", 1.4}});
  const auto frame = certified_frame(gas, {"fast", "slow"});
  const auto base = (Vec(2) << 1.0, 0.0).finished();
  GridSpec coarse, fine;
  coarse.axes = {{-0.1, 0.1, 21}, {-0.1, 0.1, 21}};
  fine.axes = {{-0.1, 0.1, 41}, {-0.1, 0.1, 41}};
  const double rc = surface_consistency(integrate_surface(frame, base, coarse));
  const double rf = surface_consistency(integrate_surface(frame, base, fine));
  CHECK(rc / rf >= 3.0);
}

TEST_CASE("path independence flags a non-commuting frame") {
  const auto gas = models::make_model("gas-polytropic");
  const auto base = (Vec(2) << 1.0, 0.0).finished();
  GridSpec grid;
  grid.axes = {{-0.1, 0.1, 21}, {-0.1, 0.1, 21}};

  const auto good = geometry::make_frame(gas, {"fast", "slow"});
  CHECK(path_independence_error(good, base, grid) <= 1e-8);

  // scale gamma_2 by (1 + u1): the pair no longer commutes
  auto bad = good;
  const auto inner = good.eval;
  bad.source = "custom";
  bad.eval = [inner](const State& u) {
    auto fe = inner(u);
    fe.gamma.col(1) *= 1.0 + u[0];
    return fe;
  };
  CHECK(path_independence_error(bad, base, grid) > 1e-4);
}

TEST_CASE("trajectory leaving the domain reports the reached extent") {
  const auto model = models::make_model("shallow-water");
  const auto frame = certified_frame(model, {"fast"});
  GridSpec grid;
  grid.axes = {{-2.0, 2.0, 41}};  // c = 1 + r turns negative below r = -1
  try {
    integrate_surface(frame, (Vec(2) << 0.0, 1.0).finished(), grid);
    FAIL("expected PartialSurfaceError");
  } catch (const PartialSurfaceError& e) {
    REQUIRE(e.reached_lo.size() == 1);
    CHECK(e.reached_lo[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(e.reached_hi[0] == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("implicit profiles") {
  SUBCASE("linear") {
    const auto p = ImplicitProfile::linear_profile((Vec(2) << 2.0, -1.0).finished(), 0.5);
    const Vec r = (Vec(2) << 0.3, 0.7).finished();
    CHECK(p.value(r) == doctest::Approx(2.0 * 0.3 - 0.7 + 0.5));
    CHECK((p.gradient(r) - (Vec(2) << 2.0, -1.0).finished()).norm() == 0.0);
  }

  SUBCASE("gaussian value and gradient") {
    const auto p = ImplicitProfile::gaussian_profile(2.0, (Vec(1) << 0.5).finished(), 0.3);
    const Vec r = (Vec(1) << 0.65).finished();
    CHECK(p.value((Vec(1) << 0.5).finished()) == doctest::Approx(2.0));
    // gradient against a central difference
    const double h = 1e-6;
    const double fd = (p.value((Vec(1) << 0.65 + h).finished()) -
                       p.value((Vec(1) << 0.65 - h).finished())) /
                      (2.0 * h);
    CHECK(p.gradient(r)[0] == doctest::Approx(fd).epsilon(1e-8));
  }

  SUBCASE("polynomial value and gradient") {
    // psi(r) = 2 r1^2 r2 - r2^3 + 0.5
    ImplicitProfile p = ImplicitProfile::polynomial_profile({
        {{2, 1}, 2.0},
        {{0, 3}, -1.0},
        {{0, 0}, 0.5},
    });
    const Vec r = (Vec(2) << 1.2, -0.4).finished();
    CHECK(p.value(r) == doctest::Approx(2.0 * 1.44 * -0.4 - (-0.064) + 0.5));
    const double h = 1e-6;
    for (int a = 0; a < 2; ++a) {
      Vec rp = r, rm = r;
      rp[a] += h;
      rm[a] -= h;
      const double fd = (p.value(rp) - p.value(rm)) / (2.0 * h);
      CHECK(p.gradient(r)[a] == doctest::Approx(fd).epsilon(1e-7));
    }
  }

  SUBCASE("invalid profiles are rejected") {
    CHECK_THROWS_AS(ImplicitProfile::gaussian_profile(1.0, Vec::Zero(1), 0.0).validate(1),
                    ContractError);
    CHECK_THROWS_AS(ImplicitProfile::gaussian_profile(0.0, Vec::Zero(1), 1.0).validate(1),
                    ContractError);
    CHECK_THROWS_AS(ImplicitProfile::linear_profile(Vec::Zero(1), 0.0).validate(1),
                    ContractError);
    CHECK_THROWS_AS(ImplicitProfile::polynomial_profile({{{4, 0}, 1.0}}).validate(2),
                    ContractError);
    CHECK_THROWS_AS(ImplicitProfile::polynomial_profile({}).validate(2), ContractError);
    CHECK_THROWS_AS(ImplicitProfile::linear_profile(Vec::Ones(2), 0.0).validate(1),
                    ContractError);
  }
}

TEST_CASE("closed-form simple wave solve") {
  const auto s = rkwave::testing::simple_wave_k1();

  SUBCASE("origin fiber returns the base state") {
    const Space x0 = (Vec(2) << 0.0, 0.0).finished();
    CHECK(std::abs(s.solve_invariants(x0)[0]) <= 1e-12);
    const State u = s.evaluate(x0);
    CHECK(u[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(u[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.last_diagnostics.resolved);
  }

  SUBCASE("r = 1 at (t,x) = (0,1)") {
    const Space x = (Vec(2) << 0.0, 1.0).finished();
    CHECK(s.solve_invariants(x)[0] == doctest::Approx(1.0).epsilon(1e-12));
    const State u = s.evaluate(x);
    CHECK(u[0] == doctest::Approx(2.0).epsilon(1e-11));
    CHECK(u[1] == doctest::Approx(2.0).epsilon(1e-11));
  }

  SUBCASE("matches the closed form away from the catastrophe") {
    std::uint64_t seed = 11;
    const auto next = [&seed]() {
      seed = seed * 6364136223846793005ULL + 1442695040888963407ULL;
      return static_cast<double>(seed >> 11) * 0x1.0p-53;
    };
    for (int i = 0; i < 50; ++i) {
      Space x(2);
      x[0] = 0.5 * next();
      x[1] = -1.0 + 2.0 * next();
      const Vec r = s.solve_invariants(x);
      CHECK(std::abs(r[0] - closed_form_r(x)) <= 1e-9);
      CHECK((s.evaluate(x) - closed_form_u(x)).norm() <= 1e-9);
    }
  }

  SUBCASE("vanishing Jacobian raises a catastrophe error") {
    const Space x = (Vec(2) << -(1.0 + 1e-13) / 3.0, 0.0).finished();
    try {
      s.solve_invariants(x);
      FAIL("expected SolveError");
    } catch (const SolveError& e) {
      CHECK(e.kind == SolveError::Kind::catastrophe);
    }
  }

  SUBCASE("invariant outside the surface grid raises a coverage error") {
    // r(0, 3) = 3 > r_hi = 2
    const Space x = (Vec(2) << 0.0, 3.0).finished();
    try {
      s.solve_invariants(x);
      FAIL("expected SolveError");
    } catch (const SolveError& e) {
      CHECK(e.kind == SolveError::Kind::coverage);
    }
  }

  SUBCASE("warm and cold starts agree") {
    const Space x = (Vec(2) << 0.2, 0.4).finished();
    const Vec cold = s.solve_invariants(x);
    const Vec warm_init = (Vec(1) << cold[0] + 0.05).finished();
    const Vec warm = s.solve_invariants(x, &warm_init);
    CHECK(std::abs(cold[0] - warm[0]) <= 1e-8);
  }

  SUBCASE("newton residual bound holds at the solution") {
    const Space x = (Vec(2) << 0.3, -0.5).finished();
    const Vec r = s.solve_invariants(x);
    CHECK(s.residual_g(r, x).lpNorm<Eigen::Infinity>() <= s.newton.tolerance);
  }
}

TEST_CASE("double wave matches its hodograph closed form") {
  const auto s = rkwave::testing::double_wave_k2();
  std::uint64_t seed = 99;
  const auto next = [&seed]() {
    seed = seed * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(seed >> 11) * 0x1.0p-53;
  };
  for (int i = 0; i < 40; ++i) {
    Vec r(2);
    r[0] = -0.2 + 0.4 * next();
    r[1] = -0.2 + 0.4 * next();
    const Space x = rkwave::testing::double_wave_xt(r);
    const Vec warm = r + 0.01 * Vec::Ones(2);
    const Vec solved = s.solve_invariants(x, &warm);
    CHECK((solved - r).cwiseAbs().maxCoeff() <= 1e-9);
    const State u = s.evaluate(x);
    CHECK(u[0] == doctest::Approx(2.0 * (r[0] + r[1])).epsilon(1e-9));
    CHECK(u[1] == doctest::Approx(1.0 + r[0] - r[1]).epsilon(1e-9));
  }
}

TEST_CASE("lambda constraint report") {
  SUBCASE("k=1 is vacuous") {
    const auto s = rkwave::testing::simple_wave_k1();
    const auto rep = check_lambda_constraints(s.surface);
    CHECK(rep.vacuous);
    CHECK(rep.pairs.empty());
  }

  SUBCASE("double wave produces a finite report") {
    const auto s = rkwave::testing::double_wave_k2(0.5, 21);
    const auto rep = check_lambda_constraints(s.surface);
    CHECK_FALSE(rep.vacuous);
    REQUIRE(rep.pairs.size() == 2);  // ordered pairs (0,1) and (1,0)
    for (const auto& pair : rep.pairs) {
      CHECK(pair.alpha.size() == 19 * 19);
      for (std::size_t i = 0; i < pair.residual.size(); ++i) {
        CHECK(std::isfinite(pair.alpha[i]));
        CHECK(std::isfinite(pair.beta[i]));
        CHECK(pair.residual[i] >= 0.0);
        CHECK(std::isfinite(pair.residual[i]));
      }
    }
    CHECK(std::isfinite(rep.max_residual));
  }

  SUBCASE("lambda constant in r gives exactly zero residuals") {
    const auto s = rkwave::testing::constant_solution();
    // widen to k=2 by hand: constant lambda over a 2D grid
    kwave::WaveSurface surf;
    surf.frame = rkwave::testing::certified_frame(models::make_model("shallow-water"),
                                                  {"fast", "slow"});
    surf.base_state = (Vec(2) << 0.0, 1.0).finished();
    surf.grid.axes = {{-0.2, 0.2, 5}, {-0.2, 0.2, 5}};
    const std::size_t nodes = surf.grid.node_count();
    surf.values.assign(nodes * 2, 0.5);
    surf.lambda_values.resize(nodes * 4);
    for (std::size_t n = 0; n < nodes; ++n) {
      surf.lambda_values[n * 4 + 0] = -1.0;
      surf.lambda_values[n * 4 + 1] = 1.0;
      surf.lambda_values[n * 4 + 2] = 2.0;
      surf.lambda_values[n * 4 + 3] = 1.0;
    }
    surf.build_tables();
    const auto rep = check_lambda_constraints(surf);
    CHECK(rep.max_residual == 0.0);
    for (const auto& pair : rep.pairs) {
      for (std::size_t i = 0; i < pair.alpha.size(); ++i) {
        CHECK(pair.alpha[i] == 0.0);
        CHECK(pair.beta[i] == 0.0);
        CHECK(pair.residual[i] == 0.0);
      }
    }
  }

  SUBCASE("grid too coarse") {
    const auto model = models::make_model("shallow-water");
    const auto frame = rkwave::testing::certified_frame(model, {"fast", "slow"});
    GridSpec grid;
    grid.axes = {{0.0, 0.1, 2}, {0.0, 0.1, 2}};
    const auto surf = integrate_surface(frame, (Vec(2) << 0.0, 1.0).finished(), grid);
    CHECK_THROWS_AS(check_lambda_constraints(surf), ContractError);
  }
}

TEST_CASE("sample_grid resolves a regular region with no catastrophes") {
  const auto s = rkwave::testing::simple_wave_k1();
  GridSpec xg;
  xg.axes = {{0.0, 0.5, 51}, {-1.0, 1.0, 101}};
  const auto table = sample_grid(s, xg);
  REQUIRE(table.samples.size() == 51 * 101);
  for (const auto& smp : table.samples) {
    CHECK(smp.diag.resolved);
    CHECK(std::abs(smp.r[0] - closed_form_r(smp.x)) <= 1e-9);
  }
  CHECK(table.catastrophes.cells.empty());
}

TEST_CASE("sample_grid brackets the gradient catastrophe at t = -1/3") {
  const auto s = rkwave::testing::simple_wave_k1();
  GridSpec xg;
  xg.axes = {{-0.5, 0.0, 51}, {-1.0 / 3.0, -1.0 / 3.0, 1}};
  const auto table = sample_grid(s, xg);

  REQUIRE(table.catastrophes.cells.size() == 1);
  const auto& cell = table.catastrophes.cells[0];
  CHECK(cell.axis == 0);
  CHECK(cell.reason == "det-sign-change");
  CHECK(cell.x_lo[0] <= -1.0 / 3.0);
  CHECK(cell.x_hi[0] >= -1.0 / 3.0);
  CHECK(cell.x_hi[0] - cell.x_lo[0] <= 0.01 + 1e-12);  // one grid step
  CHECK(cell.locus_estimate == doctest::Approx(-1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("sample_grid marks unresolved points instead of extrapolating") {
  const auto s = rkwave::testing::simple_wave_k1();
  GridSpec xg;
  xg.axes = {{-0.5, 0.0, 26}, {0.2, 0.4, 3}};  // r blows up near t = -1/3
  const auto table = sample_grid(s, xg);
  std::size_t unresolved = 0;
  for (const auto& smp : table.samples) {
    if (!smp.diag.resolved) {
      ++unresolved;
      CHECK(std::isnan(smp.u[0]));
      CHECK(std::isnan(smp.r[0]));
    }
  }
  CHECK(unresolved > 0);
}

TEST_CASE("sample_grid is thread-count independent") {
  const auto s = rkwave::testing::double_wave_k2(0.5, 41);
  GridSpec xg;
  xg.axes = {{0.0, 0.2, 26}, {-0.3, 0.3, 51}};
  const auto t1 = sample_grid(s, xg, 1);
  const auto t4 = sample_grid(s, xg, 4);
  REQUIRE(t1.samples.size() == t4.samples.size());
  for (std::size_t i = 0; i < t1.samples.size(); ++i) {
    CHECK(t1.samples[i].diag.resolved == t4.samples[i].diag.resolved);
    CHECK(t1.samples[i].diag.iterations == t4.samples[i].diag.iterations);
    if (t1.samples[i].diag.resolved) {
      CHECK((t1.samples[i].r - t4.samples[i].r).cwiseAbs().maxCoeff() == 0.0);
      CHECK((t1.samples[i].u - t4.samples[i].u).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  // warm-start sweeps agree with cold starts
  for (std::size_t i = 0; i < t1.samples.size(); i += 157) {
    if (!t1.samples[i].diag.resolved) continue;
    const auto cold = s.query(t1.samples[i].x, nullptr);
    REQUIRE(cold.diag.resolved);
    CHECK((cold.r - t1.samples[i].r).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("constant solution has no catastrophe cells") {
  const auto s = rkwave::testing::constant_solution();
  GridSpec xg;
  xg.axes = {{0.0, 0.5, 11}, {-1.0, 1.0, 21}};
  const auto table = sample_grid(s, xg);
  for (const auto& smp : table.samples) CHECK(smp.diag.resolved);
  CHECK(table.catastrophes.cells.empty());
  const State u = s.evaluate((Vec(2) << 0.25, 0.5).finished());
  CHECK(u[0] == 0.0);
  CHECK(u[1] == 1.0);
}
