#include <doctest.h>

#include "rkwave/wave.hpp"

#include <cmath>

using namespace rkwave;
using namespace rkwave::wave;

namespace {
const double inv_sqrt5 = 1.0 / std::sqrt(5.0);
}

TEST_CASE("branches of shallow-water at (1,2)") {
  const auto m = models::make_model("shallow-water");
  const auto br = characteristic_branches(m, (Vec(2) << 1.0, 2.0).finished());
  REQUIRE(br.size() == 2);

  CHECK(br[0].speed == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(br[1].speed == doctest::Approx(3.0).epsilon(1e-14));
  // lambda = (-c, 1)
  CHECK(br[0].lambda[0] == doctest::Approx(1.0));
  CHECK(br[0].lambda[1] == 1.0);
  CHECK(br[1].lambda[0] == doctest::Approx(-3.0));
  CHECK(br[1].lambda[1] == 1.0);
  // kernels by direct elimination: (2, -1)/sqrt5 and (2, 1)/sqrt5
  CHECK(br[0].gamma[0] == doctest::Approx(2.0 * inv_sqrt5));
  CHECK(br[0].gamma[1] == doctest::Approx(-inv_sqrt5));
  CHECK(br[1].gamma[0] == doctest::Approx(2.0 * inv_sqrt5));
  CHECK(br[1].gamma[1] == doctest::Approx(inv_sqrt5));
  CHECK(br[0].multiplicity == 1);
  CHECK(br[1].multiplicity == 1);
}

TEST_CASE("branches of shallow-water at (0,1)") {
  const auto m = models::make_model("shallow-water");
  const auto br = characteristic_branches(m, (Vec(2) << 0.0, 1.0).finished());
  REQUIRE(br.size() == 2);
  CHECK(br[0].speed == doctest::Approx(-1.0));
  CHECK(br[1].speed == doctest::Approx(1.0));
  CHECK(br[1].lambda[0] == doctest::Approx(-1.0));
  CHECK(br[1].gamma[0] == doctest::Approx(2.0 * inv_sqrt5));
  CHECK(br[1].gamma[1] == doctest::Approx(inv_sqrt5));
}

TEST_CASE("speeds coalesce at the dry boundary") {
  const auto m = models::make_model("shallow-water");
  const auto near = characteristic_branches(m, (Vec(2) << 0.5, 1e-5).finished());
  REQUIRE(near.size() == 2);
  CHECK(std::abs(near[0].speed - 0.5) <= 2e-5);
  CHECK(std::abs(near[1].speed - 0.5) <= 2e-5);

  const auto at = characteristic_branches(m, (Vec(2) << 0.5, 0.0).finished());
  REQUIRE(at.size() == 1);
  CHECK(at[0].multiplicity == 2);
  CHECK(at[0].speed == doctest::Approx(0.5));
}

TEST_CASE("wave relation residual") {
  const auto m = models::make_model("shallow-water");
  const State u12 = (Vec(2) << 1.0, 2.0).finished();

  SUBCASE("kernel vector gives zero") {
    const Vec lam = (Vec(2) << -3.0, 1.0).finished();
    const Vec gam = (Vec(2) << 2.0 * inv_sqrt5, inv_sqrt5).finished();
    CHECK(wave_relation_residual(m, u12, lam, gam) <= 1e-14);
  }

  SUBCASE("non-kernel vector gives sqrt5") {
    const Vec lam = (Vec(2) << -3.0, 1.0).finished();
    const Vec gam = (Vec(2) << 1.0, 0.0).finished();
    CHECK(wave_relation_residual(m, u12, lam, gam) == doctest::Approx(std::sqrt(5.0)));
  }

  SUBCASE("second state") {
    const Vec lam = (Vec(2) << -1.0, 1.0).finished();
    const Vec gam = (Vec(2) << 2.0 * inv_sqrt5, inv_sqrt5).finished();
    CHECK(wave_relation_residual(m, (Vec(2) << 0.0, 1.0).finished(), lam, gam) <= 1e-14);
  }

  SUBCASE("zero arguments rejected") {
    CHECK_THROWS_AS(
        wave_relation_residual(m, u12, Vec::Zero(2), (Vec(2) << 1.0, 0.0).finished()),
        ContractError);
    CHECK_THROWS_AS(
        wave_relation_residual(m, u12, (Vec(2) << -3.0, 1.0).finished(), Vec::Zero(2)),
        ContractError);
  }
}

TEST_CASE("kernel_vector") {
  const auto m = models::make_model("shallow-water");
  const State u12 = (Vec(2) << 1.0, 2.0).finished();

  SUBCASE("fast kernel") {
    const Vec g = kernel_vector(m, u12, (Vec(2) << -3.0, 1.0).finished());
    CHECK(g[0] == doctest::Approx(2.0 * inv_sqrt5));
    CHECK(g[1] == doctest::Approx(inv_sqrt5));
  }

  SUBCASE("slow kernel with sign normalization") {
    const Vec g = kernel_vector(m, u12, (Vec(2) << 1.0, 1.0).finished());
    CHECK(g[0] == doctest::Approx(2.0 * inv_sqrt5));
    CHECK(g[1] == doctest::Approx(-inv_sqrt5));
  }

  SUBCASE("invertible matrix is rejected") {
    // det A^2 = 1 - 4 = -3 at u=(1,2), so lambda=(0,1) is no wave vector
    CHECK_THROWS_AS(kernel_vector(m, u12, (Vec(2) << 0.0, 1.0).finished()), NotAWaveVector);
  }

  SUBCASE("scale invariance") {
    for (double a : {0.5, -2.0, 17.0}) {
      const Vec g1 = kernel_vector(m, u12, (Vec(2) << -3.0, 1.0).finished());
      const Vec g2 = kernel_vector(m, u12, a * (Vec(2) << -3.0, 1.0).finished());
      CHECK((g1 - g2).norm() <= 1e-12);
    }
  }
}

TEST_CASE("branch residual invariant on random states") {
  const auto m = models::make_model("shallow-water");
  std::uint64_t s = 42;
  const auto next = [&s]() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return static_cast<double>(s >> 11) * 0x1.0p-53;
  };
  for (int i = 0; i < 100; ++i) {
    State u(2);
    u[0] = -2.0 + 4.0 * next();
    u[1] = 0.1 + 2.0 * next();
    const auto a = models::eval_matrices(m, u);
    const double ascale = std::max(a[0].cwiseAbs().maxCoeff(), a[1].cwiseAbs().maxCoeff());
    const auto branches = characteristic_branches(m, u);
    CHECK(branches.size() == 2);  // strictly hyperbolic: branch count equals q
    for (const auto& b : branches) {
      const double res = wave_relation_residual(m, u, b.lambda, b.gamma);
      CHECK(res <= 1e-10 * b.lambda.norm() * b.gamma.norm() * ascale);
    }
  }
}

TEST_CASE("complex characteristic pair is rejected") {
  models::HydroModel m;
  m.name = "rotation";
  m.p = 2;
  m.q = 2;
  m.variable_names = {"t", "x", "u1", "u2"};
  m.domain.resize(2, 2);
  m.domain << -10.0, 10.0, -10.0, 10.0;
  m.sampling_box = m.domain;
  m.coefficients = [](const State&) {
    std::vector<Mat> a(2);
    a[0] = Mat::Identity(2, 2);
    a[1] = (Mat(2, 2) << 0.0, -1.0, 1.0, 0.0).finished();  // eigenvalues +-i
    return a;
  };
  const State u = (Vec(2) << 0.1, 0.2).finished();
  try {
    characteristic_branches(m, u);
    FAIL("expected NonHyperbolicError");
  } catch (const NonHyperbolicError& e) {
    CHECK((e.state - u).norm() == 0.0);
  }
}

TEST_CASE("pencil branches on a synthetic p=3 model") {
  models::HydroModel m;
  m.name = "diag3";
  m.p = 3;
  m.q = 2;
  m.variable_names = {"x1", "x2", "x3", "u1", "u2"};
  m.domain.resize(2, 2);
  m.domain << -10.0, 10.0, -10.0, 10.0;
  m.sampling_box = m.domain;
  m.coefficients = [](const State&) {
    std::vector<Mat> a(3);
    a[0] = Mat::Identity(2, 2);
    a[1] = (Mat(2, 2) << 2.0, 0.0, 0.0, 3.0).finished();
    a[2] = (Mat(2, 2) << 5.0, 0.0, 0.0, 7.0).finished();
    return a;
  };

  // det((e + mu n)_i A^i) with e=(1,1,0), n=(0,0,1):
  // diag(3 + 5 mu, 4 + 7 mu) -> roots mu = -3/5, -4/7
  const Vec e = (Vec(3) << 1.0, 1.0, 0.0).finished();
  const Vec n = (Vec(3) << 0.0, 0.0, 1.0).finished();
  PencilOptions opts;
  opts.mu_lo = -2.0;
  opts.mu_hi = 2.0;
  const auto br = pencil_branches(m, State::Zero(2), e, n, opts);
  REQUIRE(br.size() == 2);
  CHECK(br[0].speed == doctest::Approx(-0.6).epsilon(1e-9));
  CHECK(br[1].speed == doctest::Approx(-4.0 / 7.0).epsilon(1e-9));
  // kernels: first root kills component 1, second kills component 2
  CHECK(std::abs(br[0].gamma[0]) == doctest::Approx(1.0));
  CHECK(std::abs(br[1].gamma[1]) == doctest::Approx(1.0));
}
