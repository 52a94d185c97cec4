#include <doctest.h>

#include "rkwave/models.hpp"

#include <cmath>

using namespace rkwave;
using namespace rkwave::models;

TEST_CASE("catalogue lists both built-in models") {
  const auto descriptors = list_models();
  bool sw = false, gas = false;
  for (const auto& d : descriptors) {
    CHECK(d.p >= 2);
    CHECK(d.q >= 1);
    if (d.name == "shallow-water") {
      sw = true;
      CHECK(d.p == 2);
      CHECK(d.q == 2);
    }
    if (d.name == "gas-polytropic") {
      gas = true;
      CHECK(d.p == 2);
      CHECK(d.q == 2);
    }
  }
  CHECK(sw);
  CHECK(gas);
}

TEST_CASE("shallow-water coefficient matrices") {
  const auto m = make_model("shallow-water");

  SUBCASE("u=(1,2)") {
    const auto a = eval_matrices(m, (Vec(2) << 1.0, 2.0).finished());
    REQUIRE(a.size() == 2);
    CHECK(a[0].isIdentity(0.0));
    CHECK(a[1](0, 0) == 1.0);
    CHECK(a[1](0, 1) == 4.0);
    CHECK(a[1](1, 0) == 1.0);
    CHECK(a[1](1, 1) == 1.0);
  }

  SUBCASE("u=(0,1)") {
    const auto a = eval_matrices(m, (Vec(2) << 0.0, 1.0).finished());
    CHECK(a[1](0, 0) == 0.0);
    CHECK(a[1](0, 1) == 2.0);
    CHECK(a[1](1, 0) == 0.5);
    CHECK(a[1](1, 1) == 0.0);
  }

  SUBCASE("negative celerity is outside the domain") {
    CHECK_THROWS_AS(eval_matrices(m, (Vec(2) << 0.0, -1.0).finished()), DomainError);
    try {
      eval_matrices(m, (Vec(2) << 0.0, -1.0).finished());
    } catch (const DomainError& e) {
      CHECK(std::string(e.bound).find('c') != std::string::npos);
    }
  }

  SUBCASE("boundary c=0 is allowed") {
    CHECK_NOTHROW(eval_matrices(m, (Vec(2) << 0.5, 0.0).finished()));
  }

  SUBCASE("deterministic evaluation") {
    const State u = (Vec(2) << 0.3, 1.7).finished();
    const auto a1 = eval_matrices(m, u);
    const auto a2 = eval_matrices(m, u);
    CHECK((a1[1] - a2[1]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("shallow-water eigenvalues are u +- c") {
  const auto m = make_model("shallow-water");
  // characteristic polynomial roots as the independent route
  for (double u : {-1.5, 0.0, 0.7, 2.0}) {
    for (double c : {0.25, 1.0, 3.0}) {
      const auto a = eval_matrices(m, (Vec(2) << u, c).finished());
      const double tr = a[1](0, 0) + a[1](1, 1);
      const double det = a[1].determinant();
      const double disc = std::sqrt(tr * tr - 4.0 * det);
      const double lo = 0.5 * (tr - disc), hi = 0.5 * (tr + disc);
      CHECK(std::abs(lo - (u - c)) <= 1e-12);
      CHECK(std::abs(hi - (u + c)) <= 1e-12);
    }
  }
}

TEST_CASE("gas-polytropic matrices and kappa parameter") {
  const auto m = make_model("gas-polytropic");  // kappa = 2
  const auto a = eval_matrices(m, (Vec(2) << 4.0, 0.5).finished());
  CHECK(a[1](0, 0) == 0.5);
  CHECK(a[1](0, 1) == 4.0);
  CHECK(a[1](1, 0) == doctest::Approx(1.0));  // rho^(kappa-2) = 1 at kappa = 2
  CHECK(a[1](1, 1) == 0.5);

  const auto m14 = make_model("gas-polytropic", {{"kappa", 1.4}});
  const auto a14 = eval_matrices(m14, (Vec(2) << 4.0, 0.5).finished());
  CHECK(a14[1](1, 0) == doctest::Approx(std::pow(4.0, -0.6)));

  CHECK_THROWS_AS(make_model("gas-polytropic", {{"gamma", 1.4}}), ContractError);
  CHECK_THROWS_AS(make_model("no-such-model"), ContractError);
}

TEST_CASE("entries finite over sampled domain states") {
  for (const char* name : {"shallow-water", "gas-polytropic"}) {
    const auto m = make_model(name);
    for (int i = 0; i <= 10; ++i) {
      for (int j = 0; j <= 10; ++j) {
        State u(2);
        u[0] = m.domain(0, 0) + (m.domain(0, 1) - m.domain(0, 0)) * i / 10.0;
        u[1] = m.domain(1, 0) + (m.domain(1, 1) - m.domain(1, 0)) * j / 10.0;
        const auto a = eval_matrices(m, u);
        for (const auto& mat : a) CHECK(mat.allFinite());
      }
    }
  }
}
