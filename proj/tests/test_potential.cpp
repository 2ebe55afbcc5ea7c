#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "grushinlab/potential.hpp"

using namespace grushinlab;

TEST_CASE("power potential beta >= 1 is classified A1 and passes its audit") {
  for (double beta : {1.0, 2.0, 3.0}) {
    PotentialSpec p = make_power_potential(1.5, beta, 1);
    CHECK(p.assumption == Assumption::A1);
    AssumptionAudit audit = check_assumption(p, 6.0, 101);
    CHECK_MESSAGE(audit.holds, audit.detail);
  }
}

TEST_CASE("power potential values and lower bound") {
  PotentialSpec p = make_power_potential(2.0, 3.0, 2);
  const double x[2] = {1.0, 2.0};
  const double r = std::sqrt(5.0);
  CHECK(p(std::span<const double>(x, 2)) == doctest::Approx(2.0 * r * r * r));
  // V - c1 |x|^beta1 >= 0 exactly on a sample grid
  for (double t = -3.0; t <= 3.0; t += 0.37) {
    const double y[2] = {t, 0.5 * t};
    const double v = p(std::span<const double>(y, 2));
    CHECK(v - p.c1 * std::pow(norm2(std::span<const double>(y, 2)), p.beta1) >= 0.0);
  }
}

TEST_CASE("beta = 2 potential exposes separable factors") {
  PotentialSpec p = make_power_potential(3.0, 2.0, 3);
  REQUIRE(p.separable_factors.size() == 3);
  CHECK(p.separable_factors[1](2.0) == doctest::Approx(12.0));
}

TEST_CASE("power potential beta < 1 is classified A2 with a split that audits clean") {
  PotentialSpec p = make_power_potential(1.0, 0.5, 1);
  CHECK(p.assumption == Assumption::A2);
  REQUIRE(p.split1);
  REQUIRE(p.split2);
  const double x[1] = {0.7};
  auto xs = std::span<const double>(x, 1);
  CHECK(p.split1(xs) + p.split2(xs) == doctest::Approx(p(xs)));
  AssumptionAudit audit = check_assumption(p, 5.0, 81);
  CHECK_MESSAGE(audit.holds, audit.detail);
}

TEST_CASE("scaling composes multiplicatively under A1") {
  PotentialSpec p = make_power_potential(1.0, 2.0, 1);
  ScaledPotential once = scale(p, 6.0);
  ScaledPotential twice = scale(scale(p, 2.0).combined, 3.0);
  CHECK(twice.combined.c1 == doctest::Approx(once.combined.c1));
  CHECK(twice.combined.c2 == doctest::Approx(once.combined.c2));
  CHECK(twice.combined.beta1 == once.combined.beta1);
  const double x[1] = {1.3};
  auto xs = std::span<const double>(x, 1);
  CHECK(twice.combined(xs) == doctest::Approx(once.combined(xs)));
}

TEST_CASE("scaled potential passes its transformed audit") {
  PotentialSpec p = make_power_potential(1.0, 2.0, 1);
  for (double r : {0.5, 1.0, 4.0, 25.0}) {
    ScaledPotential sp = scale(p, r);
    AssumptionAudit audit = check_assumption(sp.combined, 6.0, 101);
    CHECK_MESSAGE(audit.holds, "r=", r, ": ", audit.detail);
  }
  PotentialSpec q = make_power_potential(1.0, 0.5, 1);
  ScaledPotential sq = scale(q, 4.0);
  AssumptionAudit audit = check_assumption(sq.combined, 5.0, 81);
  CHECK_MESSAGE(audit.holds, audit.detail);
}

TEST_CASE("additive combination carries r+1 parameters") {
  PotentialSpec p = make_power_potential(1.0, 2.0, 1);
  PotentialSpec q = make_power_potential(0.5, 2.0, 1);
  ScaledPotential sp = scale(p, 3.0, q);
  CHECK(sp.has_additive);
  const double x[1] = {0.8};
  auto xs = std::span<const double>(x, 1);
  CHECK(sp.combined(xs) == doctest::Approx(3.0 * p(xs) + q(xs)));
  AssumptionAudit audit = check_assumption(sp.combined, 6.0, 101);
  CHECK_MESSAGE(audit.holds, audit.detail);
}

TEST_CASE("finite-difference gradient matches the analytic one") {
  ScalarField f = [](std::span<const double> x) {
    return std::sin(x[0]) * std::exp(x[1]);
  };
  const double x[2] = {0.4, -0.3};
  auto g = fd_gradient(f, std::span<const double>(x, 2));
  CHECK(g[0] == doctest::Approx(std::cos(0.4) * std::exp(-0.3)).epsilon(1e-8));
  CHECK(g[1] == doctest::Approx(std::sin(0.4) * std::exp(-0.3)).epsilon(1e-8));
}

TEST_CASE("declared parameters that fail are detected") {
  PotentialSpec p = make_power_potential(1.0, 2.0, 1);
  p.c2 = 1e-3;  // growth bound far too small
  AssumptionAudit audit = check_assumption(p, 6.0, 101);
  CHECK_FALSE(audit.holds);
  CHECK(audit.worst_margin < 0.0);
}
