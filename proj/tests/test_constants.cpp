#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "grushinlab/constants.hpp"

using namespace grushinlab;

namespace {

AssumptionParams params(Assumption a, double b1, double b2, double sigma) {
  AssumptionParams p;
  p.assumption = a;
  p.beta1 = b1;
  p.beta2 = b2;
  p.sigma = sigma;
  p.gamma = 0.25;
  p.n = 1;
  return p;
}

}  // namespace

TEST_CASE("ground-state lower bound is tight for the quadratic potential") {
  for (int n : {1, 2, 3}) CHECK(bbl_lower_bound(1.0, 2.0, n).mu_star == doctest::Approx(n).epsilon(1e-6));
  CHECK(bbl_lower_bound(16.0, 2.0, 1).mu_star == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("lower bound scales homogeneously in the coupling") {
  for (double beta : {1.0, 2.0, 3.0})
    for (double c : {0.1, 1.0, 10.0, 100.0}) {
      const double mu1 = bbl_lower_bound(1.0, beta, 2).mu_star;
      const double muc = bbl_lower_bound(c, beta, 2).mu_star;
      CHECK(muc == doctest::Approx(std::pow(c, 2.0 / (beta + 2.0)) * mu1).epsilon(1e-10));
      CHECK(bbl_lower_bound(c, beta, 2).lambda_star ==
            doctest::Approx(muc / std::pow(c, 2.0 / (beta + 2.0))).epsilon(1e-12));
    }
  CHECK_THROWS(bbl_lower_bound(1.0, -1.0, 1));
}

TEST_CASE("localization radius closed-form values") {
  CHECK(localization_radius(0.0, 1.0, 2.0, 1, 1.0) ==
        doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-12));
  CHECK(localization_radius(2.0, 1.0, 1.0, 1, 1.0) ==
        doctest::Approx(2.5 * std::log(3.0) + 5.0).epsilon(1e-12));
  double prev = 0.0;
  for (double lam = 0.0; lam <= 50.0; lam += 2.5) {
    const double rho = localization_radius(lam, 1.0, 2.0, 1, 1.0);
    CHECK(rho >= prev);
    prev = rho;
  }
}

TEST_CASE("eigenvalue-count bound") {
  CHECK(eigencount_bound(0.0, 1.0, 2.0, 1, 1.0) == doctest::Approx(1.0));
  CHECK(eigencount_bound(3.0, 1.0, 2.0, 1, 1.0) == doctest::Approx(16.0));
  // oscillator n=1: true count below 3 is 2 (eigenvalues 1 and 3)
  CHECK(eigencount_bound(3.0, 1.0, 2.0, 1, 1.0) >= 2.0);
}

TEST_CASE("spectral exponent triple") {
  auto p = params(Assumption::A1, 2.0, 2.0, 0.0);
  SpectralExponent se = spectral_exponent(p, 1.0, 1.0, 0.0);
  CHECK(se.J == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-12));
  CHECK(se.J_hat == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-12));
  CHECK(se.script_J == doctest::Approx(se.J_hat).epsilon(1e-12));  // sigma = 0
  double prev = 0.0;
  for (double lam = 0.0; lam <= 40.0; lam += 2.0) {
    const double val = spectral_exponent(p, 1.0, 1.0, lam).script_J;
    CHECK(val >= prev);
    prev = val;
  }
}

TEST_CASE("exponent table on twelve hand-substituted parameter tuples") {
  struct Row {
    Assumption a;
    double b1, b2, sigma;
    double zeta, am, bm, ap, bp;
    ExponentBranch branch;
  };
  const Row rows[] = {
      {Assumption::A1, 2, 2, 0, 0.5, 0.0, 0.0, 0.5, 0.0, ExponentBranch::A1Case},
      {Assumption::A1, 1, 1, 0, 0.5, 0.0, 0.0, 0.5, 0.0, ExponentBranch::A1Case},
      {Assumption::A1, 2, 3, 0, 0.75, -0.25, -0.25, 0.5, -1.0 / 8, ExponentBranch::A1Case},
      {Assumption::A1, 2, 2, 1, 1.0, -0.5, -0.5, 0.5, -0.5, ExponentBranch::A1Case},
      {Assumption::A1, 2, 3, 1, 1.25, -0.75, -0.75, 0.5, -3.0 / 8, ExponentBranch::A1Case},
      {Assumption::A1, 1, 2, 1, 2.0, -1.5, -1.5, 0.5, -1.0, ExponentBranch::A1Case},
      {Assumption::A2, 2, 2, 0, 0.5, 1.0 / 6, 0.0, 2.0 / 3, -1.0 / 12,
       ExponentBranch::A2BetaStarNonpos},
      {Assumption::A2, 1, 2, 0, 1.0, -1.0 / 3, -1.0 / 3, 2.0 / 3, -1.0,
       ExponentBranch::A2BetaStarNonpos},
      {Assumption::A2, 1, 1, 0, 0.5, 1.0 / 6, 0.0, 2.0 / 3, -1.0 / 6,
       ExponentBranch::A2BetaStarNonpos},
      {Assumption::A2, 2, 2, 1, 1.0, -1.0 / 3, -0.75, 2.0 / 3, -7.0 / 12,
       ExponentBranch::A2BetaStarNonpos},
      {Assumption::A2, 1, 3, 0, 1.5, -5.0 / 6, -7.0 / 6, 2.0 / 3, -2.0 / 3,
       ExponentBranch::A2BetaStarPos},
      {Assumption::A2, 1, 3, 1, 2.5, -11.0 / 6, -13.0 / 6, 2.0 / 3, -4.0 / 3,
       ExponentBranch::A2BetaStarPos},
  };
  for (const Row& row : rows) {
    CAPTURE(row.b1);
    CAPTURE(row.b2);
    CAPTURE(row.sigma);
    ExponentTable t = exponent_table(params(row.a, row.b1, row.b2, row.sigma), 1e-3);
    CHECK(t.zeta == doctest::Approx(row.zeta).epsilon(1e-14));
    CHECK(t.a_minus == doctest::Approx(row.am).epsilon(1e-14));
    CHECK(t.b_minus == doctest::Approx(row.bm).epsilon(1e-14));
    CHECK(t.a_plus == doctest::Approx(row.ap).epsilon(1e-14));
    CHECK(t.b_plus == doctest::Approx(row.bp).epsilon(1e-14));
    CHECK(t.branch == row.branch);
  }
}

TEST_CASE("zeta degeneracy sweep") {
  for (double b : {1.0, 2.0, 3.0, 4.0}) {
    ExponentTable a1 = exponent_table(params(Assumption::A1, b, b, 0.0), 1e-3);
    CHECK(a1.zeta == doctest::Approx(0.5));
    CHECK(a1.a_minus == doctest::Approx(0.0));
    CHECK(a1.b_minus == doctest::Approx(0.0));
    ExponentTable a2 = exponent_table(params(Assumption::A2, b, b, 0.0), 1e-3);
    CHECK(a2.a_minus == doctest::Approx(2.0 / 3.0 - 0.5));
    CHECK(a2.b_minus == doctest::Approx(0.0));
    // zeta >= 1/2 with equality only for beta2 = beta1, sigma = 0
    CHECK(exponent_table(params(Assumption::A1, b, b + 1, 0.5), 1e-3).zeta > 0.5);
  }
}

TEST_CASE("critical powers") {
  CHECK(critical_power(Assumption::A1, 2.0) == doctest::Approx(1.0));
  CHECK(critical_power(Assumption::A1, 1.0) == doctest::Approx(0.75));
  CHECK(critical_power(Assumption::A2, 1.0) == doctest::Approx(1.0));
  for (double b : {0.5, 1.0, 2.0, 5.0})
    CHECK(critical_power(Assumption::A2, b) > critical_power(Assumption::A1, b));
}

TEST_CASE("observability-constant formula limits and hypotheses") {
  auto p = params(Assumption::A1, 2.0, 2.0, 0.0);
  ExponentTable t = exponent_table(p, 0.05);
  FreeConstants fc;
  const double s = 1.5;
  // r -> 0 limit when the small-r exponents vanish
  const double limit =
      std::exp(std::log(1.0 / p.gamma) +
               std::pow(1.0, 1.0) * std::pow(std::log(1.0 / p.gamma), s / (s - t.zeta)));
  CHECK(cobs_formula(1.0, s, 1e-12, p, t, fc) == doctest::Approx(limit).epsilon(1e-6));
  CHECK_THROWS(cobs_formula(1.0, 0.4, 1.0, p, t, fc));  // s <= zeta
  // decay dominates for large r when s above critical
  const double v1 = std::log(cobs_formula(1.0, s, 64.0, p, t, fc));
  const double v2 = std::log(cobs_formula(1.0, s, 256.0, p, t, fc));
  CHECK(v2 < v1);
}

TEST_CASE("sup bounds: finite and infinite regimes") {
  FreeConstants fc;
  auto p22 = params(Assumption::A1, 2.0, 2.0, 0.0);
  ExponentTable t22 = exponent_table(p22, 1e-3);
  SupBounds fin = cobs_sup_bounds(1.0, 1.5, p22, t22, fc);
  CHECK(fin.sup_is_finite);
  CHECK(fin.violated.empty());
  CHECK(std::isfinite(fin.A0));
  CHECK(std::isfinite(fin.A1_bound));
  CHECK(fin.delta_sup == doctest::Approx(1.0 / (1.5 / 4.0 - fin.nu / 2.0)));
  // The double-exponential B bounds overflow double for gamma this small
  // (log(1/gamma) > 1 gets raised to a ~25th power); use a milder gamma.
  auto pmild = p22;
  pmild.gamma = 0.3;
  SupBounds mild = cobs_sup_bounds(1.0, 1.5, pmild, t22, fc);
  CHECK(std::isfinite(mild.B_minus));
  CHECK(std::isfinite(mild.B_plus));
  CHECK(mild.B_minus >= mild.B_plus);  // extra T^{-...} factor with T = 1 keeps them ordered
  CHECK(fin.B_minus > 0.0);
  CHECK(fin.B_plus > 0.0);

  SupBounds sub = cobs_sup_bounds(1.0, 0.9, p22, t22, fc);
  CHECK_FALSE(sub.sup_is_finite);
  CHECK_FALSE(sub.violated.empty());

  auto p23 = params(Assumption::A1, 2.0, 3.0, 0.0);
  SupBounds neg = cobs_sup_bounds(1.0, 2.0, p23, exponent_table(p23, 1e-3), fc);
  CHECK_FALSE(neg.sup_is_finite);
  CHECK(neg.violated.find("small-r") != std::string::npos);
}

TEST_CASE("proof epsilon leaves the decay exponent dominant") {
  const double s = 1.5, zeta = 0.5, b1 = 2.0;
  const double nu = 0.5;
  const double eps = proof_epsilon(s, zeta, b1, nu);
  CHECK(eps > 0.0);
  // nu + (s/(s-zeta)) eps stays strictly below 2s/(b1+2)
  CHECK(nu + s / (s - zeta) * eps < 2.0 * s / (b1 + 2.0));
}
