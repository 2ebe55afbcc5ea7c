#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "grushinlab/grushin.hpp"

using namespace grushinlab;

namespace {

ModeFamily small_family(int max_mode = 2, double s = 1.0) {
  return build_modes(make_power_potential(1.0, 2.0, 1), std::nullopt,
                     Grid(1, 8.0, 400), max_mode, s, 1, 25);
}

Eigen::MatrixXd random_field(int nx, int ny, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd u(nx, ny);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) u(i, j) = gauss(rng);
  return u;
}

}  // namespace

TEST_CASE("mode build: symbols, dedup, scaled spectra") {
  ModeFamily fam = small_family();
  CHECK(fam.modes.size() == 5);
  CHECK(fam.symbol({2, 0}) == doctest::Approx(4.0));
  CHECK(fam.spectra.size() == 3);  // |k|^2 in {0, 1, 4}
  CHECK(fam.spectrum_ptr({2, 0}).get() == fam.spectrum_ptr({-2, 0}).get());

  // mode 1 carries the oscillator spectrum, mode 2 the sqrt(r)-scaled one
  const SpectralData& S1 = fam.spectrum({1, 0});
  for (int j = 0; j < 4; ++j)
    CHECK(S1.eigenvalues[j] == doctest::Approx(2.0 * j + 1.0).epsilon(1e-3));
  CHECK(fam.spectrum({2, 0}).eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(fam.is_zero_mode({0, 0}));
  // k = 0 is the Dirichlet Laplacian on the truncated box
  const double L = fam.xgrid.halfwidth;
  CHECK(fam.spectrum({0, 0}).eigenvalues[0] ==
        doctest::Approx(std::pow(M_PI / (2.0 * L), 2)).epsilon(1e-3));
}

TEST_CASE("partial Fourier transform is unitary (Parseval)") {
  Grid g(1, 8.0, 61);
  const int ny = 12;
  Eigen::MatrixXd u = random_field(g.points_per_dim, ny, 31);
  GrushinState st = to_modes(g, u);
  const double hy = 2.0 * M_PI / ny;
  const double phys = std::sqrt(g.weight() * hy * u.squaredNorm());
  CHECK(st.norm() == doctest::Approx(phys).epsilon(1e-10));
  Eigen::MatrixXd back = to_physical(st);
  CHECK((back - u).norm() <= 1e-10 * u.norm());
}

TEST_CASE("mode frequency layout") {
  CHECK(mode_frequency(0, 12) == 0);
  CHECK(mode_frequency(6, 12) == 6);
  CHECK(mode_frequency(7, 12) == -5);
  CHECK(mode_frequency(11, 12) == -1);
}

TEST_CASE("evolution: identity at t=0, per-mode decay, contraction, semigroup") {
  Grid g(1, 8.0, 400);
  ModeFamily fam = build_modes(make_power_potential(1.0, 2.0, 1), std::nullopt, g,
                               3, 1.0, 1, 30);
  const int ny = 7;  // modes -3..3
  // initial state assembled inside the spectral span of each mode
  GrushinState st;
  st.xgrid = g;
  st.torus_points = ny;
  st.coeff = Eigen::MatrixXcd::Zero(g.size(), ny);
  for (int j = 0; j < ny; ++j) {
    const int k = mode_frequency(j, ny);
    const SpectralData& S = fam.spectrum({k, 0});
    st.coeff.col(j) = (S.vectors.col(0) + 0.3 * S.vectors.col(2)).cast<std::complex<double>>() *
                      std::complex<double>(0.7, 0.4);
  }
  GrushinState same = evolve(fam, st, 0.0);
  CHECK((same.coeff - st.coeff).norm() <= 1e-12 * st.coeff.norm());

  GrushinState later = evolve(fam, st, 0.4);
  CHECK(later.norm() <= st.norm() * (1.0 + 1e-12));
  CHECK(later.time == doctest::Approx(0.4));
  GrushinState split = evolve(fam, evolve(fam, st, 0.15), 0.25);
  CHECK((split.coeff - later.coeff).norm() <= 1e-10 * later.coeff.norm());
  CHECK_THROWS(evolve(fam, st, -0.1));

  // single mode: scalar decay factor
  GrushinState single = st;
  single.coeff.setZero();
  const SpectralData& S1 = fam.spectrum({1, 0});
  single.coeff.col(1) = S1.vectors.col(0).cast<std::complex<double>>();
  GrushinState dec = evolve(fam, single, 0.5);
  const double factor = std::exp(-0.5 * S1.eigenvalues[0]);
  CHECK((dec.coeff.col(1) - factor * single.coeff.col(1)).norm() <= 1e-12);
}

TEST_CASE("mode decoupling equals the dense 2-D oracle") {
  PotentialSpec V = make_power_potential(1.0, 2.0, 1);
  Grid g(1, 6.0, 61);
  const int ny = 16;
  ModeFamily fam = build_modes(V, std::nullopt, g, ny / 2, 1.0, 1,
                               g.points_per_dim, ModeSymbol::DiscreteFd, ny);
  Eigen::MatrixXd u0 = random_field(g.points_per_dim, ny, 77);
  for (double t : {0.05, 0.2}) {
    Eigen::MatrixXd ref = direct_oracle(V, g, ny, t, 1.0, u0);
    fam.s = 1.0;
    Eigen::MatrixXd got = to_physical(evolve(fam, to_modes(g, u0), t));
    CHECK((got - ref).norm() <= 1e-8 * ref.norm());
  }
  CHECK_THROWS(direct_oracle(V, Grid(1, 6.0, 2000), 16, 0.1, 1.0,
                             Eigen::MatrixXd::Zero(2000, 16)));  // size cap
}

TEST_CASE("x-only data under the oracle reduces to the 1-D free heat flow") {
  PotentialSpec V = make_power_potential(1.0, 2.0, 1);
  Grid g(1, 6.0, 41);
  const int ny = 8;
  Eigen::MatrixXd u0(g.points_per_dim, ny);
  Eigen::VectorXd profile(g.points_per_dim);
  for (int i = 0; i < g.points_per_dim; ++i)
    profile[i] = std::exp(-g.coord1d(i) * g.coord1d(i));
  for (int j = 0; j < ny; ++j) u0.col(j) = profile;

  Eigen::MatrixXd out = direct_oracle(V, g, ny, 0.3, 1.0, u0);
  // 1-D Dirichlet free flow of the same profile
  PotentialSpec zero;
  zero.dim = 1;
  zero.value = [](std::span<const double>) { return 0.0; };
  SpectralData S = eigensolve(discretize(zero, g), EigRequest::lowest(g.points_per_dim));
  Eigen::VectorXd flow = semigroup_apply(S, 0.3, 1.0, profile);
  for (int j = 0; j < ny; ++j)
    CHECK((out.col(j) - flow).norm() <= 1e-8 * flow.norm());
}

TEST_CASE("per-mode observability report") {
  ModeFamily fam = small_family(2, 1.0);
  SetIndicator full = full_indicator(fam.xgrid);
  GrushinObservabilityReport rep = grushin_observability(fam, full, 1.0, 1.0);
  REQUIRE(rep.rows.size() == 5);
  for (const auto& row : rep.rows) CHECK(row.C_emp <= 1.0 + 1e-10);
  CHECK(rep.C_agg <= 1.0 + 1e-10);
  // even in k
  CHECK(rep.rows[0].C_emp == doctest::Approx(rep.rows[4].C_emp));  // k = -2 vs 2
  CHECK(rep.rows[1].C_emp == doctest::Approx(rep.rows[3].C_emp));  // k = -1 vs 1
  for (const auto& row : rep.rows) {
    CHECK(row.thickness_fallback == (row.k[0] == 0));
    if (row.k[0] == 0) CHECK(std::isnan(row.paper_bound));
  }
  CHECK(rep.k0_thickness == doctest::Approx(1.0).epsilon(0.05));
  for (const auto& row : rep.rows) CHECK(rep.C_agg >= row.C_emp);
}

TEST_CASE("scaled-potential scan: r=1 equals the plain audit, decay at large r") {
  PotentialSpec V = make_power_potential(1.0, 2.0, 1);
  Grid g(1, 8.0, 400);
  DistributedSet set = make_equidistributed(0.3, 7, 1, Placement::CellCenter);
  SetIndicator mask = indicator(set, g);
  AssumptionParams params;
  params.assumption = Assumption::A1;
  params.beta1 = params.beta2 = 2.0;
  params.gamma = 0.3;
  params.n = 1;
  auto rows = scan_scaled_observability(V, std::nullopt,
                                        {1.0, 4.0, 16.0, 64.0, 4096.0},
                                        mask, 0.5, 1.5, 25, params);
  REQUIRE(rows.size() == 5);

  SpectralData S = eigensolve(discretize(V, g), EigRequest::lowest(25));
  GramianBundle b = make_gramian(S, mask, 0.5, 1.5);
  CHECK(rows[0].C_emp == doctest::Approx(gramian_observability(b).C_emp).epsilon(1e-8));
  // s = 1.5 above critical: the empirical constant decays in r, and the formula
  // bound decays once r^{2s/(beta1+2)} overtakes its r^{a+eps} growth terms
  // (crossover near r ~ 2e2 for these constants)
  CHECK(rows[3].C_emp < rows[1].C_emp);
  CHECK(rows[4].paper_bound < rows[3].paper_bound);
  for (const auto& row : rows) CHECK(std::isfinite(row.paper_bound));
  CHECK_THROWS(scan_scaled_observability(V, std::nullopt, {-1.0}, mask, 0.5, 1.5, 25,
                                         params));
}
