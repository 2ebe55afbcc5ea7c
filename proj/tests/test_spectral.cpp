#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "grushinlab/eigensolve.hpp"

using namespace grushinlab;

namespace {

DiscreteOperator oscillator(int n, int N, double L = 10.0) {
  return discretize(make_power_potential(1.0, 2.0, n), Grid(n, L, N));
}

double hdot(const Grid& g, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return g.weight() * a.dot(b);
}

}  // namespace

TEST_CASE("operator is symmetric and nonnegative") {
  DiscreteOperator A = oscillator(2, 30, 6.0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd u(A.size()), v(A.size());
  for (auto& x : u) x = gauss(rng);
  for (auto& x : v) x = gauss(rng);
  const double uv = hdot(A.grid, A.apply(u), v);
  const double vu = hdot(A.grid, u, A.apply(v));
  CHECK(std::abs(uv - vu) <= 1e-12 * std::abs(uv));
  CHECK(hdot(A.grid, A.apply(u), u) >= 0.0);
}

TEST_CASE("parallel stencil equals the serial reference") {
  DiscreteOperator A = oscillator(3, 17, 4.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  std::vector<double> u(A.size()), par(A.size()), ser(A.size());
  for (auto& x : u) x = gauss(rng);
  A.apply(u.data(), par.data());
  A.apply_serial(u.data(), ser.data());
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(par[i] == ser[i]);
}

TEST_CASE("free Dirichlet operator reproduces the discrete sine spectrum") {
  PotentialSpec zero;
  zero.dim = 1;
  zero.value = [](std::span<const double>) { return 0.0; };
  Grid g(1, 5.0, 200);
  SpectralData S = eigensolve(discretize(zero, g), EigRequest::lowest(4));
  const double h = g.spacing();
  for (int k = 1; k <= 4; ++k) {
    const double exact = 2.0 * (1.0 - std::cos(M_PI * k * h / (2.0 * g.halfwidth))) / (h * h);
    CHECK(S.eigenvalues[k - 1] == doctest::Approx(exact).epsilon(1e-10));
    // eigenvector overlap with the sine mode
    Eigen::VectorXd sine(g.size());
    for (int i = 0; i < g.points_per_dim; ++i)
      sine[i] = std::sin(M_PI * k * (g.coord1d(i) + g.halfwidth) / (2.0 * g.halfwidth));
    sine /= std::sqrt(g.weight()) * sine.norm();
    CHECK(std::abs(hdot(g, sine, S.vectors.col(k - 1))) >= 1.0 - 1e-6);
  }
}

TEST_CASE("1-D oscillator spectrum, orthonormality, residuals") {
  DiscreteOperator A = oscillator(1, 800);
  SpectralData S = eigensolve(A, EigRequest::lowest(6));
  for (int k = 0; k < 6; ++k)
    CHECK(S.eigenvalues[k] == doctest::Approx(2.0 * k + 1.0).epsilon(1e-3));
  for (int j = 0; j < 6; ++j)
    for (int k = 0; k <= j; ++k)
      CHECK(hdot(A.grid, S.vectors.col(j), S.vectors.col(k)) ==
            doctest::Approx(j == k ? 1.0 : 0.0).scale(1.0).epsilon(1e-10));
  for (int k = 0; k < 6; ++k) {
    Eigen::VectorXd res =
        A.apply(Eigen::VectorXd(S.vectors.col(k))) - S.eigenvalues[k] * S.vectors.col(k);
    CHECK(std::sqrt(S.weight()) * res.norm() <= 1e-8 * (1.0 + S.eigenvalues[k]));
  }
}

TEST_CASE("tensor fast path agrees with the dense solver in 2-D") {
  DiscreteOperator A = oscillator(2, 40, 7.0);
  REQUIRE(A.diag1d.has_value());
  EigOptions tensor_opt, dense_opt;
  dense_opt.allow_tensor = false;
  SpectralData St = eigensolve(A, EigRequest::lowest(8), tensor_opt);
  SpectralData Sd = eigensolve(A, EigRequest::lowest(8), dense_opt);
  for (int k = 0; k < 8; ++k)
    CHECK(St.eigenvalues[k] == doctest::Approx(Sd.eigenvalues[k]).epsilon(1e-10));
}

TEST_CASE("Lanczos path agrees with the tensor solver above the dense cap") {
  DiscreteOperator A = oscillator(2, 70, 7.0);  // 4900 unknowns
  EigOptions lanczos_opt;
  lanczos_opt.allow_tensor = false;
  SpectralData Sl = eigensolve(A, EigRequest::lowest(8), lanczos_opt);
  SpectralData St = eigensolve(A, EigRequest::lowest(8));
  for (int k = 0; k < 8; ++k)
    CHECK(Sl.eigenvalues[k] == doctest::Approx(St.eigenvalues[k]).epsilon(1e-7));
  // degenerate pair lambda = 4 (multiplicity 2 for the 2-D oscillator)
  CHECK(Sl.eigenvalues[1] == doctest::Approx(Sl.eigenvalues[2]).epsilon(1e-6));
}

TEST_CASE("cutoff request returns exactly the eigenvalues below the level") {
  DiscreteOperator A = oscillator(1, 600);
  SpectralData S = eigensolve(A, EigRequest::below(10.0));
  CHECK(S.count() == 5);  // 1,3,5,7,9
  CHECK(S.coverage >= 10.0);
  SpectralData empty = eigensolve(A, EigRequest::below(0.5));
  CHECK(empty.count() == 0);
}

TEST_CASE("spectral projection is idempotent and contracts") {
  DiscreteOperator A = oscillator(1, 400);
  SpectralData S = eigensolve(A, EigRequest::below(12.0));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd f(A.size());
  for (auto& x : f) x = gauss(rng);
  Eigen::VectorXd p1 = spectral_project(S, 8.0, f);
  Eigen::VectorXd p2 = spectral_project(S, 8.0, p1);
  CHECK((p1 - p2).norm() <= 1e-10 * p1.norm());
  CHECK(p1.norm() <= f.norm() * (1.0 + 1e-12));
  CHECK((spectral_project(S, S.eigenvalues[0], S.vectors.col(0)) - S.vectors.col(0)).norm() <=
        1e-10);
  CHECK(spectral_project(S, S.eigenvalues[0], S.vectors.col(3)).norm() <= 1e-10);
  CHECK_THROWS(spectral_project(S, 100.0, f));
}

TEST_CASE("semigroup: identity at t=0, scalar decay, composition, monotone norm") {
  DiscreteOperator A = oscillator(1, 400);
  SpectralData S = eigensolve(A, EigRequest::lowest(20));
  Eigen::VectorXd f = S.vectors.col(0) + 0.5 * S.vectors.col(3);
  CHECK((semigroup_apply(S, 0.0, 1.0, f) - f).norm() <= 1e-12 * f.norm());
  Eigen::VectorXd one = semigroup_apply(S, 0.7, 1.5, S.vectors.col(2));
  const double lam = S.eigenvalues[2];
  CHECK((one - std::exp(-0.7 * std::pow(lam, 1.5)) * S.vectors.col(2)).norm() <= 1e-12);
  Eigen::VectorXd ab = semigroup_apply(S, 0.3, 1.0, semigroup_apply(S, 0.4, 1.0, f));
  Eigen::VectorXd direct = semigroup_apply(S, 0.7, 1.0, f);
  CHECK((ab - direct).norm() <= 1e-10 * direct.norm());
  double prev = f.norm();
  for (double t : {0.1, 0.2, 0.5, 1.0}) {
    const double cur = semigroup_apply(S, t, 1.0, f).norm();
    CHECK(cur <= prev * (1.0 + 1e-12));
    prev = cur;
  }
  CHECK_THROWS(semigroup_apply(S, -1.0, 1.0, f));
}

TEST_CASE("ground-state convergence is second order and truncation-insensitive") {
  double errs[3];
  int N = 250;
  for (int i = 0; i < 3; ++i, N *= 2) {
    SpectralData S = eigensolve(oscillator(1, N), EigRequest::lowest(1));
    errs[i] = std::abs(S.eigenvalues[0] - 1.0);
  }
  for (int i = 0; i + 1 < 3; ++i) {
    const double order = std::log2(errs[i] / errs[i + 1]);
    CHECK(order >= 1.7);
    CHECK(order <= 2.3);
  }
  // enlarging the box from L=10 to 14 moves lambda_0 by < 1e-6
  SpectralData a = eigensolve(oscillator(1, 1000, 10.0), EigRequest::lowest(1));
  SpectralData b = eigensolve(oscillator(1, 1400, 14.0), EigRequest::lowest(1));
  CHECK(std::abs(a.eigenvalues[0] - b.eigenvalues[0]) < 1e-6);
}
