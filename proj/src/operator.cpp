#include "grushinlab/operator.hpp"

#include <cstddef>
#include <stdexcept>

namespace grushinlab {

namespace {

// out = (-Delta u)_p + diag_p u_p for one flat index p, any dimension.
// Dirichlet: missing neighbors contribute 0.  Periodic: indices wrap.
template <bool kPeriodic>
inline double stencil_at(const Grid& g, const double* diag, const double* u,
                         std::size_t p, const int* idx) {
  const int N = g.points_per_dim;
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  double acc = diag[p] * u[p];
  std::size_t stride = 1;
  for (int d = g.n - 1; d >= 0; --d) {
    const int i = idx[d];
    double left = 0.0, right = 0.0;
    if constexpr (kPeriodic) {
      left = u[i > 0 ? p - stride : p + stride * (N - 1)];
      right = u[i < N - 1 ? p + stride : p - stride * (N - 1)];
    } else {
      if (i > 0) left = u[p - stride];
      if (i < N - 1) right = u[p + stride];
    }
    acc += (2.0 * u[p] - left - right) * inv_h2;
    stride *= static_cast<std::size_t>(N);
  }
  return acc;
}

template <bool kPeriodic>
void apply_impl(const Grid& g, const double* diag, const double* u, double* out,
                bool parallel) {
  const std::size_t size = g.size();
  const std::int64_t n = static_cast<std::int64_t>(size);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t p = 0; p < n; ++p) {
    auto idx = g.unflatten(static_cast<std::size_t>(p));
    out[p] = stencil_at<kPeriodic>(g, diag, u, static_cast<std::size_t>(p), idx.data());
  }
}

}  // namespace

void DiscreteOperator::apply(const double* u, double* out) const {
  if (grid.boundary == Boundary::Periodic)
    apply_impl<true>(grid, diag.data(), u, out, true);
  else
    apply_impl<false>(grid, diag.data(), u, out, true);
}

void DiscreteOperator::apply_serial(const double* u, double* out) const {
  if (grid.boundary == Boundary::Periodic)
    apply_impl<true>(grid, diag.data(), u, out, false);
  else
    apply_impl<false>(grid, diag.data(), u, out, false);
}

Eigen::VectorXd DiscreteOperator::apply(const Eigen::VectorXd& u) const {
  if (static_cast<std::size_t>(u.size()) != size())
    throw std::invalid_argument("operator/vector size mismatch");
  Eigen::VectorXd out(u.size());
  apply(u.data(), out.data());
  return out;
}

Eigen::SparseMatrix<double> DiscreteOperator::sparse() const {
  const std::size_t size = grid.size();
  const int N = grid.points_per_dim;
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  const bool periodic = grid.boundary == Boundary::Periodic;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(size * (1 + 2 * grid.n));
  for (std::size_t p = 0; p < size; ++p) {
    trip.emplace_back(static_cast<int>(p), static_cast<int>(p),
                      diag[p] + 2.0 * grid.n * inv_h2);
    auto idx = grid.unflatten(p);
    std::size_t stride = 1;
    for (int d = grid.n - 1; d >= 0; --d) {
      const int i = idx[d];
      auto link = [&](std::size_t q) {
        trip.emplace_back(static_cast<int>(p), static_cast<int>(q), -inv_h2);
      };
      if (i > 0) link(p - stride);
      else if (periodic) link(p + stride * (N - 1));
      if (i < N - 1) link(p + stride);
      else if (periodic) link(p - stride * (N - 1));
      stride *= static_cast<std::size_t>(N);
    }
  }
  Eigen::SparseMatrix<double> A(static_cast<int>(size), static_cast<int>(size));
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

Eigen::MatrixXd DiscreteOperator::dense(std::size_t cap) const {
  if (size() > cap) throw std::runtime_error("dense assembly over size cap");
  return Eigen::MatrixXd(sparse());
}

namespace {

DiscreteOperator discretize_impl(const PotentialSpec& p, const Grid& g,
                                 std::size_t max_unknowns) {
  if (p.dim != g.n) throw std::invalid_argument("potential/grid dimension mismatch");
  // separable potentials stay usable past the cap via the Kronecker-sum
  // eigensolver: only the per-dimension diagonals are materialized
  if (g.size() > max_unknowns && p.separable_factors.empty())
    throw std::runtime_error("grid exceeds the configured unknown cap");
  DiscreteOperator op;
  op.grid = g;
  if (g.size() <= max_unknowns) {
    op.diag.resize(g.size());
    const std::int64_t n = static_cast<std::int64_t>(g.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t q = 0; q < n; ++q) {
      double x[3];
      g.node(static_cast<std::size_t>(q), x);
      op.diag[q] = p.value(std::span<const double>(x, g.n));
    }
  }
  if (!p.separable_factors.empty()) {
    if (static_cast<int>(p.separable_factors.size()) != g.n)
      throw std::invalid_argument("separable factor count != dimension");
    std::vector<std::vector<double>> d1(g.n);
    for (int d = 0; d < g.n; ++d) {
      d1[d].resize(g.points_per_dim);
      for (int i = 0; i < g.points_per_dim; ++i)
        d1[d][i] = p.separable_factors[d](g.coord1d(i));
    }
    op.diag1d = std::move(d1);
  }
  return op;
}

}  // namespace

DiscreteOperator discretize(const PotentialSpec& p, const Grid& g,
                            std::size_t max_unknowns) {
  return discretize_impl(p, g, max_unknowns);
}

DiscreteOperator discretize(const ScaledPotential& p, const Grid& g,
                            std::size_t max_unknowns) {
  return discretize_impl(p.combined, g, max_unknowns);
}

}  // namespace grushinlab
