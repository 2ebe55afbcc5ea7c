#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace grushinlab {

enum class Boundary { Dirichlet, Periodic };

/// Uniform tensor grid on [-L, L]^n.  With Dirichlet boundary the N
/// points per dimension are the interior nodes, spacing h = 2L/(N+1);
/// with Periodic boundary the nodes tile the circle, spacing h = 2L/N.
struct Grid {
  int n = 1;
  double halfwidth = 1.0;
  int points_per_dim = 3;
  Boundary boundary = Boundary::Dirichlet;

  Grid() = default;
  Grid(int n_, double halfwidth_, int points_per_dim_,
       Boundary boundary_ = Boundary::Dirichlet)
      : n(n_), halfwidth(halfwidth_), points_per_dim(points_per_dim_),
        boundary(boundary_) {
    if (n < 1 || n > 3) throw std::invalid_argument("grid dimension must be 1..3");
    if (halfwidth <= 0.0) throw std::invalid_argument("grid halfwidth must be positive");
    if (points_per_dim < 3) throw std::invalid_argument("grid needs >= 3 points per dim");
  }

  double spacing() const {
    return boundary == Boundary::Dirichlet
               ? 2.0 * halfwidth / (points_per_dim + 1)
               : 2.0 * halfwidth / points_per_dim;
  }

  std::size_t size() const {
    std::size_t s = 1;
    for (int d = 0; d < n; ++d) s *= static_cast<std::size_t>(points_per_dim);
    return s;
  }

  /// Quadrature weight h^n of the grid inner product.
  double weight() const {
    double w = 1.0;
    for (int d = 0; d < n; ++d) w *= spacing();
    return w;
  }

  double coord1d(int i) const {
    return boundary == Boundary::Dirichlet
               ? -halfwidth + (i + 1) * spacing()
               : -halfwidth + i * spacing();
  }

  /// Multi-index of a flat node index (row-major, last dim fastest).
  std::array<int, 3> unflatten(std::size_t p) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int d = n - 1; d >= 0; --d) {
      idx[d] = static_cast<int>(p % points_per_dim);
      p /= points_per_dim;
    }
    return idx;
  }

  void node(std::size_t p, double* x) const {
    auto idx = unflatten(p);
    for (int d = 0; d < n; ++d) x[d] = coord1d(idx[d]);
  }

  std::vector<double> nodes1d() const {
    std::vector<double> xs(points_per_dim);
    for (int i = 0; i < points_per_dim; ++i) xs[i] = coord1d(i);
    return xs;
  }

  bool operator==(const Grid&) const = default;
};

}  // namespace grushinlab
