#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "grushinlab/grid.hpp"
#include "grushinlab/potential.hpp"

namespace grushinlab {

/// H = -Delta + V on a grid: 3-point second-order Laplacian per
/// dimension plus the diagonal of V at the nodes.  The stencil is
/// applied matrix-free; apply() is the OpenMP kernel, apply_serial()
/// the reference implementation the tests compare against.
struct DiscreteOperator {
  Grid grid;
  std::vector<double> diag;  // V at nodes, flat row-major

  // set when V is a sum of one-dimensional potentials; the operator is
  // then the Kronecker sum of the per-dimension tridiagonal operators
  std::optional<std::vector<std::vector<double>>> diag1d;

  void apply(const double* u, double* out) const;
  void apply_serial(const double* u, double* out) const;

  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;

  Eigen::SparseMatrix<double> sparse() const;
  Eigen::MatrixXd dense(std::size_t cap = 4000) const;

  std::size_t size() const { return grid.size(); }
};

/// Default cap on total unknowns (memory guard).
inline constexpr std::size_t kDefaultUnknownCap = 8'000'000;

DiscreteOperator discretize(const PotentialSpec& p, const Grid& g,
                            std::size_t max_unknowns = kDefaultUnknownCap);
DiscreteOperator discretize(const ScaledPotential& p, const Grid& g,
                            std::size_t max_unknowns = kDefaultUnknownCap);

}  // namespace grushinlab
