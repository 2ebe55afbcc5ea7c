#pragma once

#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "grushinlab/operator.hpp"

namespace grushinlab {

/// Either the K lowest eigenpairs or all eigenpairs with lambda <= cutoff.
struct EigRequest {
  int count = 0;
  std::optional<double> cutoff;

  static EigRequest lowest(int k) { return {k, std::nullopt}; }
  static EigRequest below(double lambda_max) { return {0, lambda_max}; }
};

struct EigOptions {
  int dense_cap = 3000;        // dense solve at or below this many unknowns
  bool allow_tensor = true;    // Kronecker-sum fast path for separable V
  int max_basis = 1200;        // Lanczos basis cap per restart cycle
  double residual_tol = 1e-9;  // ||A phi - lambda phi|| <= tol (1+|lambda|)
  unsigned seed = 20240913;
};

struct SpectralData {
  Grid grid;
  std::vector<double> eigenvalues;  // ascending
  Eigen::MatrixXd vectors;          // size x K, orthonormal wrt h^n sum
  // spectrum is known complete up to this level (cutoff, or the top
  // computed eigenvalue for count requests)
  double coverage = -std::numeric_limits<double>::infinity();

  int count() const { return static_cast<int>(eigenvalues.size()); }
  double weight() const { return grid.weight(); }

  /// h^n-weighted coefficients <phi_k, f> for all k.
  Eigen::VectorXd coefficients(const Eigen::VectorXd& f) const;
};

SpectralData eigensolve(const DiscreteOperator& A, const EigRequest& req,
                        const EigOptions& opt = {});

/// Projection onto span{phi_k : lambda_k <= lambda}.  Throws when the
/// requested level exceeds the verified coverage.
Eigen::VectorXd spectral_project(const SpectralData& S, double lambda,
                                 const Eigen::VectorXd& f);

/// e^{-t H^s} f applied spectrally.  f must lie in span(S) up to a tail
/// that the top of the covered spectrum damps below tail_tol * ||f||.
Eigen::VectorXd semigroup_apply(const SpectralData& S, double t, double s,
                                const Eigen::VectorXd& f, double tail_tol = 1e-10);

}  // namespace grushinlab
