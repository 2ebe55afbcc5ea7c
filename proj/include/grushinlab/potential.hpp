#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace grushinlab {

enum class Assumption { A1, A2 };

using ScalarField = std::function<double(std::span<const double>)>;
using VectorField = std::function<std::vector<double>(std::span<const double>)>;

/// A nonnegative potential V on R^n together with the growth parameters
/// (c1, c2, beta1, beta2) it is declared to satisfy:
///   c1 |x|^beta1 <= V(x)                                 (A1 and A2)
///   |V| + |grad V| <= c2 (|x|+1)^beta2                   (A1)
///   |V1| + |grad V1| + |V2|^{4/3} <= c2 (|x|+1)^beta2    (A2, V = V1+V2)
struct PotentialSpec {
  int dim = 1;
  ScalarField value;
  VectorField gradient;  // optional; finite differences used when absent
  double c1 = 1.0, c2 = 1.0;
  double beta1 = 1.0, beta2 = 1.0;
  Assumption assumption = Assumption::A1;
  ScalarField split1, split2;  // A2 split, optional
  std::string label;

  // set when V(x) = sum_d v_d(x_d); enables the Kronecker-sum fast
  // path in the eigensolver (exact for the FD discretization)
  std::vector<std::function<double(double)>> separable_factors;

  void validate() const;
  double operator()(std::span<const double> x) const { return value(x); }
};

/// rV (+ Vtilde) with the parameter transformation carried along.
struct ScaledPotential {
  PotentialSpec combined;  // evaluator rV (+ additive), transformed params
  double r = 1.0;
  bool has_additive = false;
};

/// V(x) = c|x|^beta.  Classified A1 for beta >= 1; for beta < 1 the
/// smooth-cutoff split V1 = V(1-eta), V2 = V eta (eta = 1 on B_1, 0
/// outside B_2) is attached and the potential is classified A2 with c2
/// fitted numerically over an audit box.
PotentialSpec make_power_potential(double c, double beta, int n);

struct AssumptionAudit {
  bool holds = false;
  double worst_margin = 0.0;
  std::vector<double> worst_point;
  std::string detail;
};

/// Evaluates the declared inequalities of `p` on a uniform sample grid
/// over [-W, W]^n.  worst_margin is the minimum slack (bound minus
/// value); holds iff worst_margin >= -tolerance.
AssumptionAudit check_assumption(const PotentialSpec& p, double sample_box_halfwidth,
                                 int samples_per_dim, double tolerance = 1e-9);

/// Scaled potential rV (or rV + additive).  Under A1 the parameters
/// become (r c1, r c2); under A2, (r c1, r^{4/3} c2).  With an additive
/// potential sharing (c1, c2, beta1, beta2) the combination carries the
/// parameters with r replaced by r+1 (A1: (r+1)c1, (r+1)c2; A2:
/// (r+1)c1, (r^{4/3}+1)c2 <= ((r+1)^{4/3})c2 up to the documented slack).
ScaledPotential scale(const PotentialSpec& p, double r,
                      const std::optional<PotentialSpec>& additive = std::nullopt);

double norm2(std::span<const double> x);

/// Central finite-difference gradient with step 1e-5 * (1 + |x|).
std::vector<double> fd_gradient(const ScalarField& f, std::span<const double> x);

}  // namespace grushinlab
