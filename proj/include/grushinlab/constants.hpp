#pragma once

#include <string>

#include "grushinlab/potential.hpp"

namespace grushinlab {

struct AssumptionParams {
  Assumption assumption = Assumption::A1;
  double c1 = 1.0, c2 = 1.0;
  double beta1 = 1.0, beta2 = 1.0;
  double sigma = 0.0;
  double gamma = 0.25;  // in (0, 1/2)
  int n = 1;

  void validate() const;
  double zeta() const { return (beta2 + 2.0 * sigma) / (2.0 * beta1); }
};

enum class ExponentBranch { A1Case, A2BetaStarNonpos, A2BetaStarPos };

struct ExponentTable {
  double zeta = 0.0;
  double a_minus = 0.0, b_minus = 0.0;
  double a_plus = 0.0, b_plus = 0.0;
  double epsilon = 0.0;
  ExponentBranch branch = ExponentBranch::A1Case;
  bool degenerate_case = false;  // the sigma / (beta1-beta2) special rows
};

struct BblBound {
  double mu_star = 0.0;     // lower bound on lambda_0(-Delta + c|x|^beta)
  double lambda_star = 0.0; // mu_star normalized to c = 1 scale
};

/// Lower bound for the ground state of -Delta + c|x|^beta on R^n,
/// computed by maximizing t [n + (n/2) ln(pi/t) - ln I(1/t)] over t>0
/// with I(a) = integral of e^{-a c |x|^beta}.
BblBound bbl_lower_bound(double c, double beta, int n);

/// rho(lambda): radius outside which eigenfunctions below lambda carry
/// less than half their mass (up to the dimensional constant C_hat).
double localization_radius(double lambda, double c, double beta, int n, double C_hat);

/// Counting-function bound kappa_n c^{(n+2)/2} ((lambda+1)/c)^{n/beta+(n+2)/2}.
double eigencount_bound(double lambda, double c, double beta, int n, double kappa_n);

struct SpectralExponent {
  double J = 0.0, J_hat = 0.0, script_J = 0.0;
};

SpectralExponent spectral_exponent(const AssumptionParams& params, double c1_eff,
                                   double c2_eff, double lambda);

ExponentTable exponent_table(const AssumptionParams& params, double epsilon);

double critical_power(Assumption a, double beta1);

/// Constants the source analysis leaves non-explicit; defaults of 1,
/// calibrated empirically by the verify module where possible.
struct FreeConstants {
  double C_hat = 1.0;    // localization radius prefactor
  double kappa_n = 1.0;  // eigenvalue-count prefactor
  double C_spec = 1.0;   // spectral-inequality exponent prefactor
  double C0 = 1.0, C1 = 1.0, C2 = 1.0, C3 = 1.0, C4 = 1.0, C5 = 1.0;
};

/// Observability-constant formula C0 exp[C1 log(1/g) r^a
/// + C2 T^{-z/(s-z)} log^{s/(s-z)}(1/g) r^{(s/(s-z)) b} - C3 T r^{2s/(b1+2)}],
/// with (a,b) = (a-, b-) for r < 1 and (a+ + eps, b+ + eps) for r >= 1.
double cobs_formula(double T, double s, double r, const AssumptionParams& params,
                    const ExponentTable& table, const FreeConstants& fc);

struct SupBounds {
  bool sup_is_finite = false;
  std::string violated;  // empty when finite
  double nu = 0.0;       // max(a+, s/(s-z) b+)
  double epsilon = 0.0;  // the proof's choice for the r >= 1 exponents
  double A0 = 0.0;
  double A1_bound = 0.0;
  double delta_sup = 0.0;   // (s/(b1+2) - nu/2)^{-1}
  double B_minus = 0.0, B_plus = 0.0;
  double delta_B = 0.0;     // 2(b1+2)/(s - s_A)
};

SupBounds cobs_sup_bounds(double T, double s, const AssumptionParams& params,
                          const ExponentTable& table, const FreeConstants& fc);

/// The proof's epsilon for the r >= 1 exponents: half the slack between
/// 2s/(b1+2) and nu, rescaled by (s-z)/s.
double proof_epsilon(double s, double zeta, double beta1, double nu);

}  // namespace grushinlab
