#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "grushinlab/constants.hpp"
#include "grushinlab/control_sets.hpp"
#include "grushinlab/eigensolve.hpp"

namespace grushinlab {

/// Overlap and observability quadratic forms on a truncated eigenbasis:
///   G_jk = h^n sum_omega phi_j phi_k
///   M_jk = G_jk (1 - e^{-(l_j^s + l_k^s) T}) / (l_j^s + l_k^s)
///   D    = diag(e^{-2 T l_j^s})
/// Modes whose terminal weight is below 1e-16 of the largest are
/// dropped; kept_modes maps bundle indices back into the spectrum.
struct GramianBundle {
  const SpectralData* spectral = nullptr;
  double T = 1.0, s = 1.0;
  std::vector<int> kept_modes;
  std::vector<int> dropped_modes;
  Eigen::MatrixXd G;
  Eigen::MatrixXd M;
  Eigen::VectorXd D;
};

GramianBundle make_gramian(const SpectralData& S, const SetIndicator& mask,
                           double T, double s);

struct VerificationReport {
  std::string quantity;
  double empirical = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // bound - empirical (scaled)
  bool pass = false;
  // sweep metadata, NaN when not applicable
  double lambda = 0.0, gamma = 0.0, sigma = 0.0, T = 0.0, s = 0.0, r = 0.0;
};

struct SpectralRatio {
  double ratio = 0.0;  // max ||phi|| / ||phi||_omega over the window
  Eigen::VectorXd minimizer;  // coefficients of the attaining phi
};

SpectralRatio spectral_ratio(const SpectralData& S, double lambda,
                             const SetIndicator& mask);

struct LocalizationAudit {
  double rho_min_half_mass = 0.0;
  double C_hat_min = 0.0;
  double grid_spacing = 0.0;
};

/// Smallest rho such that every unit phi in the window lambda_k <=
/// lambda keeps at least half its mass in B_rho(0), by bisection on the
/// smallest eigenvalue of the ball-restricted overlap matrix.
LocalizationAudit localization_audit(const SpectralData& S, double lambda, double c,
                                     double beta);

struct WeightedNormRow {
  int k = 0;
  double lambda = 0.0;
  double weighted_norm_ratio = 0.0;   // ||e^{|x|/2} phi||^2 / ||phi||^2
  double weighted_grad_ratio = 0.0;   // ||e^{|x|/2} grad phi||^2 / ||phi||^2
  double bound = 0.0;                 // 7 e^{R^{1/beta}+1}
  double grad_constant = 0.0;         // grad ratio / e^{R^{1/beta}}
};

struct WeightedNormReport {
  std::vector<WeightedNormRow> rows;
  double max_norm_constant = 0.0;  // max ratio / bound
  double max_grad_constant = 0.0;
};

WeightedNormReport weighted_norm_audit(const SpectralData& S, double lambda, double c,
                                       double beta);

struct CaccioppoliAudit {
  double lhs = 0.0;           // ||grad phi||^2 on B_rho(z)
  double rhs = 0.0;           // (1+lambda) ||phi||^2 on B_2rho(z)
  double constant_min = 0.0;  // lhs / rhs
};

CaccioppoliAudit caccioppoli_audit(const SpectralData& S, int k, double rho,
                                   std::span<const double> z);

struct HarmonicLiftAudit {
  double H1_norm_sq = 0.0;
  double lower = 0.0;  // 2 rho ||phi||^2
  double upper = 0.0;  // 2 rho (1 + rho^2 (1+lambda) e^{2 rho sqrt(lambda)} / 3) ||phi||^2
};

/// Closed-form H^1 norm of the harmonic lift Phi(x,t) = sum a_k phi_k
/// sinh(sqrt(l_k) t)/sqrt(l_k) over R^n x (-rho, rho).  Coefficients
/// are given on the modes of S with indices in `support`, all of which
/// must have strictly positive eigenvalues.
HarmonicLiftAudit harmonic_lift_audit(const SpectralData& S,
                                      const std::vector<int>& support,
                                      const Eigen::VectorXd& coeffs, double rho);

/// Same quantity by Simpson quadrature in t and the discrete forward
/// difference in x; used as the oracle for the closed forms.
double harmonic_lift_quadrature(const SpectralData& S, const std::vector<int>& support,
                                const Eigen::VectorXd& coeffs, double rho,
                                int time_intervals = 400);

struct ObservabilityResult {
  double C_emp = 0.0;  // +inf when the Gramian is singular on the span
  Eigen::VectorXd worst_initial_state;  // coefficients over kept modes
};

ObservabilityResult gramian_observability(const GramianBundle& bundle);

struct ControlResult {
  std::vector<double> times;
  Eigen::MatrixXd control_coeffs;  // kept modes x times, h(t) = 1_omega sum eta-weighted flow
  double terminal_norm = 0.0;
  double cost = 0.0;
};

ControlResult synthesize_control(const GramianBundle& bundle, const Eigen::VectorXd& u0,
                                 double eps, int time_samples = 33);

struct CalibrationResult {
  double C_hat_fit = 0.0;
  double kappa_n_fit = 0.0;
  double C_spec_fit = 0.0;
};

CalibrationResult calibrate_free_constants(const SpectralData& S,
                                           const SetIndicator& mask,
                                           const AssumptionParams& params,
                                           const std::vector<double>& lambdas);

}  // namespace grushinlab
