#include "grushinlab/constants.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace grushinlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double log_plus(double x) { return std::max(std::log(x), 0.0); }
}  // namespace

void AssumptionParams::validate() const {
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw std::invalid_argument("c1, c2 must be positive");
  if (!(beta1 > 0.0) || !(beta2 >= beta1))
    throw std::invalid_argument("need beta2 >= beta1 > 0");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be nonnegative");
  if (!(gamma > 0.0 && gamma < 0.5))
    throw std::invalid_argument("gamma must lie in (0, 1/2)");
  if (n < 1 || n > 3) throw std::invalid_argument("dimension must be 1..3");
}

BblBound bbl_lower_bound(double c, double beta, int n) {
  if (!(c > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("bbl_lower_bound needs c, beta > 0 (I diverges otherwise)");
  if (n < 1) throw std::invalid_argument("dimension must be positive");

  // F(t) = t [n + (n/2) ln(pi/t) - ln I(1/t)] with
  // ln I(1/t) = ln(sigma_n Gamma(n/beta)/beta) + (n/beta)(ln t - ln c)
  const double log_sigma_n =
      std::log(2.0) + 0.5 * n * std::log(M_PI) - std::lgamma(0.5 * n);
  const double K = log_sigma_n + std::lgamma(n / beta) - std::log(beta);
  auto F = [&](double t) {
    const double logI = K + (n / beta) * (std::log(t) - std::log(c));
    return t * (n + 0.5 * n * std::log(M_PI / t) - logI);
  };

  // the functional is t(A - B ln t); bracket the maximizer generously
  // and golden-section the 1-D maximization
  const double B = 0.5 * n + n / beta;
  const double A = n + 0.5 * n * std::log(M_PI) - K + (n / beta) * std::log(c);
  const double t_guess = std::exp(A / B - 1.0);
  double lo = t_guess / 64.0, hi = t_guess * 64.0;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = F(x1), f2 = F(x2);
  for (int it = 0; it < 200 && (hi - lo) > 1e-14 * t_guess; ++it) {
    if (f1 < f2) {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + gr * (hi - lo); f2 = F(x2);
    } else {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - gr * (hi - lo); f1 = F(x1);
    }
  }
  BblBound out;
  out.mu_star = F(0.5 * (lo + hi));
  out.lambda_star = out.mu_star / std::pow(c, 2.0 / (beta + 2.0));
  return out;
}

double localization_radius(double lambda, double c, double beta, int n, double C_hat) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  if (!(c > 0.0) || !(beta > 0.0) || !(C_hat > 0.0))
    throw std::invalid_argument("c, beta, C_hat must be positive");
  const double bracket = (n / beta + 0.5 * (n + 2)) * log_plus((lambda + 1.0) / c) +
                         0.5 * (n + 2) * log_plus(c) +
                         std::pow((lambda + 2.0) / c, 1.0 / beta) + 1.0;
  return C_hat * bracket;
}

double eigencount_bound(double lambda, double c, double beta, int n, double kappa_n) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  return kappa_n * std::pow(c, 0.5 * (n + 2)) *
         std::pow((lambda + 1.0) / c, n / beta + 0.5 * (n + 2));
}

SpectralExponent spectral_exponent(const AssumptionParams& params, double c1_eff,
                                   double c2_eff, double lambda) {
  params.validate();
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  SpectralExponent e;
  e.J = std::pow(1.0 + std::pow((lambda + 2.0) / c1_eff, 1.0 / params.beta1) +
                     0.5 * (params.n + 2) * log_plus(c1_eff),
                 0.5 * params.beta2);
  e.J_hat = std::sqrt(lambda) + std::sqrt(c2_eff) * e.J;
  e.script_J = std::pow(e.J, 2.0 * params.sigma / params.beta2) * e.J_hat;
  return e;
}

ExponentTable exponent_table(const AssumptionParams& params, double epsilon) {
  params.validate();
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const double b1 = params.beta1, b2 = params.beta2, sg = params.sigma;
  ExponentTable t;
  t.zeta = params.zeta();
  t.epsilon = epsilon;
  const double z = t.zeta;

  if (params.assumption == Assumption::A1) {
    t.branch = ExponentBranch::A1Case;
    t.a_minus = 0.5 - z;
    t.b_minus = 0.5 - z;
    t.a_plus = 0.5;
    t.degenerate_case = ((b1 - b2) * sg == 0.0);
    if (t.degenerate_case)
      t.b_plus = (1.0 - sg - 2.0 * z) / (b1 + 2.0);
    else
      t.b_plus = std::max(0.5 - sg / (b1 + 2.0), 1.0 / (b1 + 2.0)) -
                 2.0 * z / (b1 + 2.0);
    return t;
  }

  const double beta_star = 3.0 * b2 - 4.0 * b1 - 2.0;
  t.a_minus = 2.0 / 3.0 - z;
  t.a_plus = 2.0 / 3.0;
  if (beta_star <= 0.0) {
    t.branch = ExponentBranch::A2BetaStarNonpos;
    t.degenerate_case = (beta_star * sg == 0.0);
    if (t.degenerate_case)
      t.b_minus = -(sg / b1 + (b2 - b1) / ((b1 + 2.0) * b1));
    else
      t.b_minus = std::min(2.0 / 3.0 - b2 / (2.0 * b1) - sg / (b1 + 2.0),
                           1.0 / (b1 + 2.0) - sg / b1) -
                  2.0 * z / (b1 + 2.0);
    t.b_plus = -sg / (b1 + 2.0) + 2.0 / 3.0 - b2 / (2.0 * b1) -
               2.0 * z / (b1 + 2.0);
  } else {
    t.branch = ExponentBranch::A2BetaStarPos;
    t.b_minus = -(beta_star / (2.0 * (b1 + 2.0)) + sg / (b1 + 2.0) +
                  (2.0 * z - 1.0) / (b1 + 2.0));
    t.degenerate_case = (sg == 0.0);
    if (t.degenerate_case)
      t.b_plus = -(b2 - b1) / ((b1 + 2.0) * b1);
    else
      t.b_plus = std::max(2.0 / 3.0 - sg / (b1 + 2.0), 1.0 / (b1 + 2.0)) -
                 2.0 * z / (b1 + 2.0);
  }
  return t;
}

double critical_power(Assumption a, double beta1) {
  if (!(beta1 > 0.0)) throw std::invalid_argument("beta1 must be positive");
  return a == Assumption::A1 ? (beta1 + 2.0) / 4.0 : (beta1 + 2.0) / 3.0;
}

double cobs_formula(double T, double s, double r, const AssumptionParams& params,
                    const ExponentTable& table, const FreeConstants& fc) {
  params.validate();
  if (!(T > 0.0) || !(r > 0.0)) throw std::invalid_argument("T, r must be positive");
  if (!(s > table.zeta))
    throw std::invalid_argument("the observability formula requires s > zeta");
  const double L = std::log(1.0 / params.gamma);
  const double se = s / (s - table.zeta);
  const double a = (r < 1.0) ? table.a_minus : table.a_plus + table.epsilon;
  const double b = (r < 1.0) ? table.b_minus : table.b_plus + table.epsilon;
  const double arg = fc.C1 * L * std::pow(r, a) +
                     fc.C2 * std::pow(T, -table.zeta / (s - table.zeta)) *
                         std::pow(L, se) * std::pow(r, se * b) -
                     fc.C3 * T * std::pow(r, 2.0 * s / (params.beta1 + 2.0));
  return fc.C0 * std::exp(arg);
}

double proof_epsilon(double s, double zeta, double beta1, double nu) {
  return 0.5 * (2.0 * s / (beta1 + 2.0) - nu) * (s - zeta) / s;
}

SupBounds cobs_sup_bounds(double T, double s, const AssumptionParams& params,
                          const ExponentTable& table, const FreeConstants& fc) {
  params.validate();
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  if (!(s > table.zeta))
    throw std::invalid_argument("the observability formula requires s > zeta");

  SupBounds out;
  const double z = table.zeta;
  const double se = s / (s - z);
  const double L = std::log(1.0 / params.gamma);
  out.nu = std::max(table.a_plus, se * table.b_plus);

  out.sup_is_finite = true;
  if (table.a_minus < 0.0) {
    out.sup_is_finite = false;
    out.violated = "a_- < 0 (small-r sup infinite)";
  } else if (table.b_minus < 0.0) {
    out.sup_is_finite = false;
    out.violated = "b_- < 0 (small-r sup infinite)";
  } else if (!(2.0 * s / (params.beta1 + 2.0) > out.nu)) {
    out.sup_is_finite = false;
    out.violated = "2s/(beta1+2) <= nu (large-r decay too weak)";
  }

  // small-r uniform bound (r^{a_-}, r^{b_-} <= 1 when the exponents are
  // nonnegative)
  out.A0 = (table.a_minus >= 0.0 && table.b_minus >= 0.0)
               ? fc.C0 * std::pow(1.0 / params.gamma, fc.C1) *
                     std::exp(fc.C2 * std::pow(T, -z / (s - z)) * std::pow(L, se))
               : kInf;

  // large-r uniform bound: closed-form sup of C0 exp(A r^u - B r^v), r >= 1
  if (2.0 * s / (params.beta1 + 2.0) > out.nu) {
    out.epsilon = proof_epsilon(s, z, params.beta1, out.nu);
    const double u = out.nu + se * out.epsilon;
    const double v = 2.0 * s / (params.beta1 + 2.0);
    const double Ac = fc.C1 * std::pow(std::min(1.0, T), -z / (s - z)) * std::pow(L, se);
    const double Bc = fc.C3 * T;
    double best = Ac - Bc;  // r = 1
    if (u > 0.0 && u < v) {
      const double rstar = std::pow(Ac * u / (Bc * v), 1.0 / (v - u));
      if (rstar > 1.0)
        best = std::max(best, Ac * std::pow(rstar, u) - Bc * std::pow(rstar, v));
    }
    out.A1_bound = fc.C0 * std::exp(best);
    out.delta_sup = 1.0 / (s / (params.beta1 + 2.0) - 0.5 * out.nu);
  } else {
    out.A1_bound = kInf;
    out.delta_sup = kInf;
  }

  // sharpened B bounds: require beta1 = beta2, sigma = 0 (zeta = 1/2) and
  // s above the critical power
  const double sA = critical_power(params.assumption, params.beta1);
  if (params.beta1 == params.beta2 && params.sigma == 0.0 && s > sA) {
    out.delta_B = 2.0 * (params.beta1 + 2.0) / (s - sA);
    const double q = 2.0 * s / (2.0 * s - 1.0);
    const double head = std::pow(1.0 / params.gamma, fc.C1) *
                        std::exp(fc.C2 * std::pow(T, -1.0 / (2.0 * s - 1.0)) *
                                 std::pow(L, q));
    const double d = out.delta_B;
    out.B_minus = head + std::exp(fc.C3 *
                                  std::pow(T, -d - (1.0 + d) / (2.0 * s - 1.0)) *
                                  std::pow(L, q * (1.0 + d)));
    out.B_plus = head + std::exp(fc.C3 * std::pow(T, -d) * std::pow(L, q * (1.0 + d)));
  } else {
    out.delta_B = kInf;
    out.B_minus = out.B_plus = kInf;
  }
  return out;
}

}  // namespace grushinlab
