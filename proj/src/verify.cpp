#include "grushinlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace grushinlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// (1 - e^{-aT}) / a, continuous at a = 0
double theta(double a, double T) {
  if (a * T < 1e-12) return T * (1.0 - 0.5 * a * T);
  return -std::expm1(-a * T) / a;
}

std::vector<int> window_indices(const SpectralData& S, double lambda) {
  std::vector<int> idx;
  for (int k = 0; k < S.count(); ++k)
    if (S.eigenvalues[k] <= lambda) idx.push_back(k);
  return idx;
}

// h^n-weighted overlap matrix over the masked nodes for the given modes
Eigen::MatrixXd overlap(const SpectralData& S, const SetIndicator& mask,
                        const std::vector<int>& idx) {
  const std::size_t size = S.grid.size();
  if (mask.mask.size() != size)
    throw std::invalid_argument("mask/grid size mismatch");
  Eigen::MatrixXd sub(size, idx.size());
  for (std::size_t c = 0; c < idx.size(); ++c) {
    for (std::size_t p = 0; p < size; ++p)
      sub(p, c) = mask.mask[p] ? S.vectors(p, idx[c]) : 0.0;
  }
  return S.weight() * (sub.transpose() * sub);
}

// Exact discrete Dirichlet gradient energy: sum over all edges
// (including the boundary edges against the zero exterior) of the
// squared forward difference, times h^n.  Equals <A u, u> - <V u, u>.
double grad_energy(const Grid& g, const Eigen::VectorXd& u) {
  const int N = g.points_per_dim;
  const double h = g.spacing();
  double acc = 0.0;
  std::size_t stride = 1;
  for (int d = g.n - 1; d >= 0; --d) {
    for (std::size_t p = 0; p < g.size(); ++p) {
      auto idx = g.unflatten(p);
      const double right = idx[d] < N - 1 ? u[p + stride] : 0.0;
      const double diff = (right - u[p]) / h;
      acc += diff * diff;
      if (idx[d] == 0) acc += (u[p] / h) * (u[p] / h);  // left boundary edge
    }
    stride *= static_cast<std::size_t>(N);
  }
  return g.weight() * acc;
}

// <grad u, grad v> in the same edge-based discrete sense
double grad_inner(const Grid& g, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  const int N = g.points_per_dim;
  const double h = g.spacing();
  double acc = 0.0;
  std::size_t stride = 1;
  for (int d = g.n - 1; d >= 0; --d) {
    for (std::size_t p = 0; p < g.size(); ++p) {
      auto idx = g.unflatten(p);
      const double ru = idx[d] < N - 1 ? u[p + stride] : 0.0;
      const double rv = idx[d] < N - 1 ? v[p + stride] : 0.0;
      acc += (ru - u[p]) * (rv - v[p]) / (h * h);
      if (idx[d] == 0) acc += u[p] * v[p] / (h * h);
    }
    stride *= static_cast<std::size_t>(N);
  }
  return g.weight() * acc;
}

}  // namespace

GramianBundle make_gramian(const SpectralData& S, const SetIndicator& mask,
                           double T, double s) {
  if (!(T > 0.0) || !(s > 0.0)) throw std::invalid_argument("T, s must be positive");
  GramianBundle b;
  b.spectral = &S;
  b.T = T;
  b.s = s;

  std::vector<double> pw(S.count());
  double wmax = 0.0;
  for (int k = 0; k < S.count(); ++k) {
    pw[k] = std::exp(-2.0 * T * std::pow(std::max(0.0, S.eigenvalues[k]), s));
    wmax = std::max(wmax, pw[k]);
  }
  for (int k = 0; k < S.count(); ++k) {
    if (pw[k] >= 1e-16 * wmax)
      b.kept_modes.push_back(k);
    else
      b.dropped_modes.push_back(k);
  }

  b.G = overlap(S, mask, b.kept_modes);
  const int m = static_cast<int>(b.kept_modes.size());
  b.M.resize(m, m);
  b.D.resize(m);
  for (int j = 0; j < m; ++j) {
    const double lj = std::pow(std::max(0.0, S.eigenvalues[b.kept_modes[j]]), s);
    b.D[j] = std::exp(-2.0 * T * lj);
    for (int k = 0; k <= j; ++k) {
      const double lk = std::pow(std::max(0.0, S.eigenvalues[b.kept_modes[k]]), s);
      const double v = b.G(j, k) * theta(lj + lk, T);
      b.M(j, k) = b.M(k, j) = v;
    }
  }
  return b;
}

SpectralRatio spectral_ratio(const SpectralData& S, double lambda,
                             const SetIndicator& mask) {
  auto idx = window_indices(S, lambda);
  if (idx.empty()) throw std::runtime_error("empty spectral subspace below lambda");
  Eigen::MatrixXd G = overlap(S, mask, idx);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  SpectralRatio out;
  out.minimizer = es.eigenvectors().col(0);
  const double mu = es.eigenvalues()[0];
  out.ratio = mu > 1e-14 ? 1.0 / std::sqrt(mu) : kInf;
  return out;
}

LocalizationAudit localization_audit(const SpectralData& S, double lambda, double c,
                                     double beta) {
  if (lambda > S.coverage + 1e-12)
    throw std::runtime_error("window exceeds the computed spectrum coverage");
  auto idx = window_indices(S, lambda);
  if (idx.empty()) throw std::runtime_error("empty spectral subspace below lambda");

  const Grid& g = S.grid;
  auto min_mass = [&](double rho) {
    SetIndicator ball = indicator_from_predicate(
        g, [rho](std::span<const double> x) { return norm2(x) <= rho; });
    Eigen::MatrixXd G = overlap(S, ball, idx);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    return es.eigenvalues()[0];
  };

  // half of the L^2 mass, i.e. a 1/2 fraction of ||phi||^2, for the worst
  // unit vector in the window (smallest Gramian eigenvalue)
  double hi = g.halfwidth * std::sqrt(static_cast<double>(g.n));
  if (min_mass(hi) < 0.5)
    throw std::runtime_error("domain truncation too tight for the half-mass radius");
  double lo = 0.0;
  while (hi - lo > 0.25 * g.spacing()) {
    const double mid = 0.5 * (lo + hi);
    (min_mass(mid) >= 0.5 ? hi : lo) = mid;
  }

  LocalizationAudit out;
  out.rho_min_half_mass = hi;
  out.grid_spacing = g.spacing();
  out.C_hat_min = hi / localization_radius(lambda, c, beta, g.n, 1.0);
  return out;
}

WeightedNormReport weighted_norm_audit(const SpectralData& S, double lambda, double c,
                                       double beta) {
  auto idx = window_indices(S, lambda);
  if (idx.empty()) throw std::runtime_error("empty spectral subspace below lambda");
  const Grid& g = S.grid;
  const std::size_t size = g.size();
  const int N = g.points_per_dim;

  // e^{|x|} weights at nodes
  Eigen::VectorXd wexp(size);
  for (std::size_t p = 0; p < size; ++p) {
    double x[3];
    g.node(p, x);
    wexp[p] = std::exp(norm2(std::span<const double>(x, g.n)));
  }

  WeightedNormReport rep;
  for (int k : idx) {
    Eigen::VectorXd phi = S.vectors.col(k);
    // tail resolution: the weighted eigenfunction must be negligible at
    // the truncation boundary
    double boundary_max = 0.0, global_max = 0.0;
    for (std::size_t p = 0; p < size; ++p) {
      auto gi = g.unflatten(p);
      bool bdry = false;
      for (int d = 0; d < g.n; ++d) bdry |= (gi[d] == 0 || gi[d] == N - 1);
      const double v = std::sqrt(wexp[p]) * std::abs(phi[p]);
      global_max = std::max(global_max, v);
      if (bdry) boundary_max = std::max(boundary_max, v);
    }
    if (boundary_max > 1e-8 * global_max) {
      std::ostringstream os;
      os << "weighted tail unresolved at the boundary for mode " << k
         << "; halfwidth " << g.halfwidth << " too small, try >= " << 1.5 * g.halfwidth;
      throw std::runtime_error(os.str());
    }

    const double norm2phi = g.weight() * phi.squaredNorm();
    const double wnorm = g.weight() * (wexp.array() * phi.array().square()).sum();

    // weighted gradient: edge-based forward differences, weight taken
    // at the left node of each edge
    double gacc = 0.0;
    std::size_t stride = 1;
    const double h = g.spacing();
    for (int d = g.n - 1; d >= 0; --d) {
      for (std::size_t p = 0; p < size; ++p) {
        auto gi = g.unflatten(p);
        const double right = gi[d] < N - 1 ? phi[p + stride] : 0.0;
        const double diff = (right - phi[p]) / h;
        gacc += wexp[p] * diff * diff;
        if (gi[d] == 0) gacc += wexp[p] * (phi[p] / h) * (phi[p] / h);
      }
      stride *= static_cast<std::size_t>(N);
    }
    const double wgrad = g.weight() * gacc;

    WeightedNormRow row;
    row.k = k;
    row.lambda = S.eigenvalues[k];
    const double R = std::max((row.lambda + 2.0) / c, 1.0);
    row.weighted_norm_ratio = wnorm / norm2phi;
    row.weighted_grad_ratio = wgrad / norm2phi;
    row.bound = 7.0 * std::exp(std::pow(R, 1.0 / beta) + 1.0);
    row.grad_constant = row.weighted_grad_ratio / std::exp(std::pow(R, 1.0 / beta));
    rep.max_norm_constant =
        std::max(rep.max_norm_constant, row.weighted_norm_ratio / row.bound);
    rep.max_grad_constant = std::max(rep.max_grad_constant, row.grad_constant);
    rep.rows.push_back(row);
  }
  return rep;
}

CaccioppoliAudit caccioppoli_audit(const SpectralData& S, int k, double rho,
                                   std::span<const double> z) {
  if (k < 0 || k >= S.count()) throw std::invalid_argument("eigen index out of range");
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  const Grid& g = S.grid;
  double zmax = 0.0;
  for (double v : z) zmax = std::max(zmax, std::abs(v));
  if (zmax + 2.0 * rho > g.halfwidth)
    throw std::invalid_argument("B_2rho(z) exits the truncated domain");

  const std::size_t size = g.size();
  const int N = g.points_per_dim;
  const double h = g.spacing();
  const Eigen::VectorXd phi = S.vectors.col(k);

  double lhs_acc = 0.0, mass2 = 0.0;
  for (std::size_t p = 0; p < size; ++p) {
    double x[3];
    g.node(p, x);
    double d2 = 0.0;
    for (int d = 0; d < g.n; ++d) d2 += (x[d] - z[d]) * (x[d] - z[d]);
    if (d2 <= 4.0 * rho * rho) mass2 += phi[p] * phi[p];
    if (d2 <= rho * rho) {
      auto gi = g.unflatten(p);
      std::size_t stride = 1;
      for (int d = g.n - 1; d >= 0; --d) {
        const double right = gi[d] < N - 1 ? phi[p + stride] : 0.0;
        const double diff = (right - phi[p]) / h;
        lhs_acc += diff * diff;
        stride *= static_cast<std::size_t>(N);
      }
    }
  }
  CaccioppoliAudit out;
  out.lhs = g.weight() * lhs_acc;
  out.rhs = (1.0 + S.eigenvalues[k]) * g.weight() * mass2;
  out.constant_min = out.rhs > 0.0 ? out.lhs / out.rhs : kInf;
  return out;
}

namespace {

// integral over (-rho, rho) of sinh(at) sinh(bt)
double int_sinh_sinh(double a, double b, double rho) {
  const double plus = std::sinh((a + b) * rho) / (a + b);
  const double d = a - b;
  const double minus = std::abs(d) * rho < 1e-8
                           ? rho * (1.0 + d * d * rho * rho / 6.0)
                           : std::sinh(d * rho) / d;
  return plus - minus;
}

double int_cosh_cosh(double a, double b, double rho) {
  const double plus = std::sinh((a + b) * rho) / (a + b);
  const double d = a - b;
  const double minus = std::abs(d) * rho < 1e-8
                           ? rho * (1.0 + d * d * rho * rho / 6.0)
                           : std::sinh(d * rho) / d;
  return plus + minus;
}

}  // namespace

HarmonicLiftAudit harmonic_lift_audit(const SpectralData& S,
                                      const std::vector<int>& support,
                                      const Eigen::VectorXd& coeffs, double rho) {
  if (support.empty()) throw std::invalid_argument("empty support");
  if (coeffs.size() != static_cast<Eigen::Index>(support.size()))
    throw std::invalid_argument("coefficient/support size mismatch");
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  const int m = static_cast<int>(support.size());
  std::vector<double> sq(m);
  double lam_max = 0.0;
  for (int i = 0; i < m; ++i) {
    const double l = S.eigenvalues[support[i]];
    if (!(l > 0.0))
      throw std::invalid_argument("harmonic lift requires strictly positive eigenvalues");
    sq[i] = std::sqrt(l);
    lam_max = std::max(lam_max, l);
  }

  // K_ij = <grad phi_i, grad phi_j> in the exact discrete sense
  Eigen::MatrixXd K(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j)
      K(i, j) = K(j, i) =
          grad_inner(S.grid, S.vectors.col(support[i]), S.vectors.col(support[j]));

  double l2 = 0.0, dt = 0.0, dx = 0.0;
  for (int i = 0; i < m; ++i) {
    l2 += coeffs[i] * coeffs[i] * int_sinh_sinh(sq[i], sq[i], rho) / (sq[i] * sq[i]);
    dt += coeffs[i] * coeffs[i] * int_cosh_cosh(sq[i], sq[i], rho);
    for (int j = 0; j < m; ++j)
      dx += coeffs[i] * coeffs[j] * K(i, j) * int_sinh_sinh(sq[i], sq[j], rho) /
            (sq[i] * sq[j]);
  }

  HarmonicLiftAudit out;
  out.H1_norm_sq = l2 + dt + dx;
  const double phi2 = coeffs.squaredNorm();
  out.lower = 2.0 * rho * phi2;
  out.upper = 2.0 * rho *
              (1.0 + rho * rho / 3.0 * (1.0 + lam_max) *
                         std::exp(2.0 * rho * std::sqrt(lam_max))) *
              phi2;
  return out;
}

double harmonic_lift_quadrature(const SpectralData& S, const std::vector<int>& support,
                                const Eigen::VectorXd& coeffs, double rho,
                                int time_intervals) {
  if (time_intervals % 2 != 0) ++time_intervals;
  const int m = static_cast<int>(support.size());
  std::vector<double> sq(m);
  for (int i = 0; i < m; ++i) sq[i] = std::sqrt(S.eigenvalues[support[i]]);
  const double dt = 2.0 * rho / time_intervals;

  double acc = 0.0;
  for (int it = 0; it <= time_intervals; ++it) {
    const double t = -rho + it * dt;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(S.grid.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(S.grid.size());
    for (int i = 0; i < m; ++i) {
      u += coeffs[i] * std::sinh(sq[i] * t) / sq[i] * S.vectors.col(support[i]);
      v += coeffs[i] * std::cosh(sq[i] * t) * S.vectors.col(support[i]);
    }
    const double integrand = S.weight() * u.squaredNorm() + grad_energy(S.grid, u) +
                             S.weight() * v.squaredNorm();
    const double w = (it == 0 || it == time_intervals) ? 1.0 : (it % 2 == 1 ? 4.0 : 2.0);
    acc += w * integrand;
  }
  return acc * dt / 3.0;
}

ObservabilityResult gramian_observability(const GramianBundle& bundle) {
  ObservabilityResult out;
  const int m = static_cast<int>(bundle.kept_modes.size());
  if (m == 0) {
    out.C_emp = kInf;
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> mspec(bundle.M);
  const double mmin = mspec.eigenvalues()[0];
  const double mmax = mspec.eigenvalues()[m - 1];
  if (mmin < -1e-10 * std::max(1.0, mmax)) {
    std::ostringstream os;
    os << "observability matrix numerically indefinite: eigenvalue range ["
       << mmin << ", " << mmax << "]";
    throw std::runtime_error(os.str());
  }
  if (mmin <= 1e-14 * std::max(1.0, mmax)) {
    out.C_emp = kInf;
    return out;
  }
  Eigen::MatrixXd D = bundle.D.asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(D, bundle.M);
  const int top = m - 1;
  out.C_emp = bundle.T * ges.eigenvalues()[top];
  out.worst_initial_state = ges.eigenvectors().col(top);
  const double nrm = out.worst_initial_state.norm();
  if (nrm > 0.0) out.worst_initial_state /= nrm;
  return out;
}

ControlResult synthesize_control(const GramianBundle& bundle, const Eigen::VectorXd& u0,
                                 double eps, int time_samples) {
  const SpectralData& S = *bundle.spectral;
  if (u0.size() != static_cast<Eigen::Index>(S.grid.size()))
    throw std::invalid_argument("initial state/grid size mismatch");
  const int m = static_cast<int>(bundle.kept_modes.size());
  Eigen::VectorXd all = S.coefficients(u0);

  Eigen::VectorXd w(m);
  for (int j = 0; j < m; ++j) {
    const double l = std::pow(std::max(0.0, S.eigenvalues[bundle.kept_modes[j]]), bundle.s);
    w[j] = std::exp(-bundle.T * l) * all[bundle.kept_modes[j]];
  }

  Eigen::MatrixXd Mreg = bundle.M;
  if (eps > 0.0) {
    Mreg.diagonal().array() += eps;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bundle.M);
    const double mmin = es.eigenvalues()[0];
    const double mmax = es.eigenvalues()[m - 1];
    if (mmin <= 1e-14 * std::max(1.0, mmax))
      throw std::runtime_error("Gramian singular; positive regularization required");
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(Mreg);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("Gramian solve failed");
  Eigen::VectorXd eta = ldlt.solve(-w);

  ControlResult out;
  Eigen::VectorXd terminal = w + bundle.M * eta;
  double tail2 = 0.0;
  for (int k : bundle.dropped_modes) {
    const double l = std::pow(std::max(0.0, S.eigenvalues[k]), bundle.s);
    const double c = std::exp(-bundle.T * l) * all[k];
    tail2 += c * c;
  }
  out.terminal_norm = std::sqrt(terminal.squaredNorm() + tail2);
  out.cost = eta.dot(bundle.M * eta);

  out.times.resize(time_samples);
  out.control_coeffs.resize(m, time_samples);
  for (int it = 0; it < time_samples; ++it) {
    const double t = bundle.T * it / (time_samples - 1);
    out.times[it] = t;
    for (int j = 0; j < m; ++j) {
      const double l =
          std::pow(std::max(0.0, S.eigenvalues[bundle.kept_modes[j]]), bundle.s);
      out.control_coeffs(j, it) = eta[j] * std::exp(-(bundle.T - t) * l);
    }
  }
  return out;
}

CalibrationResult calibrate_free_constants(const SpectralData& S,
                                           const SetIndicator& mask,
                                           const AssumptionParams& params,
                                           const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw std::invalid_argument("empty calibration sweep");
  CalibrationResult out;
  const double logg = std::log(1.0 / params.gamma);
  for (double lam : lambdas) {
    auto loc = localization_audit(S, lam, params.c1, params.beta1);
    out.C_hat_fit = std::max(out.C_hat_fit, loc.C_hat_min);

    const double count =
        static_cast<double>(window_indices(S, lam).size());
    const double bound =
        eigencount_bound(lam, params.c1, params.beta1, params.n, 1.0);
    out.kappa_n_fit = std::max(out.kappa_n_fit, count / bound);

    auto sr = spectral_ratio(S, lam, mask);
    if (std::isfinite(sr.ratio) && sr.ratio > 1.0) {
      auto ex = spectral_exponent(params, params.c1, params.c2, lam);
      out.C_spec_fit = std::max(out.C_spec_fit,
                                std::log(sr.ratio) / (logg * ex.script_J));
    }
  }
  return out;
}

}  // namespace grushinlab
