#include "grushinlab/grushin.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace grushinlab {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ExponentTable table_with_proof_epsilon(double s, const AssumptionParams& params) {
  ExponentTable t = exponent_table(params, 1e-3);
  const double se_nu = std::max(t.a_plus, s / (s - t.zeta) * t.b_plus);
  const double eps = proof_epsilon(s, t.zeta, params.beta1, se_nu);
  if (eps > 0.0) t.epsilon = eps;
  return t;
}
}  // namespace

double ModeFamily::symbol(const std::array<int, 2>& k) const {
  if (symbol_kind == ModeSymbol::Continuum) {
    double r = 0.0;
    for (int d = 0; d < m; ++d) r += static_cast<double>(k[d]) * k[d];
    return r;
  }
  if (m != 1) throw std::logic_error("discrete symbol implemented for m = 1");
  const double hy = 2.0 * M_PI / torus_points;
  return (2.0 - 2.0 * std::cos(k[0] * hy)) / (hy * hy);
}

const SpectralData& ModeFamily::spectrum(const std::array<int, 2>& k) const {
  return *spectrum_ptr(k);
}

std::shared_ptr<SpectralData> ModeFamily::spectrum_ptr(const std::array<int, 2>& k) const {
  auto it = spectra.find(symbol(k));
  if (it == spectra.end()) throw std::out_of_range("mode not built");
  return it->second;
}

bool ModeFamily::is_zero_mode(const std::array<int, 2>& k) const {
  for (int d = 0; d < m; ++d)
    if (k[d] != 0) return false;
  return true;
}

ModeFamily build_modes(const PotentialSpec& V, const std::optional<PotentialSpec>& Vtilde,
                       const Grid& xgrid, int max_mode, double s, int m, int eig_count,
                       ModeSymbol symbol, int torus_points, const EigOptions& opt) {
  if (max_mode < 0) throw std::invalid_argument("mode cap must be nonnegative");
  if (m < 1 || m > 2) throw std::invalid_argument("torus dimension must be 1 or 2");
  if (symbol == ModeSymbol::DiscreteFd && torus_points < 3)
    throw std::invalid_argument("discrete symbol needs the torus point count");
  V.validate();
  if (Vtilde) {
    Vtilde->validate();
    if (Vtilde->dim != xgrid.n) throw std::invalid_argument("Vtilde dimension mismatch");
  }

  ModeFamily fam;
  fam.V = V;
  fam.Vtilde = Vtilde;
  fam.xgrid = xgrid;
  fam.s = s;
  fam.m = m;
  fam.max_mode = max_mode;
  fam.symbol_kind = symbol;
  fam.torus_points = torus_points;

  std::array<int, 2> k{0, 0};
  for (k[0] = -max_mode; k[0] <= max_mode; ++k[0]) {
    if (m == 1) {
      fam.modes.push_back(k);
    } else {
      for (k[1] = -max_mode; k[1] <= max_mode; ++k[1]) fam.modes.push_back(k);
    }
  }

  for (const auto& mode : fam.modes) {
    const double r = fam.symbol(mode);
    if (fam.spectra.count(r)) continue;
    // H_{r V (+ Vtilde)}; r = 0 degenerates to the Dirichlet Laplacian
    // (plus Vtilde) on the truncated box
    DiscreteOperator op;
    try {
      if (r > 0.0) {
        ScaledPotential sp = scale(V, r, Vtilde);
        op = discretize(sp, xgrid);
      } else if (Vtilde) {
        op = discretize(*Vtilde, xgrid);
      } else {
        PotentialSpec zero;
        zero.dim = xgrid.n;
        zero.value = [](std::span<const double>) { return 0.0; };
        zero.c1 = zero.c2 = 1.0;
        zero.beta1 = zero.beta2 = 1.0;
        zero.label = "zero";
        op = discretize(zero, xgrid);
      }
      fam.spectra[r] = std::make_shared<SpectralData>(
          eigensolve(op, EigRequest::lowest(std::min<int>(eig_count,
                                                          static_cast<int>(xgrid.size()))),
                     opt));
    } catch (const std::exception& e) {
      throw std::runtime_error("eigensolve failed for mode |k|^2 = " +
                               std::to_string(r) + ": " + e.what());
    }
  }
  return fam;
}

double GrushinState::norm() const {
  const double hy = 2.0 * M_PI / torus_points;
  return std::sqrt(xgrid.weight() * hy * coeff.squaredNorm());
}

int mode_frequency(int column, int torus_points) {
  return column <= torus_points / 2 ? column : column - torus_points;
}

GrushinState to_modes(const Grid& xgrid, const Eigen::MatrixXd& field) {
  const int ny = static_cast<int>(field.cols());
  if (static_cast<std::size_t>(field.rows()) != xgrid.size())
    throw std::invalid_argument("field rows must match the x-grid");
  GrushinState st;
  st.xgrid = xgrid;
  st.torus_points = ny;
  st.coeff.resize(field.rows(), ny);
  const double scale = 1.0 / std::sqrt(static_cast<double>(ny));
  for (int j = 0; j < ny; ++j) {
    Eigen::VectorXcd col = Eigen::VectorXcd::Zero(field.rows());
    for (int l = 0; l < ny; ++l) {
      const double ang = -2.0 * M_PI * j * l / ny;
      col += field.col(l) * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    st.coeff.col(j) = scale * col;
  }
  return st;
}

Eigen::MatrixXd to_physical(const GrushinState& state) {
  const int ny = state.torus_points;
  Eigen::MatrixXd field(state.coeff.rows(), ny);
  const double scale = 1.0 / std::sqrt(static_cast<double>(ny));
  for (int l = 0; l < ny; ++l) {
    Eigen::VectorXcd col = Eigen::VectorXcd::Zero(state.coeff.rows());
    for (int j = 0; j < ny; ++j) {
      const double ang = 2.0 * M_PI * j * l / ny;
      col += state.coeff.col(j) * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    field.col(l) = scale * col.real();
  }
  return field;
}

GrushinState evolve(const ModeFamily& fam, const GrushinState& state, double t) {
  if (t < 0.0) throw std::invalid_argument("evolution time must be nonnegative");
  GrushinState out = state;
  for (int j = 0; j < state.torus_points; ++j) {
    const int k = mode_frequency(j, state.torus_points);
    if (std::abs(k) > fam.max_mode)
      throw std::out_of_range("state contains modes beyond the built family");
    const SpectralData& S = fam.spectrum({k, 0});
    Eigen::VectorXd re = state.coeff.col(j).real();
    Eigen::VectorXd im = state.coeff.col(j).imag();
    re = semigroup_apply(S, t, fam.s, re);
    im = semigroup_apply(S, t, fam.s, im);
    out.coeff.col(j) = re.cast<std::complex<double>>() +
                       std::complex<double>(0.0, 1.0) * im.cast<std::complex<double>>();
  }
  out.time = state.time + t;
  return out;
}

Eigen::MatrixXd direct_oracle(const PotentialSpec& V, const Grid& xgrid, int y_points,
                              double t, double s, const Eigen::MatrixXd& u0) {
  if (xgrid.n != 1) throw std::invalid_argument("oracle handles n = m = 1 only");
  const int nx = xgrid.points_per_dim;
  const int ny = y_points;
  const std::size_t total = static_cast<std::size_t>(nx) * ny;
  if (total > 10'000) throw std::invalid_argument("oracle size cap (10^4 unknowns) exceeded");
  if (u0.rows() != nx || u0.cols() != ny)
    throw std::invalid_argument("initial field has the wrong shape");

  const double hx = xgrid.spacing();
  const double hy = 2.0 * M_PI / ny;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(total, total);
  auto id = [&](int i, int j) { return static_cast<Eigen::Index>(i) * ny + j; };
  for (int i = 0; i < nx; ++i) {
    const double x = xgrid.coord1d(i);
    const double v = V.value(std::span<const double>(&x, 1));
    for (int j = 0; j < ny; ++j) {
      const auto p = id(i, j);
      A(p, p) += 2.0 / (hx * hx) + v * 2.0 / (hy * hy);
      if (i > 0) A(p, id(i - 1, j)) -= 1.0 / (hx * hx);
      if (i < nx - 1) A(p, id(i + 1, j)) -= 1.0 / (hx * hx);
      A(p, id(i, (j + 1) % ny)) -= v / (hy * hy);
      A(p, id(i, (j + ny - 1) % ny)) -= v / (hy * hy);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw std::runtime_error("oracle eigensolve failed");

  Eigen::VectorXd flat(total);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) flat[id(i, j)] = u0(i, j);
  Eigen::VectorXd coeff = es.eigenvectors().transpose() * flat;
  for (Eigen::Index q = 0; q < coeff.size(); ++q)
    coeff[q] *= std::exp(-t * std::pow(std::max(0.0, es.eigenvalues()[q]), s));
  Eigen::VectorXd evolved = es.eigenvectors() * coeff;

  Eigen::MatrixXd out(nx, ny);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) out(i, j) = evolved[id(i, j)];
  return out;
}

GrushinObservabilityReport grushin_observability(
    const ModeFamily& fam, const SetIndicator& mask_x, double T, double s,
    const std::optional<AssumptionParams>& params, const FreeConstants& fc) {
  GrushinObservabilityReport rep;
  rep.C_agg = 0.0;

  std::optional<ExponentTable> table;
  if (params) table = table_with_proof_epsilon(s, *params);

  for (const auto& k : fam.modes) {
    ModeObservabilityRow row;
    row.k = k;
    row.r = fam.symbol(k);
    row.thickness_fallback = fam.is_zero_mode(k);
    const SpectralData& S = fam.spectrum(k);
    GramianBundle bundle = make_gramian(S, mask_x, T, s);
    row.C_emp = gramian_observability(bundle).C_emp;
    row.paper_bound = (params && row.r > 0.0)
                          ? cobs_formula(T, s, row.r, *params, *table, fc)
                          : kNaN;
    if (row.C_emp >= rep.C_agg) {
      rep.C_agg = row.C_emp;
      rep.argmax_mode = k;
    }
    rep.rows.push_back(row);
  }
  const double ell = std::min(1.0, 2.0 * mask_x.grid.halfwidth);
  rep.k0_thickness = thickness(mask_x, ell).gamma_est;
  return rep;
}

std::vector<ScanRow> scan_scaled_observability(
    const PotentialSpec& V, const std::optional<PotentialSpec>& Vtilde,
    const std::vector<double>& r_values, const SetIndicator& mask, double T, double s,
    int eig_count, const std::optional<AssumptionParams>& params,
    const FreeConstants& fc, const EigOptions& opt) {
  std::optional<ExponentTable> table;
  if (params) table = table_with_proof_epsilon(s, *params);

  std::vector<ScanRow> rows;
  for (double r : r_values) {
    if (!(r > 0.0)) throw std::invalid_argument("scan values must be positive");
    ScaledPotential sp = scale(V, r, Vtilde);
    DiscreteOperator op = discretize(sp, mask.grid);
    SpectralData S = eigensolve(
        op, EigRequest::lowest(std::min<int>(eig_count, static_cast<int>(mask.grid.size()))),
        opt);
    GramianBundle bundle = make_gramian(S, mask, T, s);
    ScanRow row;
    row.r = r;
    row.C_emp = gramian_observability(bundle).C_emp;
    row.paper_bound =
        params ? cobs_formula(T, s, r, *params, *table, fc) : kNaN;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace grushinlab
