#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "grushinlab/constants.hpp"
#include "grushinlab/control_sets.hpp"
#include "grushinlab/eigensolve.hpp"
#include "grushinlab/verify.hpp"

namespace grushinlab {

/// y-Fourier symbol for torus mode k: the continuum |k|^2, or the
/// discrete periodic-Laplacian symbol (2 - 2 cos(k h_y))/h_y^2 that
/// exactly block-diagonalizes the FD operator (used for the
/// brute-force-oracle comparison).
enum class ModeSymbol { Continuum, DiscreteFd };

/// Partial-Fourier decoupling of -Delta_x - V(x) Delta_y on R^n x T^m:
/// one Schroedinger problem H_{r V} (+ Vtilde) per mode, deduplicated
/// by the symbol value r = |k|^2.
struct ModeFamily {
  PotentialSpec V;
  std::optional<PotentialSpec> Vtilde;
  Grid xgrid;
  double s = 1.0;
  int m = 1;         // torus dimension
  int max_mode = 0;  // modes k in {-M..M}^m
  ModeSymbol symbol_kind = ModeSymbol::Continuum;
  int torus_points = 0;  // N_y for the discrete symbol

  std::vector<std::array<int, 2>> modes;
  std::map<double, std::shared_ptr<SpectralData>> spectra;  // keyed by symbol

  double symbol(const std::array<int, 2>& k) const;
  const SpectralData& spectrum(const std::array<int, 2>& k) const;
  std::shared_ptr<SpectralData> spectrum_ptr(const std::array<int, 2>& k) const;
  bool is_zero_mode(const std::array<int, 2>& k) const;
};

ModeFamily build_modes(const PotentialSpec& V, const std::optional<PotentialSpec>& Vtilde,
                       const Grid& xgrid, int max_mode, double s, int m = 1,
                       int eig_count = 30, ModeSymbol symbol = ModeSymbol::Continuum,
                       int torus_points = 0, const EigOptions& opt = {});

/// State in partial-Fourier form for n = m = 1: complex coefficients
/// u-hat(x_i, k_j) with k_j the DFT frequency of column j.
struct GrushinState {
  Grid xgrid;
  int torus_points = 0;
  Eigen::MatrixXcd coeff;  // N_x rows, N_y columns
  double time = 0.0;

  double norm() const;  // physical L^2 norm (Parseval)
};

int mode_frequency(int column, int torus_points);  // j -> k in (-Ny/2, Ny/2]

/// Unitary DFT in y of a physical field (N_x rows, N_y columns).
GrushinState to_modes(const Grid& xgrid, const Eigen::MatrixXd& field);
Eigen::MatrixXd to_physical(const GrushinState& state);

GrushinState evolve(const ModeFamily& fam, const GrushinState& state, double t);

/// Brute-force comparison path: dense eigensolve of the full 2-D
/// operator -d^2/dx^2 - V(x) d^2/dy^2 (Dirichlet in x, periodic in y),
/// then e^{-t Lambda^s}.  n = m = 1 only, total unknowns <= 10^4.
Eigen::MatrixXd direct_oracle(const PotentialSpec& V, const Grid& xgrid, int y_points,
                              double t, double s, const Eigen::MatrixXd& u0);

struct ModeObservabilityRow {
  std::array<int, 2> k{0, 0};
  double r = 0.0;  // symbol value
  double C_emp = 0.0;
  double paper_bound = 0.0;  // NaN when no parameter set supplied or r = 0
  bool thickness_fallback = false;
};

struct GrushinObservabilityReport {
  std::vector<ModeObservabilityRow> rows;
  double C_agg = 0.0;
  std::array<int, 2> argmax_mode{0, 0};
  double k0_thickness = 0.0;  // thickness of omega at scale 1
};

GrushinObservabilityReport grushin_observability(
    const ModeFamily& fam, const SetIndicator& mask_x, double T, double s,
    const std::optional<AssumptionParams>& params = std::nullopt,
    const FreeConstants& fc = FreeConstants{});

struct ScanRow {
  double r = 0.0;
  double C_emp = 0.0;
  double paper_bound = 0.0;
};

std::vector<ScanRow> scan_scaled_observability(
    const PotentialSpec& V, const std::optional<PotentialSpec>& Vtilde,
    const std::vector<double>& r_values, const SetIndicator& mask, double T, double s,
    int eig_count = 30, const std::optional<AssumptionParams>& params = std::nullopt,
    const FreeConstants& fc = FreeConstants{}, const EigOptions& opt = {});

}  // namespace grushinlab
