#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "grushinlab/grid.hpp"

namespace grushinlab {

enum class Placement { CellCenter, SeededRandom };

/// One ball per unit lattice cell k + [-1/2,1/2]^n, radius
/// gamma^{1+|k|^sigma}.  Conventions: |k|^0 = 1 also at k = 0 (so a
/// (gamma,0)-distributed set has uniform radius gamma^2), while for
/// sigma > 0 the k = 0 cell gets |0|^sigma = 0, i.e. radius gamma.
/// A uniform_radius overrides the rule (gamma-equidistributed sets).
struct DistributedSet {
  int n = 1;
  double gamma = 0.25;
  double sigma = 0.0;
  std::optional<double> uniform_radius;
  std::uint64_t seed = 0;
  int box = 0;  // cells k in {-box..box}^n

  struct Cell {
    std::array<int, 3> k{0, 0, 0};
    std::array<double, 3> z{0.0, 0.0, 0.0};
  };
  std::vector<Cell> cells;

  double radius(const std::array<int, 3>& k) const;
};

DistributedSet make_distributed(double gamma, double sigma, int box, int n,
                                Placement placement,
                                std::uint64_t seed = 0);

/// Equidistributed variant: every cell holds a ball of radius gamma.
DistributedSet make_equidistributed(double gamma, int box, int n,
                                    Placement placement,
                                    std::uint64_t seed = 0);

struct SetIndicator {
  Grid grid;
  std::vector<std::uint8_t> mask;
  double measure = 0.0;   // h^n * count
  std::string warning;    // set when the grid under-resolves a ball

  std::size_t count() const;
};

SetIndicator indicator(const DistributedSet& set, const Grid& grid);

/// Indicator with every node marked (the full truncated domain).
SetIndicator full_indicator(const Grid& grid);

/// Indicator from an arbitrary predicate on node coordinates.
SetIndicator indicator_from_predicate(
    const Grid& grid, const std::function<bool(std::span<const double>)>& inside);

struct ThicknessReport {
  double gamma_est = 0.0;
  std::array<double, 3> worst_cube_center{0.0, 0.0, 0.0};
  double grid_error = 0.0;  // 2 h sqrt(n) / ell discretization slack
};

/// min over grid-aligned cubes Q_ell(z) of |omega ∩ Q_ell(z)| / ell^n,
/// translates stepping node by node.  OpenMP over translates; the
/// serial variant is the reference the tests compare against.
ThicknessReport thickness(const SetIndicator& ind, double ell);
ThicknessReport thickness_serial(const SetIndicator& ind, double ell);

}  // namespace grushinlab
