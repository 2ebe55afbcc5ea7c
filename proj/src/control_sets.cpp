#include "grushinlab/control_sets.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace grushinlab {

double DistributedSet::radius(const std::array<int, 3>& k) const {
  if (uniform_radius) return *uniform_radius;
  double kk = 0.0;
  for (int d = 0; d < n; ++d) kk += static_cast<double>(k[d]) * k[d];
  const double knorm = std::sqrt(kk);
  double expo;
  if (sigma == 0.0)
    expo = 1.0;  // |k|^0 = 1 including k = 0
  else
    expo = (knorm == 0.0) ? 0.0 : std::pow(knorm, sigma);
  return std::pow(gamma, 1.0 + expo);
}

namespace {

DistributedSet make_impl(double gamma, double sigma, int box, int n,
                         Placement placement, std::uint64_t seed,
                         std::optional<double> uniform_radius) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("gamma must lie in (0,1)");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be nonnegative");
  if (n < 1 || n > 3) throw std::invalid_argument("dimension must be 1..3");
  if (box < 0) throw std::invalid_argument("box must be nonnegative");

  DistributedSet s;
  s.n = n;
  s.gamma = gamma;
  s.sigma = sigma;
  s.seed = seed;
  s.box = box;
  s.uniform_radius = uniform_radius;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int lo = -box, hi = box;
  std::array<int, 3> k{0, 0, 0};
  auto emit = [&]() {
    DistributedSet::Cell cell;
    cell.k = k;
    const double r = s.radius(k);
    for (int d = 0; d < n; ++d) {
      if (placement == Placement::CellCenter) {
        cell.z[d] = k[d];
      } else {
        // keep the ball inside its cell
        const double margin = std::min(0.5, std::max(0.0, 0.5 - r));
        cell.z[d] = k[d] + (2.0 * unit(rng) - 1.0) * margin;
      }
    }
    s.cells.push_back(cell);
  };
  for (k[0] = lo; k[0] <= hi; ++k[0]) {
    if (n == 1) { emit(); continue; }
    for (k[1] = lo; k[1] <= hi; ++k[1]) {
      if (n == 2) { emit(); continue; }
      for (k[2] = lo; k[2] <= hi; ++k[2]) emit();
    }
  }
  return s;
}

}  // namespace

DistributedSet make_distributed(double gamma, double sigma, int box, int n,
                                Placement placement, std::uint64_t seed) {
  return make_impl(gamma, sigma, box, n, placement, seed, std::nullopt);
}

DistributedSet make_equidistributed(double gamma, int box, int n,
                                    Placement placement, std::uint64_t seed) {
  return make_impl(gamma, 0.0, box, n, placement, seed, gamma);
}

std::size_t SetIndicator::count() const {
  std::size_t c = 0;
  for (auto v : mask) c += v;
  return c;
}

SetIndicator indicator(const DistributedSet& set, const Grid& grid) {
  if (set.n != grid.n) throw std::invalid_argument("set/grid dimension mismatch");
  SetIndicator ind;
  ind.grid = grid;
  ind.mask.assign(grid.size(), 0);
  const double h = grid.spacing();
  const int N = grid.points_per_dim;

  double min_radius = std::numeric_limits<double>::infinity();
  for (const auto& cell : set.cells) {
    const double r = set.radius(cell.k);
    min_radius = std::min(min_radius, r);
    // nodes in the bounding box of the ball
    std::array<int, 3> ilo{0, 0, 0}, ihi{-1, -1, -1};
    bool empty = false;
    for (int d = 0; d < grid.n; ++d) {
      // coord1d(i) = -L + (i+1) h  (Dirichlet); invert
      const double lo = cell.z[d] - r, hi = cell.z[d] + r;
      int a = static_cast<int>(std::floor((lo + grid.halfwidth) / h)) - 1;
      int b = static_cast<int>(std::ceil((hi + grid.halfwidth) / h));
      a = std::max(a, 0);
      b = std::min(b, N - 1);
      if (a > b) { empty = true; break; }
      ilo[d] = a;
      ihi[d] = b;
    }
    if (empty) continue;
    std::array<int, 3> i = ilo;
    for (;;) {
      double dist2 = 0.0;
      for (int d = 0; d < grid.n; ++d) {
        const double dx = grid.coord1d(i[d]) - cell.z[d];
        dist2 += dx * dx;
      }
      if (dist2 <= r * r) {
        std::size_t p = 0;
        for (int d = 0; d < grid.n; ++d)
          p = p * static_cast<std::size_t>(N) + static_cast<std::size_t>(i[d]);
        ind.mask[p] = 1;
      }
      int d = grid.n - 1;
      while (d >= 0 && ++i[d] > ihi[d]) { i[d] = ilo[d]; --d; }
      if (d < 0) break;
    }
  }
  ind.measure = grid.weight() * static_cast<double>(ind.count());
  if (!set.cells.empty() && h > min_radius)
    ind.warning = "grid spacing " + std::to_string(h) +
                  " coarser than the smallest ball radius " +
                  std::to_string(min_radius);
  return ind;
}

SetIndicator full_indicator(const Grid& grid) {
  SetIndicator ind;
  ind.grid = grid;
  ind.mask.assign(grid.size(), 1);
  ind.measure = grid.weight() * static_cast<double>(grid.size());
  return ind;
}

SetIndicator indicator_from_predicate(
    const Grid& grid, const std::function<bool(std::span<const double>)>& inside) {
  SetIndicator ind;
  ind.grid = grid;
  ind.mask.assign(grid.size(), 0);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    double x[3];
    grid.node(p, x);
    ind.mask[p] = inside(std::span<const double>(x, grid.n)) ? 1 : 0;
  }
  ind.measure = grid.weight() * static_cast<double>(ind.count());
  return ind;
}

namespace {

ThicknessReport thickness_impl(const SetIndicator& ind, double ell, bool parallel) {
  const Grid& g = ind.grid;
  if (!(ell > 0.0) || ell > 2.0 * g.halfwidth + 1e-12)
    throw std::invalid_argument("cube side must lie in (0, 2L]");
  const int N = g.points_per_dim;
  const double h = g.spacing();
  int w = static_cast<int>(std::round(ell / h));
  w = std::max(1, std::min(w, N));

  // prefix sums over the mask for O(1) window counts
  const int n = g.n;
  std::vector<std::int64_t> pre;
  const auto idx3 = [&](int i, int j, int k) {
    return (static_cast<std::size_t>(i) * (n >= 2 ? N + 1 : 1) +
            (n >= 2 ? j : 0)) * (n >= 3 ? N + 1 : 1) + (n >= 3 ? k : 0);
  };
  if (n == 1) {
    pre.assign(N + 1, 0);
    for (int i = 0; i < N; ++i) pre[i + 1] = pre[i] + ind.mask[i];
  } else if (n == 2) {
    pre.assign(static_cast<std::size_t>(N + 1) * (N + 1), 0);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        pre[idx3(i + 1, j + 1, 0)] = ind.mask[static_cast<std::size_t>(i) * N + j] +
                                     pre[idx3(i, j + 1, 0)] + pre[idx3(i + 1, j, 0)] -
                                     pre[idx3(i, j, 0)];
  } else {
    pre.assign(static_cast<std::size_t>(N + 1) * (N + 1) * (N + 1), 0);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) {
          const std::size_t m =
              (static_cast<std::size_t>(i) * N + j) * N + k;
          pre[idx3(i + 1, j + 1, k + 1)] =
              static_cast<std::int64_t>(ind.mask[m]) + pre[idx3(i, j + 1, k + 1)] +
              pre[idx3(i + 1, j, k + 1)] + pre[idx3(i + 1, j + 1, k)] -
              pre[idx3(i, j, k + 1)] - pre[idx3(i, j + 1, k)] -
              pre[idx3(i + 1, j, k)] + pre[idx3(i, j, k)];
        }
  }
  auto window = [&](int i0, int j0, int k0) -> std::int64_t {
    const int i1 = i0 + w, j1 = j0 + w, k1 = k0 + w;
    if (n == 1) return pre[i1] - pre[i0];
    if (n == 2)
      return pre[idx3(i1, j1, 0)] - pre[idx3(i0, j1, 0)] - pre[idx3(i1, j0, 0)] +
             pre[idx3(i0, j0, 0)];
    return pre[idx3(i1, j1, k1)] - pre[idx3(i0, j1, k1)] - pre[idx3(i1, j0, k1)] -
           pre[idx3(i1, j1, k0)] + pre[idx3(i0, j0, k1)] + pre[idx3(i0, j1, k0)] +
           pre[idx3(i1, j0, k0)] - pre[idx3(i0, j0, k0)];
  };

  const int shifts = N - w + 1;
  const double cube_vol = std::pow(ell, n);
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  int best_i = 0, best_j = 0, best_k = 0;
#pragma omp parallel if (parallel)
  {
    std::int64_t lbest = std::numeric_limits<std::int64_t>::max();
    int li = 0, lj = 0, lk = 0;
#pragma omp for schedule(static) nowait
    for (int i = 0; i < shifts; ++i)
      for (int j = 0; j < (n >= 2 ? shifts : 1); ++j)
        for (int k = 0; k < (n >= 3 ? shifts : 1); ++k) {
          const std::int64_t c = window(i, j, k);
          if (c < lbest) { lbest = c; li = i; lj = j; lk = k; }
        }
#pragma omp critical
    {
      if (lbest < best) { best = lbest; best_i = li; best_j = lj; best_k = lk; }
    }
  }

  ThicknessReport rep;
  rep.gamma_est = g.weight() * static_cast<double>(best) / cube_vol;
  rep.grid_error = 2.0 * h * std::sqrt(static_cast<double>(n)) / ell;
  const double half = 0.5 * (w - 1) * h;
  rep.worst_cube_center[0] = g.coord1d(best_i) + half;
  if (n >= 2) rep.worst_cube_center[1] = g.coord1d(best_j) + half;
  if (n >= 3) rep.worst_cube_center[2] = g.coord1d(best_k) + half;
  return rep;
}

}  // namespace

ThicknessReport thickness(const SetIndicator& ind, double ell) {
  return thickness_impl(ind, ell, true);
}

ThicknessReport thickness_serial(const SetIndicator& ind, double ell) {
  return thickness_impl(ind, ell, false);
}

}  // namespace grushinlab
