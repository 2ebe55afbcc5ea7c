// Compares the OpenMP kernels against their serial reference
// implementations: the matrix-free stencil apply and the thickness scan.
#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include <omp.h>

#include "grushinlab/control_sets.hpp"
#include "grushinlab/operator.hpp"

using namespace grushinlab;
using clk = std::chrono::steady_clock;

namespace {

double seconds(clk::time_point a, clk::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    auto t0 = clk::now();
    f();
    best = std::min(best, seconds(t0, clk::now()));
  }
  return best;
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());

  {
    Grid grid(2, 8.0, 700);
    PotentialSpec V = make_power_potential(1.0, 2.0, 2);
    DiscreteOperator op = discretize(V, grid);
    std::vector<double> u(grid.size()), out(grid.size());
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (auto& v : u) v = unit(rng);

    const double t_par = time_best_of(5, [&] { op.apply(u.data(), out.data()); });
    std::vector<double> ref(grid.size());
    const double t_ser =
        time_best_of(5, [&] { op.apply_serial(u.data(), ref.data()); });
    double maxdiff = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i)
      maxdiff = std::max(maxdiff, std::abs(out[i] - ref[i]));
    std::printf("stencil apply %zu unknowns: serial %.4fs  parallel %.4fs  "
                "speedup %.2fx  maxdiff %.3e\n",
                grid.size(), t_ser, t_par, t_ser / t_par, maxdiff);
  }

  {
    Grid grid(2, 8.0, 900);
    DistributedSet set = make_equidistributed(0.3, 7, 2, Placement::CellCenter);
    SetIndicator ind = indicator(set, grid);
    ThicknessReport par, ser;
    const double t_par = time_best_of(3, [&] { par = thickness(ind, 1.0); });
    const double t_ser = time_best_of(3, [&] { ser = thickness_serial(ind, 1.0); });
    std::printf("thickness scan %zu nodes: serial %.4fs  parallel %.4fs  "
                "speedup %.2fx  diff %.3e\n",
                grid.size(), t_ser, t_par, t_ser / t_par,
                std::abs(par.gamma_est - ser.gamma_est));
  }
  return 0;
}
