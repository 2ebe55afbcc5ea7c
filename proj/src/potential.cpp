#include "grushinlab/potential.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "grushinlab/grid.hpp"

namespace grushinlab {

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

std::vector<double> fd_gradient(const ScalarField& f, std::span<const double> x) {
  const double h = 1e-5 * (1.0 + norm2(x));
  std::vector<double> g(x.size());
  std::vector<double> y(x.begin(), x.end());
  for (std::size_t d = 0; d < x.size(); ++d) {
    y[d] = x[d] + h;
    const double fp = f(y);
    y[d] = x[d] - h;
    const double fm = f(y);
    y[d] = x[d];
    g[d] = (fp - fm) / (2.0 * h);
  }
  return g;
}

void PotentialSpec::validate() const {
  if (dim < 1 || dim > 3) throw std::invalid_argument("potential dimension must be 1..3");
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw std::invalid_argument("c1, c2 must be positive");
  if (!(beta1 > 0.0) || !(beta2 >= beta1))
    throw std::invalid_argument("need beta2 >= beta1 > 0");
  if (!value) throw std::invalid_argument("potential has no evaluator");
  if (assumption == Assumption::A2 && static_cast<bool>(split1) != static_cast<bool>(split2))
    throw std::invalid_argument("A2 split must provide both parts");
}

namespace {

// C^2 smoothstep bump: 1 on B_1, 0 outside B_2.
double cutoff_eta(double rr) {
  if (rr <= 1.0) return 1.0;
  if (rr >= 2.0) return 0.0;
  const double t = 2.0 - rr;  // in (0,1), eta = smoothstep(t)
  return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

}  // namespace

PotentialSpec make_power_potential(double c, double beta, int n) {
  if (!(c > 0.0)) throw std::invalid_argument("power potential needs c > 0");
  if (!(beta > 0.0)) throw std::invalid_argument("power potential needs beta > 0");
  PotentialSpec p;
  p.dim = n;
  p.c1 = p.c2 = c;
  p.beta1 = p.beta2 = beta;
  p.value = [c, beta](std::span<const double> x) {
    return c * std::pow(norm2(x), beta);
  };
  p.gradient = [c, beta](std::span<const double> x) {
    const double r = norm2(x);
    std::vector<double> g(x.size(), 0.0);
    if (r == 0.0) return g;
    const double mag = c * beta * std::pow(r, beta - 2.0);
    for (std::size_t d = 0; d < x.size(); ++d) g[d] = mag * x[d];
    return g;
  };
  p.label = "power(c=" + std::to_string(c) + ",beta=" + std::to_string(beta) + ")";
  if (beta == 2.0) {
    for (int d = 0; d < n; ++d)
      p.separable_factors.push_back([c](double t) { return c * t * t; });
  }
  if (beta >= 1.0) {
    p.assumption = Assumption::A1;
  } else {
    p.assumption = Assumption::A2;
    auto base = p.value;
    p.split1 = [base](std::span<const double> x) {
      return base(x) * (1.0 - cutoff_eta(norm2(x)));
    };
    p.split2 = [base](std::span<const double> x) {
      return base(x) * cutoff_eta(norm2(x));
    };
    // c2 induced by the cutoff: |V1|+|grad V1| vanishes on B_1 and is
    // dominated at infinity by c(r^b + b r^{b-1}) <= c(r+1)^b; near the
    // cutoff shell the eta' term adds a bounded bump, absorbed by a
    // numerically fitted constant over the shell 1 <= r <= 2.
    double worst = 1.0;
    for (int i = 0; i <= 400; ++i) {
      const double r = 1.0 + i / 200.0;
      const double v = c * std::pow(r, beta);
      const double dv = c * beta * std::pow(r, beta - 1.0);
      // |grad V1| <= |eta'| V + (1-eta)|grad V|, |eta'| <= 1.875 (max of
      // the quintic smoothstep derivative on a unit shell)
      const double lhs = v + 1.875 * v + dv;
      const double rhs = c * std::pow(r + 1.0, beta);
      worst = std::max(worst, lhs / rhs);
    }
    // V2^{4/3} on B_2: bounded by (c 2^b)^{4/3}
    const double v2 = std::pow(c * std::pow(2.0, beta), 4.0 / 3.0);
    p.c2 = worst * c + v2;
  }
  p.validate();
  return p;
}

AssumptionAudit check_assumption(const PotentialSpec& p, double sample_box_halfwidth,
                                 int samples_per_dim, double tolerance) {
  p.validate();
  if (samples_per_dim < 1) throw std::invalid_argument("empty sample grid");
  Grid g(p.dim, sample_box_halfwidth, samples_per_dim, Boundary::Dirichlet);

  AssumptionAudit audit;
  audit.holds = true;
  audit.worst_margin = std::numeric_limits<double>::infinity();
  audit.worst_point.assign(p.dim, 0.0);

  auto record = [&](double margin, std::span<const double> x, const char* what) {
    if (margin < audit.worst_margin) {
      audit.worst_margin = margin;
      audit.worst_point.assign(x.begin(), x.end());
      audit.detail = what;
    }
  };

  for (std::size_t q = 0; q < g.size(); ++q) {
    double xs[3];
    g.node(q, xs);
    std::span<const double> x(xs, p.dim);
    const double r = norm2(x);
    const double v = p.value(x);
    const double scale0 = 1.0 + std::abs(v);

    record((v - p.c1 * std::pow(r, p.beta1)) / scale0, x, "lower bound c1|x|^b1");

    const double rhs = p.c2 * std::pow(r + 1.0, p.beta2);
    if (p.assumption == Assumption::A1) {
      auto gr = p.gradient ? p.gradient(x) : fd_gradient(p.value, x);
      const double lhs = std::abs(v) + norm2(gr);
      record((rhs - lhs) / (1.0 + rhs), x, "A1 growth bound");
    } else {
      if (!p.split1 || !p.split2) {
        if (p.beta1 < 1.0) {
          audit.holds = false;
          audit.detail = "A2 declared without a V1+V2 split";
          audit.worst_margin = -std::numeric_limits<double>::infinity();
          return audit;
        }
        continue;
      }
      const double v1 = p.split1(x), v2 = p.split2(x);
      record((tolerance + std::abs(v) * tolerance - std::abs(v1 + v2 - v)) / scale0, x,
             "split consistency V1+V2=V");
      auto g1 = fd_gradient(p.split1, x);
      const double lhs = std::abs(v1) + norm2(g1) + std::pow(std::abs(v2), 4.0 / 3.0);
      record((rhs - lhs) / (1.0 + rhs), x, "A2 growth bound");
    }
  }
  audit.holds = audit.worst_margin >= -tolerance;
  return audit;
}

ScaledPotential scale(const PotentialSpec& p, double r,
                      const std::optional<PotentialSpec>& additive) {
  if (!(r > 0.0)) throw std::invalid_argument("scale factor must be positive");
  p.validate();
  if (additive) {
    additive->validate();
    if (additive->beta1 != p.beta1 || additive->beta2 != p.beta2)
      throw std::invalid_argument("additive potential must share (beta1, beta2)");
    if (additive->dim != p.dim)
      throw std::invalid_argument("additive potential dimension mismatch");
  }

  ScaledPotential out;
  out.r = r;
  out.has_additive = additive.has_value();
  PotentialSpec& q = out.combined;
  q.dim = p.dim;
  q.beta1 = p.beta1;
  q.beta2 = p.beta2;
  q.assumption = p.assumption;
  q.label = "scaled(r=" + std::to_string(r) + ") " + p.label;

  auto base = p.value;
  if (!additive) {
    q.value = [base, r](std::span<const double> x) { return r * base(x); };
    if (p.gradient) {
      auto gr = p.gradient;
      q.gradient = [gr, r](std::span<const double> x) {
        auto g = gr(x);
        for (auto& v : g) v *= r;
        return g;
      };
    }
    q.c1 = r * p.c1;
    q.c2 = (p.assumption == Assumption::A1) ? r * p.c2
                                            : std::pow(r, 4.0 / 3.0) * p.c2;
    if (p.assumption == Assumption::A2 && p.split1) {
      auto s1 = p.split1, s2 = p.split2;
      q.split1 = [s1, r](std::span<const double> x) { return r * s1(x); };
      q.split2 = [s2, r](std::span<const double> x) { return r * s2(x); };
    }
    if (!p.separable_factors.empty()) {
      for (const auto& f : p.separable_factors)
        q.separable_factors.push_back([f, r](double t) { return r * f(t); });
    }
  } else {
    auto add = additive->value;
    q.value = [base, add, r](std::span<const double> x) {
      return r * base(x) + add(x);
    };
    // rV + Vtilde with shared parameters behaves like (r+1)V: the
    // lower bounds add to (r+1)c1 and the growth bounds are dominated
    // by the r+1 transformation (r^{4/3}+1 <= (r+1)^{4/3} under A2).
    const double r1 = r + 1.0;
    q.c1 = r1 * std::min(p.c1, additive->c1);
    q.c2 = (p.assumption == Assumption::A1) ? r1 * std::max(p.c2, additive->c2)
                                            : std::pow(r1, 4.0 / 3.0) *
                                                  std::max(p.c2, additive->c2);
    if (!p.separable_factors.empty() && !additive->separable_factors.empty() &&
        additive->separable_factors.size() == p.separable_factors.size()) {
      for (std::size_t d = 0; d < p.separable_factors.size(); ++d) {
        auto f = p.separable_factors[d];
        auto gsep = additive->separable_factors[d];
        q.separable_factors.push_back(
            [f, gsep, r](double t) { return r * f(t) + gsep(t); });
      }
    }
  }
  q.validate();
  return out;
}

}  // namespace grushinlab
