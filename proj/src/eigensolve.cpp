#include "grushinlab/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/SparseCholesky>
#include <lapacke.h>

namespace grushinlab {

Eigen::VectorXd SpectralData::coefficients(const Eigen::VectorXd& f) const {
  return weight() * (vectors.transpose() * f);
}

namespace {

struct Tridiag {
  std::vector<double> d, e;  // diagonal, off-diagonal
};

// Eigenpairs of a symmetric tridiagonal matrix via LAPACK dstevr.
// Returns eigenvalues ascending and l2-orthonormal eigenvectors.
void stevr(const Tridiag& t, int want, std::optional<double> cutoff,
           std::vector<double>& vals, Eigen::MatrixXd& vecs) {
  const int n = static_cast<int>(t.d.size());
  std::vector<double> d(t.d), e(t.e);
  std::vector<double> w(n);
  Eigen::MatrixXd z(n, n);
  std::vector<lapack_int> isuppz(2 * std::max(1, n));
  lapack_int m = 0;
  char range = cutoff ? 'V' : 'I';
  double vl = -1e300, vu = cutoff ? *cutoff : 0.0;
  lapack_int il = 1, iu = std::min(want, n);
  lapack_int info = LAPACKE_dstevr(
      LAPACK_COL_MAJOR, 'V', range, n, d.data(), e.data(), vl, vu, il, iu, 0.0,
      &m, w.data(), z.data(), n, isuppz.data());
  if (info != 0) throw std::runtime_error("dstevr failed, info=" + std::to_string(info));
  vals.assign(w.begin(), w.begin() + m);
  vecs = z.leftCols(m);
}

Tridiag tridiag_1d(const std::vector<double>& vdiag, double h) {
  Tridiag t;
  const int n = static_cast<int>(vdiag.size());
  const double inv_h2 = 1.0 / (h * h);
  t.d.resize(n);
  t.e.assign(std::max(0, n - 1), -inv_h2);
  for (int i = 0; i < n; ++i) t.d[i] = vdiag[i] + 2.0 * inv_h2;
  return t;
}

SpectralData solve_1d(const DiscreteOperator& A, const EigRequest& req) {
  Tridiag t = tridiag_1d(A.diag, A.grid.spacing());
  std::vector<double> vals;
  Eigen::MatrixXd vecs;
  stevr(t, req.count, req.cutoff, vals, vecs);
  SpectralData S;
  S.grid = A.grid;
  S.eigenvalues = std::move(vals);
  S.vectors = vecs / std::sqrt(A.grid.spacing());
  S.coverage = req.cutoff ? *req.cutoff
                          : (S.eigenvalues.empty() ? S.coverage : S.eigenvalues.back());
  return S;
}

// Kronecker-sum path: eigenvalues of the nD operator are sums of 1-D
// eigenvalues and eigenvectors are tensor products.  Exact for the FD
// discretization of separable potentials.
SpectralData solve_tensor(const DiscreteOperator& A, const EigRequest& req) {
  const int n = A.grid.n;
  const int N = A.grid.points_per_dim;
  const double h = A.grid.spacing();
  const auto& d1 = *A.diag1d;

  int m = std::min(N, std::max(req.count + 4, 16));
  std::vector<std::vector<double>> vals(n);
  std::vector<Eigen::MatrixXd> vecs(n);

  struct Tuple {
    double sum;
    std::array<int, 3> idx;
  };
  std::vector<Tuple> chosen;

  for (;;) {
    for (int d = 0; d < n; ++d) {
      Tridiag t = tridiag_1d(d1[d], h);
      stevr(t, m, std::nullopt, vals[d], vecs[d]);
    }
    double base = 0.0;  // sum of per-dimension ground levels
    for (int d = 0; d < n; ++d) base += vals[d].front();
    // sums using an index >= m in some dimension exceed this level
    double safe = std::numeric_limits<double>::infinity();
    for (int d = 0; d < n; ++d)
      safe = std::min(safe, base - vals[d].front() + vals[d].back());

    const double bound = req.cutoff ? *req.cutoff : safe;
    chosen.clear();
    std::array<int, 3> idx{0, 0, 0};
    auto recurse = [&](auto&& self, int d, double partial) -> void {
      if (d == n) {
        chosen.push_back({partial, idx});
        return;
      }
      for (int i = 0; i < static_cast<int>(vals[d].size()); ++i) {
        double rest = 0.0;
        for (int dd = d + 1; dd < n; ++dd) rest += vals[dd].front();
        if (partial + vals[d][i] + rest > bound + 1e-12) break;
        idx[d] = i;
        self(self, d + 1, partial + vals[d][i]);
      }
    };
    recurse(recurse, 0, 0.0);
    std::sort(chosen.begin(), chosen.end(),
              [](const Tuple& a, const Tuple& b) { return a.sum < b.sum; });

    if (req.cutoff) {
      if (*req.cutoff <= safe || m == N) break;
    } else {
      if ((static_cast<int>(chosen.size()) >= req.count &&
           chosen[req.count - 1].sum <= safe) ||
          m == N)
        break;
    }
    m = std::min(N, 2 * m);
  }

  if (!req.cutoff) {
    if (static_cast<int>(chosen.size()) < req.count)
      throw std::runtime_error("tensor path produced fewer eigenpairs than requested");
    chosen.resize(req.count);
  }

  SpectralData S;
  S.grid = A.grid;
  const std::size_t size = A.grid.size();
  S.eigenvalues.reserve(chosen.size());
  if (A.diag.empty()) {
    // matrix-free separable mode (grid too large to materialize): the
    // eigenvalues are still exact Kronecker sums; vectors are skipped
    for (const Tuple& t : chosen) S.eigenvalues.push_back(t.sum);
    S.coverage = req.cutoff ? *req.cutoff
                            : (S.eigenvalues.empty() ? S.coverage : S.eigenvalues.back());
    return S;
  }
  S.vectors.resize(size, chosen.size());
  const double scale = std::pow(h, -0.5 * n);
  for (std::size_t c = 0; c < chosen.size(); ++c) {
    S.eigenvalues.push_back(chosen[c].sum);
    auto col = S.vectors.col(c);
    const std::int64_t total = static_cast<std::int64_t>(size);
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < total; ++p) {
      auto gi = A.grid.unflatten(static_cast<std::size_t>(p));
      double v = scale;
      for (int d = 0; d < n; ++d) v *= vecs[d](gi[d], chosen[c].idx[d]);
      col[p] = v;
    }
  }
  S.coverage = req.cutoff ? *req.cutoff
                          : (S.eigenvalues.empty() ? S.coverage : S.eigenvalues.back());
  return S;
}

SpectralData solve_dense(const DiscreteOperator& A, const EigRequest& req,
                         const EigOptions& opt) {
  Eigen::MatrixXd M = A.dense(opt.dense_cap);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolve failed");
  int k;
  if (req.cutoff) {
    k = 0;
    while (k < es.eigenvalues().size() && es.eigenvalues()[k] <= *req.cutoff) ++k;
  } else {
    if (req.count > es.eigenvalues().size())
      throw std::invalid_argument("requested more eigenpairs than unknowns");
    k = req.count;
  }
  SpectralData S;
  S.grid = A.grid;
  S.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + k);
  S.vectors = es.eigenvectors().leftCols(k) / std::sqrt(A.grid.weight());
  S.coverage = req.cutoff ? *req.cutoff : es.eigenvalues()[std::max(0, k - 1)];
  return S;
}

struct RitzPairs {
  std::vector<double> vals;  // ascending, converged prefix only
  std::vector<Eigen::VectorXd> vecs;
  double worst_residual = 0.0;
};

// One shift-invert Lanczos sweep with full reorthogonalization,
// deflated against previously converged vectors.  Returns the longest
// converged prefix of the Ritz spectrum once `enough` is satisfied (or
// the basis budget runs out).
template <typename EnoughFn>
RitzPairs lanczos_sweep(const DiscreteOperator& A,
                        const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>& ldlt,
                        double tau, const std::vector<Eigen::VectorXd>& deflate,
                        std::mt19937_64& rng, const EigOptions& opt,
                        EnoughFn enough) {
  const std::size_t size = A.grid.size();
  const double w = A.grid.weight();
  std::normal_distribution<double> gauss;

  std::vector<Eigen::VectorXd> basis;
  std::vector<double> alpha, beta;
  auto orth = [&](Eigen::VectorXd& x) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : deflate) x -= (w * q.dot(x)) * q;
      for (const auto& q : basis) x -= (w * q.dot(x)) * q;
    }
  };
  Eigen::VectorXd v(size);
  for (std::size_t i = 0; i < size; ++i) v[i] = gauss(rng);
  orth(v);
  {
    const double nv = std::sqrt(w) * v.norm();
    if (nv < 1e-13) return {};  // deflation space is everything
    v /= nv;
  }

  RitzPairs best;
  for (int j = 0; j < opt.max_basis; ++j) {
    basis.push_back(v);
    Eigen::VectorXd u = ldlt.solve(v);
    alpha.push_back(w * v.dot(u));
    orth(u);
    const double b = std::sqrt(w) * u.norm();
    const bool breakdown = b < 1e-13;
    if (!breakdown) {
      v = u / b;
      beta.push_back(b);
    }

    const bool check = breakdown || (j + 1) % 8 == 0 || j + 1 == opt.max_basis;
    if (check) {
      const int k = static_cast<int>(alpha.size());
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
      for (int i = 0; i < k; ++i) T(i, i) = alpha[i];
      for (int i = 0; i + 1 < k; ++i) T(i, i + 1) = T(i + 1, i) = beta[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);

      std::vector<std::pair<double, int>> order;  // by lambda ascending
      for (int i = 0; i < k; ++i)
        if (es.eigenvalues()[i] > 0)
          order.push_back({1.0 / es.eigenvalues()[i] - tau, i});
      std::sort(order.begin(), order.end());

      RitzPairs cur;
      for (auto [lam, col] : order) {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(size);
        for (int i = 0; i < k; ++i) y += es.eigenvectors()(i, col) * basis[i];
        y /= std::sqrt(w) * y.norm();
        Eigen::VectorXd r = A.apply(y) - lam * y;
        const double res = std::sqrt(w) * r.norm();
        cur.worst_residual = std::max(cur.worst_residual, res);
        if (res > opt.residual_tol * (1.0 + std::abs(lam))) break;
        cur.vals.push_back(lam);
        cur.vecs.push_back(std::move(y));
        if (enough(cur.vals)) break;
      }
      if (cur.vals.size() > best.vals.size() || best.vals.empty()) best = std::move(cur);
      if (enough(best.vals) || breakdown) return best;
    }
    if (breakdown) return best;
  }
  return best;
}

// Shift-invert Lanczos with full reorthogonalization.  Degenerate
// eigenvalues are recovered by deflated confirmation sweeps with fresh
// random starting vectors until a sweep finds nothing new below the
// decision level.
SpectralData solve_sparse(const DiscreteOperator& A, const EigRequest& req,
                          const EigOptions& opt) {
  const std::size_t size = A.grid.size();
  const double w = A.grid.weight();
  double vmin = *std::min_element(A.diag.begin(), A.diag.end());
  const double tau = 1.0 + std::max(0.0, -vmin);

  Eigen::SparseMatrix<double> M = A.sparse();
  for (int i = 0; i < M.rows(); ++i) M.coeffRef(i, i) += tau;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(M);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("sparse factorization failed");

  std::mt19937_64 rng(opt.seed);
  std::vector<double> conv_vals;           // converged eigenvalues of A
  std::vector<Eigen::VectorXd> conv_vecs;  // h^n-orthonormal

  auto merge = [&](RitzPairs& p, std::size_t limit) {
    for (std::size_t i = 0; i < std::min(limit, p.vals.size()); ++i) {
      conv_vals.push_back(p.vals[i]);
      conv_vecs.push_back(std::move(p.vecs[i]));
    }
  };
  auto target_met = [&]() {
    if (req.cutoff) {
      if (conv_vals.empty()) return false;
      return *std::max_element(conv_vals.begin(), conv_vals.end()) > *req.cutoff;
    }
    return static_cast<int>(conv_vals.size()) >= req.count;
  };
  auto decision_level = [&]() {
    if (req.cutoff) return *req.cutoff;
    std::vector<double> sorted(conv_vals);
    std::sort(sorted.begin(), sorted.end());
    return sorted[req.count - 1];
  };

  // phase 1: satisfy the request
  double worst_residual = 0.0;
  for (int attempt = 0; !target_met(); ++attempt) {
    if (attempt >= 8)
      throw std::runtime_error(
          "Lanczos did not converge; worst residual " + std::to_string(worst_residual));
    const std::size_t have = conv_vals.size();
    auto pairs = lanczos_sweep(
        A, ldlt, tau, conv_vecs, rng, opt, [&](const std::vector<double>& got) {
          if (req.cutoff)
            return !got.empty() && got.back() > *req.cutoff;
          return have + got.size() >= static_cast<std::size_t>(req.count);
        });
    worst_residual = std::max(worst_residual, pairs.worst_residual);
    if (pairs.vals.empty() && attempt >= 2)
      throw std::runtime_error(
          "Lanczos stalled with " + std::to_string(conv_vals.size()) +
          " converged eigenpairs; worst residual " + std::to_string(worst_residual));
    merge(pairs, pairs.vals.size());
    if (conv_vals.size() >= size) break;
  }

  // phase 2: confirm no eigenvalue below the decision level hides in
  // the deflated complement (degenerate copies)
  for (int pass = 0; pass < 8 && conv_vals.size() < size; ++pass) {
    const double level = decision_level();
    auto extra = lanczos_sweep(
        A, ldlt, tau, conv_vecs, rng, opt,
        [](const std::vector<double>& got) { return got.size() >= 1; });
    if (extra.vals.empty()) break;
    const double found = extra.vals.front();
    merge(extra, 1);
    if (found > level + 1e-9 * (1.0 + std::abs(level))) break;
  }

  // sort, trim, re-orthonormalize within degenerate clusters
  std::vector<int> perm(conv_vals.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  std::sort(perm.begin(), perm.end(),
            [&](int a, int b) { return conv_vals[a] < conv_vals[b]; });

  SpectralData S;
  S.grid = A.grid;
  std::size_t keep = conv_vals.size();
  if (req.cutoff) {
    keep = 0;
    while (keep < conv_vals.size() && conv_vals[perm[keep]] <= *req.cutoff) ++keep;
  } else {
    keep = std::min<std::size_t>(keep, req.count);
  }
  S.vectors.resize(size, keep);
  for (std::size_t i = 0; i < keep; ++i) {
    S.eigenvalues.push_back(conv_vals[perm[i]]);
    S.vectors.col(i) = conv_vecs[perm[i]];
  }
  // Gram-Schmidt pass (degenerate Ritz vectors from different restarts
  // are orthogonal only up to the residual tolerance)
  for (std::size_t i = 0; i < keep; ++i) {
    auto col = S.vectors.col(i);
    for (std::size_t j = 0; j < i; ++j)
      col -= (w * S.vectors.col(j).dot(col)) * S.vectors.col(j);
    col /= std::sqrt(w) * col.norm();
  }
  S.coverage = req.cutoff ? *req.cutoff
                          : (S.eigenvalues.empty() ? S.coverage : S.eigenvalues.back());
  return S;
}

}  // namespace

SpectralData eigensolve(const DiscreteOperator& A, const EigRequest& req,
                        const EigOptions& opt) {
  if (!req.cutoff) {
    if (req.count <= 0)
      throw std::invalid_argument("eigensolve needs a positive count or a cutoff");
    if (static_cast<std::size_t>(req.count) > A.size())
      throw std::invalid_argument("requested more eigenpairs than unknowns");
  }

  if (A.grid.n == 1 && A.grid.boundary == Boundary::Dirichlet)
    return solve_1d(A, req);
  if (A.diag1d && opt.allow_tensor && A.grid.boundary == Boundary::Dirichlet &&
      A.grid.n >= 2)
    return solve_tensor(A, req);
  if (A.diag.empty())
    throw std::runtime_error(
        "operator has no materialized diagonal; only the Kronecker-sum path "
        "supports this size");
  if (A.size() <= static_cast<std::size_t>(opt.dense_cap))
    return solve_dense(A, req, opt);
  return solve_sparse(A, req, opt);
}

Eigen::VectorXd spectral_project(const SpectralData& S, double lambda,
                                 const Eigen::VectorXd& f) {
  if (lambda > S.coverage + 1e-12)
    throw std::runtime_error(
        "projection level exceeds computed coverage; recompute with a larger cutoff");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(f.size());
  for (int k = 0; k < S.count(); ++k) {
    if (S.eigenvalues[k] > lambda) break;
    const double c = S.weight() * S.vectors.col(k).dot(f);
    out += c * S.vectors.col(k);
  }
  return out;
}

Eigen::VectorXd semigroup_apply(const SpectralData& S, double t, double s,
                                const Eigen::VectorXd& f, double tail_tol) {
  if (t < 0.0) throw std::invalid_argument("semigroup time must be nonnegative");
  if (!(s > 0.0)) throw std::invalid_argument("fractional power must be positive");
  Eigen::VectorXd coeff = S.coefficients(f);
  Eigen::VectorXd inspan = S.vectors * coeff;
  const double fnorm = std::sqrt(S.weight()) * f.norm();
  const double tail = std::sqrt(S.weight()) * (f - inspan).norm();
  if (tail > 1e-10 * std::max(1.0, fnorm)) {
    const double damped =
        tail * std::exp(-t * std::pow(std::max(0.0, S.coverage), s));
    if (damped > tail_tol * std::max(1.0, fnorm)) {
      std::ostringstream os;
      os << "spectral coverage insufficient: tail mass " << tail
         << " damped only to " << damped;
      throw std::runtime_error(os.str());
    }
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(f.size());
  for (int k = 0; k < S.count(); ++k)
    out += std::exp(-t * std::pow(std::max(0.0, S.eigenvalues[k]), s)) * coeff[k] *
           S.vectors.col(k);
  return out;
}

}  // namespace grushinlab
