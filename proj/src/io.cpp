#include "grushinlab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace grushinlab {

std::string fmt(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json RunConfig::to_json() const {
  json j;
  j["command"] = command;
  j["potential"] = {{"kind", potential_kind}, {"c", c}, {"beta", beta}};
  if (!table_file.empty()) j["potential"]["file"] = table_file;
  j["grid"] = {{"dim", dim},
               {"halfwidth", halfwidth},
               {"points_per_dim", points_per_dim},
               {"boundary", boundary}};
  j["set"] = {{"kind", set_kind},
              {"gamma", gamma},
              {"sigma", sigma},
              {"box", box},
              {"placement", placement}};
  j["physics"] = {{"T", T},
                  {"s", s},
                  {"max_mode", max_mode},
                  {"eig_count", eig_count},
                  {"lambda_cutoff", lambda_cutoff},
                  {"r_values", r_values},
                  {"eps", eps}};
  j["assumption"] = {{"name", assumption}, {"c2", c2}, {"beta2", beta2}};
  j["free_constants"] = {{"C_hat", free_constants.C_hat},
                         {"kappa_n", free_constants.kappa_n},
                         {"C_spec", free_constants.C_spec},
                         {"C0", free_constants.C0},
                         {"C1", free_constants.C1},
                         {"C2", free_constants.C2},
                         {"C3", free_constants.C3},
                         {"C4", free_constants.C4},
                         {"C5", free_constants.C5}};
  j["seed"] = seed;
  j["threads"] = threads;
  j["tolerance"] = tolerance;
  j["out"] = out;
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  c.command = j.value("command", c.command);
  if (j.contains("potential")) {
    const auto& p = j.at("potential");
    c.potential_kind = p.value("kind", c.potential_kind);
    c.c = p.value("c", c.c);
    c.beta = p.value("beta", c.beta);
    c.table_file = p.value("file", c.table_file);
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    c.dim = g.value("dim", c.dim);
    c.halfwidth = g.value("halfwidth", c.halfwidth);
    c.points_per_dim = g.value("points_per_dim", c.points_per_dim);
    c.boundary = g.value("boundary", c.boundary);
  }
  if (j.contains("set")) {
    const auto& s = j.at("set");
    c.set_kind = s.value("kind", c.set_kind);
    c.gamma = s.value("gamma", c.gamma);
    c.sigma = s.value("sigma", c.sigma);
    c.box = s.value("box", c.box);
    c.placement = s.value("placement", c.placement);
  }
  if (j.contains("physics")) {
    const auto& p = j.at("physics");
    c.T = p.value("T", c.T);
    c.s = p.value("s", c.s);
    c.max_mode = p.value("max_mode", c.max_mode);
    c.eig_count = p.value("eig_count", c.eig_count);
    c.lambda_cutoff = p.value("lambda_cutoff", c.lambda_cutoff);
    c.r_values = p.value("r_values", c.r_values);
    c.eps = p.value("eps", c.eps);
  }
  if (j.contains("assumption")) {
    const auto& a = j.at("assumption");
    c.assumption = a.value("name", c.assumption);
    c.c2 = a.value("c2", c.c2);
    c.beta2 = a.value("beta2", c.beta2);
  }
  if (j.contains("free_constants")) {
    const auto& f = j.at("free_constants");
    c.free_constants.C_hat = f.value("C_hat", 1.0);
    c.free_constants.kappa_n = f.value("kappa_n", 1.0);
    c.free_constants.C_spec = f.value("C_spec", 1.0);
    c.free_constants.C0 = f.value("C0", 1.0);
    c.free_constants.C1 = f.value("C1", 1.0);
    c.free_constants.C2 = f.value("C2", 1.0);
    c.free_constants.C3 = f.value("C3", 1.0);
    c.free_constants.C4 = f.value("C4", 1.0);
    c.free_constants.C5 = f.value("C5", 1.0);
  }
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
  c.tolerance = j.value("tolerance", c.tolerance);
  c.out = j.value("out", c.out);
  return c;
}

namespace {

PotentialSpec table_potential(const std::string& file, int n) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open potential table " + file);
  std::vector<std::pair<double, double>> pts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double x, v;
    if (ss >> x >> v) pts.emplace_back(x, v);
  }
  if (pts.size() < 2) throw std::runtime_error("potential table needs >= 2 samples");
  std::sort(pts.begin(), pts.end());
  PotentialSpec p;
  p.dim = n;
  p.label = "table:" + file;
  // tabulated radial profile, piecewise linear in |x|, clamped outside
  p.value = [pts](std::span<const double> x) {
    const double r = std::sqrt(norm2(x));
    if (r <= pts.front().first) return pts.front().second;
    if (r >= pts.back().first) return pts.back().second;
    auto it = std::upper_bound(pts.begin(), pts.end(), std::make_pair(r, 0.0));
    const auto [x1, v1] = *it;
    const auto [x0, v0] = *(it - 1);
    return v0 + (v1 - v0) * (r - x0) / (x1 - x0);
  };
  return p;
}

}  // namespace

PotentialSpec RunConfig::make_potential() const {
  if (potential_kind == "power") return make_power_potential(c, beta, dim);
  if (potential_kind == "table") {
    PotentialSpec p = table_potential(table_file, dim);
    p.c1 = c;
    p.beta1 = beta;
    p.c2 = c2 > 0.0 ? c2 : c;
    p.beta2 = beta2 > 0.0 ? beta2 : beta;
    p.assumption = assumption == "A2" ? Assumption::A2 : Assumption::A1;
    return p;
  }
  throw std::invalid_argument("unknown potential kind '" + potential_kind + "'");
}

Grid RunConfig::make_grid() const {
  Boundary b;
  if (boundary == "dirichlet")
    b = Boundary::Dirichlet;
  else if (boundary == "periodic")
    b = Boundary::Periodic;
  else
    throw std::invalid_argument("boundary must be 'dirichlet' or 'periodic'");
  return Grid(dim, halfwidth, points_per_dim, b);
}

std::optional<AssumptionParams> RunConfig::make_params() const {
  AssumptionParams p;
  if (assumption == "A1")
    p.assumption = Assumption::A1;
  else if (assumption == "A2")
    p.assumption = Assumption::A2;
  else if (assumption.empty())
    p.assumption = beta >= 1.0 ? Assumption::A1 : Assumption::A2;
  else
    throw std::invalid_argument("assumption must be 'A1' or 'A2'");
  p.c1 = c;
  p.c2 = c2 > 0.0 ? c2 : c;
  p.beta1 = beta;
  p.beta2 = beta2 > 0.0 ? beta2 : beta;
  p.sigma = sigma;
  p.gamma = std::min(gamma, 0.499999);  // formula domain is (0, 1/2)
  p.n = dim;
  p.validate();
  return p;
}

std::string RunConfig::content_hash() const {
  json j = to_json();
  j.erase("out");
  j.erase("threads");
  const std::string canon = j.dump();
  // FNV-1a, rendered as 16 hex digits
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string csv_header(const RunConfig& cfg) {
  std::ostringstream out;
  out << "# grushinlab 1.0\n";
  out << "# config: " << cfg.to_json().dump() << "\n";
  out << "# config_hash: " << cfg.content_hash() << "\n";
  return out.str();
}

json report_header(const RunConfig& cfg) {
  return json{{"tool", "grushinlab"},
              {"version", "1.0"},
              {"config", cfg.to_json()},
              {"config_hash", cfg.content_hash()}};
}

json to_json(const VerificationReport& rep) {
  return json{{"quantity", rep.quantity}, {"empirical", rep.empirical},
              {"bound", rep.bound},       {"margin", rep.margin},
              {"pass", rep.pass},         {"lambda", rep.lambda},
              {"gamma", rep.gamma},       {"sigma", rep.sigma},
              {"T", rep.T},               {"s", rep.s},
              {"r", rep.r}};
}

json to_json(const DistributedSet& set) {
  json centers = json::array();
  for (const auto& cell : set.cells) {
    json k = json::array(), z = json::array();
    for (int d = 0; d < set.n; ++d) {
      k.push_back(cell.k[d]);
      z.push_back(cell.z[d]);
    }
    centers.push_back({{"k", k}, {"z", z}, {"radius", set.radius(cell.k)}});
  }
  json j{{"n", set.n},   {"gamma", set.gamma}, {"sigma", set.sigma},
         {"seed", set.seed}, {"box", set.box},     {"centers", centers}};
  if (set.uniform_radius) j["uniform_radius"] = *set.uniform_radius;
  return j;
}

json constants_report(const AssumptionParams& params, double T, double s,
                      const FreeConstants& fc, int n_bbl) {
  json j;
  BblBound bbl = bbl_lower_bound(params.c1, params.beta1, n_bbl);
  j["mu_star"] = bbl.mu_star;
  j["lambda_star"] = bbl.lambda_star;
  j["s_critical"] = critical_power(params.assumption, params.beta1);
  j["zeta"] = params.zeta();

  ExponentTable table = exponent_table(params, 1e-3);
  if (s > table.zeta) {
    const double nu = std::max(table.a_plus, s / (s - table.zeta) * table.b_plus);
    const double eps = proof_epsilon(s, table.zeta, params.beta1, nu);
    if (eps > 0.0) table.epsilon = eps;
  }
  const char* branch =
      table.branch == ExponentBranch::A1Case
          ? "A1"
          : (table.branch == ExponentBranch::A2BetaStarNonpos ? "A2_beta_star_nonpos"
                                                              : "A2_beta_star_pos");
  j["exponents"] = {{"zeta", table.zeta},       {"a_minus", table.a_minus},
                    {"b_minus", table.b_minus}, {"a_plus", table.a_plus},
                    {"b_plus", table.b_plus},   {"epsilon", table.epsilon},
                    {"branch", branch},         {"degenerate_case", table.degenerate_case}};

  json lambda_rows = json::array();
  for (double lam : {0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0}) {
    SpectralExponent se = spectral_exponent(params, params.c1, params.c2, lam);
    lambda_rows.push_back(
        {{"lambda", lam},
         {"rho", localization_radius(lam, params.c1, params.beta1, params.n, fc.C_hat)},
         {"N_bound", eigencount_bound(lam, params.c1, params.beta1, params.n, fc.kappa_n)},
         {"J", se.J},
         {"J_hat", se.J_hat},
         {"script_J", se.script_J}});
  }
  j["lambda_table"] = lambda_rows;

  if (s > table.zeta) {
    json cobs_rows = json::array();
    for (double r : {0.25, 0.5, 1.0, 2.0, 4.0, 16.0, 64.0})
      cobs_rows.push_back({{"r", r}, {"cobs", cobs_formula(T, s, r, params, table, fc)}});
    j["cobs_table"] = cobs_rows;
    SupBounds sup = cobs_sup_bounds(T, s, params, table, fc);
    j["sup_bounds"] = {{"sup_is_finite", sup.sup_is_finite},
                       {"violated", sup.violated},
                       {"nu", sup.nu},
                       {"epsilon", sup.epsilon},
                       {"A0", sup.A0},
                       {"A1_bound", sup.A1_bound},
                       {"delta_sup", sup.delta_sup},
                       {"B_minus", sup.B_minus},
                       {"B_plus", sup.B_plus},
                       {"delta_B", sup.delta_B}};
  } else {
    j["error"] = {{"violated_hypothesis", "s > zeta"},
                  {"s", s},
                  {"zeta", table.zeta}};
  }
  j["free_constants"] = {{"C_hat", fc.C_hat}, {"kappa_n", fc.kappa_n},
                         {"C_spec", fc.C_spec}, {"C0", fc.C0}, {"C1", fc.C1},
                         {"C2", fc.C2},       {"C3", fc.C3}, {"C4", fc.C4},
                         {"C5", fc.C5}};
  return j;
}

std::string eigen_csv(const SpectralData& S) {
  std::ostringstream out;
  out << "index,lambda\n";
  for (int k = 0; k < S.count(); ++k) out << k << "," << fmt(S.eigenvalues[k]) << "\n";
  return out.str();
}

void write_eigenvectors(const std::string& path, const SpectralData& S) {
  json header{{"n", S.grid.n},
              {"halfwidth", S.grid.halfwidth},
              {"points_per_dim", S.grid.points_per_dim},
              {"boundary", S.grid.boundary == Boundary::Dirichlet ? "dirichlet" : "periodic"},
              {"count", S.count()},
              {"size", S.grid.size()},
              {"dtype", "float64-le"},
              {"layout", "column-major"}};
  const std::string head = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const std::uint64_t len = head.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  out.write(reinterpret_cast<const char*>(S.vectors.data()),
            static_cast<std::streamsize>(sizeof(double) * S.vectors.size()));
}

std::string mask_csv(const SetIndicator& ind) {
  std::ostringstream out;
  out << "node_index\n";
  for (std::size_t p = 0; p < ind.mask.size(); ++p)
    if (ind.mask[p]) out << p << "\n";
  return out.str();
}

void write_file(const std::string& path, const std::string& body) {
  std::filesystem::path fp(path);
  if (fp.has_parent_path()) std::filesystem::create_directories(fp.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << body;
}

namespace {

bool load_spectral(const std::string& path, const Grid& grid, SpectralData& S) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len > (1u << 20)) return false;
  std::string head(len, '\0');
  in.read(head.data(), static_cast<std::streamsize>(len));
  json h = json::parse(head, nullptr, false);
  if (h.is_discarded()) return false;
  if (h.value("n", 0) != grid.n || h.value("points_per_dim", 0) != grid.points_per_dim ||
      h.value("halfwidth", 0.0) != grid.halfwidth)
    return false;
  const int count = h.value("count", 0);
  const auto size = grid.size();
  S.grid = grid;
  S.coverage = h.value("coverage", 0.0);
  S.eigenvalues.resize(count);
  in.read(reinterpret_cast<char*>(S.eigenvalues.data()),
          static_cast<std::streamsize>(sizeof(double) * count));
  S.vectors.resize(static_cast<Eigen::Index>(size), count);
  in.read(reinterpret_cast<char*>(S.vectors.data()),
          static_cast<std::streamsize>(sizeof(double) * S.vectors.size()));
  return static_cast<bool>(in);
}

void store_spectral(const std::string& path, const SpectralData& S) {
  json h{{"n", S.grid.n},
         {"halfwidth", S.grid.halfwidth},
         {"points_per_dim", S.grid.points_per_dim},
         {"count", S.count()},
         {"coverage", S.coverage}};
  const std::string head = h.dump();
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) return;  // cache failures are silent
    const std::uint64_t len = head.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    out.write(reinterpret_cast<const char*>(S.eigenvalues.data()),
              static_cast<std::streamsize>(sizeof(double) * S.eigenvalues.size()));
    out.write(reinterpret_cast<const char*>(S.vectors.data()),
              static_cast<std::streamsize>(sizeof(double) * S.vectors.size()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
}

}  // namespace

SpectralData cached_eigensolve(const DiscreteOperator& A, const EigRequest& req,
                               const EigOptions& opt, const std::string& key) {
  const char* dir = std::getenv("GRUSHINLAB_CACHE");
  if (!dir || !*dir) return eigensolve(A, req, opt);
  std::filesystem::create_directories(dir);
  const std::string path = std::string(dir) + "/" + key + ".eig";
  SpectralData S;
  if (load_spectral(path, A.grid, S)) return S;
  S = eigensolve(A, req, opt);
  store_spectral(path, S);
  return S;
}

}  // namespace grushinlab
