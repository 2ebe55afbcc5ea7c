#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <omp.h>

#include "grushinlab/grushin.hpp"
#include "grushinlab/io.hpp"

using namespace grushinlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAuditFail = 2;

void emit(const RunConfig& cfg, const std::string& body) {
  if (cfg.out.empty())
    std::cout << body;
  else
    write_file(cfg.out, body);
}

SetIndicator build_mask(const RunConfig& cfg, const Grid& grid) {
  if (cfg.set_kind == "full") return full_indicator(grid);
  const Placement placement =
      cfg.placement == "seeded_random" ? Placement::SeededRandom : Placement::CellCenter;
  DistributedSet set =
      cfg.set_kind == "distributed"
          ? make_distributed(cfg.gamma, cfg.sigma, cfg.box, grid.n, placement, cfg.seed)
          : make_equidistributed(cfg.gamma, cfg.box, grid.n, placement, cfg.seed);
  return indicator(set, grid);
}

SpectralData solve_spectrum(const RunConfig& cfg, double scale_r = 1.0) {
  PotentialSpec V = cfg.make_potential();
  Grid grid = cfg.make_grid();
  DiscreteOperator op = scale_r == 1.0 ? discretize(V, grid)
                                       : discretize(scale(V, scale_r), grid);
  EigRequest req = cfg.lambda_cutoff > 0.0
                       ? EigRequest::below(cfg.lambda_cutoff)
                       : EigRequest::lowest(std::min<int>(
                             cfg.eig_count, static_cast<int>(grid.size())));
  EigOptions opt;
  opt.seed = static_cast<unsigned>(cfg.seed);
  return cached_eigensolve(op, req, opt,
                           cfg.content_hash() + "-r" + fmt(scale_r));
}

int cmd_constants(const RunConfig& cfg) {
  auto params = cfg.make_params();
  json out = report_header(cfg);
  out["report"] = constants_report(*params, cfg.T, cfg.s, cfg.free_constants, cfg.dim);
  const bool invalid = out["report"].contains("error");
  emit(cfg, out.dump(2) + "\n");
  return invalid ? kExitUsage : kExitOk;
}

int cmd_phase_diagram(const RunConfig& cfg, double beta_min, double beta_max,
                      int resolution) {
  if (!(beta_min > 0.0) || beta_max < beta_min || resolution < 2)
    throw CLI::ValidationError("phase-diagram", "beta range must be positive");
  std::ostringstream body;
  body << csv_header(cfg);
  body << "beta,s_boundary,regime_above,regime_below\n";
  auto row = [&](double beta) {
    const double boundary =
        beta < 1.0 ? (beta + 2.0) / 3.0 : (beta + 2.0) / 4.0;
    body << fmt(beta) << "," << fmt(boundary) << ",controllable,unknown\n";
  };
  bool breakpoint_emitted = false;
  for (int i = 0; i < resolution; ++i) {
    const double beta = beta_min + (beta_max - beta_min) * i / (resolution - 1);
    if (beta > 1.0 && !breakpoint_emitted && beta_min < 1.0) {
      row(1.0);
      breakpoint_emitted = true;
    }
    if (beta == 1.0) breakpoint_emitted = true;
    row(beta);
  }
  emit(cfg, body.str());
  return kExitOk;
}

int cmd_eigs(const RunConfig& cfg, const std::string& vectors_out) {
  SpectralData S = solve_spectrum(cfg);
  std::ostringstream body;
  body << csv_header(cfg) << eigen_csv(S);
  emit(cfg, body.str());
  if (!vectors_out.empty()) write_eigenvectors(vectors_out, S);
  return kExitOk;
}

int cmd_sets(const RunConfig& cfg, const std::string& mask_out) {
  Grid grid = cfg.make_grid();
  json out = report_header(cfg);
  if (cfg.set_kind != "full") {
    const Placement placement = cfg.placement == "seeded_random"
                                    ? Placement::SeededRandom
                                    : Placement::CellCenter;
    DistributedSet set = cfg.set_kind == "distributed"
                             ? make_distributed(cfg.gamma, cfg.sigma, cfg.box,
                                                grid.n, placement, cfg.seed)
                             : make_equidistributed(cfg.gamma, cfg.box, grid.n,
                                                    placement, cfg.seed);
    out["set"] = to_json(set);
  }
  SetIndicator ind = build_mask(cfg, grid);
  ThicknessReport th = thickness(ind, std::min(1.0, 2.0 * grid.halfwidth));
  out["indicator"] = {{"measure", ind.measure},
                      {"count", ind.count()},
                      {"warning", ind.warning}};
  out["thickness"] = {{"gamma_est", th.gamma_est}, {"grid_error", th.grid_error}};
  emit(cfg, out.dump(2) + "\n");
  if (!mask_out.empty()) write_file(mask_out, csv_header(cfg) + mask_csv(ind));
  return kExitOk;
}

VerificationReport make_row(const RunConfig& cfg, std::string quantity,
                            double empirical, double bound) {
  VerificationReport rep;
  rep.quantity = std::move(quantity);
  rep.empirical = empirical;
  rep.bound = bound;
  rep.margin = bound - empirical;
  rep.pass = empirical <= bound * (1.0 + cfg.tolerance);
  rep.gamma = cfg.gamma;
  rep.sigma = cfg.sigma;
  rep.T = cfg.T;
  rep.s = cfg.s;
  return rep;
}

int cmd_audit(const RunConfig& cfg, const std::string& which) {
  auto params = cfg.make_params();
  SpectralData S = solve_spectrum(cfg);
  Grid grid = cfg.make_grid();
  SetIndicator mask = build_mask(cfg, grid);
  std::vector<VerificationReport> rows;
  const bool all = which == "all";

  if (all || which == "spectral-ineq") {
    for (double lam : {5.0, 10.0, 20.0}) {
      if (lam > S.coverage) break;
      SpectralRatio sr = spectral_ratio(S, lam, mask);
      SpectralExponent se = spectral_exponent(*params, params->c1, params->c2, lam);
      auto row = make_row(cfg, "spectral_ratio", sr.ratio,
                          std::pow(1.0 / params->gamma,
                                   cfg.free_constants.C_spec * se.script_J));
      row.lambda = lam;
      rows.push_back(row);
    }
  }
  if (all || which == "localization") {
    const double lam = std::min(20.0, S.coverage);
    LocalizationAudit loc = localization_audit(S, lam, params->c1, params->beta1);
    auto row = make_row(cfg, "localization_C_hat", loc.C_hat_min, 10.0);
    row.lambda = lam;
    rows.push_back(row);
  }
  if (all || which == "weighted") {
    const double lam = std::min(20.0, S.coverage);
    WeightedNormReport w = weighted_norm_audit(S, lam, params->c1, params->beta1);
    auto row = make_row(cfg, "weighted_norm_constant", w.max_norm_constant, 1.0);
    row.lambda = lam;
    rows.push_back(row);
  }
  if (all || which == "caccioppoli") {
    std::vector<double> origin(grid.n, 0.0);
    for (double rho : {0.5, 1.0, 2.0}) {
      double worst = 0.0;
      for (int k = 0; k < std::min(10, S.count()); ++k)
        worst = std::max(worst,
                         caccioppoli_audit(S, k, rho, origin).constant_min);
      auto row = make_row(cfg, "caccioppoli_rho_" + fmt(rho), worst,
                          1.0 + 8.0 / (rho * rho));
      rows.push_back(row);
    }
  }
  if (all || which == "lift") {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss;
    std::vector<int> support;
    for (int k = 0; k < S.count(); ++k)
      if (S.eigenvalues[k] > 1e-12 && S.eigenvalues[k] <= 10.0) support.push_back(k);
    for (double rho : {0.5, 1.0}) {
      double worst_rel = 0.0;
      bool ok = !support.empty();
      for (int trial = 0; trial < 10 && ok; ++trial) {
        Eigen::VectorXd a(support.size());
        for (auto& v : a) v = gauss(rng);
        HarmonicLiftAudit lift = harmonic_lift_audit(S, support, a, rho);
        ok = lift.lower <= lift.H1_norm_sq * (1.0 + cfg.tolerance) &&
             lift.H1_norm_sq <= lift.upper * (1.0 + cfg.tolerance);
        worst_rel = std::max(worst_rel, lift.H1_norm_sq / lift.upper);
      }
      auto row = make_row(cfg, "harmonic_lift_rho_" + fmt(rho), worst_rel, 1.0);
      row.pass = row.pass && ok;
      rows.push_back(row);
    }
  }
  if (all || which == "observability") {
    GramianBundle bundle = make_gramian(S, mask, cfg.T, cfg.s);
    ObservabilityResult obs = gramian_observability(bundle);
    const double bound =
        cfg.s > params->zeta()
            ? cobs_formula(cfg.T, cfg.s, 1.0, *params,
                           exponent_table(*params, 1e-3), cfg.free_constants)
            : std::numeric_limits<double>::infinity();
    auto row = make_row(cfg, "observability_C_emp", obs.C_emp, bound);
    row.pass = std::isfinite(obs.C_emp);
    row.r = 1.0;
    rows.push_back(row);
  }
  if (all || which == "control") {
    GramianBundle bundle = make_gramian(S, mask, cfg.T, cfg.s);
    Eigen::VectorXd u0 = S.vectors.col(0);
    if (S.count() > 1) u0 += S.vectors.col(1);
    ControlResult ctl = synthesize_control(bundle, u0, cfg.eps > 0.0 ? cfg.eps : 1e-12);
    const double u0norm = std::sqrt(S.weight()) * u0.norm();
    auto row = make_row(cfg, "control_terminal_norm", ctl.terminal_norm, 1e-6 * u0norm);
    rows.push_back(row);
  }

  std::ostringstream body;
  bool failed = false;
  for (const auto& row : rows) {
    json j = to_json(row);
    j["header"] = report_header(cfg);
    body << j.dump() << "\n";
    failed = failed || !row.pass;
  }
  emit(cfg, body.str());
  return failed ? kExitAuditFail : kExitOk;
}

int cmd_grushin(const RunConfig& cfg, bool with_oracle) {
  PotentialSpec V = cfg.make_potential();
  Grid xgrid = cfg.make_grid();
  if (xgrid.n != 1)
    throw CLI::ValidationError("grushin", "x-grid must be one-dimensional");
  EigOptions opt;
  opt.seed = static_cast<unsigned>(cfg.seed);
  ModeFamily fam = build_modes(V, std::nullopt, xgrid, cfg.max_mode, cfg.s, 1,
                               cfg.eig_count, ModeSymbol::Continuum, 0, opt);
  SetIndicator mask = build_mask(cfg, xgrid);
  GrushinObservabilityReport rep =
      grushin_observability(fam, mask, cfg.T, cfg.s, cfg.make_params(),
                            cfg.free_constants);

  json out = report_header(cfg);
  json rows = json::array();
  for (const auto& row : rep.rows)
    rows.push_back({{"k", row.k[0]},
                    {"k_sq", row.r},
                    {"C_emp", row.C_emp},
                    {"paper_bound", row.paper_bound},
                    {"thickness_fallback", row.thickness_fallback}});
  out["modes"] = rows;
  out["C_agg"] = rep.C_agg;
  out["argmax_mode"] = rep.argmax_mode[0];
  out["k0_thickness"] = rep.k0_thickness;

  if (with_oracle) {
    const int ny = 16;
    Grid ogrid = xgrid;
    if (ogrid.size() * ny > 10'000) ogrid = Grid(1, xgrid.halfwidth, 61);
    // full per-mode spectra so random data lies in the span exactly
    ModeFamily ofam = build_modes(V, std::nullopt, ogrid, ny / 2, cfg.s, 1,
                                  ogrid.points_per_dim, ModeSymbol::DiscreteFd,
                                  ny, opt);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd u0(ogrid.points_per_dim, ny);
    for (int i = 0; i < u0.rows(); ++i)
      for (int j = 0; j < u0.cols(); ++j) u0(i, j) = gauss(rng);
    double worst = 0.0;
    for (double t : {0.05, 0.2}) {
      Eigen::MatrixXd ref = direct_oracle(V, ogrid, ny, t, cfg.s, u0);
      Eigen::MatrixXd got = to_physical(evolve(ofam, to_modes(ogrid, u0), t));
      worst = std::max(worst, (got - ref).norm() / ref.norm());
    }
    out["oracle_max_rel_deviation"] = worst;
  }
  emit(cfg, out.dump(2) + "\n");
  return kExitOk;
}

int cmd_control(const RunConfig& cfg) {
  SpectralData S = solve_spectrum(cfg);
  Grid grid = cfg.make_grid();
  SetIndicator mask = build_mask(cfg, grid);
  GramianBundle bundle = make_gramian(S, mask, cfg.T, cfg.s);
  ObservabilityResult obs = gramian_observability(bundle);
  Eigen::VectorXd u0 = S.vectors.col(0);
  if (S.count() > 1) u0 += S.vectors.col(1);
  ControlResult ctl = synthesize_control(bundle, u0, cfg.eps > 0.0 ? cfg.eps : 1e-12);
  const double u0norm2 = S.weight() * u0.squaredNorm();

  json out = report_header(cfg);
  out["control"] = {{"terminal_norm", ctl.terminal_norm},
                    {"cost", ctl.cost},
                    {"C_emp", obs.C_emp},
                    {"duality_cost_bound", obs.C_emp / cfg.T * u0norm2},
                    {"u0_norm", std::sqrt(u0norm2)},
                    {"time_samples", ctl.times.size()}};
  emit(cfg, out.dump(2) + "\n");
  const bool ok = ctl.terminal_norm <= 1e-6 * std::sqrt(u0norm2);
  return ok ? kExitOk : kExitAuditFail;
}

int cmd_scan_r(const RunConfig& cfg) {
  PotentialSpec V = cfg.make_potential();
  Grid grid = cfg.make_grid();
  SetIndicator mask = build_mask(cfg, grid);
  std::vector<double> rs = cfg.r_values;
  if (rs.empty()) rs = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
  EigOptions opt;
  opt.seed = static_cast<unsigned>(cfg.seed);
  auto rows = scan_scaled_observability(V, std::nullopt, rs, mask, cfg.T, cfg.s,
                                        cfg.eig_count, cfg.make_params(),
                                        cfg.free_constants, opt);
  std::ostringstream body;
  body << csv_header(cfg) << "r,C_emp,bound\n";
  for (const auto& row : rows)
    body << fmt(row.r) << "," << fmt(row.C_emp) << "," << fmt(row.paper_bound)
         << "\n";
  emit(cfg, body.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grushinlab: constants, spectra, and observability audits for "
               "degenerate heat-type control problems"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_file, vectors_out, mask_out, audit_which = "all";
  double beta_min = 0.25, beta_max = 4.0;
  int resolution = 16;
  bool with_oracle = false;

  app.add_option("--config", config_file, "JSON config file")
      ->check(CLI::ExistingFile);
  app.add_option("--out", cfg.out, "output path (default stdout)");
  app.add_option("--seed", cfg.seed, "RNG seed");
  app.add_option("--threads", cfg.threads, "OpenMP thread count (0 = default)");
  app.add_option("--tolerance", cfg.tolerance, "relative pass tolerance");

  auto add_common = [&](CLI::App* sub) {
    sub->fallthrough();  // let global flags (--seed, --out, ...) follow the subcommand
    sub->add_option("--c1", cfg.c, "potential lower-bound coefficient");
    sub->add_option("--c2", cfg.c2, "growth-bound coefficient (0 = c1)");
    sub->add_option("--beta1", cfg.beta, "potential lower-bound power");
    sub->add_option("--beta2", cfg.beta2, "growth-bound power (0 = beta1)");
    sub->add_option("--sigma", cfg.sigma, "distributed-set decay power");
    sub->add_option("--gamma", cfg.gamma, "set density parameter");
    sub->add_option("--assumption", cfg.assumption, "A1 or A2");
    sub->add_option("--T", cfg.T, "time horizon");
    sub->add_option("--s", cfg.s, "fractional power");
    sub->add_option("--n", cfg.dim, "space dimension");
    sub->add_option("--L", cfg.halfwidth, "domain halfwidth");
    sub->add_option("--N", cfg.points_per_dim, "grid points per dimension");
    sub->add_option("--eig-count", cfg.eig_count, "eigenpairs to compute");
    sub->add_option("--lambda", cfg.lambda_cutoff, "eigenvalue cutoff (0 = count)");
    sub->add_option("--set", cfg.set_kind, "equidistributed | distributed | full");
    sub->add_option("--placement", cfg.placement, "cell_center | seeded_random");
    sub->add_option("--box", cfg.box, "lattice-cell bounding box");
    sub->add_option("--M", cfg.max_mode, "torus mode cap");
    sub->add_option("--eps", cfg.eps, "HUM regularization (0 = default)");
    sub->add_option("--V", cfg.potential_kind,
                    "potential kind: power | table (or power:BETA shorthand)");
    sub->add_option("--table-file", cfg.table_file, "CSV samples for kind=table");
  };

  auto* c_constants = app.add_subcommand("constants", "explicit constants report");
  add_common(c_constants);
  auto* c_eigs = app.add_subcommand("eigs", "eigenvalue export");
  add_common(c_eigs);
  c_eigs->add_option("--vectors-out", vectors_out, "binary eigenvector sidecar");
  auto* c_sets = app.add_subcommand("sets", "control-set construction and thickness");
  add_common(c_sets);
  c_sets->add_option("--mask-out", mask_out, "node-index CSV of the mask");
  auto* c_audit = app.add_subcommand("audit", "inequality audits (JSON lines)");
  add_common(c_audit);
  c_audit->add_option("--audit", audit_which,
                      "spectral-ineq | localization | weighted | caccioppoli | "
                      "lift | observability | control | all");
  auto* c_grushin = app.add_subcommand("grushin", "mode-decoupled evolution report");
  add_common(c_grushin);
  c_grushin->add_flag("--oracle", with_oracle, "compare against the dense 2-D solve");
  auto* c_control = app.add_subcommand("control", "HUM control synthesis");
  add_common(c_control);
  auto* c_scan = app.add_subcommand("scan-r", "observability scan over scaled potentials");
  add_common(c_scan);
  c_scan->add_option("--r-values", cfg.r_values, "scaling values");
  auto* c_phase = app.add_subcommand("phase-diagram", "critical-power boundary CSV");
  c_phase->fallthrough();
  c_phase->add_option("--beta-min", beta_min, "lowest beta");
  c_phase->add_option("--beta-max", beta_max, "highest beta");
  c_phase->add_option("--resolution", resolution, "row count");

  // config file values apply first, flags override
  app.preparse_callback([&](std::size_t) {
    for (int i = 1; i < argc - 1; ++i)
      if (std::string(argv[i]) == "--config") {
        std::ifstream in(argv[i + 1]);
        if (in) {
          json j = json::parse(in, nullptr, false);
          if (!j.is_discarded()) {
            std::string out_keep = cfg.out;
            cfg = RunConfig::from_json(j);
            if (cfg.out.empty()) cfg.out = out_keep;
          }
        }
      }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
  // power:BETA shorthand for --V
  if (cfg.potential_kind.rfind("power:", 0) == 0) {
    cfg.beta = std::stod(cfg.potential_kind.substr(6));
    cfg.potential_kind = "power";
  }

  try {
    if (c_constants->parsed()) { cfg.command = "constants"; return cmd_constants(cfg); }
    if (c_eigs->parsed()) { cfg.command = "eigs"; return cmd_eigs(cfg, vectors_out); }
    if (c_sets->parsed()) { cfg.command = "sets"; return cmd_sets(cfg, mask_out); }
    if (c_audit->parsed()) { cfg.command = "audit"; return cmd_audit(cfg, audit_which); }
    if (c_grushin->parsed()) { cfg.command = "grushin"; return cmd_grushin(cfg, with_oracle); }
    if (c_control->parsed()) { cfg.command = "control"; return cmd_control(cfg); }
    if (c_scan->parsed()) { cfg.command = "scan-r"; return cmd_scan_r(cfg); }
    if (c_phase->parsed()) {
      cfg.command = "phase-diagram";
      return cmd_phase_diagram(cfg, beta_min, beta_max, resolution);
    }
  } catch (const std::invalid_argument& e) {
    json err{{"error", e.what()}};
    std::cerr << err.dump() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    json err{{"error", e.what()}};
    std::cerr << err.dump() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
