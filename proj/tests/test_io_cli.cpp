#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "grushinlab/io.hpp"

using namespace grushinlab;

#ifndef GRUSHINLAB_CLI_PATH
#error "GRUSHINLAB_CLI_PATH must point at the built CLI binary"
#endif

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(GRUSHINLAB_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult res;
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.out.append(buf.data(), got);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::string csv_body(const std::string& text) {
  std::istringstream in(text);
  std::string line, body;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') body += line + "\n";
  return body;
}

}  // namespace

TEST_CASE("run config round-trips through JSON") {
  RunConfig cfg;
  cfg.command = "scan-r";
  cfg.potential_kind = "power";
  cfg.c = 2.5;
  cfg.beta = 1.5;
  cfg.dim = 2;
  cfg.halfwidth = 7.0;
  cfg.points_per_dim = 123;
  cfg.set_kind = "distributed";
  cfg.gamma = 0.21;
  cfg.sigma = 0.7;
  cfg.box = 5;
  cfg.placement = "seeded_random";
  cfg.T = 0.75;
  cfg.s = 1.25;
  cfg.r_values = {1.0, 2.0, 4.0};
  cfg.assumption = "A1";
  cfg.free_constants.C3 = 2.0;
  cfg.seed = 99;
  cfg.tolerance = 1e-7;
  cfg.out = "somewhere.csv";
  json j = cfg.to_json();
  CHECK(RunConfig::from_json(j).to_json() == j);
  CHECK(RunConfig::from_json(j).content_hash() == cfg.content_hash());
  // out path and threads do not affect the content hash
  RunConfig other = cfg;
  other.out = "elsewhere.csv";
  other.threads = 4;
  CHECK(other.content_hash() == cfg.content_hash());
  other.seed = 100;
  CHECK(other.content_hash() != cfg.content_hash());
}

TEST_CASE("double formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 2.0, 1e-300, 123456.789, -0.75}) {
    CHECK(std::stod(fmt(v)) == v);
  }
}

TEST_CASE("verification report serialization") {
  VerificationReport rep;
  rep.quantity = "demo";
  rep.empirical = 1.5;
  rep.bound = 2.0;
  rep.margin = 0.5;
  rep.pass = true;
  json j = to_json(rep);
  CHECK(j["quantity"] == "demo");
  CHECK(j["pass"] == true);
  CHECK(j["bound"] == 2.0);
}

TEST_CASE("eigen export: CSV and the binary sidecar") {
  Grid g(1, 5.0, 120);
  SpectralData S = eigensolve(discretize(make_power_potential(1.0, 2.0, 1), g),
                              EigRequest::lowest(4));
  std::string csv = eigen_csv(S);
  CHECK(csv.find("index,lambda") == 0);
  const auto tmp = std::filesystem::temp_directory_path() / "glab_vecs.bin";
  write_eigenvectors(tmp.string(), S);
  std::ifstream in(tmp, std::ios::binary);
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string head(len, '\0');
  in.read(head.data(), static_cast<std::streamsize>(len));
  json h = json::parse(head);
  CHECK(h["count"] == 4);
  CHECK(h["points_per_dim"] == 120);
  double first = 0.0;
  in.read(reinterpret_cast<char*>(&first), sizeof(first));
  CHECK(first == S.vectors(0, 0));
  std::filesystem::remove(tmp);
}

TEST_CASE("set and mask serialization") {
  DistributedSet set = make_distributed(0.3, 1.0, 2, 1, Placement::CellCenter);
  json j = to_json(set);
  CHECK(j["centers"].size() == 5);
  CHECK(j["centers"][2]["radius"] == doctest::Approx(0.3));  // k = 0 under sigma > 0
  Grid g(1, 3.0, 59);
  SetIndicator ind = indicator(set, g);
  std::string csv = mask_csv(ind);
  CHECK(csv.find("node_index") == 0);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == ind.count());
}

TEST_CASE("eigensolve cache reuses stored spectra") {
  const auto dir = std::filesystem::temp_directory_path() / "glab_cache_test";
  std::filesystem::remove_all(dir);
  setenv("GRUSHINLAB_CACHE", dir.c_str(), 1);
  Grid g(1, 5.0, 150);
  DiscreteOperator A = discretize(make_power_potential(1.0, 2.0, 1), g);
  SpectralData first = cached_eigensolve(A, EigRequest::lowest(3), {}, "unittestkey");
  CHECK(std::filesystem::exists(dir / "unittestkey.eig"));
  SpectralData second = cached_eigensolve(A, EigRequest::lowest(3), {}, "unittestkey");
  CHECK(first.eigenvalues == second.eigenvalues);
  CHECK((first.vectors - second.vectors).norm() == 0.0);
  unsetenv("GRUSHINLAB_CACHE");
  std::filesystem::remove_all(dir);
}

TEST_CASE("cli: phase diagram boundaries and breakpoint") {
  RunResult res = run_cli("phase-diagram --beta-min 0.5 --beta-max 2 --resolution 4");
  CHECK(res.exit_code == 0);
  const std::string body = csv_body(res.out);
  CHECK(body.find("beta,s_boundary") == 0);
  CHECK(body.find("\n1,0.75,") != std::string::npos);        // breakpoint row
  CHECK(body.find("\n0.5,0.8333333333333") != std::string::npos);
  CHECK(body.find("\n2,1,") != std::string::npos);
}

TEST_CASE("cli: identical config and seed give byte-identical CSV bodies") {
  const std::string args =
      "eigs --N 150 --L 6 --eig-count 4 --seed 7";
  RunResult a = run_cli(args);
  RunResult b = run_cli(args);
  CHECK(a.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(csv_body(a.out) == csv_body(b.out));
  // header embeds the resolved config
  CHECK(a.out.find("# config: ") != std::string::npos);
}

TEST_CASE("cli: exit-code contract") {
  CHECK(run_cli("no-such-command").exit_code == 1);
  CHECK(run_cli("constants --assumption A1 --beta1 2 --s 0.25").exit_code == 1);  // s <= zeta
  // empty control set: observability audit reports +inf and fails
  RunResult fail = run_cli(
      "audit --audit observability --set equidistributed --gamma 0.01 --N 40 --L 5 "
      "--eig-count 5");
  CHECK(fail.exit_code == 2);
  CHECK(run_cli("audit --audit observability --set full --N 200 --eig-count 10").exit_code ==
        0);
}

TEST_CASE("cli: constants report content") {
  RunResult res = run_cli("constants --beta1 2 --beta2 2 --sigma 0 --assumption A1");
  CHECK(res.exit_code == 0);
  json j = json::parse(res.out);
  CHECK(j["report"]["s_critical"] == 1.0);
  CHECK(j["report"]["zeta"] == 0.5);
  RunResult a2 = run_cli("constants --beta1 1 --assumption A2");
  CHECK(json::parse(a2.out)["report"]["s_critical"] == 1.0);
  RunResult inf = run_cli(
      "constants --beta1 2 --beta2 3 --sigma 0 --assumption A1 --s 2");
  json ji = json::parse(inf.out);
  CHECK(ji["report"]["sup_bounds"]["sup_is_finite"] == false);
  const std::string why = ji["report"]["sup_bounds"]["violated"];
  CHECK(why.find("small-r") != std::string::npos);
}

TEST_CASE("cli: grushin single-mode report") {
  RunResult res = run_cli("grushin --M 0 --N 80 --L 5 --eig-count 10 --set full");
  CHECK(res.exit_code == 0);
  json j = json::parse(res.out);
  CHECK(j["modes"].size() == 1);
  CHECK(j["modes"][0]["thickness_fallback"] == true);
}
