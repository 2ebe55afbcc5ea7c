#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "grushinlab/constants.hpp"
#include "grushinlab/control_sets.hpp"
#include "grushinlab/eigensolve.hpp"
#include "grushinlab/verify.hpp"

namespace grushinlab {

using json = nlohmann::json;

/// Everything a batch run needs, round-trippable through JSON.  Fields
/// irrelevant to a given command keep their defaults and round-trip
/// unchanged.
struct RunConfig {
  std::string command;

  // potential: {"kind":"power","c":..,"beta":..} or {"kind":"table","file":..}
  std::string potential_kind = "power";
  double c = 1.0;
  double beta = 2.0;
  std::string table_file;

  // grid
  int dim = 1;
  double halfwidth = 10.0;
  int points_per_dim = 400;
  std::string boundary = "dirichlet";

  // control set
  std::string set_kind = "equidistributed";  // equidistributed | distributed | full
  double gamma = 0.3;
  double sigma = 0.0;
  int box = 9;
  std::string placement = "cell_center";  // cell_center | seeded_random

  // physics
  double T = 1.0;
  double s = 1.0;
  int max_mode = 6;
  int eig_count = 30;
  double lambda_cutoff = 0.0;  // 0 = use eig_count
  std::vector<double> r_values;
  double eps = 0.0;  // 0 = scale-aware default

  // inequality parameters; assumption empty = derive from the potential
  std::string assumption;
  double c2 = 0.0;     // 0 = same as c
  double beta2 = 0.0;  // 0 = same as beta

  FreeConstants free_constants;

  std::uint64_t seed = 20240913;
  int threads = 0;  // 0 = leave the OpenMP default
  double tolerance = 1e-9;
  std::string out;

  json to_json() const;
  static RunConfig from_json(const json& j);

  PotentialSpec make_potential() const;
  Grid make_grid() const;
  std::optional<AssumptionParams> make_params() const;

  /// Canonical content hash of everything that determines numeric
  /// output (excludes out path and threads); used for cache keys and
  /// the determinism contract.
  std::string content_hash() const;
};

std::string fmt(double v);  // shortest round-trip decimal form

/// "# key: value" comment lines embedding the resolved config; prepended
/// to every CSV body so outputs are self-describing.
std::string csv_header(const RunConfig& cfg);

json report_header(const RunConfig& cfg);

json to_json(const VerificationReport& rep);
json to_json(const DistributedSet& set);
json constants_report(const AssumptionParams& params, double T, double s,
                      const FreeConstants& fc, int n_bbl = 1);

std::string eigen_csv(const SpectralData& S);
/// Sidecar layout: 8-byte little-endian header length, JSON header with
/// grid metadata, then K columns of N little-endian doubles.
void write_eigenvectors(const std::string& path, const SpectralData& S);
std::string mask_csv(const SetIndicator& ind);

void write_file(const std::string& path, const std::string& body);

/// Eigensolve with optional memoization under GRUSHINLAB_CACHE keyed by
/// a caller-supplied content hash.
SpectralData cached_eigensolve(const DiscreteOperator& A, const EigRequest& req,
                               const EigOptions& opt, const std::string& key);

}  // namespace grushinlab
