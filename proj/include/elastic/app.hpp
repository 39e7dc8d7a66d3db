#ifndef ELASTIC_APP_HPP
#define ELASTIC_APP_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "elastic/exact.hpp"
#include "elastic/lattice.hpp"
#include "elastic/weighting.hpp"

namespace elastic {

using Json = nlohmann::ordered_json;

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WeightingSpec {
  std::string family = "constant";
  double scale = 1.0;
  std::string norm = "euclidean";
  double tilt = 0.0;  // amplitude of a seeded pointwise perturbation
  /// user-table rows: coordinates of each tuple member, and a value string
  /// ("3", "1/2", "0.25" are exact; anything else is read as a double).
  std::vector<std::pair<std::vector<std::vector<std::int64_t>>, std::string>> entries;
  std::string fallback = "1";
};

struct RunConfig {
  int d = 1;
  std::int64_t L = 4;
  int n = 2;
  std::optional<std::int64_t> box_edge;
  std::vector<std::int64_t> box_edges;
  WeightingSpec weighting;
  double eps = 0.1;
  std::optional<double> cutoff;
  std::vector<double> sweep_scales{1, 2, 4, 8, 16};
  std::vector<std::int64_t> sweep_edges;
  std::vector<std::pair<std::int64_t, std::int64_t>> closed_form;
  double s = 0.1;
  std::optional<double> eps_bar;
  double c1 = 1.0;
  double budget = kDefaultBudget;
  std::string mode = "float";
  std::uint64_t seed = 0;
  std::string out;
  double inflate_lower_log = 0.0;  // test hook, see bounds

  Json to_json() const;
};

RunConfig parse_config(const Json& j, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});
/// Divisibility and range checks shared by every command.
void validate(const RunConfig& cfg, const std::string& command);

Weighting make_weighting(const WeightingSpec& spec, const Lattice& lat, int n, std::uint64_t seed);

/// Rectangular result with a JSON summary; written as CSV plus a JSON sidecar.
struct Report {
  std::string command;
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;
  Json summary = Json::object();
  Json config = Json::object();
  int exit_code = 0;

  void add_row(std::vector<Json> row);
  Json to_json() const;
  void write_csv(std::ostream& os) const;
};

/// Finite doubles stay numbers; infinities and NaN become strings.
Json number(double x);
std::string format_cell(const Json& cell);

Report cmd_exact(const RunConfig& cfg);
Report cmd_sweep(const RunConfig& cfg);
Report cmd_bounds(const RunConfig& cfg);
Report cmd_conditions(const RunConfig& cfg);
Report cmd_check(const RunConfig& cfg);

/// Sidecar path for a CSV path: "x.csv" -> "x.json", otherwise "x" -> "x.json".
std::string sidecar_path(const std::string& csv_path);

/// Full command-line entry point. Exit codes: 0 ok, 2 configuration or
/// infeasibility, 3 invariant violation.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace elastic

#endif  // ELASTIC_APP_HPP
