#include "elastic/app.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "elastic/checks.hpp"
#include "elastic/conditions.hpp"
#include "elastic/errors.hpp"
#include "elastic/ladder.hpp"

namespace elastic {

namespace {

constexpr const char* kSchemaId = "elastic-report/1";

std::optional<Rational> parse_exact(const std::string& s) {
  static const std::regex fraction(R"(^\s*(-?\d+)\s*(?:/\s*(\d+))?\s*$)");
  static const std::regex decimal(R"(^\s*(-?)(\d*)\.(\d+)\s*$)");
  std::smatch m;
  if (std::regex_match(s, m, fraction)) {
    BigInt num(m[1].str());
    BigInt den = m[2].matched ? BigInt(m[2].str()) : BigInt(1);
    if (den == 0) throw ConfigError("zero denominator in table value " + s);
    return Rational(num, den);
  }
  if (std::regex_match(s, m, decimal)) {
    const std::string digits = m[2].str() + m[3].str();
    BigInt num(digits.empty() ? std::string("0") : digits);
    BigInt den = 1;
    for (std::ptrdiff_t i = 0; i < m[3].length(); ++i) den *= 10;
    Rational q(num, den);
    return m[1].length() ? Rational(-q) : q;
  }
  return std::nullopt;
}

TableValue parse_table_value(const std::string& s) {
  TableValue v;
  v.exact = parse_exact(s);
  if (v.exact) {
    v.value = v.exact->convert_to<double>();
  } else {
    try {
      std::size_t used = 0;
      v.value = std::stod(s, &used);
      if (used != s.size()) throw ConfigError("bad table value " + s);
    } catch (const std::logic_error&) {
      throw ConfigError("bad table value " + s);
    }
  }
  return v;
}

template <typename T>
void read(const Json& j, const char* key, T& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

template <typename T>
void read(const Json& j, const char* key, std::optional<T>& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Lattice lattice_of(const RunConfig& cfg) { return Lattice(cfg.d, cfg.L); }

ExactOptions exact_options(const RunConfig& cfg) {
  return {parse_mode(cfg.mode), Policy::parallel, cfg.budget};
}

Json opt_number(const std::optional<double>& x) { return x ? number(*x) : Json(nullptr); }

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

}  // namespace

// --- config --------------------------------------------------------------

Json RunConfig::to_json() const {
  Json w = {{"family", weighting.family}, {"scale", weighting.scale}, {"norm", weighting.norm},
            {"tilt", weighting.tilt}};
  if (!weighting.entries.empty()) {
    Json rows = Json::array();
    for (const auto& [coords, value] : weighting.entries) rows.push_back({{"tuple", coords}, {"value", value}});
    w["entries"] = rows;
    w["fallback"] = weighting.fallback;
  }
  Json j = {{"lattice", {{"d", d}, {"L", L}}},
            {"tile_size", n},
            {"box_edge", box_edge ? Json(*box_edge) : Json(nullptr)},
            {"box_edges", box_edges},
            {"weighting", w},
            {"eps", eps},
            {"cutoff", cutoff ? Json(*cutoff) : Json(nullptr)},
            {"sweep", {{"scales", sweep_scales}, {"edges", sweep_edges}}},
            {"closed_form", Json::array()},
            {"conditions", {{"s", s}, {"eps_bar", eps_bar ? Json(*eps_bar) : Json(nullptr)}, {"c1", c1}}},
            {"budget", budget},
            {"mode", mode},
            {"seed", seed}};
  for (const auto& [N, nbar] : closed_form) j["closed_form"].push_back({N, nbar});
  if (inflate_lower_log != 0.0) j["test_hooks"] = {{"inflate_lower_log", inflate_lower_log}};
  return j;
}

RunConfig parse_config(const Json& j, RunConfig cfg) {
  try {
    if (!j.is_object()) throw ConfigError("config root must be an object");
    static const std::set<std::string> known = {"lattice", "tile_size", "box_edge", "box_edges", "weighting",
                                                "eps", "cutoff", "sweep", "closed_form", "conditions", "budget",
                                                "mode", "seed", "out", "test_hooks", "$schema", "comment"};
    for (const auto& [key, value] : j.items()) {
      if (!known.contains(key)) throw ConfigError("config: unknown key \"" + key + "\"");
    }
    if (j.contains("lattice")) {
      read(j["lattice"], "d", cfg.d);
      read(j["lattice"], "L", cfg.L);
    }
    read(j, "tile_size", cfg.n);
    read(j, "box_edge", cfg.box_edge);
    read(j, "box_edges", cfg.box_edges);
    if (j.contains("weighting")) {
      const auto& w = j["weighting"];
      read(w, "family", cfg.weighting.family);
      read(w, "scale", cfg.weighting.scale);
      read(w, "norm", cfg.weighting.norm);
      read(w, "tilt", cfg.weighting.tilt);
      if (w.contains("fallback")) {
        cfg.weighting.fallback = w["fallback"].is_string() ? w["fallback"].get<std::string>() : w["fallback"].dump();
      }
      if (w.contains("entries")) {
        cfg.weighting.entries.clear();
        for (const auto& e : w["entries"]) {
          auto coords = e.at("tuple").get<std::vector<std::vector<std::int64_t>>>();
          const auto& v = e.at("value");
          cfg.weighting.entries.emplace_back(coords, v.is_string() ? v.get<std::string>() : v.dump());
        }
      }
    }
    read(j, "eps", cfg.eps);
    read(j, "cutoff", cfg.cutoff);
    if (j.contains("sweep")) {
      read(j["sweep"], "scales", cfg.sweep_scales);
      read(j["sweep"], "edges", cfg.sweep_edges);
    }
    if (j.contains("closed_form")) {
      cfg.closed_form.clear();
      for (const auto& p : j["closed_form"]) {
        cfg.closed_form.emplace_back(p.at(0).get<std::int64_t>(), p.at(1).get<std::int64_t>());
      }
    }
    if (j.contains("conditions")) {
      read(j["conditions"], "s", cfg.s);
      read(j["conditions"], "eps_bar", cfg.eps_bar);
      read(j["conditions"], "c1", cfg.c1);
    }
    read(j, "budget", cfg.budget);
    read(j, "mode", cfg.mode);
    read(j, "seed", cfg.seed);
    read(j, "out", cfg.out);
    if (j.contains("test_hooks")) read(j["test_hooks"], "inflate_lower_log", cfg.inflate_lower_log);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config ") + path + ": " + e.what());
  }
  return parse_config(j, std::move(base));
}

void validate(const RunConfig& cfg, const std::string& command) {
  if (command == "conditions" || command == "check") {
    if (cfg.d < 1 || cfg.n < 1) throw ConfigError("d and tile_size must be positive");
    return;
  }
  if (!cfg.closed_form.empty() && command == "bounds") return;
  if (cfg.d < 1 || cfg.L < 1 || cfg.n < 1) throw ConfigError("d, L and tile_size must be positive");
  std::vector<std::int64_t> edges = cfg.sweep_edges;
  if (command != "sweep" || edges.empty()) edges = {cfg.L};
  for (auto L : edges) {
    const auto N = Lattice(cfg.d, L).size();
    if (N % cfg.n != 0) throw ConfigError(fmt::format("tile size {} does not divide N = {}", cfg.n, N));
  }
  std::vector<std::int64_t> boxes = cfg.box_edges;
  if (cfg.box_edge) boxes.push_back(*cfg.box_edge);
  for (auto b : boxes) {
    if (b < 1 || cfg.L % b != 0) throw ConfigError(fmt::format("box edge {} does not divide L = {}", b, cfg.L));
  }
  if (cfg.mode != "float" && cfg.mode != "rational") throw ConfigError("mode must be float or rational");
  if (!(cfg.budget > 0.0)) throw ConfigError("budget must be positive");
  if (!(cfg.eps > 0.0)) throw ConfigError("eps must be positive");
}

Weighting make_weighting(const WeightingSpec& spec, const Lattice& lat, int n, std::uint64_t seed) {
  const auto norm = parse_norm(spec.norm);
  WeightingFamily fam;
  switch (parse_family(spec.family)) {
    case FamilyKind::constant:
      fam = WeightingFamily::constant();
      fam.norm = norm;
      break;
    case FamilyKind::pair_exponential:
      fam = WeightingFamily::pair_exponential(spec.scale, norm);
      break;
    case FamilyKind::user_table: {
      auto table = std::make_shared<UserTable>();
      table->fallback = parse_table_value(spec.fallback);
      for (const auto& [coords, value] : spec.entries) {
        if (coords.size() != static_cast<std::size_t>(n)) throw ConfigError("table tuple has the wrong arity");
        std::vector<Vertex> ids;
        for (const auto& c : coords) {
          if (c.size() != static_cast<std::size_t>(lat.dim())) throw ConfigError("table coordinate has wrong dimension");
          ids.push_back(lat.vertex(c));
        }
        table->entries[canonical_key(ids, lat)] = parse_table_value(value);
      }
      fam = WeightingFamily::user_table(std::move(table), norm);
      break;
    }
  }
  auto f = build_weighting(fam, lat, n);
  if (spec.tilt != 0.0) f = tilted_weighting(f, spec.tilt, seed);
  return f;
}

// --- report --------------------------------------------------------------

Json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

std::string format_cell(const Json& cell) {
  if (cell.is_null()) return "";
  if (cell.is_boolean()) return cell.get<bool>() ? "true" : "false";
  if (cell.is_number_integer()) return cell.dump();
  if (cell.is_number_float()) return fmt::format("{:.17g}", cell.get<double>());
  if (cell.is_string()) return cell.get<std::string>();
  return cell.dump();
}

void Report::add_row(std::vector<Json> row) {
  if (row.size() != columns.size()) throw InvariantViolation("report row width mismatch");
  rows.push_back(std::move(row));
}

Json Report::to_json() const {
  Json rows_json = Json::array();
  for (const auto& row : rows) {
    Json obj = Json::object();
    for (std::size_t c = 0; c < columns.size(); ++c) obj[columns[c]] = row[c];
    rows_json.push_back(obj);
  }
  return {{"schema", kSchemaId}, {"command", command}, {"config", config}, {"columns", columns},
          {"rows", rows_json},   {"summary", summary}, {"exit_code", exit_code}};
}

void Report::write_csv(std::ostream& os) const {
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << csv_escape(columns[c]);
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_escape(format_cell(row[c]));
    os << '\n';
  }
}

std::string sidecar_path(const std::string& csv_path) {
  const std::string ext = ".csv";
  if (csv_path.size() > ext.size() && csv_path.compare(csv_path.size() - ext.size(), ext.size(), ext) == 0) {
    return csv_path.substr(0, csv_path.size() - ext.size()) + ".json";
  }
  return csv_path + ".json";
}

// --- commands ------------------------------------------------------------

Report cmd_exact(const RunConfig& cfg) {
  validate(cfg, "exact");
  Report r;
  r.command = "exact";
  r.config = cfg.to_json();
  r.columns = {"d",         "L",           "N",         "n",          "family",       "scale",
               "norm",      "mode",        "log_Z",     "pressure",   "root_Z",       "Z_exact",
               "log_Z0_hat", "pressure0_hat", "pressure_gap", "sm", "R", "universal_bound"};
  const auto lat = lattice_of(cfg);
  auto f = make_weighting(cfg.weighting, lat, cfg.n, cfg.seed);
  auto z = exact_partition(f, exact_options(cfg));
  auto z0 = z0_hat(lat.size(), cfg.n);
  const double sm = smoothness(f);
  const double R = decay_radius(f);
  const double M = universal_bound(lat.size(), cfg.n).value();
  std::string exact_text;
  if (z.exact_Z) exact_text = z.exact_Z->str();
  r.add_row({cfg.d, cfg.L, lat.size(), cfg.n, cfg.weighting.family, number(cfg.weighting.scale), cfg.weighting.norm,
             to_string(z.mode), number(z.log_Z), number(z.pressure), number(z.root()),
             exact_text.empty() ? Json(nullptr) : Json(exact_text), number(z0.log_Z), number(z0.pressure),
             number(std::abs(z.pressure - z0.pressure)), number(sm), number(R), number(M)});
  r.summary = {{"log_tiling_count", number(log_tiling_count(lat.size(), cfg.n))},
               {"lemma1_holds", leq_with_slack(z.root(), M)}};
  if (!leq_with_slack(z.root(), M)) {
    r.exit_code = 3;
  }
  return r;
}

Report cmd_sweep(const RunConfig& cfg) {
  validate(cfg, "sweep");
  if (cfg.sweep_scales.empty()) throw ConfigError("sweep needs at least one scale");
  Report r;
  r.command = "sweep";
  r.config = cfg.to_json();
  r.columns = {"L", "N", "n", "scale", "sm", "R", "sm_times_R", "pressure", "pressure0_hat", "pressure_gap"};
  std::vector<std::int64_t> edges = cfg.sweep_edges.empty() ? std::vector<std::int64_t>{cfg.L} : cfg.sweep_edges;
  std::vector<std::vector<double>> gaps(edges.size());
  std::vector<std::vector<double>> sms(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Lattice lat(cfg.d, edges[e]);
    const auto z0 = z0_hat(lat.size(), cfg.n);
    for (double scale : cfg.sweep_scales) {
      auto spec = cfg.weighting;
      spec.scale = scale;
      auto f = make_weighting(spec, lat, cfg.n, cfg.seed);
      auto z = exact_partition(f, exact_options(cfg));
      const double sm = smoothness(f);
      const double R = decay_radius(f);
      const double gap = std::abs(z.pressure - z0.pressure);
      gaps[e].push_back(gap);
      sms[e].push_back(sm);
      r.add_row({edges[e], lat.size(), cfg.n, number(scale), number(sm), number(R), number(sm * R),
                 number(z.pressure), number(z0.pressure), number(gap)});
    }
  }
  Json per_edge = Json::array();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    per_edge.push_back({{"L", edges[e]},
                        {"gap_strictly_decreasing", strictly_decreasing(gaps[e])},
                        {"sm_strictly_decreasing", strictly_decreasing(sms[e])},
                        {"max_gap", number(*std::max_element(gaps[e].begin(), gaps[e].end()))}});
  }
  r.summary["lattices"] = per_edge;
  if (edges.size() > 1) {
    // Same scale gives the same sm on every lattice large enough to hold the
    // worst-case move, so rows are paired by scale.
    double worst = 1.0;
    double sm_mismatch = 0.0;
    for (std::size_t k = 0; k < cfg.sweep_scales.size(); ++k) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = 0.0;
      for (std::size_t e = 0; e < edges.size(); ++e) {
        lo = std::min(lo, gaps[e][k]);
        hi = std::max(hi, gaps[e][k]);
        sm_mismatch = std::max(sm_mismatch, std::abs(sms[e][k] - sms[0][k]));
      }
      if (hi > 0.0) worst = std::max(worst, lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity());
    }
    r.summary["uniformity_ratio"] = number(worst);
    r.summary["sm_mismatch"] = number(sm_mismatch);
  }
  return r;
}

Report cmd_bounds(const RunConfig& cfg) {
  validate(cfg, "bounds");
  Report r;
  r.command = "bounds";
  r.config = cfg.to_json();
  if (!cfg.closed_form.empty()) {
    r.columns = {"N", "n", "nbar", "root_Z_plus", "root_Z0_hat", "gap_plus_z0hat"};
    std::vector<double> gaps;
    for (const auto& [N, nbar] : cfg.closed_form) {
      if (N % cfg.n != 0 || nbar < 1 || N % nbar != 0) {
        throw ConfigError(fmt::format("closed form needs n | N and nbar | N, got N={} nbar={}", N, nbar));
      }
      auto b = closed_form_bounds(N, cfg.n, nbar);
      gaps.push_back(b.gap_plus_z0hat());
      r.add_row({N, cfg.n, nbar, number(b.root(b.log_z_plus)), number(b.root(b.log_z0_hat)), number(gaps.back())});
    }
    r.summary = {{"gap_strictly_decreasing", strictly_decreasing(gaps)}, {"final_gap", number(gaps.back())}};
    return r;
  }

  std::vector<std::int64_t> edges = cfg.box_edges;
  if (cfg.box_edge) edges.push_back(*cfg.box_edge);
  if (edges.empty()) throw ConfigError("bounds needs box_edge, box_edges or closed_form");
  r.columns = {"box_edge", "nbar", "root_Z_plus", "root_Z_prime", "root_Z_minus_lower", "root_Z_fbar", "root_Z",
               "root_Z0_hat", "Z0", "log_F1", "log_F2", "log_F3", "log_F4", "log_F5", "supertypes", "Mbar",
               "M", "alpha_feasible", "ordering_holds", "gap_plus_z0hat", "gap_prime_fbar", "gap_plus_minus",
               "notes"};
  const auto lat = lattice_of(cfg);
  auto f = make_weighting(cfg.weighting, lat, cfg.n, cfg.seed);
  LadderOptions opts;
  opts.exact = exact_options(cfg);
  if (cfg.cutoff) opts.cutoff = *cfg.cutoff;
  opts.corrupt_lower_log = cfg.inflate_lower_log;
  bool all_ordered = true;
  for (auto edge : edges) {
    Dissection dis(lat, edge);
    auto b = ladder_check(f, dis, cfg.eps, opts);
    all_ordered = all_ordered && b.ordering_holds;
    auto root_opt = [&](const std::optional<double>& x) {
      return x ? number(b.root(*x)) : Json(nullptr);
    };
    std::vector<Json> F(5, nullptr);
    if (b.z_minus) {
      for (std::size_t i = 0; i < 5; ++i) F[i] = number(b.z_minus->log_F[i]);
    }
    std::string notes;
    for (const auto& note : b.notes) notes += (notes.empty() ? "" : "; ") + note;
    r.add_row({edge, dis.box_volume(), number(b.root(b.log_z_plus)), root_opt(b.log_z_prime),
               b.z_minus ? number(b.root(b.z_minus->log_total)) : Json(nullptr), root_opt(b.log_z_fbar),
               root_opt(b.log_z_f), number(b.root(b.log_z0_hat)), number(b.z0), F[0], F[1], F[2], F[3], F[4],
               b.supertypes, b.Mbar, b.M, b.alpha_feasible, b.ordering_holds, number(b.gap_plus_z0hat()),
               opt_number(b.gap_prime_fbar()), opt_number(b.gap_plus_minus()), notes});
  }
  r.summary = {{"ordering_holds", all_ordered}};
  if (!all_ordered) r.exit_code = 3;
  return r;
}

Report cmd_conditions(const RunConfig& cfg) {
  validate(cfg, "conditions");
  const double eps_bar = cfg.eps_bar.value_or(cfg.eps);
  auto p = conditions_params(cfg.eps, cfg.s, cfg.d, cfg.n, eps_bar, cfg.c1);
  auto v = verify_conditions(p);
  Report r;
  r.command = "conditions";
  r.config = cfg.to_json();
  r.columns = {"name", "statement", "log_lhs", "log_rhs", "holds"};
  for (const auto& x : v.inequalities) r.add_row({x.name, x.statement, number(x.log_lhs), number(x.log_rhs), x.holds});
  auto opt_int = [](const std::optional<std::int64_t>& x) { return x ? Json(*x) : Json(nullptr); };
  Json failing = Json::array();
  for (const auto& x : v.inequalities) {
    if (!x.holds) failing.push_back(x.name);
  }
  r.summary = {{"eps", p.eps},
               {"s", p.s},
               {"eps_bar", p.eps_bar},
               {"d", p.d},
               {"n", p.n},
               {"exponent_sm", number(p.exponents.sm)},
               {"exponent_nbar", number(p.exponents.nbar)},
               {"exponent_Mbar", number(p.exponents.Mbar)},
               {"log_sm_target", number(p.log_sm_target)},
               {"log_nbar_target", number(p.log_nbar_target)},
               {"log_Mbar_target", number(p.log_Mbar_target)},
               {"box_edge", opt_int(p.box_edge)},
               {"nbar", opt_int(p.nbar)},
               {"Mbar", opt_int(p.Mbar)},
               {"log_R_max", number(p.log_R_max)},
               {"alpha", number(std::exp(p.log_alpha))},
               {"all_hold", v.all_hold},
               {"failing", failing},
               {"threshold_eps_bar", v.threshold ? number(*v.threshold) : Json(nullptr)},
               {"log_scaling_identity", number(v.log_scaling_identity)}};
  return r;
}

Report cmd_check(const RunConfig& cfg) {
  validate(cfg, "check");
  Report r;
  r.command = "check";
  r.config = cfg.to_json();
  r.columns = {"check", "cases", "failures", "worst"};
  std::int64_t failures = 0;
  for (const auto& c : run_property_checks(cfg.seed)) {
    failures += c.failures;
    r.add_row({c.name, c.cases, c.failures, number(c.worst)});
  }
  r.summary = {{"failures", failures}};
  if (failures > 0) r.exit_code = 3;
  return r;
}

// --- entry point ---------------------------------------------------------

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact partition functions and bound ladders for weighted lattice tilings", "elastic"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_path;
  std::optional<double> budget;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<int> d;
  std::optional<std::int64_t> L;
  std::optional<int> n;
  std::optional<std::int64_t> box_edge;
  std::optional<std::string> family;
  std::optional<double> scale;
  std::optional<std::string> norm;
  std::optional<double> eps;
  std::optional<double> s;
  std::optional<double> eps_bar;
  std::optional<double> c1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--out", out_path, "CSV output path; a .json sidecar is written next to it");
    sub->add_option("--budget", budget, "maximum number of tilings to enumerate");
    sub->add_option("--mode", mode, "float or rational")->check(CLI::IsMember({"float", "rational"}));
    sub->add_option("--seed", seed, "seed for randomized weightings and checks");
    sub->add_option("--d", d, "lattice dimension");
    sub->add_option("--L", L, "lattice edge");
    sub->add_option("--n", n, "tile size");
    sub->add_option("--box-edge", box_edge, "dissection box edge");
    sub->add_option("--family", family, "constant, pair-exponential or user-table");
    sub->add_option("--scale", scale, "pair-exponential length scale");
    sub->add_option("--norm", norm, "euclidean or linf")->check(CLI::IsMember({"euclidean", "linf"}));
    sub->add_option("--eps", eps, "target accuracy");
    sub->add_option("--s", s, "slack exponent for conditions");
    sub->add_option("--eps-bar", eps_bar, "working epsilon for conditions");
    sub->add_option("--c1", c1, "localization constant");
  };
  std::vector<CLI::App*> subs;
  for (const char* name : {"exact", "sweep", "bounds", "conditions", "check"}) {
    static const std::map<std::string, std::string> help = {
        {"exact", "exact Z and pressure of one weighting"},
        {"sweep", "pressure gap against the constant weighting across length scales"},
        {"bounds", "Z+ >= Z' >= Z- ladder, or closed-form Z+ against Zhat0"},
        {"conditions", "parameter choices and their inequalities"},
        {"check", "randomized invariant suites"}};
    auto* sub = app.add_subcommand(name, help.at(name));
    add_common(sub);
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  std::string command;
  for (auto* sub : subs) {
    if (sub->parsed()) command = sub->get_name();
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (out_path) cfg.out = *out_path;
    if (budget) cfg.budget = *budget;
    if (mode) cfg.mode = *mode;
    if (seed) cfg.seed = *seed;
    if (d) cfg.d = *d;
    if (L) cfg.L = *L;
    if (n) cfg.n = *n;
    if (box_edge) cfg.box_edge = *box_edge;
    if (family) cfg.weighting.family = *family;
    if (scale) cfg.weighting.scale = *scale;
    if (norm) cfg.weighting.norm = *norm;
    if (eps) cfg.eps = *eps;
    if (s) cfg.s = *s;
    if (eps_bar) cfg.eps_bar = *eps_bar;
    if (c1) cfg.c1 = *c1;

    if (!cfg.out.empty() && !config_path.empty()) {
      namespace fs = std::filesystem;
      const auto cfg_file = fs::weakly_canonical(config_path);
      if (fs::weakly_canonical(cfg.out) == cfg_file || fs::weakly_canonical(sidecar_path(cfg.out)) == cfg_file) {
        throw ConfigError("output " + cfg.out + " would overwrite the config file");
      }
    }
    Report report;
    if (command == "exact") report = cmd_exact(cfg);
    if (command == "sweep") report = cmd_sweep(cfg);
    if (command == "bounds") report = cmd_bounds(cfg);
    if (command == "conditions") report = cmd_conditions(cfg);
    if (command == "check") report = cmd_check(cfg);

    if (cfg.out.empty()) {
      report.write_csv(out);
    } else {
      std::ofstream csv(cfg.out, std::ios::binary);
      if (!csv) throw ConfigError("cannot write " + cfg.out);
      report.write_csv(csv);
      std::ofstream js(sidecar_path(cfg.out), std::ios::binary);
      js << report.to_json().dump(2) << '\n';
    }
    if (report.exit_code == 3) err << "invariant violation in " << command << "; see the report summary\n";
    return report.exit_code;
  } catch (const BudgetExceeded& e) {
    const std::string what = e.what();
    err << "error: " << what;
    if (what.find("10^") == std::string::npos) err << fmt::format(" (estimated 10^{:.2f} terms)", e.log10_estimate());
    err << '\n';
    return 2;
  } catch (const InvariantViolation& e) {
    err << "invariant violation: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace elastic
