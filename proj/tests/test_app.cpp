#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "elastic/app.hpp"

using namespace elastic;

namespace {

int run(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::ostringstream out;
  std::ostringstream err;
  const int rc = run_cli(std::move(args), out, err);
  if (out_text) *out_text = out.str();
  return rc;
}

}  // namespace

TEST_CASE("config precedence: CLI over file over defaults") {
  const auto path = std::filesystem::temp_directory_path() / "elastic_test_app_cfg.json";
  {
    std::ofstream f(path);
    f << R"({"lattice": {"d": 1, "L": 6}, "tile_size": 2, "seed": 5, "mode": "rational"})";
  }
  auto cfg = load_config(path.string());
  CHECK(cfg.L == 6);
  CHECK(cfg.seed == 5);
  CHECK(cfg.mode == "rational");
  CHECK(cfg.eps == 0.1);
  std::string text;
  REQUIRE(run({"exact", "--config", path.string(), "--mode", "float"}, &text) == 0);
  CHECK(text.find("float") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("malformed configs") {
  CHECK_THROWS_AS(parse_config(Json::parse(R"({"lattice": {"d": "one"}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(Json::parse(R"({"unknown_key": 1})")), ConfigError);
  RunConfig cfg;
  cfg.L = 5;
  CHECK_THROWS_AS(validate(cfg, "exact"), ConfigError);
}

TEST_CASE("exit codes") {
  CHECK(run({"exact", "--L", "4"}) == 0);
  CHECK(run({"exact", "--L", "5"}) == 2);
  CHECK(run({"exact", "--config", "/nonexistent/cfg.json"}) == 2);
  CHECK(run({"exact", "--L", "16", "--budget", "100"}) == 2);
  CHECK(run({"frobnicate"}) == 2);
  CHECK(run({"conditions"}) == 0);
}

TEST_CASE("report cells and sidecars") {
  CHECK(format_cell(number(std::numeric_limits<double>::infinity())) == "inf");
  CHECK(format_cell(number(0.1)) == "0.10000000000000001");
  CHECK(sidecar_path("out/run.csv") == "out/run.json");
  CHECK(sidecar_path("run") == "run.json");
  Report r;
  r.command = "demo";
  r.columns = {"a", "b"};
  r.add_row({1, "x,y"});
  std::ostringstream os;
  r.write_csv(os);
  CHECK(os.str() == "a,b\n1,\"x,y\"\n");
  CHECK(r.to_json()["rows"][0]["b"] == "x,y");
}

TEST_CASE("exact command output") {
  std::string text;
  REQUIRE(run({"exact", "--L", "6", "--mode", "rational"}, &text) == 0);
  CHECK(text.find("3/25") != std::string::npos);
}
