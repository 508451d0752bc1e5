#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "ccl/config.hpp"
#include "ccl/report.hpp"

using namespace ccl;

TEST_CASE("config parses key-value lines with comments and overrides") {
  const Config c = Config::from_string(
      "# header comment\n"
      "N = 8\n"
      "  d=2   # trailing\n"
      "\n"
      "F = zero-level\n"
      "z_grid = -2, -1, 0, 1, 2\n"
      "rate = 0.25\n"
      "N = 10\n",
      "test.cfg");
  REQUIRE(c.get_i64("N") == 10);  // later assignment wins
  REQUIRE(c.get_i64("d") == 2);
  REQUIRE(c.get_str("F") == "zero-level");
  REQUIRE(c.get_f64("rate") == 0.25);
  const auto grid = c.get_f64_list("z_grid");
  REQUIRE(grid == std::vector<double>{-2, -1, 0, 1, 2});
  REQUIRE(c.get_i64("missing", 7) == 7);
  REQUIRE(c.get_str("missing", "x") == "x");
  REQUIRE(c.has("rate"));
  REQUIRE(!c.has("nope"));
}

TEST_CASE("config errors name the offending key") {
  const Config c = Config::from_string("a = 1\nb = two\n", "bad.cfg");
  try {
    c.get_i64("replicas");
    FAIL("expected throw");
  } catch (const ConfigError& e) {
    REQUIRE(std::string(e.what()).find("replicas") != std::string::npos);
    REQUIRE(std::string(e.what()).find("bad.cfg") != std::string::npos);
  }
  REQUIRE_THROWS_AS(c.get_i64("b"), ConfigError);
  REQUIRE_THROWS_AS(Config::from_string("just a line\n"), ConfigError);
  REQUIRE_THROWS_AS(Config::load("/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("numeric formatting is shortest-round-trip and stable") {
  REQUIRE(fmt_num(0.5) == "0.5");
  REQUIRE(fmt_num(64) == "64");
  REQUIRE(fmt_num(-2) == "-2");
  for (double v : {1.0 / 3.0, 0.1 + 0.2, 3.6651292058166432e-01, 1e17}) {
    const std::string s = fmt_num(v);
    REQUIRE(std::stod(s) == v);
    REQUIRE(fmt_num(v) == s);
  }
}

TEST_CASE("verdicts come from fixture bands and gate all_pass") {
  ExperimentReport rep;
  rep.experiment = "demo";
  rep.add_config("N", "8");
  rep.add_stat("ks", 0.12);
  rep.add_stat("median", 0.40);

  const Config fixture = Config::from_string(
      "fixture_version = 1\n"
      "verdict.ks = 0, 0.15\n"
      "verdict.median = 0.1165, 0.6165\n",
      "fix.cfg");
  apply_verdicts(rep, verdict_specs_from(fixture));
  REQUIRE(rep.verdicts.size() == 2);
  REQUIRE(rep.verdicts[0].pass);
  REQUIRE(rep.verdicts[1].pass);
  REQUIRE(rep.all_pass());

  const Config tight = Config::from_string("verdict.ks = 0, 0.01\n");
  apply_verdicts(rep, verdict_specs_from(tight));
  REQUIRE(!rep.verdicts.back().pass);
  REQUIRE(!rep.all_pass());

  REQUIRE_THROWS_AS(
      apply_verdicts(rep, {{"absent_stat", 0.0, 1.0}}),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      verdict_specs_from(Config::from_string("verdict.x = 2, 1\n")),
      ConfigError);
  REQUIRE_THROWS_AS(
      verdict_specs_from(Config::from_string("verdict.x = 5\n")),
      ConfigError);
}

TEST_CASE("CSV layout and byte determinism") {
  ExperimentReport rep;
  rep.experiment = "demo";
  rep.columns = {"obs", "aux"};
  rep.rows = {{0.5, 3}, {-1.25, 4}, {0.0, 0}};
  rep.censored = {0, 0, 1};
  const std::string csv = csv_string(rep);
  REQUIRE(csv ==
          "replica_id,obs,aux,censored\n"
          "0,0.5,3,0\n"
          "1,-1.25,4,0\n"
          "2,0,0,1\n");
  REQUIRE(csv_string(rep) == csv);
}

TEST_CASE("JSON summary echoes config, stats, and verdicts") {
  ExperimentReport rep;
  rep.experiment = "demo";
  rep.add_config("N", "8");
  rep.add_config_num("seed", 7);
  rep.columns = {"obs"};
  rep.rows = {{1.0}, {2.0}};
  rep.censored = {0, 1};
  rep.add_stat("ks", 0.5);
  apply_verdicts(rep, {{"ks", 0.0, 0.4}});
  rep.ecdf_observable = "obs";
  rep.ecdf_points = {1.0};

  const nlohmann::ordered_json j = summary_json(rep);
  REQUIRE(j["experiment"] == "demo");
  REQUIRE(j["config"]["N"] == "8");
  REQUIRE(j["config"]["seed"] == "7");
  REQUIRE(j["replicas"] == 2);
  REQUIRE(j["censored"] == 1);
  REQUIRE(j["summary"]["ks"] == 0.5);
  REQUIRE(j["verdicts"][0]["pass"] == false);
  REQUIRE(j["all_pass"] == false);
  REQUIRE(j["ecdf_points"].size() == 1);
  REQUIRE(json_string(rep) == json_string(rep));
}
