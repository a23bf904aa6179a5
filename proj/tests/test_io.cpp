// Copyright 2026 The exdir Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "exdir/harness.hpp"
#include "exdir/io.hpp"
#include "exdir/rng.hpp"

namespace {

using Catch::Matchers::ContainsSubstring;

exdir::DataMatrix parse(const std::string& text) {
  std::istringstream in(text);
  return exdir::read_csv(in, "test");
}

exdir::ExperimentConfig tiny_config() {
  exdir::ExperimentConfig cfg;
  cfg.model = exdir::AxisOracle{{0.7, 0.3}, 3};
  cfg.n = 20000;
  cfg.k = 500;
  cfg.q_models = 6;
  cfg.replications = 2;
  cfg.master_seed = 20260806;
  cfg.criteria.assign(exdir::all_criteria.begin(), exdir::all_criteria.end());
  return cfg;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("g17 formatting round-trips every double") {
  exdir::Rng rng(exdir::derive_seed(20260807, 0));
  for (int trial = 0; trial < 2000; ++trial) {
    const double mag = std::pow(10.0, rng.uniform() * 600.0 - 300.0);
    const double x = (rng.uniform() - 0.5) * mag;
    const double back = std::stod(exdir::g17(x));
    CHECK(back == x);
  }
  CHECK(std::stod(exdir::g17(0.1)) == 0.1);
  CHECK(std::stod(exdir::g17(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(exdir::g17(0.0) == "0");
  CHECK(exdir::g17(2.0) == "2");
}

TEST_CASE("csv writing and reading round-trips bitwise") {
  exdir::Rng rng(exdir::derive_seed(20260807, 1));
  exdir::DataMatrix m;
  m.rows = 40;
  m.cols = 5;
  m.values.resize(m.rows * m.cols);
  for (auto& v : m.values) {
    const double mag = std::pow(10.0, rng.uniform() * 20.0 - 10.0);
    v = rng.uniform() < 0.1 ? 0.0 : rng.uniform() * mag;
  }

  std::ostringstream out;
  const std::vector<std::string> comments{"generated for a round-trip test"};
  exdir::write_csv(out, m, comments);

  const auto text = out.str();
  CHECK(text.rfind("# generated", 0) == 0);

  const auto back = parse(text);
  REQUIRE(back.rows == m.rows);
  REQUIRE(back.cols == m.cols);
  CHECK(back.values == m.values);
}

TEST_CASE("csv reader skips headers, comments and blank lines") {
  const auto m = parse(
      "# a comment\n"
      "\n"
      "col_a,col_b,col_c\n"
      "1,2,3\n"
      "# interior comment\n"
      "4.5,  6e-2 ,7\n"
      "\n");
  REQUIRE(m.rows == 2);
  REQUIRE(m.cols == 3);
  CHECK(m.at(0, 0) == 1.0);
  CHECK(m.at(1, 1) == 0.06);
  CHECK(m.at(1, 2) == 7.0);
}

TEST_CASE("csv reader handles windows line endings") {
  const auto m = parse("1,2\r\n3,4\r\n");
  REQUIRE(m.rows == 2);
  CHECK(m.at(1, 1) == 4.0);
}

TEST_CASE("csv reader reports malformed input precisely") {
  SECTION("non-numeric field after the header") {
    try {
      parse("a,b\n1,2\n3,oops\n");
      FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
      CHECK_THAT(e.what(), ContainsSubstring("line 3"));
      CHECK_THAT(e.what(), ContainsSubstring("field 2"));
      CHECK_THAT(e.what(), ContainsSubstring("test"));
    }
  }
  SECTION("ragged row") {
    try {
      parse("1,2,3\n4,5\n");
      FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
      CHECK_THAT(e.what(), ContainsSubstring("line 2"));
      CHECK_THAT(e.what(), ContainsSubstring("expected 3"));
    }
  }
  SECTION("empty field") {
    CHECK_THROWS_AS(parse("1,2\n3,\n"), std::invalid_argument);
  }
  SECTION("no data") {
    CHECK_THROWS_WITH(parse(""), ContainsSubstring("no data rows"));
    CHECK_THROWS_WITH(parse("# only a comment\n"),
                      ContainsSubstring("no data rows"));
    CHECK_THROWS_WITH(parse("only,a,header\n"),
                      ContainsSubstring("no data rows"));
  }
}

TEST_CASE("csv file reader round-trips through disk") {
  const std::string path = "/tmp/exdir_io_test.csv";
  exdir::DataMatrix m;
  m.rows = 2;
  m.cols = 2;
  m.values = {0.1, 2.0, 3.5e-7, 4.0};
  {
    std::ofstream out(path);
    exdir::write_csv(out, m);
  }
  const auto back = exdir::read_csv_file(path);
  CHECK(back.values == m.values);
  std::remove(path.c_str());

  CHECK_THROWS_WITH(exdir::read_csv_file("/nonexistent/nope.csv"),
                    ContainsSubstring("cannot open"));
}

TEST_CASE("model specs round-trip through json") {
  const std::vector<exdir::ModelSpec> specs{
      exdir::AsympIndep{75, 200},
      exdir::AsympDep{30, 15, 5, 300},
      exdir::AxisOracle{{0.7, 0.3}, 4},
  };
  for (const auto& spec : specs) {
    const auto j = exdir::to_json(spec);
    const auto back = exdir::model_from_json(j);
    CHECK(exdir::to_json(back).dump() == j.dump());
  }

  const auto j = exdir::to_json(exdir::ModelSpec{exdir::AsympIndep{75, 200}});
  CHECK(j["type"] == "asymp_indep");
  CHECK(j["s_star"] == 75);
  CHECK(j["d"] == 200);
}

TEST_CASE("experiment configs round-trip through json") {
  auto cfg = tiny_config();
  cfg.criteria = {exdir::Criterion::bicu, exdir::Criterion::mseic};
  cfg.s_ref_policy = exdir::SRefPolicy::bicu_selected;
  exdir::TrueDirections dirs;
  dirs.entries.push_back({exdir::DirectionKey{{1}}, 0.7});
  dirs.entries.push_back({exdir::DirectionKey{{2}}, 0.3});
  cfg.true_directions = dirs;

  const auto j = exdir::to_json(cfg);
  const auto back = exdir::config_from_json(j);
  CHECK(exdir::to_json(back).dump() == j.dump());
  CHECK(back.criteria ==
        std::vector<exdir::Criterion>{exdir::Criterion::bicu,
                                      exdir::Criterion::mseic});
  CHECK(back.s_ref_policy == exdir::SRefPolicy::bicu_selected);
}

TEST_CASE("config parsing applies defaults") {
  const auto j = exdir::ojson::parse(R"({
    "model": {"type": "asymp_indep", "s_star": 2, "d": 5},
    "n": 1000, "k": 50, "replications": 3, "master_seed": 7
  })");
  const auto cfg = exdir::config_from_json(j);
  CHECK(cfg.q_models == 10);  // 2 * d
  CHECK(cfg.criteria.size() == 5);
  CHECK(cfg.s_ref_policy == exdir::SRefPolicy::true_s_star);
  CHECK_FALSE(cfg.true_directions.has_value());
  CHECK(cfg.n == 1000);
  CHECK(cfg.k == 50);
  CHECK(cfg.replications == 3);
  CHECK(cfg.master_seed == 7);
}

TEST_CASE("config criteria are normalized to canonical order") {
  const auto j = exdir::ojson::parse(R"({
    "model": {"type": "axis_oracle", "weights": [0.5, 0.5], "d": 2},
    "n": 1000, "k": 50, "replications": 1, "master_seed": 1,
    "criteria": ["MSEIC", "aic", "QaIc"]
  })");
  const auto cfg = exdir::config_from_json(j);
  CHECK(cfg.criteria ==
        std::vector<exdir::Criterion>{exdir::Criterion::aic,
                                      exdir::Criterion::qaic,
                                      exdir::Criterion::mseic});
}

TEST_CASE("config errors name the offending key") {
  const std::string ok = R"({
    "model": {"type": "asymp_indep", "s_star": 2, "d": 5},
    "n": 1000, "k": 50, "replications": 3, "master_seed": 7
  })";
  const auto expect_error = [&](const std::string& mutate_from,
                                const std::string& mutate_to,
                                const std::string& needle) {
    std::string text = ok;
    const auto pos = text.find(mutate_from);
    REQUIRE(pos != std::string::npos);
    text.replace(pos, mutate_from.size(), mutate_to);
    try {
      exdir::config_from_json(exdir::ojson::parse(text));
      FAIL("expected an exception for " + needle);
    } catch (const std::invalid_argument& e) {
      CAPTURE(text);
      CHECK_THAT(e.what(), ContainsSubstring(needle));
    }
  };

  expect_error("\"k\": 50,", "", "\"k\"");
  expect_error("\"n\": 1000", "\"n\": -5", "\"n\"");
  expect_error("\"n\": 1000", "\"n\": 10.5", "\"n\"");
  expect_error("\"n\": 1000", "\"n\": \"many\"", "\"n\"");
  expect_error("\"master_seed\": 7", "\"master_seed\": 7, \"typo_key\": 1",
               "typo_key");
  expect_error("\"s_star\": 2", "\"s_star\": 2, \"weights\": [1]", "weights");
  expect_error("\"type\": \"asymp_indep\"", "\"type\": \"mystery\"",
               "mystery");
  expect_error("\"type\": \"asymp_indep\"", "\"type\": 3, \"x\": \"\"",
               "type");
  expect_error("\"master_seed\": 7",
               "\"master_seed\": 7, \"criteria\": [\"aic\", \"foo\"]",
               "foo");
  expect_error("\"master_seed\": 7",
               "\"master_seed\": 7, \"criteria\": [\"aic\", \"aic\"]",
               "twice");
  expect_error("\"master_seed\": 7",
               "\"master_seed\": 7, \"criteria\": []", "criteria");
  expect_error("\"master_seed\": 7",
               "\"master_seed\": 7, \"s_ref_policy\": \"whatever\"",
               "s_ref_policy");
  expect_error("\"master_seed\": 7",
               "\"master_seed\": 7, \"true_directions\": [17]", "objects");
  expect_error(
      "\"master_seed\": 7",
      "\"master_seed\": 7, \"true_directions\": [{\"indices\": [1]}]",
      "weight");
  expect_error("\"master_seed\": 7",
               "\"master_seed\": 7, \"true_directions\": "
               "[{\"indices\": [1.5], \"weight\": 1.0}]",
               "integers");

  // Semantic validation still runs after parsing.
  expect_error("\"k\": 50", "\"k\": 1000", "k");
}

TEST_CASE("summary json has a stable shape") {
  const auto cfg = tiny_config();
  const auto sum = exdir::run_experiment(cfg, 1);
  const auto j = exdir::summary_to_json(sum);

  // Top-level keys, in writing order.
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{
                    "config", "replications", "criteria", "s_hat_over_k",
                    "diagnostics", "degenerate_replications", "errors"});

  REQUIRE(j["replications"].is_array());
  REQUIRE(j["replications"].size() == 2);
  const auto& rep = j["replications"][0];
  for (const char* key :
       {"replication", "seed", "degenerate", "s_hat", "threshold",
        "s_hat_over_k", "q_eff", "t5_strained", "multi_count", "selected",
        "hellinger", "diagnostics"}) {
    CAPTURE(key);
    CHECK(rep.contains(key));
  }
  CHECK(rep["replication"] == 0);
  CHECK(rep["degenerate"] == false);
  CHECK(rep["s_hat"] == 2);
  CHECK(rep["selected"]["bicu"] == 1);

  // Every configured criterion appears with series and summary.
  for (const char* name : {"aic", "bicu", "bicl", "qaic", "mseic"}) {
    CAPTURE(name);
    REQUIRE(j["criteria"].contains(name));
    const auto& c = j["criteria"][name];
    REQUIRE(c["selected"]["values"].is_array());
    CHECK(c["selected"]["values"].size() == 2);
    CHECK(c["selected"]["summary"]["median"] == 1.0);
    CHECK(c["hellinger"]["summary"].contains("q1"));
  }

  // No diagnostics under the true_s_star policy here (s_ref == s_hat),
  // so the series are null-filled with a null summary.
  CHECK(j["diagnostics"]["c_hat"]["summary"].is_null());
  CHECK(j["diagnostics"]["c_hat"]["values"][0].is_null());
  CHECK(j["degenerate_replications"].is_array());
  CHECK(j["degenerate_replications"].empty());
  CHECK(j["errors"].empty());

  // Identical runs serialize identically.
  CHECK(exdir::summary_to_json(exdir::run_experiment(cfg, 1)).dump() ==
        j.dump());
}

TEST_CASE("boxplot csv has one row per criterion and replication") {
  auto cfg = tiny_config();
  cfg.s_ref_policy = exdir::SRefPolicy::bicu_selected;
  const auto sum = exdir::run_experiment(cfg, 1);

  std::ostringstream out;
  exdir::write_boxplot_csv(out, sum);
  const auto lines = lines_of(out.str());

  REQUIRE(lines.size() == 1 + 5 * 2);
  CHECK(lines[0] ==
        "criterion,replication,s_selected,hellinger,c_hat,mu_hat,q_hat,"
        "g_aic,g_qaic,g_mseic");

  // Rows are grouped by criterion in canonical order.
  CHECK(lines[1].rfind("aic,0,", 0) == 0);
  CHECK(lines[2].rfind("aic,1,", 0) == 0);
  CHECK(lines[3].rfind("bicu,0,", 0) == 0);
  CHECK(lines[10].rfind("mseic,1,", 0) == 0);

  // With the bicu_selected policy the diagnostics columns are filled;
  // parse one row back and check the known values.
  const auto fields = [](const std::string& line) {
    std::vector<std::string> f;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        f.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    f.push_back(cur);
    return f;
  };
  const auto row = fields(lines[3]);
  REQUIRE(row.size() == 10);
  CHECK(row[2] == "1");                      // selected size
  CHECK(std::stod(row[3]) == Catch::Approx(0.3).margin(1e-12));
  CHECK(std::stod(row[4]) == Catch::Approx(0.004).margin(1e-15));
  CHECK(std::stod(row[6]) == 1.0);           // q_hat exactly 1
  CHECK(std::stod(row[8]) == 1.0);           // g_qaic at q = 1

  // Under true_s_star the same columns are empty.
  const auto plain = exdir::run_experiment(tiny_config(), 1);
  std::ostringstream out2;
  exdir::write_boxplot_csv(out2, plain);
  const auto row2 = fields(lines_of(out2.str())[3]);
  REQUIRE(row2.size() == 10);
  CHECK(row2[4].empty());
  CHECK(row2[6].empty());
}

TEST_CASE("estimate report on a worked matrix") {
  const exdir::DataMatrix m{5, 3,
                            {10.0, 0.0, 0.0,   //
                             0.0, 8.0, 8.0,    //
                             1.0, 1.0, 0.0,    //
                             0.5, 0.0, 0.0,    //
                             0.2, 0.1, 0.0}};
  const auto report = exdir::estimate_report(
      m, 2, 4, std::vector<exdir::Criterion>(exdir::all_criteria.begin(),
                                             exdir::all_criteria.end()));

  CHECK(report["n"] == 5);
  CHECK(report["d"] == 3);
  CHECK(report["k"] == 2);
  CHECK(report["threshold"] == 2.0);
  CHECK(report["s_hat"] == 2);
  CHECK(report["degenerate"] == false);
  CHECK(report["q_eff"] == 1);

  for (const char* name : {"aic", "bicu", "bicl", "qaic", "mseic"}) {
    CAPTURE(name);
    REQUIRE(report["criteria"].contains(name));
    CHECK(report["criteria"][name]["values"].size() == 1);
    CHECK(report["criteria"][name]["selected"] == 1);
  }
  // Frozen reference for the (1,1) tally at k=2.
  CHECK(report["criteria"]["bicu"]["values"][0].get<double>() ==
        Catch::Approx(1.62785883639038106353).epsilon(1e-12));

  // Both directions have count 1; ties rank by ascending key.
  REQUIRE(report["directions"].size() == 2);
  CHECK(report["directions"][0]["indices"] == exdir::ojson::array({1}));
  CHECK(report["directions"][0]["count"] == 1);
  CHECK(report["directions"][1]["indices"] == exdir::ojson::array({2, 3}));

  // BICU selects 1 = s_hat - 1, so diagnostics sit at s_ref = 1.
  REQUIRE(report["diagnostics"].is_object());
  CHECK(report["diagnostics"]["s_ref"] == 1);
  CHECK(report["diagnostics"]["q_hat"] == 1.0);
}

TEST_CASE("estimate report flags degenerate tallies") {
  // All extreme rows point along the first axis.
  const exdir::DataMatrix m{4, 2,
                            {9.0, 0.0,  //
                             8.0, 0.0,  //
                             7.0, 0.0,  //
                             0.1, 0.1}};
  const auto report = exdir::estimate_report(
      m, 2, 4,
      std::vector<exdir::Criterion>{exdir::Criterion::aic});
  CHECK(report["s_hat"] == 1);
  CHECK(report["degenerate"] == true);
  CHECK(report["criteria"].is_null());
  CHECK(report["q_eff"].is_null());
  CHECK(report["diagnostics"].is_null());
  REQUIRE(report["directions"].size() == 1);
  CHECK(report["directions"][0]["count"] == 2);
}

