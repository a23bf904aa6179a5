// Copyright 2026 The exdir Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Subcommands:
//   estimate    tally extremal directions in a CSV matrix and run the
//               information criteria
//   simulate    draw synthetic heavy-tailed data from a built-in model
//   experiment  run a Monte Carlo study from a JSON config
//   diagnose    consistency diagnostics at a fixed reference size
//   gfun        evaluate the g functions at a point
//
// Exit codes: 0 success, 2 bad usage or invalid input, 1 runtime
// failure.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "exdir/diagnostics.hpp"
#include "exdir/harness.hpp"
#include "exdir/io.hpp"
#include "exdir/models.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::vector<exdir::Criterion> parse_criteria_list(const std::string& text) {
  std::array<bool, 5> seen{};
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ',') {
      const std::string name = text.substr(start, i - start);
      start = i + 1;
      const auto c = exdir::criterion_from_string(name);
      if (!c) {
        throw std::invalid_argument("unknown criterion \"" + name +
                                    "\" (expected aic, bicu, bicl, qaic, "
                                    "mseic)");
      }
      if (seen[static_cast<std::size_t>(*c)]) {
        throw std::invalid_argument("criterion \"" + name + "\" listed twice");
      }
      seen[static_cast<std::size_t>(*c)] = true;
    }
  }
  std::vector<exdir::Criterion> out;
  for (exdir::Criterion c : exdir::all_criteria) {
    if (seen[static_cast<std::size_t>(c)]) out.push_back(c);
  }
  return out;
}

std::vector<double> parse_weight_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ',') {
      const std::string field = text.substr(start, i - start);
      start = i + 1;
      double v = 0.0;
      if (!exdir::detail::parse_field(field, v)) {
        throw std::invalid_argument("--weights: \"" + field +
                                    "\" is not a number");
      }
      out.push_back(v);
    }
  }
  return out;
}

void write_json_output(const exdir::ojson& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(out_path);
  if (!out) {
    throw std::runtime_error(out_path + ": cannot open for writing");
  }
  out << j.dump(2) << '\n';
}

// -----------------------------------------------------------------
// estimate
// -----------------------------------------------------------------

struct EstimateArgs {
  std::string data_csv;
  std::size_t k = 0;
  std::size_t q_models = 0;  // 0: default to 2 * d after the load
  std::string criteria = "aic,bicu,bicl,qaic,mseic";
  std::string out;
};

int run_estimate(const EstimateArgs& args) {
  const auto criteria = parse_criteria_list(args.criteria);
  const exdir::DataMatrix data = exdir::read_csv_file(args.data_csv);
  const std::size_t q_models =
      args.q_models > 0 ? args.q_models : 2 * data.cols;
  const exdir::ojson report =
      exdir::estimate_report(data, args.k, q_models, criteria);
  write_json_output(report, args.out);
  return kExitOk;
}

// -----------------------------------------------------------------
// simulate
// -----------------------------------------------------------------

struct SimulateArgs {
  std::string model;
  std::size_t s_star = 0;
  std::size_t s1 = 0, s2 = 0, s3 = 0;
  std::size_t d = 0;
  std::string weights;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_simulate(const SimulateArgs& args, const CLI::App& cmd) {
  const auto used = [&cmd](const char* flag) {
    return cmd.get_option(flag)->count() > 0;
  };
  const auto forbid = [&](const char* flag) {
    if (used(flag)) {
      throw std::invalid_argument(std::string(flag) +
                                  " is not valid for --model " + args.model);
    }
  };

  exdir::ModelSpec spec;
  std::string params;
  if (args.model == "asymp-indep") {
    forbid("--s1");
    forbid("--s2");
    forbid("--s3");
    forbid("--weights");
    if (!used("--s-star") || !used("--d")) {
      throw std::invalid_argument(
          "--model asymp-indep requires --s-star and --d");
    }
    spec = exdir::AsympIndep{args.s_star, args.d};
    params = "s_star=" + std::to_string(args.s_star) +
             " d=" + std::to_string(args.d);
  } else if (args.model == "asymp-dep") {
    forbid("--s-star");
    forbid("--weights");
    if (!used("--s1") || !used("--s2") || !used("--s3") || !used("--d")) {
      throw std::invalid_argument(
          "--model asymp-dep requires --s1, --s2, --s3, and --d");
    }
    spec = exdir::AsympDep{args.s1, args.s2, args.s3, args.d};
    params = "s1=" + std::to_string(args.s1) +
             " s2=" + std::to_string(args.s2) +
             " s3=" + std::to_string(args.s3) +
             " d=" + std::to_string(args.d);
  } else if (args.model == "axis-oracle") {
    forbid("--s-star");
    forbid("--s1");
    forbid("--s2");
    forbid("--s3");
    if (!used("--weights")) {
      throw std::invalid_argument("--model axis-oracle requires --weights");
    }
    const auto weights = parse_weight_list(args.weights);
    const std::size_t d = used("--d") ? args.d : weights.size();
    spec = exdir::AxisOracle{weights, d};
    params = "weights=";
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (i) params += ',';
      params += exdir::g17(weights[i]);
    }
    params += " d=" + std::to_string(d);
  } else {
    throw std::invalid_argument(
        "--model must be asymp-indep, asymp-dep, or axis-oracle");
  }

  const exdir::DataMatrix data = exdir::generate(spec, args.n, args.seed);
  const std::string comment =
      "exdir simulate model=" + args.model + " " + params +
      " n=" + std::to_string(args.n) + " seed=" + std::to_string(args.seed);

  if (args.out.empty()) {
    exdir::write_csv(std::cout, data, std::span(&comment, 1));
    return kExitOk;
  }
  std::ofstream out(args.out);
  if (!out) {
    throw std::runtime_error(args.out + ": cannot open for writing");
  }
  exdir::write_csv(out, data, std::span(&comment, 1));
  return kExitOk;
}

// -----------------------------------------------------------------
// experiment
// -----------------------------------------------------------------

struct ExperimentArgs {
  std::string config_path;
  std::string out_dir;
  std::size_t threads = 0;
};

int run_experiment_cmd(const ExperimentArgs& args) {
  std::ifstream in(args.config_path);
  if (!in) {
    throw std::invalid_argument(args.config_path + ": cannot open");
  }
  exdir::ojson config_json;
  try {
    config_json = exdir::ojson::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(args.config_path + ": " + e.what());
  }
  const exdir::ExperimentConfig config = exdir::config_from_json(config_json);

  const exdir::ExperimentSummary summary =
      exdir::run_experiment(config, args.threads);

  std::filesystem::create_directories(args.out_dir);
  const auto summary_path =
      std::filesystem::path(args.out_dir) / "summary.json";
  const auto boxplot_path =
      std::filesystem::path(args.out_dir) / "boxplot.csv";

  {
    std::ofstream out(summary_path);
    if (!out) {
      throw std::runtime_error(summary_path.string() +
                               ": cannot open for writing");
    }
    out << exdir::summary_to_json(summary).dump(2) << '\n';
  }
  {
    std::ofstream out(boxplot_path);
    if (!out) {
      throw std::runtime_error(boxplot_path.string() +
                               ": cannot open for writing");
    }
    exdir::write_boxplot_csv(out, summary);
  }

  if (!summary.errors.empty()) {
    std::cerr << "warning: " << summary.errors.size() << " of "
              << config.replications
              << " replications failed; see errors[] in "
              << summary_path.string() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

// -----------------------------------------------------------------
// diagnose and gfun
// -----------------------------------------------------------------

struct DiagnoseArgs {
  std::string data_csv;
  std::size_t k = 0;
  std::size_t s_ref = 0;
};

int run_diagnose(const DiagnoseArgs& args) {
  const exdir::DataMatrix data = exdir::read_csv_file(args.data_csv);
  const exdir::DirectionTally tally = exdir::tally_directions(data, args.k);
  const exdir::ConsistencyDiagnostics diag =
      exdir::diagnostics(tally, args.s_ref);
  std::cout << exdir::to_json(diag).dump(2) << '\n';
  return kExitOk;
}

struct GfunArgs {
  double q = 0.0;
  double mu = 1.0;
};

int run_gfun(const GfunArgs& args) {
  const exdir::ojson out{{"g_aic", exdir::g_aic(args.q, args.mu)},
                         {"g_qaic", exdir::g_qaic(args.q)},
                         {"g_mseic", exdir::g_mseic(args.q, args.mu)}};
  std::cout << out.dump() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Estimate the number of extremal directions in heavy-tailed data"};
  app.require_subcommand(1);

  EstimateArgs est;
  CLI::App* estimate = app.add_subcommand(
      "estimate", "Tally extremal directions and run information criteria");
  estimate->add_option("data_csv", est.data_csv, "Input CSV matrix")
      ->required();
  estimate->add_option("--k", est.k, "Number of extreme rows to keep")
      ->required();
  estimate->add_option("--q-models", est.q_models,
                       "Largest candidate size (default: 2 * columns)");
  estimate->add_option("--criteria", est.criteria,
                       "Comma-separated criteria (default: all five)");
  estimate->add_option("--out", est.out, "Write the JSON report here");

  SimulateArgs sim;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Draw synthetic heavy-tailed data");
  simulate
      ->add_option("--model", sim.model,
                   "asymp-indep, asymp-dep, or axis-oracle")
      ->required();
  simulate->add_option("--s-star", sim.s_star,
                       "Number of extremal coordinates (asymp-indep)");
  simulate->add_option("--s1", sim.s1, "Singleton directions (asymp-dep)");
  simulate->add_option("--s2", sim.s2, "Pair directions (asymp-dep)");
  simulate->add_option("--s3", sim.s3, "Triple directions (asymp-dep)");
  simulate->add_option("--d", sim.d, "Ambient dimension");
  simulate->add_option("--weights", sim.weights,
                       "Comma-separated axis weights (axis-oracle)");
  simulate->add_option("--n", sim.n, "Number of rows")->required();
  simulate->add_option("--seed", sim.seed, "RNG seed (default 0)");
  simulate->add_option("--out", sim.out, "Write the CSV here");

  ExperimentArgs exp;
  CLI::App* experiment = app.add_subcommand(
      "experiment", "Run a Monte Carlo study from a JSON config");
  experiment->add_option("--config", exp.config_path, "JSON config path")
      ->required();
  experiment->add_option("--out", exp.out_dir, "Output directory")
      ->required();
  experiment->add_option(
      "--threads", exp.threads,
      "Worker threads (default 0: hardware concurrency)");

  DiagnoseArgs dia;
  CLI::App* diagnose = app.add_subcommand(
      "diagnose", "Consistency diagnostics at a reference size");
  diagnose->add_option("data_csv", dia.data_csv, "Input CSV matrix")
      ->required();
  diagnose->add_option("--k", dia.k, "Number of extreme rows to keep")
      ->required();
  diagnose->add_option("--s-ref", dia.s_ref, "Reference model size")
      ->required();

  GfunArgs gf;
  CLI::App* gfun =
      app.add_subcommand("gfun", "Evaluate the g functions at a point");
  gfun->add_option("--q", gf.q, "Spectral ratio, must be >= 1")->required();
  gfun->add_option("--mu", gf.mu, "Mean tail count, must be >= 1 (default 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*estimate) return run_estimate(est);
    if (*simulate) return run_simulate(sim, *simulate);
    if (*experiment) return run_experiment_cmd(exp);
    if (*diagnose) return run_diagnose(dia);
    return run_gfun(gf);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
