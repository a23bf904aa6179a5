// Copyright 2026 The exdir Authors
// SPDX-License-Identifier: Apache-2.0
//
// File formats: CSV data matrices (17-significant-digit round-trip),
// JSON experiment configs (snake_case keys, strict schema), and the
// JSON report/summary emitted by the command-line tool. Key order in
// emitted JSON is fixed, so identical results serialize identically.

#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "exdir/criteria.hpp"
#include "exdir/diagnostics.hpp"
#include "exdir/harness.hpp"
#include "exdir/models.hpp"
#include "exdir/tally.hpp"

namespace exdir {

using ojson = nlohmann::ordered_json;

// Full round-trip formatting: 17 significant digits recover the exact
// double on re-parse.
inline std::string g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline bool parse_field(std::string_view field, double& out) {
  field = trim(field);
  if (field.empty()) return false;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc{} && res.ptr == end;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

}  // namespace detail

// Reads a comma-separated matrix. Lines starting with '#' and blank
// lines are skipped; a first content line with any non-numeric field is
// treated as a header and skipped. Every data row must have the same
// number of fields. `source` names the input in error messages.
inline DataMatrix read_csv(std::istream& in, const std::string& source) {
  DataMatrix m;
  std::string line;
  std::size_t line_no = 0;
  bool saw_content = false;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view stripped = detail::trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;

    const auto fields = detail::split_fields(stripped);
    std::vector<double> row(fields.size());
    bool numeric = true;
    std::size_t bad_col = 0;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (!detail::parse_field(fields[j], row[j])) {
        numeric = false;
        bad_col = j + 1;
        break;
      }
    }

    if (!saw_content) {
      saw_content = true;
      if (!numeric) continue;  // header row
    } else if (!numeric) {
      throw std::invalid_argument(source + ": line " +
                                  std::to_string(line_no) + ", field " +
                                  std::to_string(bad_col) +
                                  " is not numeric");
    }
    if (!numeric) continue;

    if (m.cols == 0) {
      m.cols = fields.size();
    } else if (fields.size() != m.cols) {
      throw std::invalid_argument(
          source + ": line " + std::to_string(line_no) + " has " +
          std::to_string(fields.size()) + " fields, expected " +
          std::to_string(m.cols));
    }
    m.values.insert(m.values.end(), row.begin(), row.end());
    ++m.rows;
  }

  if (m.rows == 0) {
    throw std::invalid_argument(source + ": no data rows");
  }
  return m;
}

inline DataMatrix read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument(path + ": cannot open for reading");
  }
  return read_csv(in, path);
}

// Writes the matrix with 17-significant-digit fields. `comments` go
// first, one '#' line each.
inline void write_csv(std::ostream& out, const DataMatrix& m,
                      std::span<const std::string> comments = {}) {
  for (const auto& c : comments) {
    out << "# " << c << '\n';
  }
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      if (j) out << ',';
      out << g17(m.at(i, j));
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------
// JSON building blocks
// ---------------------------------------------------------------------

inline ojson to_json(const DirectionKey& key) {
  return ojson(key.indices);
}

inline ojson to_json(const FiveNumber& f) {
  return ojson{{"min", f.min},
               {"q1", f.q1},
               {"median", f.median},
               {"q3", f.q3},
               {"max", f.max}};
}

inline ojson to_json(const SeriesSummary& s) {
  ojson values = ojson::array();
  for (const auto& v : s.values) {
    if (v) {
      values.push_back(*v);
    } else {
      values.push_back(nullptr);
    }
  }
  ojson out;
  out["values"] = std::move(values);
  out["summary"] = s.summary ? to_json(*s.summary) : ojson(nullptr);
  return out;
}

inline ojson to_json(const ConsistencyDiagnostics& d) {
  return ojson{{"s_ref", d.s_ref},       {"c_hat", d.c_hat},
               {"mu_hat", d.mu_hat},     {"q_hat", d.q_hat},
               {"q_clamped", d.q_clamped}, {"g_aic", d.g_aic},
               {"g_qaic", d.g_qaic},     {"g_mseic", d.g_mseic}};
}

inline ojson to_json(const ModelSpec& spec) {
  if (const auto* a = std::get_if<AsympIndep>(&spec)) {
    return ojson{{"type", "asymp_indep"}, {"s_star", a->s_star}, {"d", a->d}};
  }
  if (const auto* a = std::get_if<AsympDep>(&spec)) {
    return ojson{{"type", "asymp_dep"},
                 {"s1", a->s1},
                 {"s2", a->s2},
                 {"s3", a->s3},
                 {"d", a->d}};
  }
  const auto& a = std::get<AxisOracle>(spec);
  return ojson{{"type", "axis_oracle"}, {"weights", a.weights}, {"d", a.d}};
}

inline ojson to_json(const ExperimentConfig& config) {
  ojson criteria = ojson::array();
  for (Criterion c : config.criteria) criteria.push_back(to_string(c));
  ojson out;
  out["model"] = to_json(config.model);
  out["n"] = config.n;
  out["k"] = config.k;
  out["q_models"] = config.q_models;
  out["replications"] = config.replications;
  out["master_seed"] = config.master_seed;
  out["criteria"] = std::move(criteria);
  out["s_ref_policy"] = std::string(to_string(config.s_ref_policy));
  if (config.true_directions) {
    ojson dirs = ojson::array();
    for (const auto& [key, w] : config.true_directions->entries) {
      dirs.push_back(ojson{{"indices", to_json(key)}, {"weight", w}});
    }
    out["true_directions"] = std::move(dirs);
  }
  return out;
}

// ---------------------------------------------------------------------
// Config parsing (strict: unknown or missing keys are named)
// ---------------------------------------------------------------------

namespace detail {

inline const ojson& require_key(const ojson& j, const char* key,
                                const char* where) {
  if (!j.contains(key)) {
    throw std::invalid_argument(std::string(where) + ": missing key \"" +
                                key + "\"");
  }
  return j.at(key);
}

inline std::uint64_t require_uint(const ojson& j, const char* key,
                                  const char* where) {
  const ojson& v = require_key(j, key, where);
  if (!v.is_number_integer() ||
      (v.is_number_integer() && !v.is_number_unsigned() &&
       v.get<std::int64_t>() < 0)) {
    throw std::invalid_argument(std::string(where) + ": key \"" + key +
                                "\" must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

inline void reject_unknown_keys(const ojson& j,
                                std::span<const std::string_view> known,
                                const char* where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const auto& k : known) ok = ok || key == k;
    if (!ok) {
      throw std::invalid_argument(std::string(where) + ": unknown key \"" +
                                  key + "\"");
    }
  }
}

}  // namespace detail

inline ModelSpec model_from_json(const ojson& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("config: \"model\" must be an object");
  }
  const ojson& type_node = detail::require_key(j, "type", "config.model");
  if (!type_node.is_string()) {
    throw std::invalid_argument("config.model: \"type\" must be a string");
  }
  const std::string type = type_node.get<std::string>();
  if (type == "asymp_indep") {
    constexpr std::string_view known[] = {"type", "s_star", "d"};
    detail::reject_unknown_keys(j, known, "config.model");
    AsympIndep spec;
    spec.s_star = detail::require_uint(j, "s_star", "config.model");
    spec.d = detail::require_uint(j, "d", "config.model");
    return spec;
  }
  if (type == "asymp_dep") {
    constexpr std::string_view known[] = {"type", "s1", "s2", "s3", "d"};
    detail::reject_unknown_keys(j, known, "config.model");
    AsympDep spec;
    spec.s1 = detail::require_uint(j, "s1", "config.model");
    spec.s2 = detail::require_uint(j, "s2", "config.model");
    spec.s3 = detail::require_uint(j, "s3", "config.model");
    spec.d = detail::require_uint(j, "d", "config.model");
    return spec;
  }
  if (type == "axis_oracle") {
    constexpr std::string_view known[] = {"type", "weights", "d"};
    detail::reject_unknown_keys(j, known, "config.model");
    AxisOracle spec;
    const ojson& w = detail::require_key(j, "weights", "config.model");
    if (!w.is_array() || w.empty()) {
      throw std::invalid_argument(
          "config.model: \"weights\" must be a nonempty array");
    }
    for (const auto& v : w) {
      if (!v.is_number()) {
        throw std::invalid_argument(
            "config.model: \"weights\" entries must be numbers");
      }
      spec.weights.push_back(v.get<double>());
    }
    spec.d = detail::require_uint(j, "d", "config.model");
    return spec;
  }
  throw std::invalid_argument(
      "config.model: unknown type \"" + type +
      "\" (expected asymp_indep, asymp_dep, or axis_oracle)");
}

// Parses and validates an experiment config. Required keys: model, n,
// k, replications, master_seed. Optional: q_models (default 2*d),
// criteria (default all five), s_ref_policy (default true_s_star),
// true_directions.
inline ExperimentConfig config_from_json(const ojson& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("config: root must be an object");
  }
  constexpr std::string_view known[] = {
      "model",       "n",        "k",            "q_models",
      "replications", "master_seed", "criteria", "s_ref_policy",
      "true_directions"};
  detail::reject_unknown_keys(j, known, "config");

  ExperimentConfig config;
  config.model = model_from_json(detail::require_key(j, "model", "config"));
  config.n = detail::require_uint(j, "n", "config");
  config.k = detail::require_uint(j, "k", "config");
  config.replications = detail::require_uint(j, "replications", "config");
  config.master_seed = detail::require_uint(j, "master_seed", "config");
  config.q_models = j.contains("q_models")
                        ? detail::require_uint(j, "q_models", "config")
                        : default_q_models(config.model);

  if (j.contains("criteria")) {
    const ojson& arr = j.at("criteria");
    if (!arr.is_array() || arr.empty()) {
      throw std::invalid_argument(
          "config: \"criteria\" must be a nonempty array of names");
    }
    std::array<bool, 5> seen{};
    for (const auto& v : arr) {
      if (!v.is_string()) {
        throw std::invalid_argument(
            "config: \"criteria\" entries must be strings");
      }
      const auto c = criterion_from_string(v.get<std::string>());
      if (!c) {
        throw std::invalid_argument(
            "config: unknown criterion \"" + v.get<std::string>() +
            "\" (expected aic, bicu, bicl, qaic, mseic)");
      }
      if (seen[static_cast<std::size_t>(*c)]) {
        throw std::invalid_argument("config: criterion \"" +
                                    v.get<std::string>() + "\" listed twice");
      }
      seen[static_cast<std::size_t>(*c)] = true;
    }
    for (Criterion c : all_criteria) {
      if (seen[static_cast<std::size_t>(c)]) config.criteria.push_back(c);
    }
  } else {
    config.criteria.assign(all_criteria.begin(), all_criteria.end());
  }

  if (j.contains("s_ref_policy")) {
    const std::string p = j.at("s_ref_policy").is_string()
                              ? j.at("s_ref_policy").get<std::string>()
                              : std::string();
    if (p == "true_s_star") {
      config.s_ref_policy = SRefPolicy::true_s_star;
    } else if (p == "bicu_selected") {
      config.s_ref_policy = SRefPolicy::bicu_selected;
    } else {
      throw std::invalid_argument(
          "config: \"s_ref_policy\" must be \"true_s_star\" or "
          "\"bicu_selected\"");
    }
  }

  if (j.contains("true_directions")) {
    const ojson& arr = j.at("true_directions");
    if (!arr.is_array() || arr.empty()) {
      throw std::invalid_argument(
          "config: \"true_directions\" must be a nonempty array");
    }
    TrueDirections dirs;
    for (const auto& entry : arr) {
      if (!entry.is_object()) {
        throw std::invalid_argument(
            "config.true_directions[]: entries must be objects");
      }
      constexpr std::string_view entry_keys[] = {"indices", "weight"};
      detail::reject_unknown_keys(entry, entry_keys,
                                  "config.true_directions[]");
      const ojson& idx =
          detail::require_key(entry, "indices", "config.true_directions[]");
      const ojson& w =
          detail::require_key(entry, "weight", "config.true_directions[]");
      if (!idx.is_array() || idx.empty() || !w.is_number()) {
        throw std::invalid_argument(
            "config.true_directions[]: need \"indices\" (array) and "
            "\"weight\" (number)");
      }
      DirectionKey key;
      for (const auto& v : idx) {
        if (!v.is_number_integer()) {
          throw std::invalid_argument(
              "config.true_directions[]: indices must be integers");
        }
        key.indices.push_back(v.get<std::uint32_t>());
      }
      dirs.entries.push_back({std::move(key), w.get<double>()});
    }
    config.true_directions = std::move(dirs);
  }

  validate(config);
  return config;
}

// ---------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------

inline ojson to_json(const ReplicationRecord& rec,
                     std::span<const Criterion> criteria) {
  ojson out;
  out["replication"] = rec.replication;
  out["seed"] = rec.seed;
  out["degenerate"] = rec.degenerate;
  out["s_hat"] = rec.s_hat;
  out["threshold"] = rec.threshold;
  out["s_hat_over_k"] = rec.s_hat_over_k;
  out["q_eff"] = rec.q_eff;
  out["t5_strained"] = rec.t5_strained;
  out["multi_count"] = rec.multi_count;
  ojson selected, hell;
  for (Criterion c : criteria) {
    const auto slot = static_cast<std::size_t>(c);
    const auto name = std::string(to_string(c));
    selected[name] =
        rec.selected[slot] ? ojson(*rec.selected[slot]) : ojson(nullptr);
    hell[name] =
        rec.hellinger[slot] ? ojson(*rec.hellinger[slot]) : ojson(nullptr);
  }
  out["selected"] = std::move(selected);
  out["hellinger"] = std::move(hell);
  out["diagnostics"] = rec.diag ? to_json(*rec.diag) : ojson(nullptr);
  return out;
}

inline ojson summary_to_json(const ExperimentSummary& summary) {
  ojson out;
  out["config"] = to_json(summary.config);

  ojson reps = ojson::array();
  for (const auto& rec : summary.records) {
    reps.push_back(to_json(rec, summary.config.criteria));
  }
  out["replications"] = std::move(reps);

  ojson crit;
  for (const auto& cs : summary.criteria) {
    ojson one;
    one["selected"] = to_json(cs.selected);
    one["hellinger"] = to_json(cs.hellinger);
    crit[std::string(to_string(cs.criterion))] = std::move(one);
  }
  out["criteria"] = std::move(crit);

  out["s_hat_over_k"] = to_json(summary.s_hat_over_k);

  ojson diag;
  diag["c_hat"] = to_json(summary.c_hat);
  diag["mu_hat"] = to_json(summary.mu_hat);
  diag["q_hat"] = to_json(summary.q_hat);
  diag["g_aic"] = to_json(summary.g_aic);
  diag["g_qaic"] = to_json(summary.g_qaic);
  diag["g_mseic"] = to_json(summary.g_mseic);
  out["diagnostics"] = std::move(diag);

  out["degenerate_replications"] = summary.degenerate;

  ojson errors = ojson::array();
  for (const auto& e : summary.errors) {
    errors.push_back(ojson{{"replication", e.replication},
                           {"seed", e.seed},
                           {"message", e.message}});
  }
  out["errors"] = std::move(errors);
  return out;
}

// One row per (criterion, replication), empty cells where a value is
// undefined; reals at full round-trip precision.
inline void write_boxplot_csv(std::ostream& out,
                              const ExperimentSummary& summary) {
  out << "criterion,replication,s_selected,hellinger,c_hat,mu_hat,q_hat,"
         "g_aic,g_qaic,g_mseic\n";
  const std::size_t r = summary.config.replications;
  const auto cell = [](const std::optional<double>& v) {
    return v ? g17(*v) : std::string();
  };
  for (std::size_t c = 0; c < summary.criteria.size(); ++c) {
    const auto& cs = summary.criteria[c];
    for (std::size_t i = 0; i < r; ++i) {
      out << to_string(cs.criterion) << ',' << i << ',';
      if (cs.selected.values[i]) {
        out << static_cast<std::uint64_t>(*cs.selected.values[i]);
      }
      out << ',' << cell(cs.hellinger.values[i]) << ','
          << cell(summary.c_hat.values[i]) << ','
          << cell(summary.mu_hat.values[i]) << ','
          << cell(summary.q_hat.values[i]) << ','
          << cell(summary.g_aic.values[i]) << ','
          << cell(summary.g_qaic.values[i]) << ','
          << cell(summary.g_mseic.values[i]) << '\n';
    }
  }
}

// The report of a one-shot estimation on a data matrix: tally summary,
// criterion profiles with selections, every observed direction with its
// count, and diagnostics at the BICU selection (null when out of range
// or the tally is degenerate).
inline ojson estimate_report(const DataMatrix& data, std::size_t k,
                             std::size_t q_models,
                             std::span<const Criterion> criteria) {
  const DirectionTally tally = tally_directions(data, k);

  ojson out;
  out["n"] = data.rows;
  out["d"] = data.cols;
  out["k"] = k;
  out["threshold"] = tally.threshold;
  out["s_hat"] = tally.s_hat();
  const bool degenerate = tally.s_hat() < 2;
  out["degenerate"] = degenerate;

  if (!degenerate) {
    const ProfileSet profiles = evaluate_profiles(tally, q_models);
    out["q_eff"] = profiles.q_eff;
    out["t5_strained"] = profiles.t5_strained;
    ojson crit;
    for (Criterion c : criteria) {
      crit[std::string(to_string(c))] =
          ojson{{"values", profiles[c].values},
                {"selected", profiles[c].selected}};
    }
    out["criteria"] = std::move(crit);

    const std::size_t s_ref = profiles[Criterion::bicu].selected;
    out["diagnostics"] = (s_ref >= 1 && s_ref < tally.s_hat())
                             ? to_json(diagnostics(tally, s_ref))
                             : ojson(nullptr);
  } else {
    out["q_eff"] = nullptr;
    out["t5_strained"] = nullptr;
    out["criteria"] = nullptr;
    out["diagnostics"] = nullptr;
  }

  ojson dirs = ojson::array();
  for (const auto& [key, count] : ranked_directions(tally)) {
    dirs.push_back(ojson{{"indices", to_json(key)}, {"count", count}});
  }
  out["directions"] = std::move(dirs);
  return out;
}

}  // namespace exdir
