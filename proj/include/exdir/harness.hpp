// Copyright 2026 The exdir Authors
// SPDX-License-Identifier: Apache-2.0
//
// Replicated experiment driver: generate -> tally -> criteria ->
// diagnostics -> distance to the true direction distribution, repeated
// over derived seeds. Replications are embarrassingly parallel and the
// aggregate is assembled in replication order from per-slot results, so
// the summary is bit-identical for any number of worker threads.

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "exdir/criteria.hpp"
#include "exdir/diagnostics.hpp"
#include "exdir/models.hpp"
#include "exdir/rng.hpp"
#include "exdir/tally.hpp"

namespace exdir {

enum class SRefPolicy { true_s_star, bicu_selected };

constexpr std::string_view to_string(SRefPolicy p) noexcept {
  return p == SRefPolicy::true_s_star ? "true_s_star" : "bicu_selected";
}

struct ExperimentConfig {
  ModelSpec model;
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t q_models = 0;
  std::size_t replications = 0;
  std::uint64_t master_seed = 0;
  std::vector<Criterion> criteria;  // canonical order, nonempty
  SRefPolicy s_ref_policy = SRefPolicy::true_s_star;
  // Overrides the model's limiting direction weights in the distance
  // evaluation (the AsympDep weights are a modeling choice, not a
  // theorem, so callers may supply their own).
  std::optional<TrueDirections> true_directions;
};

inline std::size_t default_q_models(const ModelSpec& model) {
  return 2 * model_dim(model);
}

inline void validate(const ExperimentConfig& config) {
  validate(config.model);
  if (config.n < 2) {
    throw std::invalid_argument("experiment: need n >= 2");
  }
  if (config.k < 1 || config.k + 1 > config.n) {
    throw std::invalid_argument("experiment: need 1 <= k <= n-1");
  }
  if (config.q_models < 1) {
    throw std::invalid_argument("experiment: need q_models >= 1");
  }
  if (config.replications < 1) {
    throw std::invalid_argument("experiment: need replications >= 1");
  }
  if (config.criteria.empty()) {
    throw std::invalid_argument("experiment: criteria list is empty");
  }
  for (std::size_t i = 1; i < config.criteria.size(); ++i) {
    if (config.criteria[i] <= config.criteria[i - 1]) {
      throw std::invalid_argument(
          "experiment: criteria must be unique and in canonical order "
          "(aic, bicu, bicl, qaic, mseic)");
    }
  }
  if (config.true_directions) {
    double sum = 0.0;
    for (const auto& [key, w] : config.true_directions->entries) {
      validate_direction_key(key, model_dim(config.model));
      if (!(w > 0.0)) {
        throw std::invalid_argument(
            "experiment: true direction weights must be > 0");
      }
      sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-12) {
      throw std::invalid_argument(
          "experiment: true direction weights must sum to 1");
    }
  }
}

// Distance (1/sqrt(2)) * ||est - truth||_2 between two probability
// vectors, compared position-wise after padding the shorter with zeros.
// For the descending-ordered inputs used here this lies in [0, 1].
inline double hellinger(std::span<const double> est,
                        std::span<const double> truth) {
  const auto check = [](std::span<const double> p, const char* which) {
    double sum = 0.0;
    for (double v : p) {
      if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument(std::string("hellinger: ") + which +
                                    " vector has a negative or non-finite "
                                    "entry");
      }
      sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument(std::string("hellinger: ") + which +
                                  " vector does not sum to 1");
    }
  };
  check(est, "estimated");
  check(truth, "true");

  const std::size_t m = std::max(est.size(), truth.size());
  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = i < est.size() ? est[i] : 0.0;
    const double t = i < truth.size() ? truth[i] : 0.0;
    ss += (e - t) * (e - t);
  }
  return std::sqrt(ss) * detail::kInvSqrt2;
}

struct ReplicationRecord {
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  bool degenerate = false;  // s_hat < 2: criteria skipped
  std::size_t s_hat = 0;
  double threshold = 0.0;
  double s_hat_over_k = 0.0;
  std::size_t q_eff = 0;
  bool t5_strained = false;
  std::size_t multi_count = 0;  // |{j : T_j > 1}|
  // Indexed by Criterion; only the configured criteria are filled.
  std::array<std::optional<std::size_t>, 5> selected;
  std::array<std::optional<double>, 5> hellinger;
  std::optional<ConsistencyDiagnostics> diag;
};

namespace detail {

inline std::vector<double> truth_weights_desc(const ExperimentConfig& config) {
  const TrueDirections dirs = config.true_directions
                                  ? *config.true_directions
                                  : true_direction_weights(config.model);
  std::vector<double> w;
  w.reserve(dirs.entries.size());
  for (const auto& [key, weight] : dirs.entries) w.push_back(weight);
  std::sort(w.begin(), w.end(), std::greater<>());
  return w;
}

inline std::size_t truth_direction_count(const ExperimentConfig& config) {
  if (config.true_directions) return config.true_directions->entries.size();
  return true_direction_weights(config.model).entries.size();
}

}  // namespace detail

// Runs one replication. Deterministic given (config, rep_index): the
// replication seed is derived from the master seed and the index alone.
inline ReplicationRecord run_replication(const ExperimentConfig& config,
                                         std::size_t rep_index) {
  ReplicationRecord rec;
  rec.replication = rep_index;
  rec.seed = derive_seed(config.master_seed, rep_index);

  const DataMatrix data = generate(config.model, config.n, rec.seed);
  const DirectionTally tally = tally_directions(data, config.k);

  rec.s_hat = tally.s_hat();
  rec.threshold = tally.threshold;
  rec.s_hat_over_k = static_cast<double>(rec.s_hat) /
                     static_cast<double>(config.k);
  for (std::uint64_t t : tally.ordered) {
    if (t > 1) ++rec.multi_count;
  }

  if (rec.s_hat < 2) {
    rec.degenerate = true;
    return rec;
  }

  const ProfileSet profiles = evaluate_profiles(tally, config.q_models);
  rec.q_eff = profiles.q_eff;
  rec.t5_strained = profiles.t5_strained;

  const std::vector<double> truth = detail::truth_weights_desc(config);
  for (Criterion c : config.criteria) {
    const std::size_t sel = profiles[c].selected;
    const auto slot = static_cast<std::size_t>(c);
    rec.selected[slot] = sel;
    rec.hellinger[slot] =
        hellinger(normalized_conditional(tally, sel), truth);
  }

  const std::size_t s_ref =
      config.s_ref_policy == SRefPolicy::true_s_star
          ? detail::truth_direction_count(config)
          : profiles[Criterion::bicu].selected;
  if (s_ref >= 1 && s_ref < rec.s_hat) {
    rec.diag = diagnostics(tally, s_ref);
  }
  return rec;
}

struct FiveNumber {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

// Five-number summary with linearly interpolated quartiles (the common
// "type 7" convention) over the sorted values.
inline FiveNumber five_number(std::vector<double> values) {
  if (values.empty()) {
    throw std::invalid_argument("five_number: no values");
  }
  std::sort(values.begin(), values.end());
  const auto at = [&](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] -
                                                         values[lo]);
  };
  return {at(0.0), at(0.25), at(0.5), at(0.75), at(1.0)};
}

// A per-replication series (nulls where a replication failed, was
// degenerate, or had no defined value) plus the five-number summary of
// the non-null part.
struct SeriesSummary {
  std::vector<std::optional<double>> values;
  std::optional<FiveNumber> summary;
};

namespace detail {

inline void finalize_series(SeriesSummary& s) {
  std::vector<double> present;
  for (const auto& v : s.values) {
    if (v) present.push_back(*v);
  }
  if (!present.empty()) s.summary = five_number(std::move(present));
}

}  // namespace detail

struct CriterionSummary {
  Criterion criterion{};
  SeriesSummary selected;  // argmin sizes, as reals for summarizing
  SeriesSummary hellinger;
};

struct ReplicationError {
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::string message;
};

struct ExperimentSummary {
  ExperimentConfig config;
  std::vector<ReplicationRecord> records;  // successful replications only
  std::vector<CriterionSummary> criteria;  // one per configured criterion
  SeriesSummary s_hat_over_k;
  SeriesSummary c_hat, mu_hat, q_hat, g_aic, g_qaic, g_mseic;
  std::vector<std::size_t> degenerate;  // replication indices
  std::vector<ReplicationError> errors;
};

// Runs all replications, on `threads` workers (0 = hardware count).
// Failed replications are collected, not fatal; the summary is
// independent of the thread count.
inline ExperimentSummary run_experiment(const ExperimentConfig& config,
                                        std::size_t threads = 0) {
  validate(config);
  const std::size_t r = config.replications;
  std::size_t workers = threads != 0
                            ? threads
                            : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, r);

  std::vector<std::optional<ReplicationRecord>> slots(r);
  std::vector<std::optional<std::string>> failures(r);

  std::atomic<std::size_t> cursor{0};
  const auto work = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= r) return;
      try {
        slots[i] = run_replication(config, i);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  // Aggregation runs in replication order regardless of which worker
  // produced each slot.
  ExperimentSummary out;
  out.config = config;
  out.s_hat_over_k.values.resize(r);
  for (SeriesSummary* s :
       {&out.c_hat, &out.mu_hat, &out.q_hat, &out.g_aic, &out.g_qaic,
        &out.g_mseic}) {
    s->values.resize(r);
  }
  out.criteria.resize(config.criteria.size());
  for (std::size_t c = 0; c < config.criteria.size(); ++c) {
    out.criteria[c].criterion = config.criteria[c];
    out.criteria[c].selected.values.resize(r);
    out.criteria[c].hellinger.values.resize(r);
  }

  for (std::size_t i = 0; i < r; ++i) {
    if (failures[i]) {
      out.errors.push_back(
          {i, derive_seed(config.master_seed, i), *failures[i]});
      continue;
    }
    const ReplicationRecord& rec = *slots[i];
    out.records.push_back(rec);
    out.s_hat_over_k.values[i] = rec.s_hat_over_k;
    if (rec.degenerate) {
      out.degenerate.push_back(i);
    }
    for (std::size_t c = 0; c < config.criteria.size(); ++c) {
      const auto slot = static_cast<std::size_t>(config.criteria[c]);
      if (rec.selected[slot]) {
        out.criteria[c].selected.values[i] =
            static_cast<double>(*rec.selected[slot]);
      }
      out.criteria[c].hellinger.values[i] = rec.hellinger[slot];
    }
    if (rec.diag) {
      out.c_hat.values[i] = rec.diag->c_hat;
      out.mu_hat.values[i] = rec.diag->mu_hat;
      out.q_hat.values[i] = rec.diag->q_hat;
      out.g_aic.values[i] = rec.diag->g_aic;
      out.g_qaic.values[i] = rec.diag->g_qaic;
      out.g_mseic.values[i] = rec.diag->g_mseic;
    }
  }

  detail::finalize_series(out.s_hat_over_k);
  for (SeriesSummary* s :
       {&out.c_hat, &out.mu_hat, &out.q_hat, &out.g_aic, &out.g_qaic,
        &out.g_mseic}) {
    detail::finalize_series(*s);
  }
  for (auto& cs : out.criteria) {
    detail::finalize_series(cs.selected);
    detail::finalize_series(cs.hellinger);
  }
  return out;
}

}  // namespace exdir
