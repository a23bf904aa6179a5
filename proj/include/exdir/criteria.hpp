// Copyright 2026 The exdir Authors
// SPDX-License-Identifier: Apache-2.0
//
// The five information criteria that select the number of extremal
// directions from an ordered tally. Log-factorials go through lgamma,
// never literal factorials, so counts up to 10^6 stay finite. The
// s-independent constant blocks are kept, not dropped: absolute values
// then match the closed formulas and the algebraic identities relating
// the criteria are directly testable.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "exdir/tally.hpp"

namespace exdir {

enum class Criterion { aic = 0, bicu = 1, bicl = 2, qaic = 3, mseic = 4 };

inline constexpr std::array<Criterion, 5> all_criteria{
    Criterion::aic, Criterion::bicu, Criterion::bicl, Criterion::qaic,
    Criterion::mseic};

constexpr std::string_view to_string(Criterion c) noexcept {
  switch (c) {
    case Criterion::aic: return "aic";
    case Criterion::bicu: return "bicu";
    case Criterion::bicl: return "bicl";
    case Criterion::qaic: return "qaic";
    case Criterion::mseic: return "mseic";
  }
  return "?";
}

inline std::optional<Criterion> criterion_from_string(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  for (Criterion c : all_criteria) {
    if (lower == to_string(c)) return c;
  }
  return std::nullopt;
}

namespace detail {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

inline void check_ordered_tally(std::span<const std::uint64_t> counts,
                                std::uint64_t k) {
  if (counts.size() < 2) {
    throw std::domain_error(
        "information criteria: degenerate tally (fewer than two observed "
        "directions)");
  }
  std::uint64_t sum = 0;
  std::uint64_t prev = UINT64_MAX;
  for (std::uint64_t t : counts) {
    if (t < 1) {
      throw std::invalid_argument("ordered tally: counts must be >= 1");
    }
    if (t > prev) {
      throw std::invalid_argument("ordered tally: counts not descending");
    }
    prev = t;
    sum += t;
  }
  if (sum != k) {
    throw std::invalid_argument("ordered tally: counts sum to " +
                                std::to_string(sum) + ", expected k=" +
                                std::to_string(k));
  }
}

inline void check_candidate(std::size_t s, std::size_t s_hat) {
  if (s < 1) {
    throw std::invalid_argument("candidate size s must be >= 1");
  }
  if (s >= s_hat) {
    throw std::domain_error("candidate size s=" + std::to_string(s) +
                            " must be below s_hat=" + std::to_string(s_hat) +
                            " (the trailing-count mean has divisor s_hat-s)");
  }
}

// Quantities that do not depend on the candidate size s.
struct TallyStats {
  std::span<const std::uint64_t> counts;
  double k = 0.0;
  double log_k = 0.0;
  double lgamma_k = 0.0;    // log(k!)
  double sum_lgamma = 0.0;  // sum_j log(T_j!)
};

inline TallyStats tally_stats(std::span<const std::uint64_t> counts,
                              std::uint64_t k) {
  TallyStats st;
  st.counts = counts;
  st.k = static_cast<double>(k);
  st.log_k = std::log(st.k);
  st.lgamma_k = std::lgamma(st.k + 1.0);
  for (std::uint64_t t : counts) {
    st.sum_lgamma += std::lgamma(static_cast<double>(t) + 1.0);
  }
  return st;
}

// Head sums over j <= s; grown one candidate at a time so that profile
// evaluation and the standalone functions accumulate in the same order
// and agree bitwise.
struct HeadSums {
  std::size_t s = 0;
  std::uint64_t head_count = 0;  // sum_{j<=s} T_j
  double tlog = 0.0;             // sum_{j<=s} T_j log(T_j/k)
  double log = 0.0;              // sum_{j<=s} log(T_j/k)

  void extend(const TallyStats& st, std::size_t to) {
    while (s < to) {
      const double t = static_cast<double>(st.counts[s]);
      const double lr = std::log(t / st.k);
      head_count += st.counts[s];
      tlog += t * lr;
      log += lr;
      ++s;
    }
  }
};

// rho_hat^s = (1/(s_hat - s)) sum_{j>s} T_j / k, the common trailing
// mean that every criterion shares.
inline double tail_mean_rate(const TallyStats& st, std::size_t s,
                             std::uint64_t tail_count) {
  return static_cast<double>(tail_count) /
         (st.k * static_cast<double>(st.counts.size() - s));
}

inline double bicu_value(const TallyStats& st, std::size_t s,
                         const HeadSums& head, std::uint64_t tail_count) {
  const double s_hat = static_cast<double>(st.counts.size());
  const double sd = static_cast<double>(s);
  const double log_rho = std::log(tail_mean_rate(st, s, tail_count));
  return -2.0 * st.lgamma_k + 2.0 * st.sum_lgamma - 2.0 * head.tlog -
         2.0 * log_rho * static_cast<double>(tail_count) +
         2.0 * sd * st.log_k +
         sd * std::log(s_hat / (kTwoPi * (s_hat - sd)));
}

inline double bicl_value(const TallyStats& st, std::size_t s,
                         const HeadSums& head, std::uint64_t tail_count) {
  const double sd = static_cast<double>(s);
  const double t1 = static_cast<double>(st.counts[0]);
  const double log_rho = std::log(tail_mean_rate(st, s, tail_count));
  return -2.0 * st.lgamma_k + 2.0 * st.sum_lgamma - 2.0 * head.tlog -
         2.0 * log_rho * static_cast<double>(tail_count) + sd * st.log_k +
         sd * std::log(st.k / (kTwoPi * t1));
}

inline double aic_value(const TallyStats& st, std::size_t s,
                        const HeadSums& head, std::uint64_t tail_count) {
  const double log_rho = std::log(tail_mean_rate(st, s, tail_count));
  return -st.lgamma_k + st.sum_lgamma - head.tlog -
         log_rho * static_cast<double>(tail_count) + static_cast<double>(s);
}

inline double qaic_value(const TallyStats& st, std::size_t s,
                         const HeadSums& head, std::uint64_t tail_count) {
  const double s_hat = static_cast<double>(st.counts.size());
  const double sd = static_cast<double>(s);
  const double log_rho = std::log(tail_mean_rate(st, s, tail_count));
  return s_hat * std::log(kTwoPi) + s_hat * st.log_k + head.log +
         (s_hat - sd) * log_rho + s_hat + sd;
}

inline double mseic_value(const TallyStats& st, std::size_t s,
                          std::uint64_t tail_count) {
  // Algebraically (k/rho) sum_{j>s} (T_j/k - rho)^2 + 2s, but evaluated
  // around the trailing mean m = tail/(s_hat-s): integer counts minus a
  // small rational keep the variance sum exact in the clean cases
  // (equal trailing counts give exactly 2s) and cancellation-free for
  // counts up to 10^6.
  const std::size_t s_hat = st.counts.size();
  const double m = static_cast<double>(tail_count) /
                   static_cast<double>(s_hat - s);
  double ss = 0.0;
  for (std::size_t j = s; j < s_hat; ++j) {
    const double dev = static_cast<double>(st.counts[j]) - m;
    ss += dev * dev;
  }
  return ss / m + 2.0 * static_cast<double>(s);
}

template <typename ValueFn>
inline double evaluate_single(std::span<const std::uint64_t> counts,
                              std::uint64_t k, std::size_t s, ValueFn fn) {
  check_ordered_tally(counts, k);
  check_candidate(s, counts.size());
  const TallyStats st = tally_stats(counts, k);
  HeadSums head;
  head.extend(st, s);
  return fn(st, s, head, k - head.head_count);
}

}  // namespace detail

// The common trailing mean rate rho_hat^s.
inline double rho_hat(std::span<const std::uint64_t> counts, std::uint64_t k,
                      std::size_t s) {
  detail::check_ordered_tally(counts, k);
  detail::check_candidate(s, counts.size());
  std::uint64_t head = 0;
  for (std::size_t j = 0; j < s; ++j) head += counts[j];
  return detail::tail_mean_rate(detail::TallyStats{counts,
                                                   static_cast<double>(k)},
                                s, k - head);
}

inline double bic_u(std::span<const std::uint64_t> counts, std::uint64_t k,
                    std::size_t s) {
  return detail::evaluate_single(counts, k, s,
                                 [](const auto& st, std::size_t sv,
                                    const auto& head, std::uint64_t tail) {
                                   return detail::bicu_value(st, sv, head,
                                                             tail);
                                 });
}

inline double bic_l(std::span<const std::uint64_t> counts, std::uint64_t k,
                    std::size_t s) {
  return detail::evaluate_single(counts, k, s,
                                 [](const auto& st, std::size_t sv,
                                    const auto& head, std::uint64_t tail) {
                                   return detail::bicl_value(st, sv, head,
                                                             tail);
                                 });
}

inline double aic(std::span<const std::uint64_t> counts, std::uint64_t k,
                  std::size_t s) {
  return detail::evaluate_single(counts, k, s,
                                 [](const auto& st, std::size_t sv,
                                    const auto& head, std::uint64_t tail) {
                                   return detail::aic_value(st, sv, head,
                                                            tail);
                                 });
}

inline double qaic(std::span<const std::uint64_t> counts, std::uint64_t k,
                   std::size_t s) {
  return detail::evaluate_single(counts, k, s,
                                 [](const auto& st, std::size_t sv,
                                    const auto& head, std::uint64_t tail) {
                                   return detail::qaic_value(st, sv, head,
                                                             tail);
                                 });
}

inline double mseic(std::span<const std::uint64_t> counts, std::uint64_t k,
                    std::size_t s) {
  return detail::evaluate_single(counts, k, s,
                                 [](const auto& st, std::size_t sv,
                                    const auto&, std::uint64_t tail) {
                                   return detail::mseic_value(st, sv, tail);
                                 });
}

inline double bic_u(const DirectionTally& t, std::size_t s) {
  return bic_u(t.ordered, t.k, s);
}
inline double bic_l(const DirectionTally& t, std::size_t s) {
  return bic_l(t.ordered, t.k, s);
}
inline double aic(const DirectionTally& t, std::size_t s) {
  return aic(t.ordered, t.k, s);
}
inline double qaic(const DirectionTally& t, std::size_t s) {
  return qaic(t.ordered, t.k, s);
}
inline double mseic(const DirectionTally& t, std::size_t s) {
  return mseic(t.ordered, t.k, s);
}

// One criterion evaluated over every candidate size s = 1..q_eff.
struct ICProfile {
  Criterion criterion{};
  std::size_t q_eff = 0;
  std::vector<double> values;  // values[s-1] is the criterion at size s
  std::size_t selected = 0;    // argmin; smallest s on ties
};

struct ProfileSet {
  std::size_t q_eff = 0;
  // q_n >= sqrt(s_hat): the candidate range strains the assumption that
  // the number of candidate models grows slower than sqrt(s_hat).
  bool t5_strained = false;
  std::array<ICProfile, 5> profiles;

  const ICProfile& operator[](Criterion c) const {
    return profiles[static_cast<std::size_t>(c)];
  }
};

// Evaluates all five criteria for s = 1..q_eff, q_eff = min(q_n, s_hat-1),
// and records each argmin. Head sums grow incrementally in the same
// order as the standalone functions, so the profile values equal them
// bitwise.
inline ProfileSet evaluate_profiles(std::span<const std::uint64_t> counts,
                                    std::uint64_t k, std::size_t q_n) {
  if (q_n < 1) {
    throw std::invalid_argument("evaluate_profiles: q_n must be >= 1");
  }
  detail::check_ordered_tally(counts, k);

  ProfileSet set;
  set.q_eff = std::min(q_n, counts.size() - 1);
  set.t5_strained =
      static_cast<double>(q_n) >= std::sqrt(static_cast<double>(counts.size()));

  const detail::TallyStats st = detail::tally_stats(counts, k);
  for (std::size_t c = 0; c < 5; ++c) {
    set.profiles[c].criterion = static_cast<Criterion>(c);
    set.profiles[c].q_eff = set.q_eff;
    set.profiles[c].values.resize(set.q_eff);
  }

  detail::HeadSums head;
  for (std::size_t s = 1; s <= set.q_eff; ++s) {
    head.extend(st, s);
    const std::uint64_t tail = k - head.head_count;
    set.profiles[0].values[s - 1] = detail::aic_value(st, s, head, tail);
    set.profiles[1].values[s - 1] = detail::bicu_value(st, s, head, tail);
    set.profiles[2].values[s - 1] = detail::bicl_value(st, s, head, tail);
    set.profiles[3].values[s - 1] = detail::qaic_value(st, s, head, tail);
    set.profiles[4].values[s - 1] = detail::mseic_value(st, s, tail);
  }

  for (auto& profile : set.profiles) {
    std::size_t best = 1;
    for (std::size_t s = 2; s <= set.q_eff; ++s) {
      if (profile.values[s - 1] < profile.values[best - 1]) best = s;
    }
    profile.selected = best;
  }
  return set;
}

inline ProfileSet evaluate_profiles(const DirectionTally& t, std::size_t q_n) {
  return evaluate_profiles(t.ordered, t.k, q_n);
}

}  // namespace exdir
