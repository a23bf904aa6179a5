// Copyright 2026 The exdir Authors
// SPDX-License-Identifier: Apache-2.0
//
// From a data matrix to the ordered direction tally: pick the k rows
// with the largest L1 norms, rescale them by the (k+1)-th largest norm,
// project each onto the simplex, and count how often every support set
// (direction) occurs.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "exdir/simplex.hpp"

namespace exdir {

// Row-major matrix of nonnegative observations, one observation per row.
struct DataMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const {
    return values[i * cols + j];
  }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols, cols};
  }
};

// Checks shape consistency and that every entry is finite and >= 0.
// Coordinates in the error message are 1-based.
inline void validate_entries(const DataMatrix& x) {
  if (x.cols < 1 || x.rows < 1) {
    throw std::invalid_argument("data matrix: empty");
  }
  if (x.values.size() != x.rows * x.cols) {
    throw std::invalid_argument("data matrix: storage size does not match " +
                                std::to_string(x.rows) + "x" +
                                std::to_string(x.cols));
  }
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j) {
      const double v = x.at(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument(
            "data matrix: entry at row " + std::to_string(i + 1) +
            ", column " + std::to_string(j + 1) + " is negative or not finite");
      }
    }
  }
}

inline std::vector<double> l1_norms(const DataMatrix& x) {
  std::vector<double> norms(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto r = x.row(i);
    norms[i] = std::accumulate(r.begin(), r.end(), 0.0);
  }
  return norms;
}

// The k most extreme rows and the scaling threshold.
struct ExtremeSelection {
  std::vector<std::size_t> rows;  // 0-based row indices, largest norm first
  double threshold = 0.0;         // the (k+1)-th largest norm
};

// Ranks rows by L1 norm (ties broken by smaller row index) and returns
// the top k together with t = the (k+1)-th largest norm. Requires
// 1 <= k <= n-1 and t > 0.
inline ExtremeSelection select_extremes(const DataMatrix& x, std::size_t k) {
  if (k < 1 || k + 1 > x.rows) {
    throw std::invalid_argument("select_extremes: k=" + std::to_string(k) +
                                " outside 1..n-1 with n=" +
                                std::to_string(x.rows));
  }
  const auto norms = l1_norms(x);
  std::vector<std::size_t> order(x.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (norms[a] != norms[b]) return norms[a] > norms[b];
    return a < b;
  });

  ExtremeSelection sel;
  sel.threshold = norms[order[k]];
  if (!(sel.threshold > 0.0)) {
    throw std::invalid_argument(
        "select_extremes: scaling threshold is zero (more than n-k rows have "
        "zero norm)");
  }
  sel.rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  return sel;
}

// Counts of extreme observations per direction, plus the descending
// count vector (T_1, ..., T_s_hat).
struct DirectionTally {
  std::size_t k = 0;
  double threshold = 0.0;
  std::map<DirectionKey, std::uint64_t> counts;
  std::vector<std::uint64_t> ordered;

  std::size_t s_hat() const noexcept { return counts.size(); }
};

// Projects each selected extreme row x/t onto the simplex and tallies
// its support. Deterministic given (x, k).
inline DirectionTally tally_directions(const DataMatrix& x, std::size_t k) {
  validate_entries(x);
  const auto sel = select_extremes(x, k);

  DirectionTally tally;
  tally.k = k;
  tally.threshold = sel.threshold;

  std::vector<double> scaled(x.cols);
  std::vector<double> scratch;
  for (const std::size_t ri : sel.rows) {
    const auto r = x.row(ri);
    // Selected norms are >= t > 0, so a zero row cannot be selected;
    // hitting one means the selection logic broke.
    if (!(std::accumulate(r.begin(), r.end(), 0.0) > 0.0)) {
      throw std::runtime_error("tally_directions: selected row " +
                               std::to_string(ri + 1) + " has zero norm");
    }
    for (std::size_t j = 0; j < x.cols; ++j) {
      scaled[j] = r[j] / sel.threshold;
    }
    ++tally.counts[support_after_projection(scaled, scratch)];
  }

  tally.ordered.reserve(tally.counts.size());
  for (const auto& [key, count] : tally.counts) {
    tally.ordered.push_back(count);
  }
  std::sort(tally.ordered.begin(), tally.ordered.end(),
            std::greater<>());
  return tally;
}

// All directions ranked by descending count; equal counts are listed in
// ascending (lexicographic) key order.
inline std::vector<std::pair<DirectionKey, std::uint64_t>> ranked_directions(
    const DirectionTally& tally) {
  std::vector<std::pair<DirectionKey, std::uint64_t>> out(
      tally.counts.begin(), tally.counts.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  return out;
}

// The top-s counts renormalized into a probability vector:
// (T_1, ..., T_s) / (T_1 + ... + T_s).
inline std::vector<double> normalized_conditional(const DirectionTally& tally,
                                                  std::size_t s) {
  if (s < 1 || s > tally.ordered.size()) {
    throw std::invalid_argument("normalized_conditional: s=" +
                                std::to_string(s) + " outside 1..s_hat=" +
                                std::to_string(tally.ordered.size()));
  }
  std::uint64_t total = 0;
  for (std::size_t j = 0; j < s; ++j) total += tally.ordered[j];
  std::vector<double> p(s);
  for (std::size_t j = 0; j < s; ++j) {
    p[j] = static_cast<double>(tally.ordered[j]) / static_cast<double>(total);
  }
  return p;
}

}  // namespace exdir
