// Copyright 2026 The exdir Authors
// SPDX-License-Identifier: Apache-2.0
//
// Euclidean projection onto the unit L1 simplex, the operation that
// turns a rescaled extreme observation into a sparse direction: every
// coordinate at or below the soft threshold becomes an exact zero, so
// the support of the result is a well-defined set of coordinates.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace exdir {

// A nonempty, strictly increasing set of 1-based coordinate indices.
// Identifies which coordinates of an extreme observation are jointly
// large. Lexicographic ordering (the default vector ordering) is the
// tie-break order used everywhere directions are ranked.
struct DirectionKey {
  std::vector<std::uint32_t> indices;

  friend auto operator<=>(const DirectionKey&, const DirectionKey&) = default;
};

inline void validate_direction_key(const DirectionKey& key, std::size_t d) {
  if (key.indices.empty()) {
    throw std::invalid_argument("direction key: empty index set");
  }
  std::uint32_t prev = 0;
  for (std::uint32_t i : key.indices) {
    if (i < 1 || i > d) {
      throw std::invalid_argument("direction key: index " + std::to_string(i) +
                                  " outside 1.." + std::to_string(d));
    }
    if (i <= prev) {
      throw std::invalid_argument(
          "direction key: indices not strictly increasing");
    }
    prev = i;
  }
}

// A point on the unit simplex: nonnegative entries summing to 1 within
// 1e-12. Construction validates both properties.
class SimplexPoint {
 public:
  explicit SimplexPoint(std::vector<double> w) : w_(std::move(w)) {
    if (w_.empty()) {
      throw std::invalid_argument("simplex point: empty vector");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) {
      const double x = w_[i];
      if (!std::isfinite(x) || x < 0.0) {
        throw std::invalid_argument("simplex point: coordinate " +
                                    std::to_string(i + 1) +
                                    " is negative or not finite");
      }
      sum += x;
    }
    if (std::fabs(sum - 1.0) > 1e-12) {
      throw std::invalid_argument("simplex point: coordinates sum to " +
                                  std::to_string(sum) + ", not 1");
    }
  }

  const std::vector<double>& coords() const noexcept { return w_; }
  std::size_t dim() const noexcept { return w_.size(); }

 private:
  std::vector<double> w_;
};

// Strictly positive coordinates of a simplex point, as 1-based indices.
// Never empty: the coordinates sum to 1.
inline DirectionKey support(const SimplexPoint& w) {
  DirectionKey key;
  for (std::size_t i = 0; i < w.dim(); ++i) {
    if (w.coords()[i] > 0.0) {
      key.indices.push_back(static_cast<std::uint32_t>(i + 1));
    }
  }
  return key;
}

namespace detail {

// Compensated (Neumaier) running sum. Used for every cumulative sum in
// the projection so that the same vector always folds to the same,
// nearly correctly rounded total regardless of magnitude imbalances;
// the idempotence of the projector rests on these folds being stable.
struct NeumaierSum {
  double s = 0.0;
  double c = 0.0;

  void add(double x) noexcept {
    const double t = s + x;
    if (std::fabs(s) >= std::fabs(x)) {
      c += (s - t) + x;
    } else {
      c += (x - t) + s;
    }
    s = t;
  }

  double value() const noexcept { return s + c; }
};

struct SoftThreshold {
  double theta = 0.0;
  // Set when the running-sum rule found no qualifying index, which can
  // only happen for inputs around 2^53 where (cum - 1) rounds back to
  // cum. The projection then degenerates to splitting mass over the
  // maximal entries.
  bool max_fallback = false;
};

// Soft threshold of the projection for a descending-sorted input:
// rho = max{ j : u_j - (sum_{i<=j} u_i - 1)/j > 0 },
// theta = (sum_{i<=rho} u_i - 1)/rho.
// The comparison is strict, so coordinates exactly at the threshold are
// clipped to zero.
inline SoftThreshold soft_threshold_desc(std::span<const double> u) noexcept {
  SoftThreshold st;
  bool found = false;
  NeumaierSum cum;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum.add(u[j]);
    const double t = (cum.value() - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) {
      st.theta = t;
      found = true;
    }
  }
  st.max_fallback = !found;
  return st;
}

inline void check_projection_input(std::span<const double> v) {
  if (v.empty()) {
    throw std::invalid_argument("project_simplex: empty input");
  }
  bool any_positive = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || v[i] < 0.0) {
      throw std::invalid_argument("project_simplex: coordinate " +
                                  std::to_string(i + 1) +
                                  " is negative or not finite");
    }
    any_positive = any_positive || v[i] > 0.0;
  }
  if (!any_positive) {
    throw std::invalid_argument(
        "project_simplex: zero vector (scaled extremes always have positive "
        "norm; a zero row here indicates an upstream bug)");
  }
}

// Adjusts the smallest support coefficients so that the compensated
// descending-order sum of the support folds to exactly 1.0. A second
// projection of such a vector computes a threshold of exactly zero and
// returns its input unchanged, which makes the projector bitwise
// idempotent.
//
// Only the last addends of the summation chain are touched, so every
// earlier partial sum keeps its rounding. A unique smallest coefficient
// is replaced by the compensated remainder 1 - prefix, which lands the
// fold on 1.0 directly. A tied group of smallest coefficients is moved
// together to a common value found by a short search (equal inputs stay
// equal); if the search misses, the group is split, conceding a one-ulp
// tie break to keep the sum exact. Adjustments are a few ulps of 1, far
// below the projection tolerance. Guards keep new values positive
// (support preserved) and no larger than the next coefficient up
// (descending order preserved); if nothing passes the guards the sum is
// left within a few ulps of 1, well inside the 1e-12 feasibility
// tolerance.
inline void normalize_support_sum(std::vector<double>& w,
                                  std::vector<double>& scratch) {
  scratch.clear();
  for (double x : w) {
    if (x > 0.0) scratch.push_back(x);
  }
  std::sort(scratch.begin(), scratch.end(), std::greater<>());
  const std::size_t sz = scratch.size();

  {
    NeumaierSum full;
    for (double x : scratch) full.add(x);
    if (full.value() == 1.0) return;
  }

  const double w_min = scratch[sz - 1];
  std::size_t m = 1;
  while (m < sz && scratch[sz - 1 - m] == w_min) ++m;
  const double upper = m < sz ? scratch[sz - 1 - m]
                              : std::numeric_limits<double>::infinity();

  NeumaierSum prefix;
  for (std::size_t i = 0; i + m < sz; ++i) prefix.add(scratch[i]);
  // Compensated remainder: (1 - s) is exact by Sterbenz's lemma (s is
  // in [1/2, 2], or 0 for an all-tied support), and c folds in with one
  // final rounding.
  const double remainder = (1.0 - prefix.s) - prefix.c;

  const auto folds_to_one = [&prefix](double y, std::size_t count,
                                      double last) {
    NeumaierSum total = prefix;
    for (std::size_t r = 0; r < count; ++r) total.add(y);
    if (last > 0.0) total.add(last);
    return total.value() == 1.0;
  };

  if (m == 1) {
    if (remainder > 0.0 && remainder <= upper &&
        folds_to_one(remainder, 1, 0.0)) {
      for (double& e : w) {
        if (e == w_min) e = remainder;
      }
    }
    return;
  }

  // Tied smallest group: walk candidate common values outward from the
  // exact share until the fold lands on 1.0.
  const double share = remainder / static_cast<double>(m);
  double up = share;
  double down = share;
  for (int iter = 0; iter < 17; ++iter) {
    double y = share;
    if (iter > 0 && iter % 2 == 1) {
      up = std::nextafter(up, std::numeric_limits<double>::infinity());
      y = up;
    } else if (iter > 0) {
      down = std::nextafter(down, 0.0);
      y = down;
    }
    if (!(y > 0.0) || y > upper) continue;
    if (folds_to_one(y, m, 0.0)) {
      for (double& e : w) {
        if (e == w_min) e = y;
      }
      return;
    }
  }

  // No common value lands exactly; split the group to keep the sum
  // exact at the price of one member sitting an ulp apart.
  if (share > 0.0 && share <= upper) {
    NeumaierSum head = prefix;
    for (std::size_t r = 0; r + 1 < m; ++r) head.add(share);
    const double last = (1.0 - head.s) - head.c;
    if (last > 0.0 && last <= share && folds_to_one(share, m - 1, last)) {
      bool first = true;
      for (double& e : w) {
        if (e == w_min) {
          e = first ? last : share;
          first = false;
        }
      }
    }
  }
}

}  // namespace detail

// Euclidean projection of a nonnegative vector onto the unit simplex
// {w >= 0, sum w = 1}, by the sort-and-threshold rule. Entries at or
// below the threshold come out as exact zeros. Rejects empty input,
// negative/NaN/infinite entries, and the zero vector.
inline SimplexPoint project_simplex(std::span<const double> v) {
  detail::check_projection_input(v);

  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  const auto st = detail::soft_threshold_desc(u);

  std::vector<double> w(v.size(), 0.0);
  if (st.max_fallback) {
    const double m = u.front();
    std::size_t ties = 0;
    for (double x : u) ties += (x == m) ? 1 : 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == m) w[i] = 1.0 / static_cast<double>(ties);
    }
  } else {
    for (std::size_t i = 0; i < v.size(); ++i) {
      w[i] = std::max(v[i] - st.theta, 0.0);
    }
  }
  detail::normalize_support_sum(w, u);
  return SimplexPoint(std::move(w));
}

inline SimplexPoint project_simplex(const std::vector<double>& v) {
  return project_simplex(std::span<const double>(v));
}

// Support of the projection without materializing the projected point:
// the set {i : v_i > theta}, identical to support(project_simplex(v)).
// `scratch` avoids an allocation per call in the tally loop.
inline DirectionKey support_after_projection(std::span<const double> v,
                                             std::vector<double>& scratch) {
  detail::check_projection_input(v);

  scratch.assign(v.begin(), v.end());
  std::sort(scratch.begin(), scratch.end(), std::greater<>());
  const auto st = detail::soft_threshold_desc(scratch);

  DirectionKey key;
  if (st.max_fallback) {
    const double m = scratch.front();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == m) key.indices.push_back(static_cast<std::uint32_t>(i + 1));
    }
  } else {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] > st.theta) {
        key.indices.push_back(static_cast<std::uint32_t>(i + 1));
      }
    }
  }
  return key;
}

}  // namespace exdir
