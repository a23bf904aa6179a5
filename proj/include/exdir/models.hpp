// Copyright 2026 The exdir Authors
// SPDX-License-Identifier: Apache-2.0
//
// Seeded generators for the three data models used in the experiments:
//
//   AsympIndep - asymptotically tail-independent coordinates: a random
//     correlation matrix from a uniform Gram matrix drives a Gaussian
//     copula whose first s_star marginals are pushed to exact Pareto(1)
//     tails; the remaining coordinates are half-normal noise.
//   AsympDep   - clustered extremes: independent Pareto(1) seeds appear
//     alone, in adjacent pairs (P, P+E), or in adjacent triples
//     (P, P+E, P+E'), with Exp(1) noise filling the rest.
//   AxisOracle - a discrete spectral measure on the axes: X = R * e_J
//     with R ~ Pareto(1) and axis J drawn by fixed weights. Its true
//     direction distribution is known exactly, which makes it the
//     ground-truth model for consistency tests.
//
// All generators are pure functions of (spec, n, seed).

#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "exdir/rng.hpp"
#include "exdir/tally.hpp"

namespace exdir {

struct AsympIndep {
  std::size_t s_star = 0;
  std::size_t d = 0;
};

struct AsympDep {
  std::size_t s1 = 0;
  std::size_t s2 = 0;
  std::size_t s3 = 0;
  std::size_t d = 0;
};

struct AxisOracle {
  std::vector<double> weights;  // over axes 1..weights.size()
  std::size_t d = 0;
};

using ModelSpec = std::variant<AsympIndep, AsympDep, AxisOracle>;

inline std::string_view model_name(const ModelSpec& spec) noexcept {
  switch (spec.index()) {
    case 0: return "asymp_indep";
    case 1: return "asymp_dep";
    default: return "axis_oracle";
  }
}

inline std::size_t model_dim(const ModelSpec& spec) noexcept {
  if (const auto* a = std::get_if<AsympIndep>(&spec)) return a->d;
  if (const auto* a = std::get_if<AsympDep>(&spec)) return a->d;
  return std::get<AxisOracle>(spec).d;
}

inline void validate(const ModelSpec& spec) {
  if (const auto* a = std::get_if<AsympIndep>(&spec)) {
    if (a->s_star < 1 || a->s_star > a->d) {
      throw std::invalid_argument("asymp_indep: need 1 <= s_star <= d, got "
                                  "s_star=" + std::to_string(a->s_star) +
                                  ", d=" + std::to_string(a->d));
    }
    return;
  }
  if (const auto* a = std::get_if<AsympDep>(&spec)) {
    const std::size_t occupied = a->s1 + 2 * a->s2 + 3 * a->s3;
    if (a->s1 + a->s2 + a->s3 < 1) {
      throw std::invalid_argument(
          "asymp_dep: at least one cluster (s1+s2+s3 >= 1) required");
    }
    if (a->d < occupied) {
      throw std::invalid_argument(
          "asymp_dep: need d >= s1 + 2*s2 + 3*s3 = " +
          std::to_string(occupied) + ", got d=" + std::to_string(a->d));
    }
    return;
  }
  const auto& a = std::get<AxisOracle>(spec);
  if (a.weights.empty() || a.weights.size() > a.d) {
    throw std::invalid_argument(
        "axis_oracle: need 1 <= #weights <= d");
  }
  double sum = 0.0;
  bool any_positive = false;
  for (double w : a.weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument(
          "axis_oracle: weights must be finite and >= 0");
    }
    any_positive = any_positive || w > 0.0;
    sum += w;
  }
  if (!any_positive || std::fabs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("axis_oracle: weights must sum to 1");
  }
}

namespace detail {

// In-place lower Cholesky factor of a symmetric positive definite
// matrix in row-major storage; the upper triangle is zeroed. Returns
// false if a pivot drops to numerical zero (matrix not PD).
inline bool cholesky_lower(std::vector<double>& a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (std::size_t r = 0; r < j; ++r) diag -= a[j * n + r] * a[j * n + r];
    if (!(diag > 1e-12)) return false;
    const double root = std::sqrt(diag);
    a[j * n + j] = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a[i * n + j];
      for (std::size_t r = 0; r < j; ++r) v -= a[i * n + r] * a[j * n + r];
      a[i * n + j] = v / root;
    }
    for (std::size_t i = 0; i < j; ++i) a[i * n + j] = 0.0;
  }
  return true;
}

struct GaussianDependence {
  std::vector<double> sigma;  // s x s correlation matrix, row-major
  std::vector<double> chol;   // its lower Cholesky factor
  std::size_t attempts = 0;   // H draws consumed (1 = first try worked)
};

// Builds the correlation matrix Sigma = D^{-1/2} (H^T H) D^{-1/2} with
// H an s x s matrix of i.i.d. centered uniforms and D = diag(H^T H),
// so the diagonal is exactly 1. Centering keeps the off-diagonal
// correlations near zero (order 1/sqrt(s)); uncentered uniforms would
// push them all toward 3/4, and that common factor would lift whole
// rows over the tail threshold together and drown the per-axis signal
// the estimators are meant to recover. On factorization failure a
// fresh H is drawn from a derived sub-seed, at most 10 times.
inline GaussianDependence build_dependence(std::size_t s,
                                           std::uint64_t seed) {
  GaussianDependence dep;
  std::vector<double> h(s * s);
  for (std::size_t attempt = 0; attempt < 10; ++attempt) {
    Rng rng(derive_seed(seed, attempt));
    for (double& v : h) v = 2.0 * rng.uniform() - 1.0;

    dep.sigma.assign(s * s, 0.0);
    std::vector<double> col_norm(s, 0.0);
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = i; j < s; ++j) {
        double g = 0.0;
        for (std::size_t r = 0; r < s; ++r) g += h[r * s + i] * h[r * s + j];
        dep.sigma[i * s + j] = g;
        if (i == j) col_norm[i] = std::sqrt(g);
      }
    }
    for (std::size_t i = 0; i < s; ++i) {
      dep.sigma[i * s + i] = 1.0;
      for (std::size_t j = i + 1; j < s; ++j) {
        const double r = dep.sigma[i * s + j] / (col_norm[i] * col_norm[j]);
        dep.sigma[i * s + j] = r;
        dep.sigma[j * s + i] = r;
      }
    }

    dep.chol = dep.sigma;
    if (cholesky_lower(dep.chol, s)) {
      dep.attempts = attempt + 1;
      return dep;
    }
  }
  throw std::runtime_error(
      "asymp_indep: correlation matrix not positive definite after 10 "
      "attempts");
}

inline constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

// Upper-tail normal probability. erfc avoids the cancellation of
// 1 - Phi(y) for large y; relative accuracy is ~1e-14 over the range
// |y| < 8.6 that the bounded normal sampler can produce.
inline double normal_upper_tail(double y) noexcept {
  return 0.5 * std::erfc(y * kInvSqrt2);
}

}  // namespace detail

// The correlation matrix a given seed produces, including any
// regeneration attempts; exposed so tests can compare the transformed
// sample against the dependence actually used.
inline std::vector<double> asymp_indep_sigma(const AsympIndep& spec,
                                             std::uint64_t seed) {
  validate(ModelSpec{spec});
  return detail::build_dependence(spec.s_star, derive_seed(seed, 0)).sigma;
}

namespace detail {

inline DataMatrix gen_asymp_indep(const AsympIndep& spec, std::size_t n,
                                  std::uint64_t seed) {
  const std::size_t s = spec.s_star;
  const auto dep = build_dependence(s, derive_seed(seed, 0));
  Rng rng(derive_seed(seed, 1));

  DataMatrix x;
  x.rows = n;
  x.cols = spec.d;
  x.values.resize(n * spec.d);

  std::vector<double> z(s);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = x.values.data() + i * spec.d;
    for (std::size_t j = 0; j < s; ++j) z[j] = rng.normal();
    for (std::size_t j = 0; j < s; ++j) {
      const double* l = dep.chol.data() + j * s;
      double y = 0.0;
      for (std::size_t r = 0; r <= j; ++r) y += l[r] * z[r];
      // Phi_bar(Y) is uniform for a standard normal marginal, so
      // 1/Phi_bar(Y) is exactly Pareto(1).
      row[j] = 1.0 / normal_upper_tail(y);
    }
    for (std::size_t j = s; j < spec.d; ++j) {
      row[j] = std::fabs(rng.normal());
    }
  }
  return x;
}

inline DataMatrix gen_asymp_dep(const AsympDep& spec, std::size_t n,
                                std::uint64_t seed) {
  Rng rng(derive_seed(seed, 1));

  DataMatrix x;
  x.rows = n;
  x.cols = spec.d;
  x.values.resize(n * spec.d);

  for (std::size_t i = 0; i < n; ++i) {
    double* row = x.values.data() + i * spec.d;
    std::size_t j = 0;
    for (std::size_t c = 0; c < spec.s1; ++c) {
      row[j++] = rng.pareto1();
    }
    for (std::size_t c = 0; c < spec.s2; ++c) {
      const double p = rng.pareto1();
      row[j++] = p;
      row[j++] = p + rng.exp1();
    }
    for (std::size_t c = 0; c < spec.s3; ++c) {
      const double p = rng.pareto1();
      row[j++] = p;
      row[j++] = p + rng.exp1();
      row[j++] = p + rng.exp1();
    }
    while (j < spec.d) {
      row[j++] = rng.exp1();
    }
  }
  return x;
}

inline DataMatrix gen_axis_oracle(const AxisOracle& spec, std::size_t n,
                                  std::uint64_t seed) {
  Rng rng(derive_seed(seed, 1));

  DataMatrix x;
  x.rows = n;
  x.cols = spec.d;
  x.values.assign(n * spec.d, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    const double r = rng.pareto1();
    const double u = rng.uniform();
    // Inverse-CDF draw over the positive weights. u can exceed the
    // final cumulative weight only by the 1e-9 validation slack, in
    // which case the last positive axis absorbs it.
    double cum = 0.0;
    std::size_t axis = 0;
    for (std::size_t j = 0; j < spec.weights.size(); ++j) {
      if (spec.weights[j] <= 0.0) continue;
      cum += spec.weights[j];
      axis = j;
      if (u <= cum) break;
    }
    x.values[i * spec.d + axis] = r;
  }
  return x;
}

}  // namespace detail

// Samples n i.i.d. rows from the model. Deterministic given seed.
inline DataMatrix generate(const ModelSpec& spec, std::size_t n,
                           std::uint64_t seed) {
  validate(spec);
  if (n < 2) {
    throw std::invalid_argument("generate: need n >= 2 rows");
  }
  return std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AsympIndep>) {
          return detail::gen_asymp_indep(m, n, seed);
        } else if constexpr (std::is_same_v<T, AsympDep>) {
          return detail::gen_asymp_dep(m, n, seed);
        } else {
          return detail::gen_axis_oracle(m, n, seed);
        }
      },
      spec);
}

// The limiting direction distribution of a model.
struct TrueDirections {
  std::vector<std::pair<DirectionKey, double>> entries;
};

// AsympIndep: uniform mass 1/s_star on the first s_star axes.
// AsympDep: each cluster carries mass proportional to its size
//   (P(m * Pareto(1) > t) ~ m/t, so a size-m cluster is m times as
//   likely to be extreme).
// AxisOracle: its own positive weights.
inline TrueDirections true_direction_weights(const ModelSpec& spec) {
  validate(spec);
  TrueDirections out;
  if (const auto* a = std::get_if<AsympIndep>(&spec)) {
    const double w = 1.0 / static_cast<double>(a->s_star);
    for (std::size_t j = 1; j <= a->s_star; ++j) {
      out.entries.push_back(
          {DirectionKey{{static_cast<std::uint32_t>(j)}}, w});
    }
    return out;
  }
  if (const auto* a = std::get_if<AsympDep>(&spec)) {
    const double total = static_cast<double>(a->s1 + 2 * a->s2 + 3 * a->s3);
    std::uint32_t j = 1;
    for (std::size_t c = 0; c < a->s1; ++c, ++j) {
      out.entries.push_back({DirectionKey{{j}}, 1.0 / total});
    }
    for (std::size_t c = 0; c < a->s2; ++c, j += 2) {
      out.entries.push_back({DirectionKey{{j, j + 1}}, 2.0 / total});
    }
    for (std::size_t c = 0; c < a->s3; ++c, j += 3) {
      out.entries.push_back({DirectionKey{{j, j + 1, j + 2}}, 3.0 / total});
    }
    return out;
  }
  const auto& a = std::get<AxisOracle>(spec);
  const double total = std::accumulate(a.weights.begin(), a.weights.end(), 0.0);
  for (std::size_t j = 0; j < a.weights.size(); ++j) {
    if (a.weights[j] > 0.0) {
      out.entries.push_back({DirectionKey{{static_cast<std::uint32_t>(j + 1)}},
                             a.weights[j] / total});
    }
  }
  return out;
}

}  // namespace exdir
