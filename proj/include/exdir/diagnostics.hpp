// Copyright 2026 The exdir Authors
// SPDX-License-Identifier: Apache-2.0
//
// Empirical high-dimensional diagnostics and the closed-form g
// functions whose sign decides weak consistency of the criteria in the
// growing-dimension regime: ĉ = ŝ/k, μ̂ = mean trailing count beyond a
// reference size, q̂ = first trailing count over μ̂.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "exdir/tally.hpp"

namespace exdir {

namespace detail {
inline void check_g_domain(double q, double mu) {
  if (!(q >= 1.0)) {
    throw std::domain_error("g function: q must be >= 1");
  }
  if (!(mu >= 1.0)) {
    throw std::domain_error("g function: mu must be >= 1");
  }
}
}  // namespace detail

// g_AIC(q, mu) = q(1 - log q) - 1 + 1/mu. Zero at q = e when mu = 1.
inline double g_aic(double q, double mu) {
  detail::check_g_domain(q, mu);
  return q * (1.0 - std::log(q)) - 1.0 + 1.0 / mu;
}

// g_QAIC(q) = log(q) - q + 2. Unique root above 1 near 3.146.
inline double g_qaic(double q) {
  detail::check_g_domain(q, 1.0);
  return std::log(q) - q + 2.0;
}

// g_MSEIC(q, mu) = 2 - (q-1)^2 mu. Zero at q = 1 + sqrt(2) when mu = 1.
inline double g_mseic(double q, double mu) {
  detail::check_g_domain(q, mu);
  return 2.0 - (q - 1.0) * (q - 1.0) * mu;
}

struct ConsistencyDiagnostics {
  std::size_t s_ref = 0;
  double c_hat = 0.0;   // s_hat / k
  double mu_hat = 0.0;  // mean count beyond s_ref
  double q_hat = 0.0;   // T_{s_ref+1} / mu_hat, as observed (may be < 1)
  bool q_clamped = false;  // q_hat < 1: g functions saw q = 1 instead
  double g_aic = 0.0;
  double g_qaic = 0.0;
  double g_mseic = 0.0;
};

// Diagnostics of the tally beyond a reference model size s_ref
// (1 <= s_ref < s_hat). The g functions are defined on q >= 1, so a
// finite-sample q_hat below 1 is evaluated at 1 with the raw value
// reported alongside.
inline ConsistencyDiagnostics diagnostics(const DirectionTally& tally,
                                          std::size_t s_ref) {
  const std::size_t s_hat = tally.ordered.size();
  if (s_ref < 1 || s_ref >= s_hat) {
    throw std::invalid_argument("diagnostics: s_ref=" + std::to_string(s_ref) +
                                " outside 1..s_hat-1 with s_hat=" +
                                std::to_string(s_hat));
  }

  ConsistencyDiagnostics out;
  out.s_ref = s_ref;
  out.c_hat = static_cast<double>(s_hat) / static_cast<double>(tally.k);

  std::uint64_t tail = 0;
  for (std::size_t j = s_ref; j < s_hat; ++j) tail += tally.ordered[j];
  out.mu_hat = static_cast<double>(tail) /
               static_cast<double>(s_hat - s_ref);
  out.q_hat = static_cast<double>(tally.ordered[s_ref]) / out.mu_hat;

  // mu_hat is a mean of integer counts >= 1, so it is always inside the
  // g domain; only q_hat can fall below 1 in finite samples.
  const double q_eval = std::max(out.q_hat, 1.0);
  out.q_clamped = out.q_hat < 1.0;
  out.g_aic = exdir::g_aic(q_eval, out.mu_hat);
  out.g_qaic = exdir::g_qaic(q_eval);
  out.g_mseic = exdir::g_mseic(q_eval, out.mu_hat);
  return out;
}

}  // namespace exdir
