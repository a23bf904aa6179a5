// Copyright 2026 The exdir Authors
// SPDX-License-Identifier: Apache-2.0
//
// Counter-free splittable random numbers for reproducible parallel
// replication. A master seed plus a stream index is hashed into an
// independent SplitMix64 state, so replications can run in any order,
// on any number of threads, and still draw identical variates.

#pragma once

#include <cmath>
#include <cstdint>

namespace exdir {

// Finalizer of the SplitMix64 generator (Steele, Lea, Flood 2014).
// Bijective on 64-bit words with strong avalanche behaviour.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Derives the seed of sub-stream `stream` from `master`. The +1 keeps
// stream 0 distinct from the master state itself; the odd constant is
// the golden-ratio increment used by SplitMix64.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::uint64_t stream) noexcept {
  return mix64(master + 0x9E3779B97F4A7C15ull * (stream + 1));
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

// Variate generator on top of SplitMix64. Not a std-style engine on
// purpose: std::normal_distribution and friends do not promise the same
// stream across standard library versions, and reproducibility here is
// contractual, so the few transforms we need are spelled out.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : engine_(seed) {}

  // Uniform on (0, 1]: 53 random bits, shifted into (0, 1] so that
  // log(uniform()) is always finite.
  double uniform() noexcept {
    return static_cast<double>((engine_.next() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second variate of each pair is
  // cached. |z| is bounded by sqrt(-2 log 2^-53) < 8.6, so downstream
  // tail transforms never overflow.
  double normal() noexcept {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double a = 6.283185307179586476925286766559 * uniform();
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Pareto(1): survival 1/x on [1, inf).
  double pareto1() noexcept { return 1.0 / uniform(); }

  // Exponential with unit mean.
  double exp1() noexcept { return -std::log(uniform()); }

 private:
  SplitMix64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace exdir
