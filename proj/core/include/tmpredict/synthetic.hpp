#ifndef TMPREDICT_SYNTHETIC_HPP
#define TMPREDICT_SYNTHETIC_HPP

// Seeded synthetic traffic-matrix generator shaped like a backbone dataset:
// N nodes, T slots of `interval_seconds`.
//
// OD volume is a gravity base a_i * b_j modulated by a few shared latent
// factors and perturbed by independent per-OD noise. Each latent factor is a
// sum of AR(1) components whose time constants double from one component to
// the next, which gives the slowly decaying autocorrelation typical of
// long-range-dependent traffic, plus a daily cycle. Each OD sees the factors
// with its own delay of 0..max_delay slots, so some flows lead others.

#include <cstddef>
#include <cstdint>

#include "tmpredict/traffic.hpp"

namespace tmpredict {

struct SyntheticConfig {
  std::size_t nodes = 23;
  std::size_t slots = 309;
  std::int64_t interval_seconds = 900;
  std::int64_t start_timestamp = 1104537600;  // 2005-01-01T00:00:00Z
  std::uint64_t seed = 1;
  std::size_t factors = 2;
  std::size_t ar_components = 6;  // time constants 2, 4, ..., 2^k slots
  double factor_scale = 0.5;
  double daily_amplitude = 0.3;
  std::size_t slots_per_day = 96;
  std::size_t max_delay = 4;
  double noise = 0.1;              // relative per-OD noise
  double gravity_spread = 0.4;     // log-normal sigma of node weights
  double base_volume = 1.0e6;      // bytes per slot for a unit gravity weight
};

TrafficSeries synthesize(const SyntheticConfig& config);

}  // namespace tmpredict

#endif  // TMPREDICT_SYNTHETIC_HPP
