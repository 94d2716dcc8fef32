#include "tmpredict/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "tmpredict/error.hpp"

namespace tmpredict {

TrafficSeries synthesize(const SyntheticConfig& config) {
  if (config.nodes == 0 || config.slots == 0 || config.interval_seconds <= 0 ||
      config.factors == 0 || config.ar_components == 0 || config.slots_per_day == 0) {
    throw Error(ErrorCode::InvalidConfig, "synthetic dataset dimensions must be positive");
  }
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::size_t n = config.nodes;
  const std::size_t n2 = n * n;
  const std::size_t burn_in = std::size_t{1} << config.ar_components;
  const std::size_t span = config.slots + config.max_delay;

  // Gravity weights, log-normal so a handful of ODs dominate the volume.
  std::vector<double> out_w(n), in_w(n);
  for (auto& v : out_w) v = std::exp(config.gravity_spread * normal(rng));
  for (auto& v : in_w) v = std::exp(config.gravity_spread * normal(rng));

  // Loadings of each OD on each factor, and a per-OD daily phase shift.
  std::vector<double> loading(n2 * config.factors);
  for (auto& v : loading) v = normal(rng) / std::sqrt(static_cast<double>(config.factors));
  std::vector<double> phase(n2);
  for (auto& v : phase) v = 0.5 * (unit(rng) - 0.5);
  std::uniform_int_distribution<std::size_t> pick_delay(0, config.max_delay);
  std::vector<std::size_t> delay(n2);
  for (auto& v : delay) v = pick_delay(rng);

  // Latent factors: equal-variance AR(1) components with phi = 1 - 2^-k.
  std::vector<std::vector<double>> factor(config.factors, std::vector<double>(span));
  for (std::size_t f = 0; f < config.factors; ++f) {
    std::vector<double> state(config.ar_components, 0.0);
    for (std::size_t t = 0; t < burn_in + span; ++t) {
      double sum = 0.0;
      for (std::size_t k = 0; k < config.ar_components; ++k) {
        const double phi = 1.0 - std::ldexp(1.0, -static_cast<int>(k + 1));
        state[k] = phi * state[k] + std::sqrt(1.0 - phi * phi) * normal(rng);
        sum += state[k];
      }
      if (t >= burn_in) {
        factor[f][t - burn_in] = sum / std::sqrt(static_cast<double>(config.ar_components));
      }
    }
  }

  std::vector<TrafficMatrix> matrices;
  matrices.reserve(config.slots);
  const double day = static_cast<double>(config.slots_per_day);
  for (std::size_t t = 0; t < config.slots; ++t) {
    std::vector<double> entries(n2);
    for (std::size_t od = 0; od < n2; ++od) {
      const std::size_t i = od / n;
      const std::size_t j = od % n;
      double latent = 0.0;
      // factor index t + max_delay is slot t; a delayed OD reads further back.
      const std::size_t at = t + config.max_delay - delay[od];
      for (std::size_t f = 0; f < config.factors; ++f) {
        latent += loading[od * config.factors + f] * factor[f][at];
      }
      const double cycle =
          std::sin(2.0 * std::numbers::pi * (static_cast<double>(t) / day + phase[od]));
      const double level = std::exp(config.factor_scale * latent + config.daily_amplitude * cycle);
      const double noisy = level * (1.0 + config.noise * normal(rng));
      entries[od] = std::max(0.0, config.base_volume * out_w[i] * in_w[j] * noisy);
    }
    const auto ts = config.start_timestamp + static_cast<std::int64_t>(t) * config.interval_seconds;
    matrices.emplace_back(n, std::move(entries), ts);
  }
  return TrafficSeries(std::move(matrices), config.interval_seconds, "bytes");
}

}  // namespace tmpredict
