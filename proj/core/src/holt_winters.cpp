#include <cmath>
#include <limits>

#include "tmpredict/error.hpp"
#include "tmpredict/linear.hpp"

namespace tmpredict {

HwRun hw_run(double alpha, double beta, std::span<const double> series) {
  if (series.size() < 3) {
    throw Error(ErrorCode::TooShort, "Holt-Winters needs at least 3 points, got " +
                                         std::to_string(series.size()));
  }
  HwRun run;
  run.model.alpha = alpha;
  run.model.beta = beta;
  double level = series[1];
  double slope = series[1] - series[0];
  double sse = 0.0;
  for (std::size_t i = 2; i < series.size(); ++i) {
    const double err = series[i] - (level + slope);
    sse += err * err;
    const double next_level = alpha * series[i] + (1.0 - alpha) * (level + slope);
    slope = beta * (next_level - level) + (1.0 - beta) * slope;
    level = next_level;
  }
  run.model.level = level;
  run.model.slope = slope;
  run.sse = sse;
  return run;
}

HwModel hw_fit(std::span<const double> series, double grid_step) {
  if (!(grid_step > 0.0) || grid_step >= 0.5) {
    throw Error(ErrorCode::InvalidConfig, "hw grid step must lie in (0, 0.5)");
  }
  const auto cells = static_cast<long>(std::lround(1.0 / grid_step));
  HwRun best;
  best.sse = std::numeric_limits<double>::infinity();
  for (long a = 1; a < cells; ++a) {
    const double alpha = static_cast<double>(a) * grid_step;
    for (long b = 1; b < cells; ++b) {
      const double beta = static_cast<double>(b) * grid_step;
      HwRun run = hw_run(alpha, beta, series);
      if (run.sse < best.sse) best = run;
    }
  }
  if (!std::isfinite(best.sse)) {
    throw Error(ErrorCode::NonFiniteActivation, "Holt-Winters SSE is not finite");
  }
  return best.model;
}

std::vector<double> hw_forecast(const HwModel& model, std::size_t horizon) {
  std::vector<double> out(horizon);
  for (std::size_t h = 1; h <= horizon; ++h) {
    out[h - 1] = model.level + model.slope * static_cast<double>(h);
  }
  return out;
}

HwModel hw_update(const HwModel& model, double observation) {
  HwModel next = model;
  next.level = model.alpha * observation + (1.0 - model.alpha) * (model.level + model.slope);
  next.slope = model.beta * (next.level - model.level) + (1.0 - model.beta) * model.slope;
  return next;
}

}  // namespace tmpredict
