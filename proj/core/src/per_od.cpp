#include <algorithm>

#include "tmpredict/error.hpp"
#include "tmpredict/linear.hpp"

namespace tmpredict {

LinearKind parse_linear_kind(const std::string& name) {
  if (name == "arma") return LinearKind::Arma;
  if (name == "arar") return LinearKind::Arar;
  if (name == "hw") return LinearKind::HoltWinters;
  throw Error(ErrorCode::InvalidConfig, "unknown linear method '" + name + "'");
}

std::string to_string(LinearKind kind) {
  switch (kind) {
    case LinearKind::Arma: return "arma";
    case LinearKind::Arar: return "arar";
    case LinearKind::HoltWinters: return "hw";
  }
  return "arma";
}

OdModel fit_od(LinearKind kind, std::span<const double> series, const LinearConfig& config,
               std::string* fallback_reason) {
  auto fallback = [&](const std::string& why) -> OdModel {
    if (fallback_reason) *fallback_reason = why;
    return NaiveModel{};
  };
  if (series.empty()) return fallback("empty series");
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  if (*lo == *hi) return fallback("constant series");
  try {
    switch (kind) {
      case LinearKind::Arma: {
        ArmaModel m = arma_fit(series, config.arma_p, config.arma_q);
        if (m.near_singular) return fallback("near-singular ARMA fit");
        return m;
      }
      case LinearKind::Arar: return arar_fit(series, config.arar_max_lag);
      case LinearKind::HoltWinters: return hw_fit(series, config.hw_grid_step);
    }
  } catch (const Error& e) {
    return fallback(e.what());
  }
  return fallback("unknown method");
}

namespace {

struct OdForecaster {
  std::span<const double> history;

  double operator()(const ArmaModel& m) const { return arma_forecast(m, history, 1).front(); }
  double operator()(const ArarModel& m) const { return arar_forecast(m, history, 1).front(); }
  double operator()(const HwModel& m) const {
    return hw_forecast(hw_run(m.alpha, m.beta, history).model, 1).front();
  }
  double operator()(const NaiveModel&) const { return history.back(); }
};

}  // namespace

double forecast_od(const OdModel& model, std::span<const double> history) {
  if (history.empty()) throw Error(ErrorCode::HistoryTooShort, "empty history");
  try {
    return std::visit(OdForecaster{history}, model);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::HistoryTooShort && e.code() != ErrorCode::TooShort &&
        e.code() != ErrorCode::SingularCovariance) {
      throw;
    }
    return history.back();
  }
}

PerOdFit fit_per_od(LinearKind kind, const TrafficSeries& train, const LinearConfig& config) {
  PerOdFit fit;
  fit.kind = kind;
  fit.n = train.n();
  const std::size_t n2 = fit.n * fit.n;
  fit.models.reserve(n2);
  for (std::size_t od = 0; od < n2; ++od) {
    const auto series = train.od_series(od);
    std::string reason;
    fit.models.push_back(fit_od(kind, series, config, &reason));
    if (std::holds_alternative<NaiveModel>(fit.models.back())) {
      fit.fallback_ods.push_back(od);
      fit.fallback_reasons.push_back(reason);
    }
  }
  return fit;
}

TrafficVector forecast_per_od(const PerOdFit& fit, const TrafficSeries& history) {
  if (history.n() != fit.n) throw Error(ErrorCode::ShapeMismatch, "history node count differs from fit");
  const std::size_t n2 = fit.n * fit.n;
  std::vector<double> out(n2);
  for (std::size_t od = 0; od < n2; ++od) {
    const auto series = history.od_series(od);
    out[od] = std::max(0.0, forecast_od(fit.models[od], series));
  }
  return TrafficVector(fit.n, std::move(out));
}

TrafficVector vector_forecast(LinearKind kind, const TrafficSeries& series,
                              const LinearConfig& config) {
  return forecast_per_od(fit_per_od(kind, series, config), series);
}

}  // namespace tmpredict
