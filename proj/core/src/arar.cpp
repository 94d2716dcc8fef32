#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "tmpredict/error.hpp"
#include "tmpredict/linear.hpp"

namespace tmpredict {

namespace {

constexpr std::size_t kMaxShorteningLag = 15;
constexpr std::size_t kMaxShorteningPasses = 3;
constexpr double kLongMemoryPhi = 0.93;

bool all_zero(const std::vector<double>& y) {
  return std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; });
}

}  // namespace

std::vector<double> poly_multiply(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

Shortened arar_shorten(std::span<const double> series) {
  if (series.size() < 26) {
    throw Error(ErrorCode::TooShort, "ARAR needs at least 26 points, got " +
                                         std::to_string(series.size()));
  }
  std::vector<double> y(series.begin(), series.end());
  std::vector<double> filter{1.0};  // psi(B) with leading 1

  for (std::size_t pass = 0; pass < kMaxShorteningPasses; ++pass) {
    const std::size_t n = y.size();
    if (n <= kMaxShorteningLag + 2 || all_zero(y)) break;

    // phi(tau) = sum Y_t Y_{t-tau} / sum Y_{t-tau}^2 and the relative
    // residual error of the lag-tau fit.
    std::size_t best_tau = 1;
    double best_err = std::numeric_limits<double>::infinity();
    double best_phi = 0.0;
    for (std::size_t tau = 1; tau <= kMaxShorteningLag; ++tau) {
      double cross = 0.0;
      double lagged_sq = 0.0;
      double lead_sq = 0.0;
      for (std::size_t t = tau; t < n; ++t) {
        cross += y[t] * y[t - tau];
        lagged_sq += y[t - tau] * y[t - tau];
        lead_sq += y[t] * y[t];
      }
      const double phi = lagged_sq > 0.0 ? cross / lagged_sq : 0.0;
      double resid = 0.0;
      for (std::size_t t = tau; t < n; ++t) {
        const double e = y[t] - phi * y[t - tau];
        resid += e * e;
      }
      const double err = lead_sq > 0.0 ? resid / lead_sq : 0.0;
      if (err < best_err) {
        best_err = err;
        best_tau = tau;
        best_phi = phi;
      }
    }

    const bool lag_filter =
        best_err <= 8.0 / static_cast<double>(n) || (best_phi >= kLongMemoryPhi && best_tau > 2);
    if (lag_filter) {
      std::vector<double> next(n - best_tau);
      for (std::size_t t = best_tau; t < n; ++t) next[t - best_tau] = y[t] - best_phi * y[t - best_tau];
      std::vector<double> lag_poly(best_tau + 1, 0.0);
      lag_poly[0] = 1.0;
      lag_poly[best_tau] = -best_phi;
      filter = poly_multiply(filter, lag_poly);
      y = std::move(next);
    } else if (best_phi >= kLongMemoryPhi) {
      // tau in {1, 2}: least-squares AR(2) filter.
      Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
      Eigen::Vector2d b = Eigen::Vector2d::Zero();
      for (std::size_t t = 2; t < n; ++t) {
        a(0, 0) += y[t - 1] * y[t - 1];
        a(0, 1) += y[t - 2] * y[t - 1];
        a(1, 1) += y[t - 2] * y[t - 2];
        b(0) += y[t] * y[t - 1];
        b(1) += y[t] * y[t - 2];
      }
      a(1, 0) = a(0, 1);
      const Eigen::Vector2d phi = a.fullPivLu().solve(b);
      std::vector<double> next(n - 2);
      for (std::size_t t = 2; t < n; ++t) next[t - 2] = y[t] - phi(0) * y[t - 1] - phi(1) * y[t - 2];
      const std::vector<double> ar2{1.0, -phi(0), -phi(1)};
      filter = poly_multiply(filter, ar2);
      y = std::move(next);
    } else {
      break;
    }
  }

  Shortened out;
  out.series = std::move(y);
  out.psi.assign(filter.begin() + 1, filter.end());
  return out;
}

ArarModel arar_fit(std::span<const double> series, std::size_t max_lag) {
  if (max_lag < 4) throw Error(ErrorCode::InvalidConfig, "ARAR max_lag must be >= 4");
  if (series.size() < std::max<std::size_t>(26, max_lag)) {
    throw Error(ErrorCode::TooShort, "ARAR needs at least 26 points, got " +
                                         std::to_string(series.size()));
  }
  ArarModel model;
  const Shortened sh = arar_shorten(series);
  model.psi = sh.psi;
  model.s_bar = sample_mean(sh.series);
  std::vector<double> x(sh.series);
  for (double& v : x) v -= model.s_bar;
  const auto gamma = sample_acvf(x, max_lag);

  if (gamma[0] > 0.0) {
    double best_sigma2 = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t l1 = 2; l1 + 2 <= max_lag; ++l1) {
      for (std::size_t l2 = l1 + 1; l2 + 1 <= max_lag; ++l2) {
        for (std::size_t l3 = l2 + 1; l3 <= max_lag; ++l3) {
          Eigen::Matrix4d a;
          a << gamma[0], gamma[l1 - 1], gamma[l2 - 1], gamma[l3 - 1],
               gamma[l1 - 1], gamma[0], gamma[l2 - l1], gamma[l3 - l1],
               gamma[l2 - 1], gamma[l2 - l1], gamma[0], gamma[l3 - l2],
               gamma[l3 - 1], gamma[l3 - l1], gamma[l3 - l2], gamma[0];
          const Eigen::Vector4d b(gamma[1], gamma[l1], gamma[l2], gamma[l3]);
          const auto lu = a.fullPivLu();
          if (!lu.isInvertible()) continue;
          const Eigen::Vector4d phi = lu.solve(b);
          const double sigma2 = gamma[0] - phi.dot(b);
          if (std::isfinite(sigma2) && sigma2 < best_sigma2) {
            best_sigma2 = sigma2;
            model.lags = {1, l1, l2, l3};
            model.phi_lags = {phi(0), phi(1), phi(2), phi(3)};
            found = true;
          }
        }
      }
    }
    if (!found) throw Error(ErrorCode::SingularYuleWalker, "no invertible lag system");
    model.sigma2 = best_sigma2;
  }
  // A shortened series that is identically constant leaves phi = 0: the
  // forecast is then psi-filter reproduction of the level.

  const std::size_t l3 = model.lags[3];
  std::vector<double> phi_poly(l3 + 1, 0.0);
  phi_poly[0] = 1.0;
  for (std::size_t k = 0; k < 4; ++k) phi_poly[model.lags[k]] -= model.phi_lags[k];
  std::vector<double> psi_poly{1.0};
  psi_poly.insert(psi_poly.end(), model.psi.begin(), model.psi.end());
  const auto xi = poly_multiply(psi_poly, phi_poly);
  model.xi.assign(xi.begin() + 1, xi.end());
  model.phi1_sum = 1.0 - (model.phi_lags[0] + model.phi_lags[1] + model.phi_lags[2] + model.phi_lags[3]);
  return model;
}

std::vector<double> arar_forecast(const ArarModel& model, std::span<const double> history,
                                  std::size_t horizon) {
  const std::size_t k = model.xi.size();
  if (history.size() < k) {
    throw Error(ErrorCode::HistoryTooShort, "ARAR forecast needs " + std::to_string(k) +
                                                " observations, got " + std::to_string(history.size()));
  }
  const double intercept = model.phi1_sum * model.s_bar;
  std::vector<double> path(history.end() - static_cast<std::ptrdiff_t>(k), history.end());
  path.reserve(k + horizon);
  for (std::size_t h = 1; h <= horizon; ++h) {
    const std::size_t t = path.size();
    double value = intercept;
    for (std::size_t j = 1; j <= k; ++j) value -= model.xi[j - 1] * path[t - j];
    path.push_back(value);
  }
  return std::vector<double>(path.begin() + static_cast<std::ptrdiff_t>(k), path.end());
}

double arar_predict(const ArarModel& model, std::span<const double> history, long h) {
  if (h <= 0) {
    const auto back = static_cast<std::size_t>(-h);
    if (back >= history.size()) {
      throw Error(ErrorCode::HistoryTooShort, "observation Y_{n" + std::to_string(h) + "} not in history");
    }
    return history[history.size() - 1 - back];
  }
  return arar_forecast(model, history, static_cast<std::size_t>(h)).back();
}

}  // namespace tmpredict
