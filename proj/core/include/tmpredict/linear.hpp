#ifndef TMPREDICT_LINEAR_HPP
#define TMPREDICT_LINEAR_HPP

// Univariate linear baselines: ARMA(p,q), ARAR and trend Holt-Winters.
//
// All fits are deterministic closed-form or exhaustive-grid procedures; there
// is no randomness anywhere in this header.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tmpredict/traffic.hpp"

namespace tmpredict {

// ---------------------------------------------------------------------------
// Shared statistics

double sample_mean(std::span<const double> x);

/// Sample autocovariance gamma(0..max_lag) with divisor n; lags >= n are 0.
std::vector<double> sample_acvf(std::span<const double> x, std::size_t max_lag);

struct YuleWalkerFit {
  std::vector<double> phi;  // phi_1..phi_p
  double sigma2 = 0.0;
};

/// Solves the order-p Yule-Walker system by Durbin-Levinson.
/// Throws SingularYuleWalker when a prediction variance collapses.
YuleWalkerFit yule_walker(std::span<const double> acvf, std::size_t p);

// ---------------------------------------------------------------------------
// Innovations algorithm

/// theta[n-1][j-1] holds theta_{n,j}; v[k] is the k-th one-step MSE.
struct InnovationsTable {
  std::vector<std::vector<double>> theta;
  std::vector<double> v;

  double theta_at(std::size_t n, std::size_t j) const {
    if (n == 0 || j == 0 || j > theta[n - 1].size()) return 0.0;
    return theta[n - 1][j - 1];
  }
};

/// Innovations recursion for a stationary autocovariance, run to step n.
/// Lags missing from `acvf` are treated as zero.
InnovationsTable innovations(std::span<const double> acvf, std::size_t n);

// ---------------------------------------------------------------------------
// ARMA

struct ArmaModel {
  std::size_t p = 0;
  std::size_t q = 0;
  std::vector<double> phi;
  std::vector<double> theta;
  double sigma2 = 1.0;
  double mean = 0.0;
  /// Degenerate (constant) input; forecasts collapse to `mean`.
  bool near_singular = false;
};

/// Autocovariance gamma(0..max_lag) implied by the model parameters.
std::vector<double> arma_acvf(const ArmaModel& model, std::size_t max_lag);

/// True when phi(z) has every root strictly outside the unit circle.
bool is_causal(std::span<const double> phi);

/// Yule-Walker for q == 0, Hannan-Rissanen otherwise. Needs at least
/// 10*(p+q) points. Throws TooShort or NonCausalFit.
ArmaModel arma_fit(std::span<const double> series, std::size_t p, std::size_t q);

/// h = 1..horizon predictions from the innovations form of the model
/// applied to `history`. Throws HistoryTooShort below max(p,q) points.
std::vector<double> arma_forecast(const ArmaModel& model, std::span<const double> history,
                                  std::size_t horizon);

// ---------------------------------------------------------------------------
// ARAR

struct ArarModel {
  std::vector<double> psi;  // psi_1..psi_k of S_t = Y_t + psi_1 Y_{t-1} + ...
  std::array<std::size_t, 4> lags{1, 2, 3, 4};
  std::array<double, 4> phi_lags{};
  std::vector<double> xi;  // xi_1..xi_{k+l3}
  double s_bar = 0.0;
  double sigma2 = 0.0;
  double phi1_sum = 1.0;  // phi(1) = 1 - sum(phi_lags)

  std::size_t required_history() const { return xi.size(); }
};

struct Shortened {
  std::vector<double> series;
  std::vector<double> psi;
};

/// Up to three memory-shortening passes; psi is empty when none fire.
Shortened arar_shorten(std::span<const double> series);

ArarModel arar_fit(std::span<const double> series, std::size_t max_lag = 26);

/// Forecast recursion for h = 1..horizon.
std::vector<double> arar_forecast(const ArarModel& model, std::span<const double> history,
                                  std::size_t horizon);

/// Single horizon; h <= 0 returns the observed Y_{n+h}.
double arar_predict(const ArarModel& model, std::span<const double> history, long h);

/// Full polynomial product (leading 1 included on both sides and the result).
std::vector<double> poly_multiply(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Holt-Winters (non-seasonal, additive trend)

struct HwModel {
  double alpha = 0.5;
  double beta = 0.5;
  double level = 0.0;  // a_n
  double slope = 0.0;  // b_n
};

struct HwRun {
  HwModel model;
  double sse = 0.0;  // sum over i = 3..n of one-step squared errors
};

/// Runs the smoothing recursions from a_2 = Y_2, b_2 = Y_2 - Y_1.
HwRun hw_run(double alpha, double beta, std::span<const double> series);

/// Grid search over alpha, beta in {step, 2 step, ..., 1 - step}; first
/// minimum in (alpha, beta) lexicographic order wins.
HwModel hw_fit(std::span<const double> series, double grid_step = 0.02);

std::vector<double> hw_forecast(const HwModel& model, std::size_t horizon);

/// One more observation through the recursions.
HwModel hw_update(const HwModel& model, double observation);

// ---------------------------------------------------------------------------
// Per-OD application to traffic vectors

enum class LinearKind { Arma, Arar, HoltWinters };

LinearKind parse_linear_kind(const std::string& name);
std::string to_string(LinearKind kind);

struct LinearConfig {
  std::size_t arma_p = 2;
  std::size_t arma_q = 1;
  double hw_grid_step = 0.02;
  std::size_t arar_max_lag = 26;
};

/// Last-value forecast used for degenerate ODs or failed fits.
struct NaiveModel {};

using OdModel = std::variant<ArmaModel, ArarModel, HwModel, NaiveModel>;

/// Fits the requested model to one OD sequence; degenerate (constant) input
/// or any fit error yields NaiveModel and a reason.
OdModel fit_od(LinearKind kind, std::span<const double> series, const LinearConfig& config,
               std::string* fallback_reason = nullptr);

/// One-step forecast of one OD, unfloored. Holt-Winters state is rebuilt
/// from `history` with the fitted smoothing parameters.
double forecast_od(const OdModel& model, std::span<const double> history);

struct PerOdFit {
  LinearKind kind = LinearKind::Arma;
  std::size_t n = 0;
  std::vector<OdModel> models;
  std::vector<std::size_t> fallback_ods;
  std::vector<std::string> fallback_reasons;
};

PerOdFit fit_per_od(LinearKind kind, const TrafficSeries& train, const LinearConfig& config);

/// Next traffic vector after `history`, negatives floored at zero.
TrafficVector forecast_per_od(const PerOdFit& fit, const TrafficSeries& history);

/// Fit on `series` and forecast the slot after it.
TrafficVector vector_forecast(LinearKind kind, const TrafficSeries& series,
                              const LinearConfig& config);

}  // namespace tmpredict

#endif  // TMPREDICT_LINEAR_HPP
