#ifndef TMPREDICT_EVAL_HPP
#define TMPREDICT_EVAL_HPP

// Walk-forward evaluation, method comparison and depth sweeps.
//
// Every method sees the same train-only normalization and the same split.
// Predictors read history only through a HistoryView, which refuses slots at
// or after the target and reports each timestamp it hands out.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tmpredict/linear.hpp"
#include "tmpredict/lstm.hpp"
#include "tmpredict/traffic.hpp"

namespace tmpredict {

/// Mean of squared differences. Throws LengthMismatch on unequal or empty input.
double mse(std::span<const double> actual, std::span<const double> predicted);

struct PredictionRecord {
  std::int64_t t = 0;  // target timestamp
  std::string method;
  TrafficVector predicted;
  TrafficVector actual;
  double mse = 0.0;      // normalized scale
  double mse_raw = 0.0;  // original volume scale
};

using AccessHook = std::function<void(std::int64_t timestamp)>;

/// Matrices [0, end) of a contiguous series.
class HistoryView {
 public:
  HistoryView(const std::vector<TrafficMatrix>& matrices, std::size_t end,
              std::int64_t interval_seconds, const AccessHook* hook = nullptr);

  std::size_t size() const noexcept { return end_; }
  std::size_t n() const;

  /// Throws std::out_of_range for k >= size().
  const TrafficMatrix& at(std::size_t k) const;

  /// The last `count` visible matrices as a series.
  TrafficSeries tail(std::size_t count) const;
  TrafficSeries all() const { return tail(end_); }

 private:
  const std::vector<TrafficMatrix>* matrices_;
  std::size_t end_;
  std::int64_t interval_;
  const AccessHook* hook_;
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::string name() const = 0;
  /// Called once with the normalized training split.
  virtual void fit(const TrafficSeries& train) = 0;
  /// Next traffic vector after the visible history.
  virtual TrafficVector predict(const HistoryView& history) = 0;
};

class NaivePredictor final : public Predictor {
 public:
  std::string name() const override { return "naive"; }
  void fit(const TrafficSeries&) override {}
  TrafficVector predict(const HistoryView& history) override;
};

class LinearPredictor final : public Predictor {
 public:
  LinearPredictor(LinearKind kind, LinearConfig config) : kind_(kind), config_(config) {}
  std::string name() const override { return to_string(kind_); }
  void fit(const TrafficSeries& train) override;
  TrafficVector predict(const HistoryView& history) override;
  const PerOdFit& fitted() const { return fit_; }

 private:
  LinearKind kind_;
  LinearConfig config_;
  PerOdFit fit_;
};

class LstmPredictor final : public Predictor {
 public:
  LstmPredictor(NetworkDims dims, TrainConfig train, std::size_t window, std::uint64_t init_seed)
      : dims_(dims), train_(train), window_(window), init_seed_(init_seed) {}
  std::string name() const override { return "lstm"; }
  /// Trains from a fresh seeded init. Throws TrainingDiverged.
  void fit(const TrafficSeries& train) override;
  TrafficVector predict(const HistoryView& history) override;

  const LstmNetwork& net() const { return net_; }
  const std::vector<double>& loss_history() const { return loss_history_; }
  double train_seconds() const { return train_seconds_; }

 private:
  NetworkDims dims_;
  TrainConfig train_;
  std::size_t window_;
  std::uint64_t init_seed_;
  LstmNetwork net_;
  std::vector<double> loss_history_;
  double train_seconds_ = 0.0;
};

/// One-step-ahead predictions for every test slot with teacher forcing: the
/// history for test slot k is the train split plus test slots before k.
/// The predictor must already be fitted. Throws InsufficientHistory when
/// the test split is empty or the train split is shorter than `w`.
std::vector<PredictionRecord> walk_forward(Predictor& predictor, const TrafficSeries& train,
                                           const TrafficSeries& test, std::size_t w,
                                           const AccessHook* hook = nullptr);

/// FNV-1a 64-bit over the bytes of every entry, timestamp and the window.
std::uint64_t input_hash(const TrafficSeries& train, const TrafficSeries& test, std::size_t w);

struct EvalConfig {
  std::vector<std::string> methods{"arar", "arma", "hw", "lstm", "naive"};
  SplitSpec split{263, 46};
  std::size_t window = 10;
  std::uint64_t seed = 0;
  LinearConfig linear;
  std::size_t hidden_dim = 64;
  std::size_t layers = 2;
  OutputActivation activation = OutputActivation::Identity;
  TrainConfig train;  // train.seed is overwritten from `seed`

  void validate() const;
};

struct MethodResult {
  std::string method;
  std::string status = "ok";  // "ok" or "failed"
  std::string error;
  double mse = 0.0;  // aggregate over test steps, normalized scale
  double mse_raw = 0.0;
  std::uint64_t input_hash = 0;
  std::size_t steps = 0;
  std::vector<std::size_t> fallback_ods;
  std::vector<std::string> fallback_reasons;
  std::vector<double> loss_history;
  double train_seconds = 0.0;
};

struct DepthEntry {
  std::size_t depth = 0;
  std::size_t hidden_dim = 0;
  std::size_t epochs = 0;
  std::string status = "ok";
  std::string error;
  double mse = 0.0;
  double mse_raw = 0.0;
  std::vector<double> loss_history;
  double train_seconds = 0.0;
};

struct EvalReport {
  EvalConfig config;
  NormParams norm;
  std::size_t n = 0;
  std::vector<MethodResult> methods;   // sorted by method name
  std::vector<std::string> ranking;    // successful methods, best first
  std::vector<PredictionRecord> records;  // per method, test order
  std::vector<DepthEntry> depths;      // sorted by depth

  /// Throws InvalidConfig if any aggregate differs from the mean of its
  /// per-step records.
  void check() const;
};

/// Mean of per-step MSE in record order.
double aggregate_mse(std::span<const PredictionRecord> records, bool raw = false);

std::unique_ptr<Predictor> make_predictor(const std::string& method, const EvalConfig& config,
                                          std::size_t n, std::size_t layers);

/// Normalizes with train-only max, then fits and walks every method forward.
EvalReport compare(const TrafficSeries& dataset, const EvalConfig& config);

/// Trains one fresh LSTM per depth and records test MSE and training time.
/// A diverging depth is recorded as failed.
EvalReport depth_sweep(const TrafficSeries& dataset, std::span<const std::size_t> depths,
                       const EvalConfig& config);

// ---------------------------------------------------------------------------
// Serialization

struct ReportOptions {
  bool include_vectors = false;  // per-record predicted/actual arrays
};

/// JSON document; wall-clock values live only under "timing".
std::string report_json(const EvalReport& report, const ReportOptions& options = {});

/// method,mse rows in ranking order, failed methods omitted.
void write_comparison_csv(std::ostream& out, const EvalReport& report);

/// depth,mse,train_seconds rows; failed depths carry "nan".
void write_depth_sweep_csv(std::ostream& out, const EvalReport& report);

}  // namespace tmpredict

#endif  // TMPREDICT_EVAL_HPP
