#include "tmpredict/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <map>
#include <stdexcept>

#include "tmpredict/error.hpp"

namespace tmpredict {

double mse(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size() || actual.empty()) {
    throw Error(ErrorCode::LengthMismatch, "mse over lengths " + std::to_string(actual.size()) +
                                               " and " + std::to_string(predicted.size()));
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < actual.size(); ++k) {
    const double d = actual[k] - predicted[k];
    sum += d * d;
  }
  return sum / static_cast<double>(actual.size());
}

// ---------------------------------------------------------------------------
// HistoryView

HistoryView::HistoryView(const std::vector<TrafficMatrix>& matrices, std::size_t end,
                         std::int64_t interval_seconds, const AccessHook* hook)
    : matrices_(&matrices), end_(end), interval_(interval_seconds), hook_(hook) {
  if (end > matrices.size()) throw std::out_of_range("history end past the series");
}

std::size_t HistoryView::n() const { return end_ == 0 ? 0 : (*matrices_)[0].n(); }

const TrafficMatrix& HistoryView::at(std::size_t k) const {
  if (k >= end_) throw std::out_of_range("history slot " + std::to_string(k) + " is not visible");
  const TrafficMatrix& m = (*matrices_)[k];
  if (hook_ && *hook_) (*hook_)(m.timestamp());
  return m;
}

TrafficSeries HistoryView::tail(std::size_t count) const {
  if (count > end_) {
    throw Error(ErrorCode::InsufficientHistory, "asked for " + std::to_string(count) +
                                                    " slots, " + std::to_string(end_) + " visible");
  }
  std::vector<TrafficMatrix> out;
  out.reserve(count);
  for (std::size_t k = end_ - count; k < end_; ++k) out.push_back(at(k));
  return TrafficSeries(std::move(out), interval_);
}

// ---------------------------------------------------------------------------
// Predictors

TrafficVector NaivePredictor::predict(const HistoryView& history) {
  if (history.size() == 0) throw Error(ErrorCode::InsufficientHistory, "empty history");
  return flatten(history.at(history.size() - 1));
}

void LinearPredictor::fit(const TrafficSeries& train) { fit_ = fit_per_od(kind_, train, config_); }

TrafficVector LinearPredictor::predict(const HistoryView& history) {
  return forecast_per_od(fit_, history.all());
}

void LstmPredictor::fit(const TrafficSeries& train) {
  NetworkDims dims = dims_;
  dims.input_dim = train.n() * train.n();
  dims.output_dim = dims.input_dim;
  const auto samples = make_windows(train, window_);
  LstmNetwork init = init_params(dims, init_seed_);
  const auto start = std::chrono::steady_clock::now();
  try {
    TrainResult result = tmpredict::train(std::move(init), samples, train_);
    train_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    net_ = std::move(result.net);
    loss_history_ = std::move(result.loss_history);
  } catch (const TrainingDiverged& e) {
    train_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    loss_history_ = e.loss_history();
    throw;
  }
}

TrafficVector LstmPredictor::predict(const HistoryView& history) {
  return predict_next(net_, history.tail(window_), window_);
}

// ---------------------------------------------------------------------------
// Walk-forward

std::vector<PredictionRecord> walk_forward(Predictor& predictor, const TrafficSeries& train,
                                           const TrafficSeries& test, std::size_t w,
                                           const AccessHook* hook) {
  if (test.empty()) throw Error(ErrorCode::InsufficientHistory, "test split is empty");
  if (train.size() < std::max<std::size_t>(w, 1)) {
    throw Error(ErrorCode::InsufficientHistory, "train split has " + std::to_string(train.size()) +
                                                    " slots, window needs " + std::to_string(w));
  }
  if (train.n() != test.n()) throw Error(ErrorCode::ShapeMismatch, "train and test node counts differ");

  std::vector<TrafficMatrix> combined = train.matrices();
  combined.insert(combined.end(), test.matrices().begin(), test.matrices().end());

  std::vector<PredictionRecord> records;
  records.reserve(test.size());
  for (std::size_t k = 0; k < test.size(); ++k) {
    const HistoryView view(combined, train.size() + k, train.interval_seconds(), hook);
    PredictionRecord r;
    r.t = test[k].timestamp();
    r.method = predictor.name();
    r.predicted = predictor.predict(view);
    r.actual = flatten(test[k]);
    r.mse = mse(r.actual.values, r.predicted.values);
    records.push_back(std::move(r));
  }
  return records;
}

std::uint64_t input_hash(const TrafficSeries& train, const TrafficSeries& test, std::size_t w) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < len; ++k) {
      h ^= bytes[k];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t window = w;
  mix(&window, sizeof window);
  for (const TrafficSeries* s : {&train, &test}) {
    const std::uint64_t len = s->size();
    mix(&len, sizeof len);
    for (const auto& m : s->matrices()) {
      const std::int64_t ts = m.timestamp();
      mix(&ts, sizeof ts);
      mix(m.entries().data(), m.entries().size() * sizeof(double));
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Reports

void EvalConfig::validate() const {
  if (methods.empty()) throw Error(ErrorCode::InvalidConfig, "no methods selected");
  for (const auto& m : methods) {
    if (m != "naive" && m != "lstm") parse_linear_kind(m);
  }
  if (window == 0) throw Error(ErrorCode::InvalidConfig, "window must be positive");
  if (split.train_len == 0 || split.test_len == 0) {
    throw Error(ErrorCode::BadSplit, "train and test lengths must be positive");
  }
  if (hidden_dim == 0 || layers == 0) throw Error(ErrorCode::InvalidConfig, "network dims must be positive");
  train.validate();
}

double aggregate_mse(std::span<const PredictionRecord> records, bool raw) {
  if (records.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : records) sum += raw ? r.mse_raw : r.mse;
  return sum / static_cast<double>(records.size());
}

void EvalReport::check() const {
  std::map<std::string, std::vector<PredictionRecord>> by_method;
  for (const auto& r : records) by_method[r.method].push_back(r);
  for (const auto& m : methods) {
    if (m.status != "ok") continue;
    const auto& recs = by_method[m.method];
    if (recs.size() != m.steps || aggregate_mse(recs) != m.mse || aggregate_mse(recs, true) != m.mse_raw) {
      throw Error(ErrorCode::InvalidConfig, "aggregate MSE of " + m.method + " disagrees with its records");
    }
  }
}

std::unique_ptr<Predictor> make_predictor(const std::string& method, const EvalConfig& config,
                                          std::size_t n, std::size_t layers) {
  if (method == "naive") return std::make_unique<NaivePredictor>();
  if (method == "lstm") {
    NetworkDims dims;
    dims.input_dim = n * n;
    dims.output_dim = n * n;
    dims.hidden_dim = config.hidden_dim;
    dims.layers = layers;
    dims.activation = config.activation;
    TrainConfig tc = config.train;
    tc.seed = config.seed;
    return std::make_unique<LstmPredictor>(dims, tc, config.window, config.seed);
  }
  return std::make_unique<LinearPredictor>(parse_linear_kind(method), config.linear);
}

namespace {

struct Prepared {
  TrafficSeries train;
  TrafficSeries test;
  NormParams norm;
};

Prepared prepare(const TrafficSeries& dataset, const EvalConfig& config) {
  config.validate();
  if (config.split.train_len + config.split.test_len != dataset.size()) {
    throw Error(ErrorCode::BadSplit, "split " + std::to_string(config.split.train_len) + "/" +
                                         std::to_string(config.split.test_len) + " does not cover " +
                                         std::to_string(dataset.size()) + " slots");
  }
  auto [train_raw, test_raw] = split(dataset, config.split);
  Prepared p;
  p.norm = fit_norm(train_raw);
  p.train = normalize(train_raw, p.norm);
  p.test = normalize(test_raw, p.norm);
  return p;
}

void fill_raw(std::vector<PredictionRecord>& records, const NormParams& norm) {
  for (auto& r : records) {
    r.mse_raw = mse(denormalize(r.actual, norm).values, denormalize(r.predicted, norm).values);
  }
}

}  // namespace

EvalReport compare(const TrafficSeries& dataset, const EvalConfig& config) {
  const Prepared p = prepare(dataset, config);
  EvalReport report;
  report.config = config;
  report.config.train.seed = config.seed;
  report.norm = p.norm;
  report.n = dataset.n();

  std::vector<std::string> methods = config.methods;
  std::sort(methods.begin(), methods.end());
  methods.erase(std::unique(methods.begin(), methods.end()), methods.end());
  report.config.methods = methods;

  for (const auto& name : methods) {
    MethodResult res;
    res.method = name;
    res.input_hash = input_hash(p.train, p.test, config.window);
    auto predictor = make_predictor(name, config, report.n, config.layers);
    try {
      predictor->fit(p.train);
      auto records = walk_forward(*predictor, p.train, p.test, config.window);
      fill_raw(records, p.norm);
      res.steps = records.size();
      res.mse = aggregate_mse(records);
      res.mse_raw = aggregate_mse(records, true);
      report.records.insert(report.records.end(), records.begin(), records.end());
    } catch (const TrainingDiverged& e) {
      res.status = "failed";
      res.error = e.what();
      res.loss_history = e.loss_history();
    }
    if (auto* lin = dynamic_cast<LinearPredictor*>(predictor.get())) {
      res.fallback_ods = lin->fitted().fallback_ods;
      res.fallback_reasons = lin->fitted().fallback_reasons;
    }
    if (auto* lstm = dynamic_cast<LstmPredictor*>(predictor.get())) {
      res.loss_history = lstm->loss_history();
      res.train_seconds = lstm->train_seconds();
    }
    report.methods.push_back(std::move(res));
  }

  std::vector<const MethodResult*> ok;
  for (const auto& m : report.methods) {
    if (m.status == "ok") ok.push_back(&m);
  }
  std::stable_sort(ok.begin(), ok.end(),
                   [](const MethodResult* a, const MethodResult* b) { return a->mse < b->mse; });
  for (const auto* m : ok) report.ranking.push_back(m->method);

  const std::uint64_t h0 = report.methods.front().input_hash;
  for (const auto& m : report.methods) {
    if (m.input_hash != h0) throw Error(ErrorCode::InvalidConfig, "methods saw different inputs");
  }
  report.check();
  return report;
}

EvalReport depth_sweep(const TrafficSeries& dataset, std::span<const std::size_t> depths,
                       const EvalConfig& config) {
  if (depths.empty()) throw Error(ErrorCode::InvalidConfig, "depth list is empty");
  for (auto d : depths) {
    if (d == 0) throw Error(ErrorCode::InvalidConfig, "depth must be at least 1");
  }
  const Prepared p = prepare(dataset, config);
  EvalReport report;
  report.config = config;
  report.config.methods = {"lstm"};
  report.config.train.seed = config.seed;
  report.norm = p.norm;
  report.n = dataset.n();

  std::vector<std::size_t> sorted(depths.begin(), depths.end());
  std::sort(sorted.begin(), sorted.end());
  for (auto depth : sorted) {
    DepthEntry entry;
    entry.depth = depth;
    entry.hidden_dim = config.hidden_dim;
    entry.epochs = config.train.epochs;
    auto predictor = make_predictor("lstm", config, report.n, depth);
    auto& lstm = static_cast<LstmPredictor&>(*predictor);
    try {
      lstm.fit(p.train);
      auto records = walk_forward(lstm, p.train, p.test, config.window);
      fill_raw(records, p.norm);
      entry.mse = aggregate_mse(records);
      entry.mse_raw = aggregate_mse(records, true);
    } catch (const TrainingDiverged& e) {
      entry.status = "failed";
      entry.error = e.what();
    }
    entry.loss_history = lstm.loss_history();
    entry.train_seconds = lstm.train_seconds();
    report.depths.push_back(std::move(entry));
  }
  return report;
}

}  // namespace tmpredict
