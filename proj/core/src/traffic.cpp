#include "tmpredict/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tmpredict/error.hpp"

namespace tmpredict {

TrafficMatrix::TrafficMatrix(std::size_t n, std::vector<double> entries, std::int64_t timestamp)
    : n_(n), entries_(std::move(entries)), timestamp_(timestamp) {
  if (n_ == 0 || entries_.size() != n_ * n_) {
    throw Error(ErrorCode::InvalidMatrix, "expected " + std::to_string(n_ * n_) +
                                              " entries, got " + std::to_string(entries_.size()));
  }
  for (double v : entries_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::InvalidMatrix, "entry must be finite and non-negative");
    }
  }
}

TrafficMatrix TrafficMatrix::zeros(std::size_t n, std::int64_t timestamp) {
  return TrafficMatrix(n, std::vector<double>(n * n, 0.0), timestamp);
}

TrafficMatrix TrafficMatrix::with_timestamp(std::int64_t timestamp) const {
  TrafficMatrix copy = *this;
  copy.timestamp_ = timestamp;
  return copy;
}

TrafficVector::TrafficVector(std::size_t n_nodes, std::vector<double> vals)
    : n(n_nodes), values(std::move(vals)) {
  if (values.size() != n * n) {
    throw Error(ErrorCode::LengthNotSquare, "vector length " + std::to_string(values.size()) +
                                                " != " + std::to_string(n) + "^2");
  }
}

TrafficSeries::TrafficSeries(std::vector<TrafficMatrix> matrices, std::int64_t interval_seconds,
                             std::string unit)
    : matrices_(std::move(matrices)), interval_seconds_(interval_seconds), unit_(std::move(unit)) {
  if (interval_seconds_ <= 0) {
    throw Error(ErrorCode::NonUniformSeries, "interval must be positive");
  }
  for (std::size_t k = 1; k < matrices_.size(); ++k) {
    if (matrices_[k].n() != matrices_[0].n()) {
      throw Error(ErrorCode::MixedN, "matrix " + std::to_string(k) + " has a different node count");
    }
    if (matrices_[k].timestamp() - matrices_[k - 1].timestamp() != interval_seconds_) {
      throw Error(ErrorCode::NonUniformSeries,
                  "gap between slots " + std::to_string(k - 1) + " and " + std::to_string(k) +
                      " is not " + std::to_string(interval_seconds_) + "s");
    }
  }
}

TrafficSeries TrafficSeries::slice(std::size_t begin, std::size_t count) const {
  if (begin + count > matrices_.size()) {
    throw Error(ErrorCode::BadSplit, "slice out of range");
  }
  std::vector<TrafficMatrix> part(matrices_.begin() + static_cast<std::ptrdiff_t>(begin),
                                  matrices_.begin() + static_cast<std::ptrdiff_t>(begin + count));
  return TrafficSeries(std::move(part), interval_seconds_, unit_);
}

std::vector<double> TrafficSeries::od_series(std::size_t flat_index) const {
  std::vector<double> out;
  out.reserve(matrices_.size());
  for (const auto& m : matrices_) out.push_back(m.entries()[flat_index]);
  return out;
}

double TrafficSeries::max_entry() const {
  double best = 0.0;
  for (const auto& m : matrices_) {
    for (double v : m.entries()) best = std::max(best, v);
  }
  return best;
}

TrafficVector flatten(const TrafficMatrix& m) {
  const auto e = m.entries();
  return TrafficVector(m.n(), std::vector<double>(e.begin(), e.end()));
}

TrafficMatrix unflatten(const TrafficVector& v, std::int64_t timestamp) {
  if (v.values.size() != v.n * v.n) {
    throw Error(ErrorCode::LengthNotSquare, "vector length " + std::to_string(v.values.size()) +
                                                " != " + std::to_string(v.n) + "^2");
  }
  return TrafficMatrix(v.n, v.values, timestamp);
}

namespace {

WindowMatrix window_ending_before(const TrafficSeries& s, std::size_t end, std::size_t w) {
  const std::size_t n2 = s.n() * s.n();
  WindowMatrix win;
  win.w = w;
  win.n2 = n2;
  win.rows.resize(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(n2));
  win.row_timestamps.reserve(w);
  for (std::size_t k = 0; k < w; ++k) {
    const auto& m = s[end - w + k];
    const auto e = m.entries();
    for (std::size_t c = 0; c < n2; ++c) {
      win.rows(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = e[c];
    }
    win.row_timestamps.push_back(m.timestamp());
  }
  return win;
}

}  // namespace

std::vector<WindowMatrix> make_windows(const TrafficSeries& s, std::size_t w, std::size_t stride) {
  if (w == 0 || stride == 0) {
    throw Error(ErrorCode::InvalidConfig, "window and stride must be >= 1");
  }
  if (s.size() <= w) {
    throw Error(ErrorCode::SeriesTooShort, "series of length " + std::to_string(s.size()) +
                                               " cannot fill a window of " + std::to_string(w) +
                                               " plus a target");
  }
  std::vector<WindowMatrix> out;
  out.reserve((s.size() - w - 1) / stride + 1);
  for (std::size_t t = w; t < s.size(); t += stride) {
    WindowMatrix win = window_ending_before(s, t, w);
    const auto e = s[t].entries();
    win.target = Eigen::Map<const Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size()));
    win.target_timestamp = s[t].timestamp();
    out.push_back(std::move(win));
  }
  return out;
}

WindowMatrix last_window(const TrafficSeries& s, std::size_t w) {
  if (w == 0) throw Error(ErrorCode::InvalidConfig, "window must be >= 1");
  if (s.size() < w) {
    throw Error(ErrorCode::SeriesTooShort, "need " + std::to_string(w) + " matrices, have " +
                                               std::to_string(s.size()));
  }
  return window_ending_before(s, s.size(), w);
}

namespace {

TrafficSeries scale(const TrafficSeries& s, double factor) {
  std::vector<TrafficMatrix> out;
  out.reserve(s.size());
  for (const auto& m : s.matrices()) {
    std::vector<double> e(m.entries().begin(), m.entries().end());
    for (double& v : e) v *= factor;
    out.emplace_back(m.n(), std::move(e), m.timestamp());
  }
  return TrafficSeries(std::move(out), s.interval_seconds(), s.unit());
}

void check_params(const NormParams& params) {
  if (!(params.max_value > 0.0) || !std::isfinite(params.max_value)) {
    throw Error(ErrorCode::NonPositiveMax, "normalization max must be positive and finite");
  }
}

}  // namespace

TrafficSeries normalize(const TrafficSeries& s, const NormParams& params) {
  check_params(params);
  std::vector<TrafficMatrix> out;
  out.reserve(s.size());
  for (const auto& m : s.matrices()) {
    std::vector<double> e(m.entries().begin(), m.entries().end());
    for (double& v : e) v /= params.max_value;
    out.emplace_back(m.n(), std::move(e), m.timestamp());
  }
  return TrafficSeries(std::move(out), s.interval_seconds(), s.unit());
}

TrafficSeries denormalize(const TrafficSeries& s, const NormParams& params) {
  check_params(params);
  return scale(s, params.max_value);
}

TrafficVector denormalize(const TrafficVector& v, const NormParams& params) {
  check_params(params);
  TrafficVector out = v;
  for (double& x : out.values) x *= params.max_value;
  return out;
}

NormParams fit_norm(const TrafficSeries& train) {
  if (train.empty()) throw Error(ErrorCode::DegenerateSeries, "training series is empty");
  const double max_value = train.max_entry();
  if (max_value <= 0.0) {
    throw Error(ErrorCode::DegenerateSeries, "training series is all zero");
  }
  return NormParams{max_value, "train-only"};
}

std::pair<TrafficSeries, TrafficSeries> split(const TrafficSeries& s, const SplitSpec& spec) {
  if (spec.train_len < 1 || spec.test_len < 1 || spec.train_len + spec.test_len != s.size()) {
    throw Error(ErrorCode::BadSplit, "split " + std::to_string(spec.train_len) + "+" +
                                         std::to_string(spec.test_len) +
                                         " does not match series length " +
                                         std::to_string(s.size()));
  }
  return {s.slice(0, spec.train_len), s.slice(spec.train_len, spec.test_len)};
}

}  // namespace tmpredict
