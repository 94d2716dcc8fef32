#ifndef TMPREDICT_TRAFFIC_HPP
#define TMPREDICT_TRAFFIC_HPP

// Domain types for origin-destination traffic and the data-shaping pipeline
// that turns a series of traffic matrices into supervised learning windows.
//
// A traffic matrix Y holds y(i,j) = volume from node i to node j over one
// time slot. Flattening concatenates rows top to bottom, so OD (i,j) lands at
// index i*N + j of the traffic vector.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tmpredict {

class TrafficMatrix {
 public:
  /// `entries` is row-major, n*n long, finite and non-negative.
  TrafficMatrix(std::size_t n, std::vector<double> entries, std::int64_t timestamp);

  static TrafficMatrix zeros(std::size_t n, std::int64_t timestamp);

  std::size_t n() const noexcept { return n_; }
  std::int64_t timestamp() const noexcept { return timestamp_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  std::span<const double> entries() const noexcept { return entries_; }

  TrafficMatrix with_timestamp(std::int64_t timestamp) const;

  friend bool operator==(const TrafficMatrix&, const TrafficMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<double> entries_;
  std::int64_t timestamp_;
};

/// Row-major flattening of a traffic matrix. Values are not constrained to be
/// non-negative because raw model outputs travel in this type too.
struct TrafficVector {
  std::size_t n = 0;
  std::vector<double> values;

  TrafficVector() = default;
  TrafficVector(std::size_t n, std::vector<double> values);

  std::size_t size() const noexcept { return values.size(); }
  friend bool operator==(const TrafficVector&, const TrafficVector&) = default;
};

/// Time-ordered matrices at a uniform sampling interval.
class TrafficSeries {
 public:
  TrafficSeries() = default;
  TrafficSeries(std::vector<TrafficMatrix> matrices, std::int64_t interval_seconds,
                std::string unit = "bytes");

  std::size_t size() const noexcept { return matrices_.size(); }
  bool empty() const noexcept { return matrices_.empty(); }
  std::size_t n() const noexcept { return matrices_.empty() ? 0 : matrices_.front().n(); }
  std::int64_t interval_seconds() const noexcept { return interval_seconds_; }
  const std::string& unit() const noexcept { return unit_; }
  const TrafficMatrix& operator[](std::size_t k) const { return matrices_[k]; }
  const std::vector<TrafficMatrix>& matrices() const noexcept { return matrices_; }

  /// Contiguous sub-range [begin, begin+count).
  TrafficSeries slice(std::size_t begin, std::size_t count) const;

  /// Scalar sequence of one OD pair over time, addressed by flatten index.
  std::vector<double> od_series(std::size_t flat_index) const;

  /// Largest entry over every matrix.
  double max_entry() const;

  friend bool operator==(const TrafficSeries&, const TrafficSeries&) = default;

 private:
  std::vector<TrafficMatrix> matrices_;
  std::int64_t interval_seconds_ = 0;
  std::string unit_ = "bytes";
};

/// W consecutive traffic vectors (row k is time t-W+k) plus the vector at t
/// when the window is a training sample.
struct WindowMatrix {
  std::size_t w = 0;
  std::size_t n2 = 0;
  Eigen::MatrixXd rows;
  std::vector<std::int64_t> row_timestamps;
  std::optional<Eigen::VectorXd> target;
  std::optional<std::int64_t> target_timestamp;
};

struct NormParams {
  double max_value = 1.0;
  std::string computed_on = "train-only";
};

struct SplitSpec {
  std::size_t train_len = 0;
  std::size_t test_len = 0;
};

TrafficVector flatten(const TrafficMatrix& m);

/// Inverse of `flatten`. Throws LengthNotSquare when the length is not n*n.
TrafficMatrix unflatten(const TrafficVector& v, std::int64_t timestamp = 0);

/// Supervised samples with targets at t = w, w+stride, ... < T.
/// Count is floor((T-w-1)/stride)+1. Throws SeriesTooShort when T <= w.
std::vector<WindowMatrix> make_windows(const TrafficSeries& s, std::size_t w,
                                       std::size_t stride = 1);

/// Inference window built from the last `w` matrices, no target.
WindowMatrix last_window(const TrafficSeries& s, std::size_t w);

TrafficSeries normalize(const TrafficSeries& s, const NormParams& params);
TrafficSeries denormalize(const TrafficSeries& s, const NormParams& params);
TrafficVector denormalize(const TrafficVector& v, const NormParams& params);

/// Max over the training split. Throws DegenerateSeries if it is zero.
NormParams fit_norm(const TrafficSeries& train);

/// Chronological split, earliest `train_len` matrices first.
std::pair<TrafficSeries, TrafficSeries> split(const TrafficSeries& s, const SplitSpec& spec);

}  // namespace tmpredict

#endif  // TMPREDICT_TRAFFIC_HPP
