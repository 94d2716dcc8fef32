#include <cmath>
#include <numeric>

#include "tmpredict/error.hpp"
#include "tmpredict/linear.hpp"

namespace tmpredict {

double sample_mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

std::vector<double> sample_acvf(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  const double mean = sample_mean(x);
  std::vector<double> gamma(max_lag + 1, 0.0);
  if (n == 0) return gamma;
  for (std::size_t h = 0; h <= max_lag && h < n; ++h) {
    double sum = 0.0;
    for (std::size_t t = 0; t + h < n; ++t) sum += (x[t] - mean) * (x[t + h] - mean);
    gamma[h] = sum / static_cast<double>(n);
  }
  return gamma;
}

YuleWalkerFit yule_walker(std::span<const double> acvf, std::size_t p) {
  if (acvf.size() < p + 1) throw Error(ErrorCode::SingularYuleWalker, "acvf too short for order");
  if (!(acvf[0] > 0.0)) throw Error(ErrorCode::SingularYuleWalker, "zero variance");
  YuleWalkerFit fit;
  std::vector<double> phi;
  double v = acvf[0];
  for (std::size_t k = 1; k <= p; ++k) {
    double num = acvf[k];
    for (std::size_t j = 1; j < k; ++j) num -= phi[j - 1] * acvf[k - j];
    const double reflection = num / v;
    std::vector<double> next(k);
    for (std::size_t j = 1; j < k; ++j) next[j - 1] = phi[j - 1] - reflection * phi[k - j - 1];
    next[k - 1] = reflection;
    phi = std::move(next);
    v *= 1.0 - reflection * reflection;
    if (!(v > 0.0)) {
      throw Error(ErrorCode::SingularYuleWalker,
                  "prediction variance vanished at order " + std::to_string(k));
    }
  }
  fit.phi = std::move(phi);
  fit.sigma2 = v;
  return fit;
}

InnovationsTable innovations(std::span<const double> acvf, std::size_t n) {
  if (acvf.empty() || !(acvf[0] > 0.0) || !std::isfinite(acvf[0])) {
    throw Error(ErrorCode::SingularCovariance, "acvf[0] must be positive and finite");
  }
  auto gamma = [&](std::size_t lag) { return lag < acvf.size() ? acvf[lag] : 0.0; };

  InnovationsTable table;
  table.theta.resize(n);
  table.v.assign(n + 1, 0.0);
  table.v[0] = gamma(0);
  for (std::size_t m = 1; m <= n; ++m) {
    auto& row = table.theta[m - 1];
    row.assign(m, 0.0);
    // row[j-1] = theta_{m,j}; fill theta_{m,m-k} for k = 0..m-1.
    for (std::size_t k = 0; k < m; ++k) {
      double acc = gamma(m - k);
      for (std::size_t j = 0; j < k; ++j) {
        acc -= table.theta_at(k, k - j) * row[m - j - 1] * table.v[j];
      }
      row[m - k - 1] = acc / table.v[k];
    }
    double v = gamma(0);
    for (std::size_t j = 0; j < m; ++j) v -= row[m - j - 1] * row[m - j - 1] * table.v[j];
    if (!(v > 0.0)) {
      throw Error(ErrorCode::SingularCovariance, "v_" + std::to_string(m) + " is not positive");
    }
    table.v[m] = v;
  }
  return table;
}

}  // namespace tmpredict
