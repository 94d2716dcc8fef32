#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "tmpredict/error.hpp"
#include "tmpredict/linear.hpp"

namespace tmpredict {

namespace {

double coef(const std::vector<double>& c, std::size_t k) {
  return (k >= 1 && k <= c.size()) ? c[k - 1] : 0.0;
}

// Extended MA polynomial with theta_0 = 1.
double theta_ext(const ArmaModel& model, std::size_t k) {
  return k == 0 ? 1.0 : coef(model.theta, k);
}

}  // namespace

std::vector<double> arma_acvf(const ArmaModel& model, std::size_t max_lag) {
  const std::size_t p = model.phi.size();
  const std::size_t q = model.theta.size();

  // psi weights of the causal MA(infinity) representation, up to lag q.
  std::vector<double> psi(q + 1, 0.0);
  psi[0] = 1.0;
  for (std::size_t j = 1; j <= q; ++j) {
    double s = theta_ext(model, j);
    for (std::size_t k = 1; k <= std::min(j, p); ++k) s += model.phi[k - 1] * psi[j - k];
    psi[j] = s;
  }
  auto rhs = [&](std::size_t k) {
    double s = 0.0;
    for (std::size_t j = k; j <= q; ++j) s += theta_ext(model, j) * psi[j - k];
    return model.sigma2 * s;
  };

  // gamma(k) - sum_r phi_r gamma(|k-r|) = rhs(k), k = 0..p.
  const auto dim = static_cast<Eigen::Index>(p + 1);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd b(dim);
  for (std::size_t k = 0; k <= p; ++k) {
    a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) += 1.0;
    for (std::size_t r = 1; r <= p; ++r) {
      const std::size_t lag = k >= r ? k - r : r - k;
      a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(lag)) -= model.phi[r - 1];
    }
    b(static_cast<Eigen::Index>(k)) = rhs(k);
  }
  const Eigen::VectorXd head = a.colPivHouseholderQr().solve(b);

  std::vector<double> gamma(std::max(max_lag, p) + 1, 0.0);
  for (std::size_t k = 0; k <= p; ++k) gamma[k] = head(static_cast<Eigen::Index>(k));
  for (std::size_t k = p + 1; k < gamma.size(); ++k) {
    double s = rhs(k);
    for (std::size_t r = 1; r <= p; ++r) s += model.phi[r - 1] * gamma[k - r];
    gamma[k] = s;
  }
  gamma.resize(max_lag + 1);
  return gamma;
}

bool is_causal(std::span<const double> phi) {
  const auto p = static_cast<Eigen::Index>(phi.size());
  if (p == 0) return true;
  // Roots of phi(z) outside the unit circle <=> eigenvalues of the companion
  // matrix of z^p - phi_1 z^{p-1} - ... - phi_p inside it.
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) companion(0, j) = phi[static_cast<std::size_t>(j)];
  for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
  const Eigen::VectorXcd eig = companion.eigenvalues();
  for (Eigen::Index i = 0; i < p; ++i) {
    if (!(std::abs(eig(i)) < 1.0)) return false;
  }
  return true;
}

ArmaModel arma_fit(std::span<const double> series, std::size_t p, std::size_t q) {
  const std::size_t n = series.size();
  if (n < std::max<std::size_t>(10 * (p + q), 2)) {
    throw Error(ErrorCode::TooShort, "ARMA(" + std::to_string(p) + "," + std::to_string(q) +
                                         ") needs " + std::to_string(10 * (p + q)) +
                                         " points, got " + std::to_string(n));
  }
  ArmaModel model;
  model.p = p;
  model.q = q;
  model.mean = sample_mean(series);
  model.phi.assign(p, 0.0);
  model.theta.assign(q, 0.0);

  std::vector<double> x(series.begin(), series.end());
  for (double& v : x) v -= model.mean;
  const auto gamma = sample_acvf(x, std::max<std::size_t>(p, 1));
  if (!(gamma[0] > 1e-300) || gamma[0] <= 1e-14 * std::max(1.0, model.mean * model.mean)) {
    model.sigma2 = 0.0;
    model.near_singular = true;
    return model;
  }

  if (q == 0) {
    if (p > 0) {
      const auto acvf = sample_acvf(x, p);
      const auto yw = yule_walker(acvf, p);
      model.phi = yw.phi;
      model.sigma2 = yw.sigma2;
    } else {
      model.sigma2 = gamma[0];
    }
  } else {
    // Hannan-Rissanen: long AR residuals stand in for the unobserved
    // innovations, then one least-squares regression on lagged X and Z.
    const double log_len = std::ceil(10.0 * std::log10(static_cast<double>(n)));
    const std::size_t long_order = std::clamp<std::size_t>(static_cast<std::size_t>(log_len),
                                                           p + q + 1, std::max<std::size_t>(n / 4, p + q + 1));
    const auto long_ar = yule_walker(sample_acvf(x, long_order), long_order);
    std::vector<double> z(n, 0.0);
    for (std::size_t t = long_order; t < n; ++t) {
      double pred = 0.0;
      for (std::size_t k = 1; k <= long_order; ++k) pred += long_ar.phi[k - 1] * x[t - k];
      z[t] = x[t] - pred;
    }
    const std::size_t first = long_order + q;
    if (first + p + q + 1 >= n) throw Error(ErrorCode::TooShort, "not enough points for Hannan-Rissanen");
    const auto rows = static_cast<Eigen::Index>(n - first);
    const auto cols = static_cast<Eigen::Index>(p + q);
    Eigen::MatrixXd design(rows, cols);
    Eigen::VectorXd target(rows);
    for (std::size_t t = first; t < n; ++t) {
      const auto r = static_cast<Eigen::Index>(t - first);
      for (std::size_t k = 1; k <= p; ++k) design(r, static_cast<Eigen::Index>(k - 1)) = x[t - k];
      for (std::size_t k = 1; k <= q; ++k) design(r, static_cast<Eigen::Index>(p + k - 1)) = z[t - k];
      target(r) = x[t];
    }
    const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(target);
    for (std::size_t k = 0; k < p; ++k) model.phi[k] = beta(static_cast<Eigen::Index>(k));
    for (std::size_t k = 0; k < q; ++k) model.theta[k] = beta(static_cast<Eigen::Index>(p + k));
    const Eigen::VectorXd resid = target - design * beta;
    model.sigma2 = resid.squaredNorm() / static_cast<double>(rows);
  }

  if (!is_causal(model.phi)) {
    throw Error(ErrorCode::NonCausalFit, "fitted AR polynomial has a root on or inside the unit circle");
  }
  if (!(model.sigma2 > 0.0)) {
    model.sigma2 = 0.0;
    model.near_singular = true;
  }
  return model;
}

namespace {

// Innovations coefficients for the transformed ARMA process (W_t = X_t/sigma
// for t <= m, phi(B)X_t/sigma after), whose covariance kappa(i,j) is banded
// once both indices pass m. For n >= m only theta_{n,1..q} are non-zero, so
// each row stores at most max(q, m) entries.
struct ArmaInnovations {
  std::vector<std::vector<double>> theta;  // theta[n-1][j-1] = theta_{n,j}
  std::vector<double> v;

  double at(std::size_t n, std::size_t j) const {
    if (n == 0 || j == 0 || j > theta[n - 1].size()) return 0.0;
    return theta[n - 1][j - 1];
  }
};

ArmaInnovations arma_innovations(const ArmaModel& model, std::size_t steps) {
  const std::size_t p = model.phi.size();
  const std::size_t q = model.theta.size();
  const std::size_t m = std::max(p, q);
  const auto gamma = arma_acvf(model, 2 * m + 1);
  const double s2 = model.sigma2;

  // 1-based indices as in the textbook recursion.
  auto kappa = [&](std::size_t i, std::size_t j) -> double {
    const std::size_t lo = std::min(i, j);
    const std::size_t hi = std::max(i, j);
    const std::size_t d = hi - lo;
    if (hi <= m) return gamma[d] / s2;
    if (lo <= m && hi <= 2 * m) {
      double s = gamma[d];
      for (std::size_t r = 1; r <= p; ++r) {
        const std::size_t lag = r >= d ? r - d : d - r;
        s -= model.phi[r - 1] * gamma[lag];
      }
      return s / s2;
    }
    if (lo > m) {
      double s = 0.0;
      for (std::size_t r = 0; r + d <= q; ++r) s += theta_ext(model, r) * theta_ext(model, r + d);
      return s;
    }
    return 0.0;
  };

  ArmaInnovations inn;
  inn.theta.resize(steps);
  inn.v.assign(steps + 1, 0.0);
  inn.v[0] = kappa(1, 1);
  for (std::size_t n = 1; n <= steps; ++n) {
    const std::size_t width = n < m ? n : std::min(n, q);
    auto& row = inn.theta[n - 1];
    row.assign(width, 0.0);
    // theta_{n,n-k} for k from n-width to n-1.
    for (std::size_t k = n - width; k < n; ++k) {
      double acc = kappa(n + 1, k + 1);
      for (std::size_t j = n - width; j < k; ++j) {
        acc -= inn.at(k, k - j) * row[n - j - 1] * inn.v[j];
      }
      row[n - k - 1] = acc / inn.v[k];
    }
    double v = kappa(n + 1, n + 1);
    for (std::size_t j = n - width; j < n; ++j) {
      const double t = row[n - j - 1];
      v -= t * t * inn.v[j];
    }
    if (!(v > 0.0)) {
      throw Error(ErrorCode::SingularCovariance, "ARMA innovations variance vanished at step " +
                                                     std::to_string(n));
    }
    inn.v[n] = v;
  }
  return inn;
}

}  // namespace

std::vector<double> arma_forecast(const ArmaModel& model, std::span<const double> history,
                                  std::size_t horizon) {
  const std::size_t p = model.phi.size();
  const std::size_t q = model.theta.size();
  const std::size_t m = std::max(p, q);
  const std::size_t n = history.size();
  if (n < std::max<std::size_t>(m, 1)) {
    throw Error(ErrorCode::HistoryTooShort, "need at least " + std::to_string(std::max<std::size_t>(m, 1)) +
                                                " observations, got " + std::to_string(n));
  }
  if (horizon == 0) return {};
  if (model.near_singular || (p == 0 && q == 0)) return std::vector<double>(horizon, model.mean);

  std::vector<double> x(history.begin(), history.end());
  for (double& v : x) v -= model.mean;

  const auto inn = arma_innovations(model, n + horizon - 1);

  // xhat[t] is the one-step predictor of x[t] (0-based) from x[0..t-1].
  std::vector<double> xhat(n + horizon, 0.0);
  auto observed = [&](std::size_t t) { return t < n ? x[t] : xhat[t]; };
  for (std::size_t k = 1; k <= n; ++k) {
    // Predict x_{k+1} (1-based) = x[k] (0-based) from the first k values.
    double pred = 0.0;
    if (k < m) {
      for (std::size_t j = 1; j <= k; ++j) pred += inn.at(k, j) * (x[k - j] - xhat[k - j]);
    } else {
      for (std::size_t r = 1; r <= p; ++r) pred += model.phi[r - 1] * x[k - r];
      for (std::size_t j = 1; j <= q; ++j) pred += inn.at(k, j) * (x[k - j] - xhat[k - j]);
    }
    xhat[k] = pred;
  }
  // h-step: unobserved innovations contribute zero.
  for (std::size_t h = 2; h <= horizon; ++h) {
    const std::size_t target = n + h - 1;  // 0-based index being predicted
    const std::size_t row = n + h - 1;     // theta_{n+h-1, j}
    double pred = 0.0;
    for (std::size_t r = 1; r <= p; ++r) pred += model.phi[r - 1] * observed(target - r);
    for (std::size_t j = h; j <= q; ++j) {
      pred += inn.at(row, j) * (x[target - j] - xhat[target - j]);
    }
    xhat[target] = pred;
  }

  std::vector<double> out(horizon);
  for (std::size_t h = 1; h <= horizon; ++h) out[h - 1] = xhat[n + h - 1] + model.mean;
  return out;
}

}  // namespace tmpredict
