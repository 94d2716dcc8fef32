#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "test_support.hpp"
#include "tmpredict/error.hpp"
#include "tmpredict/linear.hpp"
#include "tmpredict/synthetic.hpp"

using namespace tmpredict;

namespace {

std::vector<double> ar1(std::uint64_t seed, std::size_t n, double phi, double sigma = 1.0, double mean = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, sigma);
  std::vector<double> x(n + 200);
  x[0] = z(rng);
  for (std::size_t t = 1; t < x.size(); ++t) x[t] = phi * x[t - 1] + z(rng);
  std::vector<double> out(x.begin() + 200, x.end());
  for (auto& v : out) v += mean;
  return out;
}

std::vector<double> arma11(std::uint64_t seed, std::size_t n, double phi, double theta) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> x(n + 200);
  double prev_z = 0.0;
  double prev_x = 0.0;
  for (auto& v : x) {
    const double e = z(rng);
    v = phi * prev_x + e + theta * prev_z;
    prev_x = v;
    prev_z = e;
  }
  return std::vector<double>(x.begin() + 200, x.end());
}

}  // namespace

// ---------------------------------------------------------------------------
// Statistics and innovations

TEST(SampleAcvf, MatchesDirectLoop) {
  const auto x = ar1(1, 300, 0.6);
  const auto g = sample_acvf(x, 5);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  for (std::size_t h = 0; h <= 5; ++h) {
    double s = 0.0;
    for (std::size_t t = 0; t + h < x.size(); ++t) s += (x[t] - mean) * (x[t + h] - mean);
    EXPECT_NEAR(g[h], s / x.size(), 1e-12);
  }
}

TEST(YuleWalker, RecoversAr2FromTheoreticalAcvf) {
  ArmaModel m;
  m.p = 2;
  m.phi = {0.5, -0.3};
  m.sigma2 = 2.0;
  const auto g = arma_acvf(m, 5);
  const auto fit = yule_walker(g, 2);
  EXPECT_NEAR(fit.phi[0], 0.5, 1e-12);
  EXPECT_NEAR(fit.phi[1], -0.3, 1e-12);
  EXPECT_NEAR(fit.sigma2, 2.0, 1e-12);
}

TEST(Innovations, WhiteNoise) {
  const std::vector<double> acvf{2.0};
  const auto t = innovations(acvf, 10);
  for (std::size_t n = 1; n <= 10; ++n) {
    for (std::size_t j = 1; j <= n; ++j) EXPECT_EQ(t.theta_at(n, j), 0.0);
  }
  for (double v : t.v) EXPECT_EQ(v, 2.0);
}

TEST(Innovations, Ma1CoefficientConverges) {
  const std::vector<double> acvf{1.25, 0.5};
  const auto t = innovations(acvf, 50);
  EXPECT_NEAR(t.theta_at(50, 1), 0.5, 1e-3);
  for (std::size_t j = 2; j <= 50; ++j) EXPECT_NEAR(t.theta_at(50, j), 0.0, 1e-12);
}

TEST(Innovations, Ar1VariancesDecreaseToSigma2) {
  ArmaModel m;
  m.p = 1;
  m.phi = {0.9};
  m.sigma2 = 1.0;
  const auto t = innovations(arma_acvf(m, 40), 40);
  for (std::size_t k = 1; k < t.v.size(); ++k) {
    EXPECT_GT(t.v[k], 0.0);
    EXPECT_LE(t.v[k], t.v[k - 1] + 1e-12);
  }
  EXPECT_NEAR(t.v.back(), 1.0, 1e-9);
}

TEST(Innovations, SingularCovariance) {
  const std::vector<double> acvf{1.0, 1.0};  // perfectly correlated: v_1 = 0
  EXPECT_THROW_CODE(innovations(acvf, 3), SingularCovariance);
}

// ---------------------------------------------------------------------------
// ARMA

TEST(ArmaForecast, Ar1ByHand) {
  ArmaModel m;
  m.p = 1;
  m.phi = {0.5};
  const std::vector<double> history{1, 3, 4};
  const auto f = arma_forecast(m, history, 2);
  EXPECT_DOUBLE_EQ(f[0], 2.0);
  EXPECT_DOUBLE_EQ(f[1], 1.0);
}

TEST(ArmaForecast, WhiteNoiseGivesMean) {
  ArmaModel m;
  m.mean = 3.5;
  const std::vector<double> history{1, 9, 2};
  for (double v : arma_forecast(m, history, 5)) EXPECT_EQ(v, 3.5);
}

TEST(ArmaForecast, Ar1GeometricDecay) {
  const auto x = ar1(2, 500, 0.7, 1.0, 10.0);
  const auto m = arma_fit(x, 1, 0);
  const auto f = arma_forecast(m, x, 8);
  for (std::size_t h = 1; h <= 8; ++h) {
    EXPECT_NEAR(f[h - 1] - m.mean, std::pow(m.phi[0], static_cast<double>(h)) * (x.back() - m.mean), 1e-12);
  }
}

TEST(ArmaForecast, Ma1MatchesIndependentInnovationsRecursion) {
  const double theta = 0.5;
  const double mean = 2.0;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> x(300);
  double prev = 0.0;
  for (auto& v : x) {
    const double e = z(rng);
    v = mean + e + theta * prev;
    prev = e;
  }
  ArmaModel m;
  m.q = 1;
  m.theta = {theta};
  m.mean = mean;

  // MA(1) innovations by hand: v_0 = g0, th_n = g1 / v_{n-1},
  // v_n = g0 - th_n^2 v_{n-1}, xhat_{n+1} = th_n (x_n - xhat_n).
  const double g0 = 1.0 + theta * theta;
  const double g1 = theta;
  double v = g0;
  double xhat = 0.0;
  for (std::size_t n = 1; n <= x.size(); ++n) {
    const double th = g1 / v;
    v = g0 - th * th * v;
    xhat = th * ((x[n - 1] - mean) - xhat);
    if (n % 7 == 0 || n == x.size()) {
      const std::span<const double> hist(x.data(), n);
      EXPECT_NEAR(arma_forecast(m, hist, 1)[0], xhat + mean, 1e-8) << "n=" << n;
    }
  }
}

TEST(ArmaForecast, HistoryTooShort) {
  ArmaModel m;
  m.p = 2;
  m.phi = {0.2, 0.1};
  const std::vector<double> one{1.0};
  EXPECT_THROW_CODE(arma_forecast(m, one, 1), HistoryTooShort);
}

TEST(ArmaFit, Ar1Recovery) {
  const auto x = ar1(4, 10000, 0.8);
  const auto m = arma_fit(x, 1, 0);
  EXPECT_GE(m.phi[0], 0.7);
  EXPECT_LE(m.phi[0], 0.9);
  EXPECT_NEAR(m.sigma2, 1.0, 0.1);
}

TEST(ArmaFit, HannanRissanenArma11) {
  const auto x = arma11(5, 20000, 0.5, 0.3);
  const auto m = arma_fit(x, 1, 1);
  EXPECT_NEAR(m.phi[0], 0.5, 0.1);
  EXPECT_NEAR(m.theta[0], 0.3, 0.1);
}

TEST(ArmaFit, ConstantSeriesIsNearSingular) {
  const std::vector<double> x(100, 4.0);
  const auto m = arma_fit(x, 2, 1);
  EXPECT_TRUE(m.near_singular);
  EXPECT_EQ(arma_forecast(m, x, 3), std::vector<double>(3, 4.0));
}

TEST(ArmaFit, TooShortAndCausality) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  EXPECT_THROW_CODE(arma_fit(x, 1, 1), TooShort);
  const std::vector<double> causal{0.5};
  const std::vector<double> unit_root{1.0};
  const std::vector<double> explosive{0.3, 0.8};
  EXPECT_TRUE(is_causal(causal));
  EXPECT_FALSE(is_causal(unit_root));
  EXPECT_FALSE(is_causal(explosive));
}

// ---------------------------------------------------------------------------
// ARAR

namespace {

nlohmann::json arar_reference() {
  std::ifstream in(TMPREDICT_TEST_DATA_DIR "/arar_reference.json");
  return nlohmann::json::parse(in);
}

void expect_xi_reconvolves(const ArarModel& m) {
  // xi(B) = psi(B) phi(B), recomputed by an explicit double loop.
  std::vector<double> psi{1.0};
  psi.insert(psi.end(), m.psi.begin(), m.psi.end());
  std::vector<double> phi(m.lags[3] + 1, 0.0);
  phi[0] = 1.0;
  for (int k = 0; k < 4; ++k) phi[m.lags[k]] -= m.phi_lags[k];
  std::vector<double> xi(psi.size() + phi.size() - 1, 0.0);
  for (std::size_t a = 0; a < psi.size(); ++a) {
    for (std::size_t b = 0; b < phi.size(); ++b) xi[a + b] += psi[a] * phi[b];
  }
  ASSERT_EQ(m.xi.size(), xi.size() - 1);
  for (std::size_t k = 1; k < xi.size(); ++k) EXPECT_NEAR(m.xi[k - 1], xi[k], 1e-10);
}

}  // namespace

TEST(Arar, MatchesReferenceImplementation) {
  const auto ref = arar_reference();
  ASSERT_GE(ref["cases"].size(), 3u);
  for (const auto& c : ref["cases"]) {
    SCOPED_TRACE(c["name"].get<std::string>());
    const auto y = c["series"].get<std::vector<double>>();
    const auto m = arar_fit(y);
    const auto psi = c["psi"].get<std::vector<double>>();
    ASSERT_EQ(m.psi.size(), psi.size());
    for (std::size_t k = 0; k < psi.size(); ++k) EXPECT_NEAR(m.psi[k], psi[k], 1e-9);
    const auto lags = c["lags"].get<std::vector<std::size_t>>();
    for (int k = 0; k < 4; ++k) EXPECT_EQ(m.lags[k], lags[k]);
    const auto expected = c["forecast"].get<std::vector<double>>();
    const auto f = arar_forecast(m, y, expected.size());
    for (std::size_t h = 0; h < expected.size(); ++h) EXPECT_NEAR(f[h], expected[h], 1e-6);
    expect_xi_reconvolves(m);
  }
}

TEST(Arar, WhiteNoiseIsNotShortened) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> x(300);
  for (auto& v : x) v = z(rng);
  EXPECT_TRUE(arar_shorten(x).psi.empty());
}

TEST(Arar, RandomWalkAndRampAreShortened) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> walk(300);
  double acc = 0.0;
  for (auto& v : walk) v = (acc += z(rng));
  EXPECT_FALSE(arar_shorten(walk).psi.empty());
  std::vector<double> ramp(100);
  std::iota(ramp.begin(), ramp.end(), 1.0);
  EXPECT_FALSE(arar_shorten(ramp).psi.empty());
}

TEST(Arar, ConstantSeriesForecastsConstantExactly) {
  const std::vector<double> x(60, 7.25);
  const auto m = arar_fit(x);
  for (double v : arar_forecast(m, x, 5)) EXPECT_EQ(v, 7.25);
}

TEST(Arar, ReconvolutionOnLongMemorySeries) {
  SyntheticConfig sc;
  sc.seed = 8;
  sc.nodes = 1;
  sc.slots = 400;
  const auto s = synthesize(sc);
  expect_xi_reconvolves(arar_fit(s.od_series(0)));
}

TEST(Arar, HandCheckedLagOneModel) {
  ArarModel m;
  m.lags = {1, 2, 3, 4};
  m.phi_lags = {0.5, 0.0, 0.0, 0.0};
  m.xi = {-0.5, 0.0, 0.0, 0.0};
  m.s_bar = 2.0;
  m.phi1_sum = 0.5;
  const std::vector<double> y{1, 2, 3, 4, 5};
  const auto f = arar_forecast(m, y, 2);
  EXPECT_DOUBLE_EQ(f[0], 0.5 * 5 + 0.5 * 2.0);
  EXPECT_DOUBLE_EQ(f[1], 0.5 * f[0] + 0.5 * 2.0);
  EXPECT_EQ(arar_predict(m, y, 0), 5.0);
  EXPECT_EQ(arar_predict(m, y, -2), 3.0);
  EXPECT_DOUBLE_EQ(arar_predict(m, y, 1), f[0]);
}

TEST(Arar, Errors) {
  const std::vector<double> short_series(20, 1.0);
  EXPECT_THROW_CODE(arar_fit(short_series), TooShort);
  ArarModel m;
  m.xi = std::vector<double>(10, 0.0);
  const std::vector<double> y{1, 2, 3};
  EXPECT_THROW_CODE(arar_forecast(m, y, 1), HistoryTooShort);
}

// ---------------------------------------------------------------------------
// Holt-Winters

TEST(HoltWinters, LinearSeriesIsAFixedPoint) {
  std::vector<double> y(50);
  for (std::size_t t = 0; t < y.size(); ++t) y[t] = 2.0 + 3.0 * static_cast<double>(t + 1);
  for (double alpha : {0.02, 0.3, 0.98}) {
    for (double beta : {0.02, 0.5, 0.98}) EXPECT_LT(hw_run(alpha, beta, y).sse, 1e-18);
  }
  const auto m = hw_fit(y);
  const auto f = hw_forecast(m, 3);
  for (std::size_t h = 1; h <= 3; ++h) EXPECT_NEAR(f[h - 1], 2.0 + 3.0 * (50.0 + h), 1e-9);
}

TEST(HoltWinters, ConstantSeries) {
  const std::vector<double> y(20, 4.0);
  const auto m = hw_fit(y);
  EXPECT_EQ(m.slope, 0.0);
  EXPECT_EQ(hw_forecast(m, 4), std::vector<double>(4, 4.0));
}

TEST(HoltWinters, ForecastFormula) {
  HwModel m;
  m.level = 10.0;
  m.slope = 2.0;
  EXPECT_EQ(hw_forecast(m, 3), (std::vector<double>{12, 14, 16}));
  m.slope = 0.0;
  EXPECT_EQ(hw_forecast(m, 2), (std::vector<double>{10, 10}));
}

TEST(HoltWinters, UpdateThenForecastByHand) {
  // a_2 = 3, b_2 = 2; Y_3 = 6, Y_4 = 6 with alpha = 0.5, beta = 0.5
  // a_3 = 0.5*6 + 0.5*(3+2) = 5.5, b_3 = 0.5*(5.5-3) + 0.5*2 = 2.25
  // a_4 = 0.5*6 + 0.5*(5.5+2.25) = 6.875, b_4 = 0.5*(6.875-5.5) + 0.5*2.25 = 1.8125
  const std::vector<double> y{1, 3, 6, 6};
  const auto run = hw_run(0.5, 0.5, y);
  EXPECT_DOUBLE_EQ(run.model.level, 6.875);
  EXPECT_DOUBLE_EQ(run.model.slope, 1.8125);
  const auto three = hw_run(0.5, 0.5, std::span<const double>(y.data(), 3));
  const auto updated = hw_update(three.model, 6.0);
  EXPECT_DOUBLE_EQ(updated.level, run.model.level);
  EXPECT_DOUBLE_EQ(hw_forecast(updated, 2)[1], 6.875 + 2 * 1.8125);
}

TEST(HoltWinters, GridMatchesFineBruteForce) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> y(120);
  for (std::size_t t = 0; t < y.size(); ++t) y[t] = 10.0 + 0.2 * t + 3.0 * std::sin(t / 9.0) + z(rng);

  auto sse = [&](double a, double b) {
    double level = y[1];
    double slope = y[1] - y[0];
    double s = 0.0;
    for (std::size_t i = 2; i < y.size(); ++i) {
      const double e = y[i] - level - slope;
      s += e * e;
      const double nl = a * y[i] + (1 - a) * (level + slope);
      slope = b * (nl - level) + (1 - b) * slope;
      level = nl;
    }
    return s;
  };
  double best = INFINITY;
  double ba = 0.0;
  double bb = 0.0;
  for (int i = 1; i < 200; ++i) {
    for (int j = 1; j < 200; ++j) {
      const double s = sse(i * 0.005, j * 0.005);
      if (s < best) {
        best = s;
        ba = i * 0.005;
        bb = j * 0.005;
      }
    }
  }
  const auto m = hw_fit(y);
  EXPECT_LE(std::abs(m.alpha - ba), 0.02 + 1e-12);
  EXPECT_LE(std::abs(m.beta - bb), 0.02 + 1e-12);
  EXPECT_NEAR(hw_run(m.alpha, m.beta, y).sse, sse(m.alpha, m.beta), 1e-9);
}

TEST(HoltWinters, TooShort) {
  const std::vector<double> y{1, 2};
  EXPECT_THROW_CODE(hw_fit(y), TooShort);
}

// ---------------------------------------------------------------------------
// Per-OD

TEST(VectorForecast, SingleNodeReducesToScalar) {
  const auto x = ar1(10, 120, 0.6, 1.0, 20.0);
  const auto s = tmpredict::testing::scalar_series(x);
  const LinearConfig cfg;
  for (auto kind : {LinearKind::Arma, LinearKind::Arar, LinearKind::HoltWinters}) {
    const auto v = vector_forecast(kind, s, cfg);
    double scalar = 0.0;
    switch (kind) {
      case LinearKind::Arma: scalar = arma_forecast(arma_fit(x, 2, 1), x, 1)[0]; break;
      case LinearKind::Arar: scalar = arar_forecast(arar_fit(x), x, 1)[0]; break;
      case LinearKind::HoltWinters: {
        const auto m = hw_fit(x);
        scalar = hw_forecast(hw_run(m.alpha, m.beta, x).model, 1)[0];
      } break;
    }
    EXPECT_EQ(v.values[0], std::max(0.0, scalar));
  }
}

TEST(VectorForecast, ConstantOdsFallBackToLastVector) {
  const auto s = tmpredict::testing::scalar_series(std::vector<double>(40, 3.0), 3);
  for (auto kind : {LinearKind::Arma, LinearKind::Arar, LinearKind::HoltWinters}) {
    const auto fit = fit_per_od(kind, s, LinearConfig{});
    EXPECT_EQ(fit.fallback_ods.size(), 9u);
    EXPECT_EQ(fit.fallback_reasons.front(), "constant series");
    EXPECT_EQ(forecast_per_od(fit, s), flatten(s[s.size() - 1]));
  }
}

TEST(VectorForecast, EqualsScalarLoopOnSyntheticData) {
  SyntheticConfig sc;
  sc.seed = 11;
  sc.slots = 80;
  const auto s = synthesize(sc);
  const LinearConfig cfg;
  for (auto kind : {LinearKind::Arma, LinearKind::Arar, LinearKind::HoltWinters}) {
    const auto v = vector_forecast(kind, s, cfg);
    ASSERT_EQ(v.size(), 529u);
    for (std::size_t od = 0; od < 529; od += 37) {
      const auto series = s.od_series(od);
      const double scalar = forecast_od(fit_od(kind, series, cfg), series);
      EXPECT_EQ(v.values[od], std::max(0.0, scalar));
    }
  }
}
