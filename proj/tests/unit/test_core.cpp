#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"
#include "tmpredict/error.hpp"
#include "tmpredict/synthetic.hpp"
#include "tmpredict/traffic.hpp"

using namespace tmpredict;
using tmpredict::testing::random_matrix;
using tmpredict::testing::random_series;

TEST(TrafficMatrix, RejectsNegativeAndNonFinite) {
  EXPECT_THROW_CODE(TrafficMatrix(2, {1, 2, -3, 4}, 0), InvalidMatrix);
  EXPECT_THROW_CODE(TrafficMatrix(1, {std::nan("")}, 0), InvalidMatrix);
  EXPECT_THROW_CODE(TrafficMatrix(2, {1, 2, 3}, 0), InvalidMatrix);
}

TEST(Flatten, TwoByTwoRowMajor) {
  const TrafficMatrix m(2, {1, 2, 3, 4}, 0);
  const auto v = flatten(m);
  EXPECT_EQ(v.values, (std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(v.values[1 * 2 + 0], m(1, 0));
}

TEST(Flatten, OneByOneAndFullSize) {
  EXPECT_EQ(flatten(TrafficMatrix(1, {7}, 0)).values, std::vector<double>{7});
  std::mt19937_64 rng(1);
  EXPECT_EQ(flatten(random_matrix(rng, 23, 0)).size(), 529u);
}

TEST(Unflatten, InverseAndErrors) {
  const TrafficVector v(2, {1, 2, 3, 4});
  EXPECT_EQ(unflatten(v, 5), TrafficMatrix(2, {1, 2, 3, 4}, 5));
  EXPECT_EQ(unflatten(TrafficVector(1, {7})), TrafficMatrix(1, {7}, 0));
  EXPECT_THROW_CODE(TrafficVector(2, {1, 2, 3}), LengthNotSquare);
}

TEST(FlattenProperty, RoundTripAndIndexLaw) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::size_t> pick_n(1, 23);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = pick_n(rng);
    const TrafficMatrix m = random_matrix(rng, n, trial);
    const TrafficVector v = flatten(m);
    EXPECT_EQ(unflatten(v, m.timestamp()), m);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const std::size_t i = pick(rng);
    const std::size_t j = pick(rng);
    EXPECT_EQ(v.values[i * n + j], m(i, j));
  }
}

TEST(TrafficSeries, RejectsMixedNAndNonUniform) {
  std::mt19937_64 rng(3);
  EXPECT_THROW_CODE(TrafficSeries({random_matrix(rng, 2, 0), random_matrix(rng, 3, 900)}, 900), MixedN);
  EXPECT_THROW_CODE(TrafficSeries({random_matrix(rng, 2, 0), random_matrix(rng, 2, 1800)}, 900),
                    NonUniformSeries);
}

TEST(MakeWindows, CountsAndTargets) {
  std::mt19937_64 rng(5);
  const auto s = random_series(rng, 2, 5);
  const auto w = make_windows(s, 2);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(*w[0].target_timestamp, s[2].timestamp());
  EXPECT_EQ(*w[2].target_timestamp, s[4].timestamp());
  for (const auto& win : w) {
    EXPECT_EQ(win.rows.rows(), 2);
    EXPECT_EQ(win.rows.cols(), 4);
  }
  // row k of the first window is the vector at time k
  for (Eigen::Index c = 0; c < 4; ++c) EXPECT_EQ(w[0].rows(1, c), s[1].entries()[c]);
  for (Eigen::Index c = 0; c < 4; ++c) EXPECT_EQ((*w[1].target)(c), s[3].entries()[c]);
}

TEST(MakeWindows, FullSizeCountByEnumeration) {
  std::mt19937_64 rng(6);
  const auto s = random_series(rng, 1, 309);
  std::size_t expected = 0;
  for (std::size_t t = 10; t < 309; ++t) ++expected;
  EXPECT_EQ(make_windows(s, 10).size(), expected);
  EXPECT_EQ(expected, 299u);
}

TEST(MakeWindows, StrideAndShortSeries) {
  std::mt19937_64 rng(7);
  const auto s = random_series(rng, 1, 3);
  EXPECT_THROW_CODE(make_windows(s, 3), SeriesTooShort);
  const auto long_s = random_series(rng, 1, 23);
  // floor((23-5-1)/5)+1 = 4, targets at 5, 10, 15, 20
  const auto w = make_windows(long_s, 5, 5);
  ASSERT_EQ(w.size(), 4u);
  EXPECT_EQ(*w[3].target_timestamp, long_s[20].timestamp());
}

TEST(MakeWindowsProperty, NoFutureRowsAndCountFormula) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> pick(1, 12);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t w = pick(rng);
    const std::size_t stride = pick(rng);
    const std::size_t t = w + pick(rng) + 1;
    const auto s = random_series(rng, 1, t);
    const auto windows = make_windows(s, w, stride);
    EXPECT_EQ(windows.size(), (t - w - 1) / stride + 1);
    for (const auto& win : windows) {
      for (auto ts : win.row_timestamps) EXPECT_LT(ts, *win.target_timestamp);
    }
  }
}

TEST(Normalize, Examples) {
  const TrafficSeries s({TrafficMatrix(1, {0}, 0), TrafficMatrix(1, {5}, 900), TrafficMatrix(1, {10}, 1800)},
                        900);
  const auto norm = normalize(s, NormParams{10.0});
  EXPECT_EQ(norm[0](0, 0), 0.0);
  EXPECT_EQ(norm[1](0, 0), 0.5);
  EXPECT_EQ(norm[2](0, 0), 1.0);
  const TrafficSeries zeros({TrafficMatrix(1, {0}, 0), TrafficMatrix(1, {0}, 900)}, 900);
  EXPECT_EQ(normalize(zeros, NormParams{4.0}), zeros);
  EXPECT_THROW_CODE(normalize(s, NormParams{0.0}), NonPositiveMax);
}

TEST(NormalizeProperty, RoundTripWithinRelativeTolerance) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_series(rng, 3, 5, 900, 1e6);
    const NormParams p = fit_norm(s);
    const auto back = denormalize(normalize(s, p), p);
    for (std::size_t k = 0; k < s.size(); ++k) {
      for (std::size_t e = 0; e < 9; ++e) {
        EXPECT_NEAR(back[k].entries()[e], s[k].entries()[e], 1e-12 * std::max(1.0, s[k].entries()[e]));
      }
    }
  }
}

TEST(FitNorm, ExamplesAndDegenerate) {
  const TrafficSeries s({TrafficMatrix(1, {1}, 0), TrafficMatrix(1, {2}, 900), TrafficMatrix(1, {3}, 1800)},
                        900);
  EXPECT_EQ(fit_norm(s).max_value, 3.0);
  EXPECT_EQ(fit_norm(s).computed_on, "train-only");
  const TrafficSeries zeros({TrafficMatrix(1, {0}, 0), TrafficMatrix(1, {0}, 900)}, 900);
  EXPECT_THROW_CODE(fit_norm(zeros), DegenerateSeries);
}

TEST(FitNorm, SyntheticTrainSplitMatchesBruteForce) {
  SyntheticConfig sc;
  sc.seed = 11;
  const auto s = synthesize(sc);
  const auto [train, test] = split(s, SplitSpec{263, 46});
  double brute = 0.0;
  for (std::size_t t = 0; t < 263; ++t) {
    for (std::size_t od = 0; od < 529; ++od) brute = std::max(brute, s[t].entries()[od]);
  }
  EXPECT_EQ(fit_norm(train).max_value, brute);
}

// Train-only scope: test values above the train max stay above 1 and are
// never clamped; the parameters ignore the test split entirely.
TEST(NormalizeProperty, TrainOnlyScope) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> boost(1.0, 5.0);
  for (int trial = 0; trial < 120; ++trial) {
    const auto s = random_series(rng, 2, 12);
    const auto [train, test] = split(s, SplitSpec{8, 4});
    const NormParams p = fit_norm(train);
    EXPECT_EQ(p.max_value, train.max_entry());

    // Inflate the test split; the train-fitted parameters must not move.
    std::vector<TrafficMatrix> inflated;
    const double factor = boost(rng);
    for (const auto& m : test.matrices()) {
      std::vector<double> e(m.entries().begin(), m.entries().end());
      for (auto& v : e) v = v * factor + p.max_value;
      inflated.emplace_back(2, std::move(e), m.timestamp());
    }
    std::vector<TrafficMatrix> all = train.matrices();
    all.insert(all.end(), inflated.begin(), inflated.end());
    const auto [train2, test2] = split(TrafficSeries(all, 900), SplitSpec{8, 4});
    EXPECT_EQ(fit_norm(train2).max_value, p.max_value);

    const auto ntrain = normalize(train2, p);
    const auto ntest = normalize(test2, p);
    for (const auto& m : ntrain.matrices()) {
      for (double v : m.entries()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
    }
    bool above = false;
    for (const auto& m : ntest.matrices()) {
      for (double v : m.entries()) above = above || v > 1.0;
    }
    EXPECT_TRUE(above);
  }
}

TEST(Split, Examples) {
  std::mt19937_64 rng(12);
  const auto s = random_series(rng, 1, 309);
  const auto [train, test] = split(s, SplitSpec{263, 46});
  EXPECT_EQ(train.size(), 263u);
  EXPECT_EQ(test.size(), 46u);
  EXPECT_EQ(test[0], s[263]);
  const auto two = random_series(rng, 1, 2);
  const auto [a, b] = split(two, SplitSpec{1, 1});
  EXPECT_EQ(a[0], two[0]);
  EXPECT_EQ(b[0], two[1]);
  EXPECT_THROW_CODE(split(s, SplitSpec{300, 46}), BadSplit);
  EXPECT_THROW_CODE(split(two, SplitSpec{2, 0}), BadSplit);
}

TEST(SplitProperty, ConcatenationIdentity) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::size_t> pick(2, 30);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t t = pick(rng);
    const auto s = random_series(rng, 2, t);
    std::uniform_int_distribution<std::size_t> cut(1, t - 1);
    const std::size_t k = cut(rng);
    const auto [a, b] = split(s, SplitSpec{k, t - k});
    std::vector<TrafficMatrix> joined = a.matrices();
    joined.insert(joined.end(), b.matrices().begin(), b.matrices().end());
    EXPECT_EQ(TrafficSeries(joined, s.interval_seconds()), s);
  }
}

TEST(Synthetic, ShapeAndDeterminism) {
  SyntheticConfig sc;
  sc.seed = 3;
  const auto a = synthesize(sc);
  EXPECT_EQ(a.n(), 23u);
  EXPECT_EQ(a.size(), 309u);
  EXPECT_EQ(a.interval_seconds(), 900);
  EXPECT_EQ(a, synthesize(sc));
  sc.seed = 4;
  EXPECT_FALSE(a == synthesize(sc));
}
