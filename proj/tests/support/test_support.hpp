#ifndef TMPREDICT_TEST_SUPPORT_HPP
#define TMPREDICT_TEST_SUPPORT_HPP

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tmpredict/traffic.hpp"

namespace tmpredict::testing {

inline TrafficMatrix random_matrix(std::mt19937_64& rng, std::size_t n, std::int64_t ts,
                                   double scale = 100.0) {
  std::uniform_real_distribution<double> u(0.0, scale);
  std::vector<double> e(n * n);
  for (auto& v : e) v = u(rng);
  return TrafficMatrix(n, std::move(e), ts);
}

inline TrafficSeries random_series(std::mt19937_64& rng, std::size_t n, std::size_t t,
                                   std::int64_t interval = 900, double scale = 100.0) {
  std::vector<TrafficMatrix> ms;
  for (std::size_t k = 0; k < t; ++k) {
    ms.push_back(random_matrix(rng, n, static_cast<std::int64_t>(k) * interval, scale));
  }
  return TrafficSeries(std::move(ms), interval);
}

/// Series whose every entry at slot k equals values[k].
inline TrafficSeries scalar_series(const std::vector<double>& values, std::size_t n = 1,
                                   std::int64_t interval = 900) {
  std::vector<TrafficMatrix> ms;
  for (std::size_t k = 0; k < values.size(); ++k) {
    ms.emplace_back(n, std::vector<double>(n * n, values[k]), static_cast<std::int64_t>(k) * interval);
  }
  return TrafficSeries(std::move(ms), interval);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tmpredict-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

#define EXPECT_THROW_CODE(stmt, expected)                                  \
  do {                                                                     \
    try {                                                                  \
      stmt;                                                                \
      ADD_FAILURE() << "expected " #expected;                              \
    } catch (const ::tmpredict::Error& e) {                                \
      EXPECT_EQ(e.code(), ::tmpredict::ErrorCode::expected) << e.what();  \
    }                                                                      \
  } while (0)

}  // namespace tmpredict::testing

#endif  // TMPREDICT_TEST_SUPPORT_HPP
