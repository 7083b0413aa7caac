#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "wlnet/error.hpp"
#include "wlnet/net.hpp"
#include "wlnet/random.hpp"

namespace wlnet {

struct BenchRow {
  std::size_t n = 0;
  std::size_t channels = 0;
  std::size_t reps = 0;
  double median_seconds = 0;
  std::size_t tensor_bytes = 0;  // inputs + output of one feature_matmul call
};

inline double median(std::vector<double> v) {
  detail::require(!v.empty(), "median of empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Median wall time of feature_matmul on random n x n x channels inputs.
inline BenchRow bench_feature_matmul(std::size_t n, std::size_t channels, std::size_t reps, std::uint64_t seed,
                                     unsigned threads = 1) {
  detail::require(n >= 1 && channels >= 1 && reps >= 1, "bench: n, channels and reps must be >= 1");
  Rng rng(seed);
  DenseTensor3 u(n, channels), v(n, channels);
  for (auto& x : u.data()) x = uniform(rng, -1, 1);
  for (auto& x : v.data()) x = uniform(rng, -1, 1);
  std::vector<double> times;
  double sink = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    auto w = feature_matmul(u, v, threads);
    const auto stop = std::chrono::steady_clock::now();
    sink += w.data()[r % w.size()];
    times.push_back(std::chrono::duration<double>(stop - start).count());
  }
  volatile double keep = sink;
  (void)keep;
  return {n, channels, reps, median(times), 3 * n * n * channels * sizeof(double)};
}

/// Least-squares slope of log(seconds) against log(n).
inline double fit_loglog_slope(std::span<const BenchRow> rows) {
  detail::require(rows.size() >= 2, "slope fit needs at least two sizes");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : rows) {
    detail::require(r.median_seconds > 0, "slope fit needs positive timings");
    const double x = std::log(static_cast<double>(r.n)), y = std::log(r.median_seconds);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(rows.size());
  const double denom = m * sxx - sx * sx;
  detail::require(denom > 0, "slope fit needs at least two distinct sizes");
  return (m * sxy - sx * sy) / denom;
}

}  // namespace wlnet
