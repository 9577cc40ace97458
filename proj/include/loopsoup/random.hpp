#pragma once

// Keyed random substreams and the small statistics kit used by the Monte
// Carlo checks.

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <thread>
#include <vector>

namespace loopsoup {

using Rng = std::mt19937_64;

/// Independent generator keyed by (seed, stream, index). Draws do not depend
/// on how samples are partitioned across threads.
inline Rng substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream), lo(index), hi(index)};
  return Rng(seq);
}

/// Runs body(i) for i in [0, count) across hardware threads. body must only
/// write to slot i of its outputs.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), 16));
  if (workers == 1 || count < 256) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] {
      for (std::size_t i = begin; i < end; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Pairwise (cascade) summation; result depends only on the input order.
template <class T>
T pairwise_sum(std::span<const T> values) {
  if (values.empty()) return T{};
  if (values.size() <= 8) {
    T acc = values[0];
    for (std::size_t i = 1; i < values.size(); ++i) acc += values[i];
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.subspan(0, half)) + pairwise_sum(values.subspan(half));
}

struct SampleSummary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double stderr_mean = 0.0;
  std::size_t count = 0;
};

SampleSummary summarize(std::span<const double> values);

/// Standard error of the unbiased sample variance, from the fourth central moment.
double variance_stderr(std::span<const double> values);

/// Upper-tail p-value of Pearson's chi-square statistic for `observed`
/// counts against `expected_probabilities`.
double chi_square_pvalue(std::span<const std::uint64_t> observed, std::span<const double> expected_probabilities);

}  // namespace loopsoup
