#include "loopsoup/random.hpp"

#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "loopsoup/core_types.hpp"

namespace loopsoup {

SampleSummary summarize(std::span<const double> values) {
  SampleSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = pairwise_sum(values) / static_cast<double>(values.size());
  if (values.size() < 2) return s;
  std::vector<double> dev(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) dev[i] = (values[i] - s.mean) * (values[i] - s.mean);
  s.variance = pairwise_sum(std::span<const double>(dev)) / static_cast<double>(values.size() - 1);
  s.stderr_mean = std::sqrt(s.variance / static_cast<double>(values.size()));
  return s;
}

double variance_stderr(std::span<const double> values) {
  const auto n = static_cast<double>(values.size());
  if (values.size() < 4) return 0.0;
  const double mean = pairwise_sum(values) / n;
  std::vector<double> m2(values.size());
  std::vector<double> m4(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - mean;
    m2[i] = d * d;
    m4[i] = d * d * d * d;
  }
  const double mu2 = pairwise_sum(std::span<const double>(m2)) / n;
  const double mu4 = pairwise_sum(std::span<const double>(m4)) / n;
  return std::sqrt(std::max(0.0, (mu4 - mu2 * mu2) / n));
}

double chi_square_pvalue(std::span<const std::uint64_t> observed, std::span<const double> expected_probabilities) {
  if (observed.size() != expected_probabilities.size() || observed.size() < 2) {
    throw Error(ErrorKind::InvalidInput, "chi-square needs matching bins (at least two)");
  }
  const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expected = total * expected_probabilities[i];
    const double diff = static_cast<double>(observed[i]) - expected;
    stat += diff * diff / expected;
  }
  boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace loopsoup
