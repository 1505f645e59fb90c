#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "valueprobe/error.hpp"
#include "valueprobe/statistics.hpp"

namespace valueprobe {

namespace {

// Doubled midranks are integers, so the null distribution of the rank sum of
// sample a is a count table over integer sums.
std::vector<double> rank_sum_distribution(const std::vector<int>& doubled_ranks, std::size_t k) {
  const int total = std::accumulate(doubled_ranks.begin(), doubled_ranks.end(), 0);
  // ways[j][s]: subsets of size j with doubled rank sum s.
  std::vector<std::vector<double>> ways(k + 1, std::vector<double>(total + 1, 0.0));
  ways[0][0] = 1.0;
  std::size_t seen = 0;
  for (int r : doubled_ranks) {
    ++seen;
    for (std::size_t j = std::min(k, seen); j >= 1; --j) {
      auto& dst = ways[j];
      const auto& src = ways[j - 1];
      for (int s = total; s >= r; --s) dst[s] += src[s - r];
    }
  }
  return ways[k];
}

}  // namespace

TwoSampleResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                               std::size_t exact_limit) {
  if (a.empty() || b.empty()) throw DegenerateInput("Mann-Whitney U on an empty sample");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = average_ranks(pooled);

  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const std::size_t n = pooled.size();
  double rank_sum_a = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) rank_sum_a += ranks[i];

  TwoSampleResult out;
  out.statistic = rank_sum_a - na * (na + 1.0) / 2.0;

  if (n <= exact_limit) {
    std::vector<int> doubled(n);
    for (std::size_t i = 0; i < n; ++i) doubled[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
    const auto dist = rank_sum_distribution(doubled, a.size());
    const int observed = static_cast<int>(std::lround(2.0 * rank_sum_a));
    double lower = 0.0, upper = 0.0, all = 0.0;
    for (int s = 0; s < static_cast<int>(dist.size()); ++s) {
      all += dist[s];
      if (s <= observed) lower += dist[s];
      if (s >= observed) upper += dist[s];
    }
    out.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / all);
    out.exact = true;
    return out;
  }

  std::map<double, std::size_t> ties;
  for (double v : pooled) ++ties[v];
  double tie_term = 0.0;
  for (const auto& [v, t] : ties) {
    const double td = static_cast<double>(t);
    tie_term += td * td * td - td;
  }
  const double nn = static_cast<double>(n);
  const double variance = na * nb / 12.0 * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
  if (variance <= 0.0) {
    out.p_value = 1.0;
    return out;
  }
  const double mean = na * nb / 2.0;
  const double z = std::max(0.0, std::abs(out.statistic - mean) - 0.5) / std::sqrt(variance);
  out.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return out;
}

}  // namespace valueprobe
