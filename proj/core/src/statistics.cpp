#include "valueprobe/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "valueprobe/error.hpp"

namespace valueprobe {

std::string_view to_string(CorrelationStatus s) {
  switch (s) {
    case CorrelationStatus::Ok: return "ok";
    case CorrelationStatus::PerfectCorrelation: return "perfect_correlation";
    case CorrelationStatus::TooFewPoints: return "too_few_points";
    case CorrelationStatus::Degenerate: return "degenerate";
    case CorrelationStatus::InsufficientOverlap: return "insufficient_overlap";
  }
  return "ok";
}

std::string_view to_string(Axis a) { return a == Axis::PerGroup ? "per_group" : "per_country"; }

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    // Positions i..j (0-based) share the mean of ranks i+1..j+1.
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  double r = sxy / std::sqrt(sxx * syy);
  if (r > 1.0 - 1e-14) r = 1.0;
  if (r < -1.0 + 1e-14) r = -1.0;
  return r;
}

double spearman_t_p_value(double rho, std::size_t n) {
  if (n <= 2) return 1.0;
  if (std::abs(rho) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = rho * std::sqrt(df / (1.0 - rho * rho));
  boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

namespace {

bool all_tied(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

}  // namespace

double spearman_permutation_p_value(std::span<const double> x, std::span<const double> y,
                                    std::size_t resamples, std::uint64_t seed) {
  const auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  const auto observed = pearson(rx, ry);
  if (!observed) throw DegenerateInput("permutation test on an all-tied vector");
  std::mt19937_64 rng(seed);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < resamples; ++i) {
    std::shuffle(ry.begin(), ry.end(), rng);
    if (std::abs(*pearson(rx, ry)) >= std::abs(*observed) - 1e-12) ++hits;
  }
  return static_cast<double>(hits + 1) / static_cast<double>(resamples + 1);
}

CorrelationResult spearman(std::span<const double> x, std::span<const double> y,
                           const SpearmanOptions& options, std::string name) {
  if (x.size() != y.size()) throw InsufficientOverlap("spearman on vectors of different length");
  if (x.size() < 2) throw InsufficientOverlap("spearman needs at least two points");
  if (all_tied(x) || all_tied(y)) throw DegenerateInput("spearman on an all-tied vector");

  CorrelationResult out;
  out.name = std::move(name);
  out.n = x.size();
  const auto rho = pearson(average_ranks(x), average_ranks(y));
  out.rho = *rho;
  if (out.n == 2) {
    out.p_value = 1.0;
    out.status = CorrelationStatus::TooFewPoints;
  } else if (std::abs(*rho) == 1.0) {
    out.p_value = options.method == PValueMethod::Permutation
                      ? spearman_permutation_p_value(x, y, options.resamples, options.seed)
                      : 0.0;
    out.status = CorrelationStatus::PerfectCorrelation;
  } else {
    out.p_value = options.method == PValueMethod::Permutation
                      ? spearman_permutation_p_value(x, y, options.resamples, options.seed)
                      : spearman_t_p_value(*rho, out.n);
  }
  return out;
}

CorrelationResult spearman_pairwise(std::span<const std::optional<double>> x,
                                    std::span<const std::optional<double>> y,
                                    const SpearmanOptions& options, std::string name) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (x[i] && y[i]) {
      xs.push_back(*x[i]);
      ys.push_back(*y[i]);
    }
  }
  CorrelationResult out;
  out.name = name;
  out.n = xs.size();
  if (xs.size() < 2) {
    out.status = CorrelationStatus::InsufficientOverlap;
    return out;
  }
  try {
    return spearman(xs, ys, options, std::move(name));
  } catch (const DegenerateInput&) {
    out.status = CorrelationStatus::Degenerate;
    return out;
  }
}

namespace {

std::vector<std::string> shared_sorted(const std::vector<std::string>& a,
                                       const std::vector<std::string>& b) {
  std::set<std::string> sa(a.begin(), a.end());
  std::vector<std::string> out;
  for (const auto& s : std::set<std::string>(b.begin(), b.end())) {
    if (sa.count(s)) out.push_back(s);
  }
  return out;
}

std::vector<std::optional<double>> gather(const ScoreMatrix& m, std::string_view fixed,
                                          const std::vector<std::string>& along, Axis axis) {
  std::vector<std::optional<double>> out;
  for (const auto& label : along) {
    out.push_back(axis == Axis::PerGroup ? m.get(label, fixed) : m.get(fixed, label));
  }
  return out;
}

}  // namespace

std::vector<CorrelationResult> alignment_correlations(const ScoreMatrix& model,
                                                      const ScoreMatrix& survey, Axis axis,
                                                      const SpearmanOptions& options) {
  const bool per_group = axis == Axis::PerGroup;
  const auto names = per_group ? shared_sorted(model.columns(), survey.columns())
                               : shared_sorted(model.rows(), survey.rows());
  if (names.empty()) {
    throw JoinError("'" + model.name() + "' and '" + survey.name() + "' share no " +
                    (per_group ? "group" : "country") + " labels");
  }
  const auto along = per_group ? shared_sorted(model.rows(), survey.rows())
                               : shared_sorted(model.columns(), survey.columns());
  if (along.size() < 2) {
    throw InsufficientOverlap("'" + model.name() + "' and '" + survey.name() +
                              "' overlap on fewer than two " + (per_group ? "countries" : "groups"));
  }
  std::vector<CorrelationResult> out;
  for (const auto& name : names) {
    const auto x = gather(model, name, along, axis);
    const auto y = gather(survey, name, along, axis);
    out.push_back(spearman_pairwise(x, y, options, name));
  }
  return out;
}

std::vector<CorrelationResult> model_agreement(const ScoreMatrix& a, const ScoreMatrix& b,
                                               const SpearmanOptions& options) {
  if (std::set<std::string>(a.columns().begin(), a.columns().end()) !=
      std::set<std::string>(b.columns().begin(), b.columns().end())) {
    throw JoinError("'" + a.name() + "' and '" + b.name() + "' have different group sets");
  }
  return alignment_correlations(a, b, Axis::PerGroup, options);
}

// ------------------------------------------------------------ significance

std::string_view to_string(PairwiseTest t) {
  return t == PairwiseTest::MannWhitneyU ? "mann_whitney_u" : "welch_t";
}

PairwiseTest pairwise_test_from_string(std::string_view s) {
  if (s == "mann_whitney_u") return PairwiseTest::MannWhitneyU;
  if (s == "welch_t") return PairwiseTest::WelchT;
  throw Error("unknown pairwise test '" + std::string(s) + "'");
}

TwoSampleResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DegenerateInput("Welch's t needs two values per sample");
  auto moments = [](std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, ss / (n - 1.0)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double se2 = va / na + vb / nb;
  TwoSampleResult out;
  if (se2 == 0.0) {
    out.statistic = 0.0;
    out.p_value = ma == mb ? 1.0 : 0.0;
    return out;
  }
  out.statistic = (ma - mb) / std::sqrt(se2);
  const double df =
      se2 * se2 / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
  boost::math::students_t dist(df);
  out.p_value =
      std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.statistic))));
  return out;
}

std::string SignificanceSummary::percent() const { return fmt::format("{:.2f}", fraction * 100.0); }

SignificanceSummary summarize_significance(std::size_t significant, std::size_t total,
                                           double alpha, PairwiseTest test) {
  if (significant > total) throw Error("more significant pairs than pairs");
  SignificanceSummary s;
  s.significant_pairs = significant;
  s.total_pairs = total;
  s.fraction = total == 0 ? 0.0 : static_cast<double>(significant) / static_cast<double>(total);
  s.alpha = alpha;
  s.test = test;
  return s;
}

SignificanceReport pairwise_significance(const std::map<std::string, std::vector<double>>& scores,
                                         double alpha, PairwiseTest test) {
  if (scores.size() < 2) throw DegenerateInput("pairwise significance needs two countries");
  for (const auto& [country, v] : scores) {
    if (v.empty()) throw DegenerateInput("country '" + country + "' has no scores");
  }
  SignificanceReport report;
  std::size_t significant = 0;
  for (auto ia = scores.begin(); ia != scores.end(); ++ia) {
    for (auto ib = std::next(ia); ib != scores.end(); ++ib) {
      const auto r = test == PairwiseTest::MannWhitneyU ? mann_whitney_u(ia->second, ib->second)
                                                        : welch_t(ia->second, ib->second);
      report.pairs.push_back(
          {ia->first, ib->first, r.statistic, r.p_value, ia->second.size(), ib->second.size()});
      if (r.p_value <= alpha) ++significant;
    }
  }
  report.summary = summarize_significance(significant, report.pairs.size(), alpha, test);
  return report;
}

std::map<std::string, std::vector<double>> rows_by_country(const ScoreMatrix& m) {
  std::map<std::string, std::vector<double>> out;
  for (std::size_t r = 0; r < m.rows().size(); ++r) {
    auto& v = out[m.rows()[r]];
    for (const auto& cell : m.row_values(r)) {
      if (cell) v.push_back(*cell);
    }
  }
  return out;
}

}  // namespace valueprobe
