#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "valueprobe/aggregation.hpp"

namespace valueprobe {

enum class CorrelationStatus {
  Ok,
  PerfectCorrelation,  // |rho| = 1; p is the limiting value
  TooFewPoints,        // n = 2; rho is +-1 by construction, p = 1
  Degenerate,          // an all-tied vector; rho undefined
  InsufficientOverlap  // n < 2 after pairwise deletion
};
std::string_view to_string(CorrelationStatus s);

struct CorrelationResult {
  std::string name;
  std::optional<double> rho;
  std::optional<double> p_value;
  std::size_t n = 0;
  CorrelationStatus status = CorrelationStatus::Ok;

  bool significant(double alpha = 0.05) const { return p_value && *p_value <= alpha; }
};

/// 1-based ranks, ties share their average rank.
std::vector<double> average_ranks(std::span<const double> x);

/// Pearson correlation of two equally sized samples. nullopt when either has
/// zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value of rho under the t-approximation with n - 2 degrees of
/// freedom.
double spearman_t_p_value(double rho, std::size_t n);

/// Two-sided Monte Carlo permutation p-value, (hits + 1) / (resamples + 1).
double spearman_permutation_p_value(std::span<const double> x, std::span<const double> y,
                                    std::size_t resamples = 10000, std::uint64_t seed = 0);

enum class PValueMethod { TApproximation, Permutation };

struct SpearmanOptions {
  PValueMethod method = PValueMethod::TApproximation;
  std::size_t resamples = 10000;
  std::uint64_t seed = 0;
};

/// Throws DegenerateInput on an all-tied vector and InsufficientOverlap when
/// n < 2 or the sizes differ.
CorrelationResult spearman(std::span<const double> x, std::span<const double> y,
                           const SpearmanOptions& options = {}, std::string name = {});

/// Pairwise deletion of absent cells, then spearman. Never throws for
/// degenerate data; the status field carries the outcome.
CorrelationResult spearman_pairwise(std::span<const std::optional<double>> x,
                                    std::span<const std::optional<double>> y,
                                    const SpearmanOptions& options = {}, std::string name = {});

enum class Axis { PerGroup, PerCountry };
std::string_view to_string(Axis a);

/// PerGroup correlates the country vectors of each shared column, PerCountry
/// the group vectors of each shared row. Output is ordered by name. Throws
/// JoinError when the matrices share no label on the correlated axis.
std::vector<CorrelationResult> alignment_correlations(const ScoreMatrix& model,
                                                      const ScoreMatrix& survey, Axis axis,
                                                      const SpearmanOptions& options = {});

/// Per-group correlation between two models over their common countries.
/// Throws JoinError on differing column sets.
std::vector<CorrelationResult> model_agreement(const ScoreMatrix& a, const ScoreMatrix& b,
                                               const SpearmanOptions& options = {});

// ----------------------------------------------------------- two-sample tests

enum class PairwiseTest { MannWhitneyU, WelchT };
std::string_view to_string(PairwiseTest t);
PairwiseTest pairwise_test_from_string(std::string_view s);

struct TwoSampleResult {
  double statistic = 0.0;  // U of the first sample, or Welch t
  double p_value = 1.0;
  bool exact = false;
};

/// Two-sided Mann-Whitney U. Exact null distribution over the pooled midranks
/// when n_a + n_b <= exact_limit, otherwise the tie-corrected normal
/// approximation with continuity correction. Throws DegenerateInput on an
/// empty sample.
TwoSampleResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                               std::size_t exact_limit = 40);

/// Welch's unequal-variance t-test. Two constant samples give p = 1 when
/// their means agree and p = 0 otherwise.
TwoSampleResult welch_t(std::span<const double> a, std::span<const double> b);

struct PairwiseTestResult {
  std::string country_a;
  std::string country_b;
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

struct SignificanceSummary {
  std::size_t significant_pairs = 0;
  std::size_t total_pairs = 0;
  double fraction = 0.0;
  double alpha = 0.05;
  PairwiseTest test = PairwiseTest::MannWhitneyU;

  /// Percentage with two decimals, e.g. "42.31".
  std::string percent() const;
};

SignificanceSummary summarize_significance(std::size_t significant, std::size_t total,
                                           double alpha, PairwiseTest test);

struct SignificanceReport {
  std::vector<PairwiseTestResult> pairs;  // ordered by (country_a, country_b), a < b
  SignificanceSummary summary;
};

/// Tests every unordered country pair. Throws DegenerateInput with fewer than
/// two countries or an empty country.
SignificanceReport pairwise_significance(const std::map<std::string, std::vector<double>>& scores,
                                         double alpha = 0.05,
                                         PairwiseTest test = PairwiseTest::MannWhitneyU);

/// Per-country vectors from the present cells of each matrix row.
std::map<std::string, std::vector<double>> rows_by_country(const ScoreMatrix& m);

}  // namespace valueprobe
