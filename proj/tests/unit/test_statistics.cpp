#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "valueprobe/error.hpp"
#include "valueprobe/statistics.hpp"

using namespace valueprobe;

namespace {

std::vector<double> v(std::initializer_list<double> xs) { return xs; }

}  // namespace

// ------------------------------------------------------------ spearman

TEST(Spearman, WorkedExample) {
  const auto r = spearman(v({1, 2, 3, 4}), v({2, 1, 4, 3}));
  EXPECT_NEAR(*r.rho, 0.6, 1e-15);
  EXPECT_EQ(r.n, 4u);
  EXPECT_EQ(r.status, CorrelationStatus::Ok);
}

TEST(Spearman, AverageRanksOnTies) {
  EXPECT_EQ(average_ranks(v({10, 20, 20, 30})), v({1, 2.5, 2.5, 4}));
  EXPECT_EQ(average_ranks(v({5, 5, 5})), v({2, 2, 2}));
  EXPECT_EQ(average_ranks(v({3, 1, 2})), v({3, 1, 2}));
}

TEST(Spearman, ExhaustivePermutationsMatchRankDifferenceFormula) {
  for (std::size_t n = 3; n <= 7; ++n) {
    std::vector<double> x(n), y(n);
    std::iota(x.begin(), x.end(), 1.0);
    y = x;
    do {
      ASSERT_NEAR(*spearman(x, y).rho, oracle::spearman_rank_difference(x, y), 1e-12);
    } while (std::next_permutation(y.begin(), y.end()));
  }
}

TEST(Spearman, TiedVectorsMatchPearsonOnMidranks) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> small(0, 4);
  for (int k = 0; k < 2000; ++k) {
    std::vector<double> x(9), y(9);
    for (auto& e : x) e = small(rng);
    for (auto& e : y) e = small(rng);
    if (std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end()) continue;
    if (std::adjacent_find(y.begin(), y.end(), std::not_equal_to<>()) == y.end()) continue;
    ASSERT_NEAR(*spearman(x, y).rho, oracle::spearman_average_ranks(x, y), 1e-12);
  }
}

TEST(Spearman, InvariantUnderStrictlyMonotoneTransforms) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int k = 0; k < 200; ++k) {
    std::vector<double> x(12), y(12), fx(12), gy(12);
    for (std::size_t i = 0; i < 12; ++i) {
      x[i] = g(rng);
      y[i] = x[i] + g(rng);
      fx[i] = std::exp(x[i]);
      gy[i] = 3.0 * y[i] * y[i] * y[i] - 7.0;
    }
    ASSERT_NEAR(*spearman(x, y).rho, *spearman(fx, gy).rho, 1e-12);
  }
}

TEST(Spearman, SymmetricAndBounded) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u;
  for (int k = 0; k < 200; ++k) {
    std::vector<double> x(10), y(10);
    for (auto& e : x) e = u(rng);
    for (auto& e : y) e = u(rng);
    const auto a = spearman(x, y), b = spearman(y, x);
    ASSERT_DOUBLE_EQ(*a.rho, *b.rho);
    ASSERT_DOUBLE_EQ(*a.p_value, *b.p_value);
    ASSERT_LE(std::abs(*a.rho), 1.0);
    ASSERT_GE(*a.p_value, 0.0);
    ASSERT_LE(*a.p_value, 1.0);
  }
}

TEST(Spearman, EdgeCases) {
  const auto two = spearman(v({1, 2}), v({5, 3}));
  EXPECT_EQ(*two.rho, -1.0);
  EXPECT_EQ(*two.p_value, 1.0);
  EXPECT_EQ(two.status, CorrelationStatus::TooFewPoints);

  const auto perfect = spearman(v({1, 2, 3, 4, 5}), v({2, 4, 6, 8, 100}));
  EXPECT_EQ(*perfect.rho, 1.0);
  EXPECT_EQ(*perfect.p_value, 0.0);
  EXPECT_EQ(perfect.status, CorrelationStatus::PerfectCorrelation);

  EXPECT_THROW(spearman(v({1, 1, 1}), v({1, 2, 3})), DegenerateInput);
  EXPECT_THROW(spearman(v({1}), v({1})), InsufficientOverlap);
  EXPECT_THROW(spearman(v({1, 2}), v({1, 2, 3})), InsufficientOverlap);
}

TEST(Spearman, TApproximationPValue) {
  // rho = 0.6, n = 10: t = 0.6 * sqrt(8 / 0.64) = 2.1213; two-sided p from t(8).
  EXPECT_NEAR(spearman_t_p_value(0.6, 10), 0.066688, 1e-5);
  EXPECT_EQ(spearman_t_p_value(0.0, 10), 1.0);
  EXPECT_EQ(spearman_t_p_value(0.3, 2), 1.0);
}

TEST(Spearman, PermutationPValueIsSeededAndPlausible) {
  std::vector<double> x(10), y(10);
  std::iota(x.begin(), x.end(), 0.0);
  y = {0, 2, 1, 3, 5, 4, 6, 8, 7, 9};
  const double a = spearman_permutation_p_value(x, y, 2000, 1);
  const double b = spearman_permutation_p_value(x, y, 2000, 1);
  EXPECT_EQ(a, b);
  EXPECT_LT(a, 0.01);
  EXPECT_GE(a, 1.0 / 2001.0);

  SpearmanOptions opts;
  opts.method = PValueMethod::Permutation;
  opts.resamples = 999;
  const auto r = spearman(x, v({3, 1, 4, 1, 5, 9, 2, 6, 5, 3}), opts);
  EXPECT_GT(*r.p_value, 0.05);
}

TEST(Spearman, PairwiseDeletion) {
  const std::vector<std::optional<double>> x{1, 2, std::nullopt, 4, 5};
  const std::vector<std::optional<double>> y{2, 1, 9, std::nullopt, 3};
  const auto r = spearman_pairwise(x, y);
  EXPECT_EQ(r.n, 3u);
  EXPECT_NEAR(*r.rho, *spearman(v({1, 2, 5}), v({2, 1, 3})).rho, 1e-15);

  const std::vector<std::optional<double>> sparse{1, std::nullopt, std::nullopt, 7, std::nullopt};
  EXPECT_EQ(spearman_pairwise(sparse, y).status, CorrelationStatus::InsufficientOverlap);
  const std::vector<std::optional<double>> flat{3, 3, 3, 3, 3};
  const auto d = spearman_pairwise(flat, y);
  EXPECT_EQ(d.status, CorrelationStatus::Degenerate);
  EXPECT_FALSE(d.rho);
  EXPECT_FALSE(d.significant());
}

// ------------------------------------------------------------- alignment

TEST(Alignment, BothAxesAndAbsentCells) {
  ScoreMatrix model("m", {"Greece", "Turkey", "Germany", "Romania"}, {"pdi", "idv"});
  ScoreMatrix survey("s", {"Germany", "Greece", "Romania", "Turkey", "Serbia"}, {"idv", "pdi", "mas"});
  const double mv[4][2] = {{1, 4}, {2, 3}, {3, 2}, {4, 1}};
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 2; ++c) model.set(r, c, mv[r][c]);
  }
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      const auto& country = survey.rows()[r];
      const auto& col = survey.columns()[c];
      const auto m = model.get(country, col);
      survey.set(r, c, m ? *m * 10.0 : 0.0);
    }
  }
  model.exclude(1, 0, "missing");  // Turkey/pdi

  const auto per_group = alignment_correlations(model, survey, Axis::PerGroup);
  ASSERT_EQ(per_group.size(), 2u);
  EXPECT_EQ(per_group[0].name, "idv");
  EXPECT_EQ(per_group[0].n, 4u);
  EXPECT_EQ(*per_group[0].rho, 1.0);
  EXPECT_EQ(per_group[1].name, "pdi");
  EXPECT_EQ(per_group[1].n, 3u);

  const auto per_country = alignment_correlations(model, survey, Axis::PerCountry);
  ASSERT_EQ(per_country.size(), 4u);
  EXPECT_EQ(per_country[0].name, "Germany");
  EXPECT_EQ(per_country[0].status, CorrelationStatus::TooFewPoints);
  EXPECT_EQ(per_country[3].name, "Turkey");
  EXPECT_EQ(per_country[3].status, CorrelationStatus::InsufficientOverlap);
}

TEST(Alignment, JoinFailures) {
  ScoreMatrix a("a", {"Greece", "Turkey"}, {"pdi"});
  ScoreMatrix b("b", {"Germany", "Serbia"}, {"idv"});
  EXPECT_THROW(alignment_correlations(a, b, Axis::PerGroup), JoinError);
  ScoreMatrix c("c", {"Greece", "Serbia"}, {"pdi"});
  EXPECT_THROW(alignment_correlations(a, c, Axis::PerGroup), InsufficientOverlap);
  EXPECT_THROW(model_agreement(a, b), JoinError);
}

// ------------------------------------------------------- mann whitney

TEST(MannWhitney, StatisticMatchesPairCounting) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> u(0, 6);
  for (int k = 0; k < 300; ++k) {
    std::vector<double> a(1 + k % 5), b(1 + (k / 5) % 5);
    for (auto& e : a) e = u(rng);
    for (auto& e : b) e = u(rng);
    ASSERT_DOUBLE_EQ(mann_whitney_u(a, b).statistic, oracle::mann_whitney_u(a, b));
  }
}

TEST(MannWhitney, ExactPValueMatchesEnumeration) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> u(0, 5);
  std::uniform_real_distribution<double> r(0, 1);
  for (int k = 0; k < 400; ++k) {
    std::vector<double> a(1 + k % 5), b(1 + (k / 5) % 5);
    const bool ties = k % 2 == 0;
    for (auto& e : a) e = ties ? u(rng) : r(rng);
    for (auto& e : b) e = ties ? u(rng) : r(rng);
    const auto got = mann_whitney_u(a, b);
    ASSERT_TRUE(got.exact);
    ASSERT_NEAR(got.p_value, oracle::mann_whitney_exact_p(a, b), 1e-12) << "case " << k;
  }
}

TEST(MannWhitney, KnownValues) {
  // Complete separation of 3 vs 3: p = 2 / C(6, 3).
  const auto sep = mann_whitney_u(v({1, 2, 3}), v({4, 5, 6}));
  EXPECT_EQ(sep.statistic, 0.0);
  EXPECT_NEAR(sep.p_value, 0.1, 1e-15);
  const auto same = mann_whitney_u(v({1, 2, 3}), v({1, 2, 3}));
  EXPECT_EQ(same.p_value, 1.0);
  EXPECT_THROW(mann_whitney_u(v({}), v({1})), DegenerateInput);
}

TEST(MannWhitney, NormalApproximationAgreesWithExactForModerateSamples) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  std::vector<double> a(20), b(20);
  for (auto& e : a) e = g(rng);
  for (auto& e : b) e = g(rng) + 0.8;
  const auto exact = mann_whitney_u(a, b, 40);
  const auto approx = mann_whitney_u(a, b, 0);
  EXPECT_TRUE(exact.exact);
  EXPECT_FALSE(approx.exact);
  EXPECT_EQ(exact.statistic, approx.statistic);
  EXPECT_NEAR(exact.p_value, approx.p_value, 0.01);
}

TEST(MannWhitney, IdenticalConstantSamplesAreNotSignificant) {
  const std::vector<double> a(30, 2.0);
  EXPECT_EQ(mann_whitney_u(a, a, 0).p_value, 1.0);
  EXPECT_EQ(mann_whitney_u(a, a).p_value, 1.0);
}

TEST(Welch, KnownValueAndDegenerateSamples) {
  // Hand computation: means 2 and 5, variances 1 and 1, n = 3 each.
  const auto r = welch_t(v({1, 2, 3}), v({4, 5, 6}));
  EXPECT_NEAR(r.statistic, -3.0 / std::sqrt(2.0 / 3.0), 1e-12);
  EXPECT_NEAR(r.p_value, 0.0213116, 1e-6);
  EXPECT_EQ(welch_t(v({2, 2}), v({2, 2})).p_value, 1.0);
  EXPECT_EQ(welch_t(v({2, 2}), v({3, 3})).p_value, 0.0);
  EXPECT_THROW(welch_t(v({1}), v({1, 2})), DegenerateInput);
}

// ---------------------------------------------------------- significance

TEST(Significance, PercentFormatting) {
  EXPECT_EQ(summarize_significance(33, 78, 0.05, PairwiseTest::MannWhitneyU).percent(), "42.31");
  EXPECT_EQ(summarize_significance(40, 78, 0.05, PairwiseTest::MannWhitneyU).percent(), "51.28");
  EXPECT_EQ(summarize_significance(36, 78, 0.05, PairwiseTest::MannWhitneyU).percent(), "46.15");
  EXPECT_EQ(summarize_significance(0, 78, 0.05, PairwiseTest::MannWhitneyU).percent(), "0.00");
  EXPECT_EQ(summarize_significance(78, 78, 0.05, PairwiseTest::MannWhitneyU).percent(), "100.00");
  EXPECT_THROW(summarize_significance(79, 78, 0.05, PairwiseTest::MannWhitneyU), Error);
}

TEST(Significance, ThirteenCountriesGiveSeventyEightPairs) {
  std::map<std::string, std::vector<double>> scores;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int c = 0; c < 13; ++c) {
    auto& s = scores["country" + std::to_string(100 + c)];
    for (int i = 0; i < 30; ++i) s.push_back(g(rng) + 0.1 * c);
  }
  const auto rep = pairwise_significance(scores);
  EXPECT_EQ(rep.pairs.size(), 78u);
  EXPECT_EQ(rep.summary.total_pairs, 78u);
  for (const auto& p : rep.pairs) ASSERT_LT(p.country_a, p.country_b);
  std::size_t sig = 0;
  for (const auto& p : rep.pairs) sig += p.p_value <= 0.05;
  EXPECT_EQ(rep.summary.significant_pairs, sig);
}

TEST(Significance, ConstructedThirtyThreePairs) {
  std::map<std::string, std::vector<double>> scores;
  for (int c = 0; c < 10; ++c) scores["same" + std::to_string(c)] = {1, 2, 3, 4, 5, 6, 7, 8};
  scores["far1"] = {11, 12, 13, 14, 15, 16, 17, 18};
  scores["far2"] = {21, 22, 23, 24, 25, 26, 27, 28};
  scores["far3"] = {31, 32, 33, 34, 35, 36, 37, 38};
  for (auto test : {PairwiseTest::MannWhitneyU, PairwiseTest::WelchT}) {
    const auto rep = pairwise_significance(scores, 0.05, test);
    EXPECT_EQ(rep.summary.significant_pairs, 33u);
    EXPECT_EQ(rep.summary.percent(), "42.31");
    EXPECT_EQ(rep.summary.test, test);
  }
}

TEST(Significance, DegenerateInputs) {
  EXPECT_THROW(pairwise_significance({{"a", {1.0}}}), DegenerateInput);
  EXPECT_THROW(pairwise_significance({{"a", {1.0}}, {"b", {}}}), DegenerateInput);
  EXPECT_EQ(pairwise_test_from_string("welch_t"), PairwiseTest::WelchT);
  EXPECT_THROW(pairwise_test_from_string("chi2"), Error);
}

TEST(Significance, RowsByCountrySkipAbsentCells) {
  ScoreMatrix m("m", {"Greece", "Turkey"}, {"a", "b", "c"});
  m.set(0, 0, 1);
  m.set(0, 2, 3);
  m.exclude(0, 1, "x");
  m.set(1, 1, 5);
  const auto rows = rows_by_country(m);
  EXPECT_EQ(rows.at("Greece"), v({1, 3}));
  EXPECT_EQ(rows.at("Turkey"), v({5}));
}
