#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "support.hpp"
#include "valueprobe/aggregation.hpp"
#include "valueprobe/error.hpp"

using namespace valueprobe;

namespace {

std::map<int, double> items(const std::array<std::int64_t, 25>& m) {
  std::map<int, double> out;
  for (int i = 1; i <= 24; ++i) out[i] = static_cast<double>(m[i]);
  return out;
}

std::vector<ScoreRecord> full_scores(const Corpus& corpus, double base) {
  std::vector<ScoreRecord> out;
  double v = base;
  for (const auto& lang : corpus.culture().languages()) {
    for (const auto& p : corpus.scoring_probes()) {
      out.push_back({"m", p.id, lang, ScoreMode::Diff, v});
      v += 0.25;
    }
  }
  return out;
}

std::string hof_id(int i) { return std::string("hof:") + (i < 10 ? "0" : "") + std::to_string(i); }

}  // namespace

TEST(Hofstede, HandWorkedExample) {
  // m_i = i gives every difference a fixed sign.
  std::array<std::int64_t, 25> m{};
  for (int i = 1; i <= 24; ++i) m[i] = i;
  const auto dims = hofstede_dimensions(items(m));
  ASSERT_EQ(dims.size(), 6u);
  EXPECT_EQ(dims[0].value, 35.0 * 5 + 25.0 * -3);   // pdi
  EXPECT_EQ(dims[1].value, 35.0 * 3 + 35.0 * 3);    // idv
  EXPECT_EQ(dims[2].value, 35.0 * 2 + 35.0 * -2);   // mas
  EXPECT_EQ(dims[3].value, 40.0 * 3 + 25.0 * -3);   // uai
  EXPECT_EQ(dims[4].value, 40.0 * -1 + 25.0 * -3);  // lto
  EXPECT_EQ(dims[5].value, 35.0 * 1 + 40.0 * 1);    // ivr
}

TEST(Hofstede, ConstantsShiftEachDimension) {
  std::array<std::int64_t, 25> m{};
  m.fill(3);
  const HofstedeConstants c{1, 2, 3, 4, 5, 6};
  const auto dims = hofstede_dimensions(items(m), c, "Germany");
  for (std::size_t d = 0; d < 6; ++d) {
    EXPECT_EQ(dims[d].value, c[d]);
    EXPECT_EQ(dims[d].country, "Germany");
    EXPECT_EQ(dims[d].dimension, kDimensions[d]);
  }
}

TEST(Hofstede, MatchesOracleOnRandomIntegerVectors) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> item(1, 5);
  for (int v = 0; v < 200; ++v) {
    std::array<std::int64_t, 25> m{};
    for (int i = 1; i <= 24; ++i) m[i] = item(rng);
    const auto want = oracle::hofstede(m);
    EXPECT_EQ(evaluate_dimensions<std::int64_t>(m), want);
    const auto dims = hofstede_dimensions(items(m));
    for (std::size_t d = 0; d < 6; ++d) EXPECT_EQ(dims[d].value, static_cast<double>(want[d]));
  }
}

TEST(Hofstede, EvaluatesAtCompileTime) {
  constexpr std::array<int, 25> m = [] {
    std::array<int, 25> a{};
    for (int i = 1; i <= 24; ++i) a[i] = i % 5 + 1;
    return a;
  }();
  constexpr auto dims = evaluate_dimensions<int>(m);
  static_assert(dims[0] == 35 * (m[7] - m[2]) + 25 * (m[20] - m[23]));
  SUCCEED();
}

TEST(Hofstede, MissingItemsAreNamed) {
  std::array<std::int64_t, 25> m{};
  m.fill(2);
  auto in = items(m);
  in.erase(7);
  in.erase(16);
  try {
    hofstede_dimensions(in);
    FAIL() << "expected MissingQuestion";
  } catch (const MissingQuestion& e) {
    EXPECT_EQ(e.indices(), (std::vector<int>{7, 16}));
    EXPECT_NE(std::string(e.what()).find("m07"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("m16"), std::string::npos);
  }
  in[25] = 1.0;
  EXPECT_THROW(hofstede_dimensions(in), ValidationError);
}

// ---------------------------------------------------------- categories

TEST(Categories, NormalizationToUnitInterval) {
  EXPECT_EQ(normalize_response(1.0, {1, 4}), 0.0);
  EXPECT_EQ(normalize_response(4.0, {1, 4}), 1.0);
  EXPECT_DOUBLE_EQ(normalize_response(2.5, {1, 4}), 0.5);
  EXPECT_THROW(normalize_response(4.5, {1, 4}), OutOfScale);
  EXPECT_THROW(normalize_response(1.0, {2, 2}), OutOfScale);
}

TEST(Categories, MeanOfNormalizedQuestions) {
  const std::vector<CountryQuestionScore> s{{"Germany", "wvs:001", 1.0, ScaleSpec{1, 4}},
                                            {"Germany", "wvs:002", 10.0, ScaleSpec{1, 10}},
                                            {"Germany", "wvs:003", 0.5, std::nullopt}};
  const auto c = aggregate_category(s, "Security");
  EXPECT_DOUBLE_EQ(c.value, (0.0 + 1.0 + 0.5) / 3.0);
  EXPECT_EQ(c.question_count, 3u);
  EXPECT_EQ(c.country, "Germany");
}

TEST(Categories, OrderOfQuestionsDoesNotMatter) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-20, 20);
  std::vector<CountryQuestionScore> s;
  for (int i = 0; i < 40; ++i) s.push_back({"Greece", "wvs:" + std::to_string(i), u(rng), {}});
  const double reference = aggregate_category(s, "Security").value;
  for (int k = 0; k < 50; ++k) {
    std::shuffle(s.begin(), s.end(), rng);
    ASSERT_EQ(aggregate_category(s, "Security").value, reference);
  }
}

TEST(Categories, EmptyAndMixedInputsAreRejected) {
  EXPECT_THROW(aggregate_category({}, "Security"), EmptyCategory);
  const std::vector<CountryQuestionScore> mixed{{"Greece", "wvs:001", 1, {}},
                                                {"Turkey", "wvs:002", 1, {}}};
  EXPECT_THROW(aggregate_category(mixed, "Security"), ValidationError);
}

// ------------------------------------------------------------ matrices

TEST(Matrices, ModelMatricesCoverTheCorpus) {
  const auto corpus = vptest::bundled_corpus();
  const auto scores = full_scores(corpus, -3.0);
  const auto set =
      build_model_matrices(scores, ScoreMode::Diff, corpus, corpus.culture().languages());
  EXPECT_EQ(set.hofstede_dimension.rows().size(), 13u);
  EXPECT_TRUE(std::is_sorted(set.hofstede_dimension.rows().begin(),
                             set.hofstede_dimension.rows().end()));
  EXPECT_EQ(set.hofstede_dimension.columns().size(), 6u);
  EXPECT_EQ(set.hofstede_question.columns().size(), 24u);
  EXPECT_EQ(set.wvs_question.columns().size(), 226u);
  EXPECT_EQ(set.wvs_category.columns().size(), 11u);
  EXPECT_TRUE(set.wvs_question.is_complete());
  EXPECT_TRUE(set.wvs_question.exclusions().empty());
  EXPECT_EQ(set.wvs_question.name(), "model_wvs_question:diff");

  // The dimension cell equals the formula over the question cells.
  const auto& q = set.hofstede_question;
  std::map<int, double> m;
  for (int i = 1; i <= 24; ++i) {
    m[i] = *q.get("Greece", hof_id(i));
  }
  const auto dims = hofstede_dimensions(m);
  for (std::size_t d = 0; d < 6; ++d) {
    EXPECT_EQ(*set.hofstede_dimension.get("Greece", to_string(kDimensions[d])), dims[d].value);
  }
}

TEST(Matrices, InputOrderDoesNotMatter) {
  const auto corpus = vptest::bundled_corpus();
  auto scores = full_scores(corpus, 1.0);
  const auto langs = corpus.culture().languages();
  const auto a = build_model_matrices(scores, ScoreMode::Diff, corpus, langs);
  std::mt19937 rng(3);
  std::shuffle(scores.begin(), scores.end(), rng);
  const auto b = build_model_matrices(scores, ScoreMode::Diff, corpus, langs);
  std::ostringstream ja, jb;
  write_matrix_json(ja, a.wvs_category);
  write_matrix_json(jb, b.wvs_category);
  EXPECT_EQ(ja.str(), jb.str());
}

TEST(Matrices, MissingScoresBecomeAnnotatedExclusions) {
  const auto corpus = vptest::bundled_corpus();
  auto scores = full_scores(corpus, 0.0);
  std::erase_if(scores, [](const ScoreRecord& s) {
    return s.language_code == "de" && (s.probe_id == "hof:07" || s.probe_id == "wvs:010");
  });
  const auto set = build_model_matrices(scores, ScoreMode::Diff, corpus,
                                        corpus.culture().languages());
  EXPECT_FALSE(set.hofstede_dimension.get("Germany", "pdi"));
  EXPECT_TRUE(set.hofstede_dimension.get("Germany", "idv"));
  EXPECT_EQ(set.hofstede_dimension.exclusions().at({"Germany", "pdi"}), "missing items m07");
  EXPECT_FALSE(set.wvs_question.get("Germany", "wvs:010"));
  EXPECT_TRUE(set.wvs_question.is_complete());
  EXPECT_TRUE(set.hofstede_dimension.is_complete());

  BuildOptions strict;
  strict.strict = true;
  EXPECT_THROW(build_model_matrices(scores, ScoreMode::Diff, corpus, corpus.culture().languages(),
                                    strict),
               MissingQuestion);
}

TEST(Matrices, OtherModesAreIgnored) {
  const auto corpus = vptest::bundled_corpus();
  auto scores = full_scores(corpus, 0.0);
  for (auto& s : scores) s.mode = ScoreMode::PosOnly;
  const auto set = build_model_matrices(scores, ScoreMode::Diff, corpus,
                                        corpus.culture().languages());
  EXPECT_EQ(set.wvs_question.exclusions().size(), 13u * 226u);
  EXPECT_EQ(set.wvs_category.exclusions().size(), 13u * 11u);
}

TEST(Matrices, SurveyMatricesNormalizeAndDropExcludedCategories) {
  const auto corpus = vptest::bundled_corpus();
  const auto hof = load_hofstede_reference(vptest::data_path("reference/hofstede_published.jsonl"));
  const auto wvs = load_wvs_reference(vptest::data_path("reference/wvs_wave7_synthetic.jsonl"));
  const auto set = build_survey_matrices(&hof, &wvs, corpus);
  EXPECT_EQ(set.hofstede_dimension.rows().size(), 13u);
  EXPECT_EQ(set.wvs_question.columns().size(), 226u);
  EXPECT_EQ(set.dropped.size(), 13u * 12u);
  for (std::size_t r = 0; r < set.wvs_question.rows().size(); ++r) {
    for (const auto& v : set.wvs_question.row_values(r)) {
      ASSERT_TRUE(v);
      ASSERT_GE(*v, 0.0);
      ASSERT_LE(*v, 1.0);
    }
  }
  // Category cell equals the mean of its normalized question cells.
  const std::string cat = "Corruption";
  double sum = 0.0;
  int n = 0;
  for (const auto& p : corpus.probes()) {
    if (p.group != cat) continue;
    sum += *set.wvs_question.get("Germany", p.id);
    ++n;
  }
  EXPECT_NEAR(*set.wvs_category.get("Germany", cat), sum / n, 1e-15);
}

TEST(References, LoaderRejectsBadRows) {
  const std::string head = R"({"schema": "valueprobe.reference.wvs", "version": 1, "source": "t"})";
  auto row = [](std::string c, std::string q, double v) {
    return "{\"country\": \"" + c + "\", \"question_id\": \"" + q +
           "\", \"mean_response\": " + std::to_string(v) + ", \"scale_min\": 1, \"scale_max\": 4}\n";
  };
  {
    std::istringstream in(head + "\n" + row("Greece", "wvs:001", 2) + row("Greece", "wvs:001", 3));
    EXPECT_THROW(read_wvs_reference(in), ValidationError);
  }
  {
    std::istringstream in(head + "\n" + row("Greece", "wvs:001", 5));
    EXPECT_THROW(read_wvs_reference(in), ValidationError);
  }
  {
    std::istringstream in(head + "\n" + row("Greece", "wvs:001", 2) + row("Turkey", "wvs:002", 2));
    EXPECT_THROW(read_wvs_reference(in), ValidationError);
  }
  {
    std::istringstream in(head + "\n" + row("Greece", "wvs:001", 2));
    const auto ref = read_wvs_reference(in);
    EXPECT_EQ(ref.provenance, "t");
    EXPECT_EQ(ref.wvs.size(), 1u);
  }
}

TEST(References, ScaleMismatchWithCorpusIsAnError) {
  const auto corpus = vptest::bundled_corpus();
  SurveyReference ref;
  const auto* p = corpus.find("wvs:001");
  ASSERT_NE(p, nullptr);
  ref.wvs.push_back({"Greece", "wvs:001", 1.0, {p->scale.min, p->scale.max + 1}});
  EXPECT_THROW(build_survey_matrices(nullptr, &ref, corpus), ValidationError);
}

TEST(MatrixIo, CsvAndJsonForms) {
  ScoreMatrix m("t", {"Greece", "Turkey"}, {"a", "b"});
  m.set(0, 0, 0.5);
  m.set(0, 1, -1.25);
  m.set(1, 0, 2.0);
  m.exclude(1, 1, "no data");
  std::ostringstream csv;
  write_matrix_csv(csv, m);
  EXPECT_EQ(csv.str(), "country,a,b\nGreece,0.5,-1.25\nTurkey,2,\n");

  std::ostringstream js;
  write_matrix_json(js, m);
  std::istringstream in(js.str());
  const auto back = read_matrix_json(in);
  EXPECT_EQ(back.rows(), m.rows());
  EXPECT_EQ(back.columns(), m.columns());
  EXPECT_EQ(back.get("Greece", "b"), -1.25);
  EXPECT_FALSE(back.get("Turkey", "b"));
  EXPECT_EQ(back.exclusions(), m.exclusions());
}

TEST(MatrixIo, NonFiniteValuesAreExcluded) {
  ScoreMatrix m("t", {"Greece"}, {"a"});
  m.set(0, 0, std::numeric_limits<double>::infinity());
  EXPECT_FALSE(m.at(0, 0));
  EXPECT_TRUE(m.is_complete());
  EXPECT_EQ(m.exclusions().at({"Greece", "a"}), "non-finite value");
}
