#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "support.hpp"
#include "valueprobe/error.hpp"
#include "valueprobe/scoring.hpp"

using namespace valueprobe;

namespace {

LocalizedProbe localized(std::string id, std::string masked, std::string pos, std::string neg) {
  return {std::move(id), "de", std::move(masked), std::move(pos), std::move(neg),
          Provenance::StringMatch, ""};
}

SyntheticBackendConfig config(std::vector<std::string> vocab, std::uint64_t seed = 7) {
  SyntheticBackendConfig c;
  c.seed = seed;
  c.vocabulary = std::move(vocab);
  return c;
}

const std::vector<LocalizedProbe>& bundled_localized() {
  static const auto probes = vptest::localize_bundled(vptest::bundled_corpus()).probes;
  return probes;
}

}  // namespace

TEST(Synthetic, LogProbsAreNormalizedOverTheVocabulary) {
  SyntheticBackend b(config({"wichtig", "unwichtig", "sehr", "nicht", "gut"}));
  double total = 0.0;
  const std::string text = "Arbeit ist [MASK].";
  for (std::size_t i = 0; i < b.vocabulary().size(); ++i) {
    total += std::exp(b.raw_score(text, 2, i) - b.log_normalizer(text, 2));
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Synthetic, DeterministicPerSeedAndDistinctAcrossSeeds) {
  const std::vector<std::string> vocab{"wichtig", "unwichtig", "gut"};
  SyntheticBackend a(config(vocab, 1)), a2(config(vocab, 1)), b(config(vocab, 2));
  const LabelQuery labels[] = {{LabelRole::Pos, "wichtig"}, {LabelRole::Neg, "unwichtig"}};
  const MaskedQuery q{"wvs:001", "de", "Arbeit ist [MASK].", std::nullopt};
  EXPECT_EQ(query(a, q, labels), query(a2, q, labels));
  EXPECT_NE(query(a, q, labels)[0].log_prob, query(b, q, labels)[0].log_prob);
}

TEST(Synthetic, UniformBackendGivesEqualProbabilities) {
  auto c = config({"wichtig", "unwichtig", "gut", "schlecht"});
  c.uniform = true;
  SyntheticBackend b(c);
  const LabelQuery labels[] = {{LabelRole::Pos, "wichtig"}, {LabelRole::Neg, "unwichtig"}};
  const auto r = query(b, {"wvs:001", "de", "Arbeit ist [MASK].", std::nullopt}, labels);
  EXPECT_NEAR(r[0].log_prob, -std::log(4.0), 1e-12);
  EXPECT_EQ(score_probe(r[0], r[1], ScoreMode::Diff).score, 0.0);
}

TEST(Synthetic, LabelsAreCaseInsensitive) {
  SyntheticBackend b(config({"wichtig", "unwichtig"}));
  const LabelQuery a[] = {{LabelRole::Pos, "Wichtig"}};
  const LabelQuery c[] = {{LabelRole::Pos, "wichtig"}};
  const MaskedQuery q{"wvs:001", "de", "Arbeit ist [MASK].", std::nullopt};
  EXPECT_EQ(query(b, q, a)[0].log_prob, query(b, q, c)[0].log_prob);
}

TEST(Synthetic, TokenStrategies) {
  auto c = config({"wich", "##tig", "gut"});
  const MaskedQuery q{"wvs:001", "de", "Arbeit ist [MASK].", std::nullopt};
  const LabelQuery split[] = {{LabelRole::Pos, "wichtig"}};

  SyntheticBackend single(c);
  EXPECT_THROW(query(single, q, split), LabelNotScorable);

  c.strategy = TokenStrategy::FirstSubtoken;
  SyntheticBackend first(c);
  const auto f = query(first, q, split);
  EXPECT_EQ(f[0].token_count, 2);
  const LabelQuery stem[] = {{LabelRole::Pos, "wich"}};
  EXPECT_EQ(f[0].log_prob, query(first, q, stem)[0].log_prob);

  c.strategy = TokenStrategy::MeanSubtokens;
  SyntheticBackend mean(c);
  const auto m = query(mean, q, split);
  EXPECT_EQ(m[0].token_count, 2);
  EXPECT_LE(m[0].log_prob, 0.0);
  EXPECT_NE(m[0].log_prob, f[0].log_prob);

  const LabelQuery unknown[] = {{LabelRole::Pos, "xyz"}};
  EXPECT_THROW(query(mean, q, unknown), LabelNotScorable);
}

TEST(Synthetic, MaskPositionIsTheTokenIndex) {
  EXPECT_EQ(mask_position("Arbeit ist [MASK]."), 2);
  EXPECT_EQ(mask_position("[MASK] se ne molim."), 0);
  EXPECT_THROW(mask_position("kein Platzhalter"), ValidationError);
}

// ----------------------------------------------------------- scoring

TEST(Scoring, ModesOverTheBundledCorpus) {
  const auto& probes = bundled_localized();
  SyntheticBackend b(config(synthetic_vocabulary_for(probes)));
  const std::vector<ScoreMode> modes{ScoreMode::Diff, ScoreMode::PosOnly, ScoreMode::NegOnly};
  const auto r = score_corpus(b, probes, modes);
  EXPECT_TRUE(r.skipped.empty());
  ASSERT_EQ(r.scores.size(), probes.size() * 3);
  ASSERT_EQ(r.logits.size(), probes.size() * 2);
  for (std::size_t i = 0; i < r.scores.size(); i += 3) {
    const auto& diff = r.scores[i];
    const auto& pos = r.scores[i + 1];
    const auto& neg = r.scores[i + 2];
    ASSERT_EQ(diff.mode, ScoreMode::Diff);
    ASSERT_EQ(pos.mode, ScoreMode::PosOnly);
    ASSERT_EQ(neg.mode, ScoreMode::NegOnly);
    ASSERT_EQ(diff.score, pos.score - neg.score) << diff.probe_id << "/" << diff.language_code;
  }
}

TEST(Scoring, PerPositionOffsetsLeaveDiffUnchanged) {
  const auto& probes = bundled_localized();
  auto c = config(synthetic_vocabulary_for(probes));
  SyntheticBackend plain(c);
  c.position_offset_seed = 3;
  SyntheticBackend shifted(c);
  const std::vector<ScoreMode> modes{ScoreMode::Diff};
  const auto a = score_corpus(plain, probes, modes);
  const auto b = score_corpus(shifted, probes, modes);
  ASSERT_EQ(a.scores.size(), b.scores.size());
  for (std::size_t i = 0; i < a.scores.size(); ++i) {
    ASSERT_NEAR(a.scores[i].score, b.scores[i].score, 1e-12);
  }
}

TEST(Scoring, ThreadCountDoesNotChangeOutput) {
  const auto& probes = bundled_localized();
  SyntheticBackend b(config(synthetic_vocabulary_for(probes)));
  const std::vector<ScoreMode> modes{ScoreMode::Diff};
  const auto one = score_corpus(b, probes, modes, {1});
  const auto many = score_corpus(b, probes, modes, {4});
  EXPECT_EQ(one.scores, many.scores);
  EXPECT_EQ(one.logits, many.logits);
}

TEST(Scoring, UnscorableProbesAreSkipped) {
  SyntheticBackend b(config({"wichtig", "unwichtig"}));
  const std::vector<LocalizedProbe> probes{
      localized("wvs:001", "Arbeit ist [MASK].", "wichtig", "unwichtig"),
      localized("wvs:002", "Gott ist [MASK].", "wichtig", "egal")};
  const std::vector<ScoreMode> modes{ScoreMode::Diff};
  const auto r = score_corpus(b, probes, modes);
  ASSERT_EQ(r.scores.size(), 1u);
  ASSERT_EQ(r.skipped.size(), 1u);
  EXPECT_EQ(r.skipped[0].probe_id, "wvs:002");
}

TEST(Scoring, MismatchedRecordsAreRejected) {
  LogitRecord pos{"m", "wvs:001", "de", LabelRole::Pos, "a", 1, -1.0, 2, TokenStrategy::SingleToken};
  LogitRecord neg = pos;
  neg.label_role = LabelRole::Neg;
  neg.log_prob = -3.0;
  EXPECT_EQ(score_probe(pos, neg, ScoreMode::Diff).score, 2.0);
  EXPECT_EQ(score_probe(pos, neg, ScoreMode::NegOnly).score, -3.0);
  auto other = neg;
  other.language_code = "ro";
  EXPECT_THROW(score_probe(pos, other, ScoreMode::Diff), MismatchedRecords);
  EXPECT_THROW(score_probe(neg, pos, ScoreMode::Diff), MismatchedRecords);
}

TEST(Scoring, LogitRecordValidation) {
  LogitRecord r{"m", "wvs:001", "de", LabelRole::Pos, "a", 1, -1.0, 2, TokenStrategy::SingleToken};
  EXPECT_NO_THROW(validate_logit_record(r));
  auto bad = r;
  bad.log_prob = 0.5;
  EXPECT_THROW(validate_logit_record(bad), ValidationError);
  bad = r;
  bad.log_prob = std::nan("");
  EXPECT_THROW(validate_logit_record(bad), ValidationError);
  bad = r;
  bad.token_count = 2;
  EXPECT_THROW(validate_logit_record(bad), ValidationError);
  bad = r;
  bad.mask_index = -1;
  EXPECT_THROW(validate_logit_record(bad), ValidationError);
}

// ------------------------------------------------------- interchange

TEST(Interchange, RoundTripPreservesEveryDigit) {
  const auto& probes = bundled_localized();
  SyntheticBackend b(config(synthetic_vocabulary_for(probes)));
  const std::vector<ScoreMode> modes{ScoreMode::Diff};
  const auto direct = score_corpus(b, probes, modes);

  std::ostringstream out;
  write_logit_records(out, direct.logits);
  std::istringstream in(out.str());
  auto records = read_logit_records(in);
  EXPECT_EQ(records, direct.logits);

  InterchangeBackend replay(std::move(records), "synthetic");
  const auto replayed = score_corpus(replay, probes, modes);
  EXPECT_EQ(replayed.scores, direct.scores);
}

TEST(Interchange, CommittedSampleReplays) {
  InterchangeBackend replay(vptest::data_path("fixtures/sample_logits.jsonl"));
  EXPECT_EQ(replay.model_id(), "sample-mlm");
  EXPECT_EQ(replay.size(), 12u);
  const auto& probes = bundled_localized();
  const std::vector<ScoreMode> modes{ScoreMode::Diff};
  const auto r = score_corpus(replay, probes, modes);
  EXPECT_EQ(r.scores.size(), 6u);
  EXPECT_EQ(r.skipped.size(), probes.size() - 6);
}

TEST(Interchange, StrictReader) {
  const std::string good =
      R"({"model_id":"m","probe_id":"wvs:001","language_code":"de","label_role":"pos",)"
      R"("label_surface":"a","token_count":1,"log_prob":-1.5,"mask_index":2,"strategy":"single_token"})";
  {
    std::istringstream in(good + "\n");
    EXPECT_EQ(read_logit_records(in).size(), 1u);
  }
  {
    auto extra = good;
    extra.insert(extra.size() - 1, R"(,"logit":3)");
    std::istringstream in(extra + "\n");
    EXPECT_THROW(read_logit_records(in), SchemaError);
  }
  {
    auto positive = good;
    positive.replace(positive.find("-1.5"), 4, "0.25");
    std::istringstream in(positive + "\n");
    EXPECT_THROW(read_logit_records(in), SchemaError);
  }
}

TEST(Interchange, SurfaceAndStrategyMustMatch) {
  LogitRecord pos{"m", "wvs:001", "de", LabelRole::Pos, "wichtig", 1, -1.0, 2,
                  TokenStrategy::SingleToken};
  LogitRecord neg = pos;
  neg.label_role = LabelRole::Neg;
  neg.label_surface = "unwichtig";
  InterchangeBackend replay({pos, neg}, "m");
  const MaskedQuery q{"wvs:001", "de", "Arbeit ist [MASK].", std::nullopt};
  const LabelQuery wrong[] = {{LabelRole::Pos, "gut"}};
  EXPECT_THROW(query(replay, q, wrong), LabelNotScorable);
  InterchangeBackend other({pos, neg}, "m", TokenStrategy::FirstSubtoken);
  const LabelQuery right[] = {{LabelRole::Pos, "wichtig"}};
  EXPECT_THROW(query(other, q, right), LabelNotScorable);
  EXPECT_THROW(InterchangeBackend("/nonexistent.jsonl"), BackendUnavailable);
}

TEST(ScoreRecords, RoundTrip) {
  const std::vector<ScoreRecord> v{{"m", "wvs:001", "de", ScoreMode::Diff, -0.1234567890123},
                                   {"m", "wvs:001", "de", ScoreMode::NegOnly, -7.5}};
  std::ostringstream out;
  write_score_records(out, v);
  std::istringstream in(out.str());
  EXPECT_EQ(read_score_records(in), v);
}
