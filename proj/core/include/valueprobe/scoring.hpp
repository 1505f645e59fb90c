#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "valueprobe/localization.hpp"

namespace valueprobe {

enum class TokenStrategy { SingleToken, FirstSubtoken, MeanSubtokens };
enum class ScoreMode { Diff, PosOnly, NegOnly };

std::string_view to_string(TokenStrategy s);
TokenStrategy token_strategy_from_string(std::string_view s);
std::string_view to_string(ScoreMode m);
ScoreMode score_mode_from_string(std::string_view s);

struct MaskedQuery {
  std::string probe_id;
  std::string language_code;
  std::string text;
  std::optional<int> mask_index;  // filled by the backend
};

struct LabelQuery {
  LabelRole role = LabelRole::Pos;
  std::string surface;
};

/// Log-probability of one label at the mask position of one probe.
struct LogitRecord {
  std::string model_id;
  std::string probe_id;
  std::string language_code;
  LabelRole label_role = LabelRole::Pos;
  std::string label_surface;
  int token_count = 1;
  double log_prob = 0.0;
  int mask_index = 0;
  TokenStrategy strategy = TokenStrategy::SingleToken;

  bool operator==(const LogitRecord&) const = default;
};

/// Throws ValidationError on a non-finite or positive log_prob, a token_count
/// below one, or a SingleToken record with more than one piece.
void validate_logit_record(const LogitRecord& r);

struct ScoreRecord {
  std::string model_id;
  std::string probe_id;
  std::string language_code;
  ScoreMode mode = ScoreMode::Diff;
  double score = 0.0;

  bool operator==(const ScoreRecord&) const = default;
};

class Backend {
 public:
  virtual ~Backend() = default;

  virtual const std::string& model_id() const = 0;
  virtual TokenStrategy strategy() const = 0;
  /// True when concurrent `query` calls are allowed.
  virtual bool thread_safe() const { return true; }

  /// One record per label, in label order. Throws LabelNotScorable when a
  /// label cannot be represented under the configured strategy and
  /// BackendUnavailable when the backend cannot answer at all.
  virtual std::vector<LogitRecord> query(const MaskedQuery& query,
                                         std::span<const LabelQuery> labels) = 0;
};

std::vector<LogitRecord> query(Backend& backend, const MaskedQuery& query,
                               std::span<const LabelQuery> labels);

// ------------------------------------------------------------- synthetic

struct SyntheticBackendConfig {
  std::uint64_t seed = 0;
  /// Whole words and "##"-prefixed continuation pieces.
  std::vector<std::string> vocabulary;
  bool uniform = false;
  TokenStrategy strategy = TokenStrategy::SingleToken;
  std::string model_id = "synthetic";
  /// When set, every raw score at a (text, position) is shifted by a
  /// pseudo-random constant derived from this seed. Normalized outputs are
  /// unaffected; used to exercise normalization invariance.
  std::optional<std::uint64_t> position_offset_seed;
};

/// Deterministic stand-in for a masked LM. Raw scores are hashes of
/// (seed, text, position, token); log-probabilities are their log-softmax over
/// the configured vocabulary.
class SyntheticBackend final : public Backend {
 public:
  explicit SyntheticBackend(SyntheticBackendConfig config);

  const std::string& model_id() const override { return config_.model_id; }
  TokenStrategy strategy() const override { return config_.strategy; }
  std::vector<LogitRecord> query(const MaskedQuery& query,
                                 std::span<const LabelQuery> labels) override;

  /// WordPiece-style greedy longest-match split; nullopt when impossible.
  std::optional<std::vector<std::size_t>> tokenize_label(std::string_view surface) const;

  /// Unnormalized score of vocabulary entry `token` at `position`.
  double raw_score(std::string_view text, int position, std::size_t token) const;
  /// log-sum-exp of raw scores over the vocabulary at `position`.
  double log_normalizer(std::string_view text, int position) const;

  const std::vector<std::string>& vocabulary() const noexcept { return vocab_; }
  const SyntheticBackendConfig& config() const noexcept { return config_; }

 private:
  SyntheticBackendConfig config_;
  std::vector<std::string> vocab_;  // case-folded
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Vocabulary covering every local label surface plus filler words.
std::vector<std::string> synthetic_vocabulary_for(std::span<const LocalizedProbe> probes);

/// Whitespace-token index of the placeholder in `text`.
int mask_position(std::string_view text);

// ----------------------------------------------------- interchange replay

/// Writes one record per line with exactly the interchange field set.
void write_logit_records(std::ostream& out, std::span<const LogitRecord> records);
/// Strict reader: unknown or missing fields are a SchemaError.
std::vector<LogitRecord> read_logit_records(std::istream& in);
std::string format_log_prob(double v);

/// Replays a logit interchange file.
class InterchangeBackend final : public Backend {
 public:
  /// `model_id` selects one model when the file holds several; empty means the
  /// file must hold exactly one.
  InterchangeBackend(const std::filesystem::path& path, std::string model_id = {},
                     TokenStrategy strategy = TokenStrategy::SingleToken);
  InterchangeBackend(std::vector<LogitRecord> records, std::string model_id,
                     TokenStrategy strategy = TokenStrategy::SingleToken);

  const std::string& model_id() const override { return model_id_; }
  TokenStrategy strategy() const override { return strategy_; }
  std::vector<LogitRecord> query(const MaskedQuery& query,
                                 std::span<const LabelQuery> labels) override;

  std::size_t size() const noexcept { return records_.size(); }

 private:
  void index(std::vector<LogitRecord> records);

  std::string model_id_;
  TokenStrategy strategy_;
  std::map<std::tuple<std::string, std::string, LabelRole>, LogitRecord> records_;
};

// ------------------------------------------------------------ scoring

/// Diff -> pos - neg, PosOnly -> pos, NegOnly -> neg. Throws MismatchedRecords.
ScoreRecord score_probe(const LogitRecord& pos, const LogitRecord& neg, ScoreMode mode);

struct SkippedProbe {
  std::string probe_id;
  std::string language_code;
  std::string reason;
};

struct ScoringResult {
  std::vector<LogitRecord> logits;   // sorted by (probe, language, role)
  std::vector<ScoreRecord> scores;   // sorted by (probe, language, mode)
  std::vector<SkippedProbe> skipped;
};

struct ScoreOptions {
  std::size_t threads = 1;
};

/// Scores each localized probe under every requested mode. Probes with an
/// unscorable label are skipped and reported. Propagates BackendUnavailable.
ScoringResult score_corpus(Backend& backend, std::span<const LocalizedProbe> probes,
                           std::span<const ScoreMode> modes, const ScoreOptions& options = {});

void write_score_records(std::ostream& out, std::span<const ScoreRecord> records);
std::vector<ScoreRecord> read_score_records(std::istream& in);

}  // namespace valueprobe
