#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "valueprobe/corpus.hpp"

namespace valueprobe {

enum class LabelRole { Pos, Neg };
enum class Provenance { StringMatch, Aligned, Manual };

std::string_view to_string(LabelRole r);
LabelRole label_role_from_string(std::string_view s);
std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

/// A probe translated into one target language and re-masked.
struct LocalizedProbe {
  std::string probe_id;
  std::string language_code;
  std::string masked_text;
  std::string label_pos_local;
  std::string label_neg_local;
  Provenance provenance = Provenance::StringMatch;
  std::string source_text;

  bool operator==(const LocalizedProbe&) const = default;
};

/// Throws ValidationError when the mask-count, reconstruction or label rules fail.
void validate_localized(const LocalizedProbe& p);

void write_localized(std::ostream& out, std::span<const LocalizedProbe> probes);
std::vector<LocalizedProbe> read_localized(std::istream& in);

// ------------------------------------------------------------------ clients

struct TranslationRequest {
  std::string text;
  std::string source_lang;
  std::string target_lang;
};

class TranslatorClient {
 public:
  virtual ~TranslatorClient() = default;
  /// Throws TranslatorUnavailable (no answer possible) or TranslatorError
  /// (transient failure; callers may retry).
  virtual std::string translate(const TranslationRequest& request) = 0;
  virtual std::string name() const = 0;
};

/// Answers from a line-delimited file of {text, source_lang, target_lang,
/// translated_text}. Requests with source == target return the text itself.
class FixtureTranslator final : public TranslatorClient {
 public:
  explicit FixtureTranslator(const std::filesystem::path& path);
  FixtureTranslator() = default;

  void add(TranslationRequest request, std::string translated);
  std::string translate(const TranslationRequest& request) override;
  std::string name() const override { return "fixture"; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::map<std::tuple<std::string, std::string, std::string>, std::string> entries_;
};

/// Talks to a translation endpoint compatible with the Google Cloud
/// Translation v2 REST shape: POST {q, source, target, format} to
/// `<endpoint>?key=<api_key>`, reply {data: {translations: [{translatedText}]}}.
class HttpTranslator final : public TranslatorClient {
 public:
  HttpTranslator(std::string endpoint, std::string api_key);

  std::string translate(const TranslationRequest& request) override;
  std::string name() const override { return "http"; }

 private:
  std::string endpoint_;
  std::string api_key_;
};

/// Persistent (source_text, language) -> translation store. The backing file
/// is append-only; on reload later records replace earlier ones.
class TranslationCache {
 public:
  TranslationCache() = default;
  explicit TranslationCache(std::filesystem::path path);

  std::optional<std::string> lookup(std::string_view source_text, std::string_view language) const;
  void store(const std::string& source_text, const std::string& language,
             const std::string& translation);
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::string>, std::string> entries_;
};

/// Replays a TranslationCache and nothing else.
class CacheReplayTranslator final : public TranslatorClient {
 public:
  explicit CacheReplayTranslator(const TranslationCache& cache) : cache_(cache) {}

  std::string translate(const TranslationRequest& request) override;
  std::string name() const override { return "cache"; }

 private:
  const TranslationCache& cache_;
};

/// Translates `text` from English, consulting `cache` first. A null client
/// means offline: only cache hits succeed. Transient client errors are retried.
std::string translate(std::string_view text, std::string_view language_code,
                      TranslatorClient* client, TranslationCache& cache,
                      std::string_view source_lang = "en");

struct AlignmentLink {
  std::size_t source_token_index = 0;
  std::size_t target_token_index = 0;
  double score = 1.0;

  bool operator==(const AlignmentLink&) const = default;
};

struct AlignmentRequest {
  std::string source_sentence;
  std::string target_sentence;
};

class AlignerClient {
 public:
  virtual ~AlignerClient() = default;
  /// Links between whitespace-token indices of the two sentences. An empty
  /// result means the aligner has no answer for this pair.
  virtual std::vector<AlignmentLink> align(const AlignmentRequest& request) = 0;
  virtual std::string name() const = 0;
};

/// Line-delimited {source_sentence, target_sentence, links: [[s, t, score]...]}.
class FixtureAligner final : public AlignerClient {
 public:
  FixtureAligner() = default;
  explicit FixtureAligner(const std::filesystem::path& path);

  void add(AlignmentRequest request, std::vector<AlignmentLink> links);
  std::vector<AlignmentLink> align(const AlignmentRequest& request) override;
  std::string name() const override { return "fixture"; }

 private:
  std::map<std::pair<std::string, std::string>, std::vector<AlignmentLink>> entries_;
};

/// POSTs {source_sentence, target_sentence} as JSON to `endpoint`; expects
/// {links: [{source_token_index, target_token_index, score}]}.
class HttpAligner final : public AlignerClient {
 public:
  explicit HttpAligner(std::string endpoint);

  std::vector<AlignmentLink> align(const AlignmentRequest& request) override;
  std::string name() const override { return "http"; }

 private:
  std::string endpoint_;
};

/// Memoizes an upstream aligner into an append-only file; with no upstream it
/// replays the file alone.
class CachingAligner final : public AlignerClient {
 public:
  CachingAligner(std::filesystem::path path, AlignerClient* upstream);

  std::vector<AlignmentLink> align(const AlignmentRequest& request) override;
  std::string name() const override { return "cache"; }

 private:
  std::filesystem::path path_;
  AlignerClient* upstream_;
  std::mutex mutex_;
  std::map<std::pair<std::string, std::string>, std::vector<AlignmentLink>> entries_;
};

struct OverrideEntry {
  std::string probe_id;
  std::string language_code;
  std::string masked_text;
  std::string label_pos_local;
  std::string label_neg_local;
};

class OverrideTable {
 public:
  OverrideTable() = default;
  explicit OverrideTable(const std::filesystem::path& path);

  /// Validates the entry; throws ValidationError.
  void add(OverrideEntry entry);
  const OverrideEntry* find(std::string_view probe_id, std::string_view language) const;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, OverrideEntry> entries_;
};

// ----------------------------------------------------------------- remasking

enum class LabelVariant { Pos, Neg };

/// Template with the placeholder replaced by the chosen English label.
std::string render_for_translation(const ProbeQuestion& probe, LabelVariant which);

/// Whitespace-token index of the placeholder in a template.
std::size_t mask_token_index(std::string_view template_text);

struct RemaskInput {
  std::string probe_id;
  std::string language_code;
  std::string translated_sentence;
  std::string local_label;
  std::string english_sentence;
  std::size_t english_label_token = 0;
};

struct RemaskResult {
  std::string masked_text;
  Provenance provenance = Provenance::StringMatch;
  /// Surface in the translated sentence that the placeholder replaced.
  std::string label_surface;
  /// Set when several string matches had to be disambiguated.
  std::optional<std::string> tie_break;
  const OverrideEntry* override_entry = nullptr;
};

// Individual stages; each returns nullopt when it cannot resolve the input.
std::optional<RemaskResult> remask_string_match(const RemaskInput& in, AlignerClient* aligner);
std::optional<RemaskResult> remask_aligned(const RemaskInput& in, AlignerClient* aligner);
std::optional<RemaskResult> remask_manual(const RemaskInput& in, const OverrideTable* overrides);

/// String match, then aligner, then manual override. Throws RemaskFailed.
RemaskResult remask(const RemaskInput& in, AlignerClient* aligner, const OverrideTable* overrides);

// ----------------------------------------------------------- whole corpus

enum class ExclusionReason { RemaskFailed, LabelCollision, MultiWordLabel };
std::string_view to_string(ExclusionReason r);

struct LocalizationExclusion {
  std::string probe_id;
  std::string language_code;
  ExclusionReason reason = ExclusionReason::RemaskFailed;
  std::string detail;
};

struct LocalizationNote {
  std::string probe_id;
  std::string language_code;
  std::string note;
};

struct LocalizationClients {
  TranslatorClient* translator = nullptr;
  TranslationCache* cache = nullptr;
  AlignerClient* aligner = nullptr;
  const OverrideTable* overrides = nullptr;
};

struct LocalizeOptions {
  std::size_t threads = 1;
};

struct LocalizationResult {
  std::vector<LocalizedProbe> probes;  // sorted by (probe_id, language_code)
  std::vector<LocalizationExclusion> exclusions;
  std::vector<LocalizationNote> notes;
};

/// Localizes every scoring probe of `corpus` into each language. Propagates
/// TranslatorUnavailable.
LocalizationResult localize_corpus(const Corpus& corpus, std::span<const std::string> languages,
                                   const LocalizationClients& clients,
                                   const LocalizeOptions& options = {});

LocalizationResult localize_probes(std::span<const ProbeQuestion> probes,
                                   std::span<const std::string> languages,
                                   const LocalizationClients& clients,
                                   const LocalizeOptions& options = {});

}  // namespace valueprobe
