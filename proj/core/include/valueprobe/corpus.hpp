#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace valueprobe {

enum class Survey { Hofstede, WVS };

std::string_view to_string(Survey s);
Survey survey_from_string(std::string_view s);

struct ScaleSpec {
  double min = 0.0;
  double max = 1.0;

  bool operator==(const ScaleSpec&) const = default;
};

/// A cloze template plus the label pair probed at its mask position.
struct ProbeQuestion {
  std::string id;  // "<hof|wvs>:<zero-padded ordinal>"
  Survey survey = Survey::WVS;
  std::string group;  // WVS category name or Hofstede dimension code
  std::optional<int> hofstede_index;
  std::string template_text;
  std::string label_pos;
  std::string label_neg;
  ScaleSpec scale;

  bool operator==(const ProbeQuestion&) const = default;
};

struct CultureEntry {
  std::string language;
  std::string country;
  std::int64_t wikipedia_articles = 0;

  bool operator==(const CultureEntry&) const = default;
};

/// One-to-one language <-> country assignment.
class CultureMap {
 public:
  static constexpr std::size_t kExpectedEntries = 13;
  static constexpr std::int64_t kMinWikipediaArticles = 10'000;

  CultureMap() = default;
  /// Validates the entries; throws ValidationError.
  explicit CultureMap(std::vector<CultureEntry> entries);

  const std::string& culture_of(std::string_view language) const;
  const std::string& language_of(std::string_view country) const;
  bool has_language(std::string_view language) const;

  const std::vector<CultureEntry>& entries() const noexcept { return entries_; }
  std::vector<std::string> languages() const;

  bool operator==(const CultureMap&) const = default;

 private:
  std::vector<CultureEntry> entries_;
};

/// The 13 WVS wave-7 categories, of which two are not scored.
struct CategoryCatalog {
  std::vector<std::string> retained;
  std::vector<std::string> excluded;

  static const CategoryCatalog& wvs();

  bool is_retained(std::string_view name) const;
  bool is_excluded(std::string_view name) const;

  bool operator==(const CategoryCatalog&) const = default;
};

inline constexpr std::string_view kHofstedeDimensionCodes[] = {"pdi", "idv", "mas",
                                                               "uai", "lto", "ivr"};

/// Dimension code whose formula consumes survey item `index` (1..24).
std::string_view hofstede_dimension_of_index(int index);

class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<ProbeQuestion> probes, CultureMap culture,
         CategoryCatalog catalog = CategoryCatalog::wvs());

  const std::vector<ProbeQuestion>& probes() const noexcept { return probes_; }
  const CultureMap& culture() const noexcept { return culture_; }
  const CategoryCatalog& catalog() const noexcept { return catalog_; }

  std::size_t count(Survey s) const;
  const ProbeQuestion* find(std::string_view id) const;
  const ProbeQuestion* hofstede_item(int index) const;

  /// Probes of one group ordered by id. Throws UnknownGroup or ExcludedCategory.
  std::vector<ProbeQuestion> probes_by_group(Survey survey, std::string_view group) const;

  /// Hofstede probes plus WVS probes in retained categories, ordered by id.
  std::vector<ProbeQuestion> scoring_probes() const;

  /// True when Hofstede items 1..24 are each present exactly once.
  bool has_complete_hofstede() const;

  bool operator==(const Corpus&) const = default;

 private:
  std::vector<ProbeQuestion> probes_;
  CultureMap culture_;
  CategoryCatalog catalog_;
};

// Checks every per-record invariant; throws ValidationError naming the probe.
void validate_probe(const ProbeQuestion& p, const CategoryCatalog& catalog);

// Parsing and serialization of the line-delimited survey-definition and
// culture-map files. The first line of each is a schema header.
std::vector<ProbeQuestion> read_probes(std::istream& in);
void write_probes(std::ostream& out, std::span<const ProbeQuestion> probes);
std::vector<CultureEntry> read_culture_entries(std::istream& in);
void write_culture_entries(std::ostream& out, std::span<const CultureEntry> entries);

/// Loads and validates both files. Throws SchemaError or ValidationError.
Corpus load_corpus(const std::filesystem::path& probes_path,
                   const std::filesystem::path& culture_map_path);

}  // namespace valueprobe
