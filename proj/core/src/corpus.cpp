#include "valueprobe/corpus.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>

#include "jsonl.hpp"
#include "valueprobe/error.hpp"
#include "valueprobe/text.hpp"

namespace valueprobe {

using detail::json;

namespace {

constexpr std::string_view kProbeSchema = "valueprobe.corpus";
constexpr std::string_view kCultureSchema = "valueprobe.culture_map";
constexpr int kSchemaVersion = 1;

std::string_view id_prefix(Survey s) { return s == Survey::Hofstede ? "hof" : "wvs"; }

bool valid_id(const ProbeQuestion& p) {
  const auto prefix = id_prefix(p.survey);
  if (p.id.size() <= prefix.size() + 1) return false;
  if (p.id.compare(0, prefix.size(), prefix) != 0 || p.id[prefix.size()] != ':') return false;
  return std::all_of(p.id.begin() + static_cast<std::ptrdiff_t>(prefix.size()) + 1, p.id.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

std::string_view to_string(Survey s) { return s == Survey::Hofstede ? "hofstede" : "wvs"; }

Survey survey_from_string(std::string_view s) {
  if (s == "hofstede") return Survey::Hofstede;
  if (s == "wvs") return Survey::WVS;
  throw SchemaError("unknown survey '" + std::string(s) + "'");
}

// ---------------------------------------------------------------- CultureMap

CultureMap::CultureMap(std::vector<CultureEntry> entries) : entries_(std::move(entries)) {
  if (entries_.size() != kExpectedEntries) {
    throw ValidationError("culture_map", "expected " + std::to_string(kExpectedEntries) +
                                             " entries, found " + std::to_string(entries_.size()));
  }
  std::set<std::string> langs;
  std::set<std::string> countries;
  for (const auto& e : entries_) {
    if (e.language.empty() || e.country.empty()) {
      throw ValidationError("culture_map", "empty language or country");
    }
    if (!langs.insert(e.language).second) {
      throw ValidationError(e.language, "duplicate language code");
    }
    if (!countries.insert(e.country).second) {
      throw ValidationError(e.country, "duplicate country");
    }
    if (e.wikipedia_articles < kMinWikipediaArticles) {
      throw ValidationError(e.language, "fewer than 10000 Wikipedia articles");
    }
  }
}

const std::string& CultureMap::culture_of(std::string_view language) const {
  for (const auto& e : entries_) {
    if (e.language == language) return e.country;
  }
  throw UnknownLanguage("unknown language code '" + std::string(language) + "'");
}

const std::string& CultureMap::language_of(std::string_view country) const {
  for (const auto& e : entries_) {
    if (e.country == country) return e.language;
  }
  throw UnknownLanguage("no language mapped to country '" + std::string(country) + "'");
}

bool CultureMap::has_language(std::string_view language) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const CultureEntry& e) { return e.language == language; });
}

std::vector<std::string> CultureMap::languages() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.language);
  return out;
}

// ----------------------------------------------------------- CategoryCatalog

const CategoryCatalog& CategoryCatalog::wvs() {
  static const CategoryCatalog catalog{
      {
          "Social Values, Attitudes and Stereotypes",
          "Happiness and Well-being",
          "Social Capital, Trust and Organisational Membership",
          "Corruption",
          "Migration",
          "Security",
          "Science and Technology",
          "Religious Values",
          "Ethical Values and Norms",
          "Political Interest and Political Participation",
          "Political Culture and Political Regimes",
      },
      {
          "Economic Values",
          "Postmaterialist Index",
      },
  };
  return catalog;
}

bool CategoryCatalog::is_retained(std::string_view name) const {
  return std::find(retained.begin(), retained.end(), name) != retained.end();
}

bool CategoryCatalog::is_excluded(std::string_view name) const {
  return std::find(excluded.begin(), excluded.end(), name) != excluded.end();
}

std::string_view hofstede_dimension_of_index(int index) {
  // Item membership of the six dimension formulas.
  static constexpr int kDimension[25] = {-1, 1, 0, 2, 1, 2, 1, 0, 2, 1, 2, 5, 5,
                                         4,  4, 3, 5, 5, 3, 4, 0, 3, 4, 0, 3};
  if (index < 1 || index > 24) {
    throw ValidationError("hofstede", "item index " + std::to_string(index) + " outside 1..24");
  }
  return kHofstedeDimensionCodes[kDimension[index]];
}

// -------------------------------------------------------------------- Corpus

void validate_probe(const ProbeQuestion& p, const CategoryCatalog& catalog) {
  const auto& id = p.id;
  if (!valid_id(p)) {
    throw ValidationError(id, "id must be '" + std::string(id_prefix(p.survey)) +
                                  ":<digits>' for its survey");
  }
  const auto masks = text::count_occurrences(p.template_text, text::kMask);
  if (masks != 1) {
    throw ValidationError(id, "template must contain [MASK] exactly once (found " +
                                  std::to_string(masks) + ")");
  }
  if (!text::is_single_word(p.label_pos) || !text::is_single_word(p.label_neg)) {
    throw ValidationError(id, "labels must be non-empty single words");
  }
  if (p.label_pos == p.label_neg) {
    throw ValidationError(id, "label_pos and label_neg must differ");
  }
  if (!(p.scale.min < p.scale.max)) {
    throw ValidationError(id, "scale_min must be below scale_max");
  }
  if (p.survey == Survey::Hofstede) {
    if (!p.hofstede_index) throw ValidationError(id, "Hofstede probe without hofstede_index");
    if (*p.hofstede_index < 1 || *p.hofstede_index > 24) {
      throw ValidationError(id, "hofstede_index outside 1..24");
    }
    if (p.group != hofstede_dimension_of_index(*p.hofstede_index)) {
      throw ValidationError(id, "group '" + p.group + "' does not use item " +
                                    std::to_string(*p.hofstede_index));
    }
  } else {
    if (p.hofstede_index) throw ValidationError(id, "hofstede_index on a WVS probe");
    if (!catalog.is_retained(p.group) && !catalog.is_excluded(p.group)) {
      throw ValidationError(id, "unknown WVS category '" + p.group + "'");
    }
  }
}

Corpus::Corpus(std::vector<ProbeQuestion> probes, CultureMap culture, CategoryCatalog catalog)
    : probes_(std::move(probes)), culture_(std::move(culture)), catalog_(std::move(catalog)) {
  std::set<std::string> ids;
  std::set<int> indices;
  for (const auto& p : probes_) {
    validate_probe(p, catalog_);
    if (!ids.insert(p.id).second) throw ValidationError(p.id, "duplicate probe id");
    if (p.hofstede_index && !indices.insert(*p.hofstede_index).second) {
      throw ValidationError(p.id, "duplicate hofstede_index " +
                                      std::to_string(*p.hofstede_index));
    }
  }
  std::sort(probes_.begin(), probes_.end(),
            [](const ProbeQuestion& a, const ProbeQuestion& b) { return a.id < b.id; });
}

std::size_t Corpus::count(Survey s) const {
  return static_cast<std::size_t>(std::count_if(
      probes_.begin(), probes_.end(), [s](const ProbeQuestion& p) { return p.survey == s; }));
}

const ProbeQuestion* Corpus::find(std::string_view id) const {
  auto it = std::lower_bound(probes_.begin(), probes_.end(), id,
                             [](const ProbeQuestion& p, std::string_view v) { return p.id < v; });
  return it != probes_.end() && it->id == id ? &*it : nullptr;
}

const ProbeQuestion* Corpus::hofstede_item(int index) const {
  for (const auto& p : probes_) {
    if (p.hofstede_index == index) return &p;
  }
  return nullptr;
}

std::vector<ProbeQuestion> Corpus::probes_by_group(Survey survey, std::string_view group) const {
  if (survey == Survey::Hofstede) {
    if (std::find(std::begin(kHofstedeDimensionCodes), std::end(kHofstedeDimensionCodes), group) ==
        std::end(kHofstedeDimensionCodes)) {
      throw UnknownGroup("unknown Hofstede dimension '" + std::string(group) + "'");
    }
  } else if (catalog_.is_excluded(group)) {
    throw ExcludedCategory("WVS category '" + std::string(group) + "' is excluded from scoring");
  } else if (!catalog_.is_retained(group)) {
    throw UnknownGroup("unknown WVS category '" + std::string(group) + "'");
  }
  std::vector<ProbeQuestion> out;
  for (const auto& p : probes_) {
    if (p.survey == survey && p.group == group) out.push_back(p);
  }
  return out;
}

std::vector<ProbeQuestion> Corpus::scoring_probes() const {
  std::vector<ProbeQuestion> out;
  for (const auto& p : probes_) {
    if (p.survey == Survey::Hofstede || catalog_.is_retained(p.group)) out.push_back(p);
  }
  return out;
}

bool Corpus::has_complete_hofstede() const {
  std::set<int> seen;
  for (const auto& p : probes_) {
    if (p.hofstede_index) seen.insert(*p.hofstede_index);
  }
  return seen.size() == 24 && *seen.begin() == 1 && *seen.rbegin() == 24 &&
         count(Survey::Hofstede) == 24;
}

// ------------------------------------------------------------------------ IO

std::vector<ProbeQuestion> read_probes(std::istream& in) {
  std::vector<ProbeQuestion> probes;
  bool header_seen = false;
  detail::for_each_record(in, "corpus", [&](const json& rec, std::size_t lineno) {
    const auto at = detail::where("corpus", lineno);
    if (!header_seen) {
      detail::check_header(rec, kProbeSchema, kSchemaVersion, at);
      header_seen = true;
      return;
    }
    detail::require_fields(
        rec, {"id", "survey", "group", "template", "label_pos", "label_neg", "scale_min", "scale_max"},
        {"hofstede_index"}, at);
    ProbeQuestion p;
    p.id = detail::get_string(rec, "id", at);
    try {
      p.survey = survey_from_string(detail::get_string(rec, "survey", at));
    } catch (const SchemaError& e) {
      throw SchemaError(at + ": " + e.what());
    }
    p.group = detail::get_string(rec, "group", at);
    if (rec.contains("hofstede_index")) {
      p.hofstede_index = static_cast<int>(detail::get_integer(rec, "hofstede_index", at));
    }
    p.template_text = detail::get_string(rec, "template", at);
    p.label_pos = detail::get_string(rec, "label_pos", at);
    p.label_neg = detail::get_string(rec, "label_neg", at);
    p.scale.min = detail::get_number(rec, "scale_min", at);
    p.scale.max = detail::get_number(rec, "scale_max", at);
    for (const auto* s : {&p.id, &p.template_text, &p.label_pos, &p.label_neg, &p.group}) {
      if (!text::is_valid_utf8(*s)) throw SchemaError(at + ": invalid UTF-8");
    }
    probes.push_back(std::move(p));
  });
  if (!header_seen) throw SchemaError("corpus: empty file (missing schema header)");
  return probes;
}

void write_probes(std::ostream& out, std::span<const ProbeQuestion> probes) {
  out << detail::header_line(kProbeSchema, kSchemaVersion) << '\n';
  for (const auto& p : probes) {
    json rec = json::object();
    rec["id"] = p.id;
    rec["survey"] = to_string(p.survey);
    rec["group"] = p.group;
    if (p.hofstede_index) rec["hofstede_index"] = *p.hofstede_index;
    rec["template"] = p.template_text;
    rec["label_pos"] = p.label_pos;
    rec["label_neg"] = p.label_neg;
    rec["scale_min"] = p.scale.min;
    rec["scale_max"] = p.scale.max;
    out << rec.dump() << '\n';
  }
}

std::vector<CultureEntry> read_culture_entries(std::istream& in) {
  std::vector<CultureEntry> entries;
  bool header_seen = false;
  detail::for_each_record(in, "culture map", [&](const json& rec, std::size_t lineno) {
    const auto at = detail::where("culture map", lineno);
    if (!header_seen) {
      detail::check_header(rec, kCultureSchema, kSchemaVersion, at);
      header_seen = true;
      return;
    }
    detail::require_fields(rec, {"language", "country", "wikipedia_articles"}, {}, at);
    entries.push_back({detail::get_string(rec, "language", at), detail::get_string(rec, "country", at),
                       detail::get_integer(rec, "wikipedia_articles", at)});
  });
  if (!header_seen) throw SchemaError("culture map: empty file (missing schema header)");
  return entries;
}

void write_culture_entries(std::ostream& out, std::span<const CultureEntry> entries) {
  out << detail::header_line(kCultureSchema, kSchemaVersion) << '\n';
  for (const auto& e : entries) {
    json rec = json::object();
    rec["language"] = e.language;
    rec["country"] = e.country;
    rec["wikipedia_articles"] = e.wikipedia_articles;
    out << rec.dump() << '\n';
  }
}

Corpus load_corpus(const std::filesystem::path& probes_path,
                   const std::filesystem::path& culture_map_path) {
  auto probes_in = detail::open_input(probes_path);
  auto probes = read_probes(probes_in);
  auto culture_in = detail::open_input(culture_map_path);
  CultureMap culture(read_culture_entries(culture_in));
  return Corpus(std::move(probes), std::move(culture));
}

}  // namespace valueprobe
