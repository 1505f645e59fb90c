#include "valueprobe/localization.hpp"

#include <algorithm>
#include <exception>
#include <future>
#include <ostream>

#include "jsonl.hpp"
#include "valueprobe/error.hpp"
#include "valueprobe/text.hpp"

namespace valueprobe {

using detail::json;

std::string_view to_string(LabelRole r) { return r == LabelRole::Pos ? "pos" : "neg"; }

LabelRole label_role_from_string(std::string_view s) {
  if (s == "pos") return LabelRole::Pos;
  if (s == "neg") return LabelRole::Neg;
  throw SchemaError("label_role must be \"pos\" or \"neg\", got '" + std::string(s) + "'");
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::StringMatch: return "string_match";
    case Provenance::Aligned: return "aligned";
    case Provenance::Manual: return "manual";
  }
  return "?";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "string_match") return Provenance::StringMatch;
  if (s == "aligned") return Provenance::Aligned;
  if (s == "manual") return Provenance::Manual;
  throw SchemaError("unknown provenance '" + std::string(s) + "'");
}

std::string_view to_string(ExclusionReason r) {
  switch (r) {
    case ExclusionReason::RemaskFailed: return "remask_failed";
    case ExclusionReason::LabelCollision: return "label_collision";
    case ExclusionReason::MultiWordLabel: return "multi_word_label";
  }
  return "?";
}

// ------------------------------------------------------------ LocalizedProbe

void validate_localized(const LocalizedProbe& p) {
  const auto id = p.probe_id + "@" + p.language_code;
  if (text::count_occurrences(p.masked_text, text::kMask) != 1) {
    throw ValidationError(id, "masked_text must contain [MASK] exactly once");
  }
  if (!text::is_single_word(p.label_pos_local) || !text::is_single_word(p.label_neg_local)) {
    throw ValidationError(id, "local labels must be single words");
  }
  if (text::equals_folded(p.label_pos_local, p.label_neg_local)) {
    throw ValidationError(id, "local labels collide");
  }
  if (!text::equals_folded(text::fill_mask(p.masked_text, p.label_pos_local), p.source_text)) {
    throw ValidationError(id, "masked_text with label_pos_local does not reproduce source_text");
  }
}

void write_localized(std::ostream& out, std::span<const LocalizedProbe> probes) {
  for (const auto& p : probes) {
    json rec = json::object();
    rec["probe_id"] = p.probe_id;
    rec["language_code"] = p.language_code;
    rec["masked_text"] = p.masked_text;
    rec["label_pos_local"] = p.label_pos_local;
    rec["label_neg_local"] = p.label_neg_local;
    rec["provenance"] = to_string(p.provenance);
    rec["source_text"] = p.source_text;
    out << rec.dump() << '\n';
  }
}

std::vector<LocalizedProbe> read_localized(std::istream& in) {
  std::vector<LocalizedProbe> out;
  detail::for_each_record(in, "localized probes", [&](const json& rec, std::size_t lineno) {
    const auto at = detail::where("localized probes", lineno);
    detail::require_fields(rec,
                           {"probe_id", "language_code", "masked_text", "label_pos_local",
                            "label_neg_local", "provenance", "source_text"},
                           {}, at);
    LocalizedProbe p;
    p.probe_id = detail::get_string(rec, "probe_id", at);
    p.language_code = detail::get_string(rec, "language_code", at);
    p.masked_text = detail::get_string(rec, "masked_text", at);
    p.label_pos_local = detail::get_string(rec, "label_pos_local", at);
    p.label_neg_local = detail::get_string(rec, "label_neg_local", at);
    p.provenance = provenance_from_string(detail::get_string(rec, "provenance", at));
    p.source_text = detail::get_string(rec, "source_text", at);
    validate_localized(p);
    out.push_back(std::move(p));
  });
  return out;
}

// ------------------------------------------------------------- OverrideTable

OverrideTable::OverrideTable(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  detail::for_each_record(in, "override file", [&](const json& rec, std::size_t lineno) {
    const auto at = detail::where("override file " + path.string(), lineno);
    detail::require_fields(rec,
                           {"probe_id", "language_code", "masked_text", "label_pos_local",
                            "label_neg_local"},
                           {"note"}, at);
    add({detail::get_string(rec, "probe_id", at), detail::get_string(rec, "language_code", at),
         detail::get_string(rec, "masked_text", at), detail::get_string(rec, "label_pos_local", at),
         detail::get_string(rec, "label_neg_local", at)});
  });
}

void OverrideTable::add(OverrideEntry entry) {
  LocalizedProbe probe{entry.probe_id,        entry.language_code,
                       entry.masked_text,     entry.label_pos_local,
                       entry.label_neg_local, Provenance::Manual,
                       text::fill_mask(entry.masked_text, entry.label_pos_local)};
  validate_localized(probe);
  auto key = std::make_pair(entry.probe_id, entry.language_code);
  entries_.insert_or_assign(std::move(key), std::move(entry));
}

const OverrideEntry* OverrideTable::find(std::string_view probe_id,
                                         std::string_view language) const {
  auto it = entries_.find({std::string(probe_id), std::string(language)});
  return it == entries_.end() ? nullptr : &it->second;
}

// ----------------------------------------------------------------- remasking

std::string render_for_translation(const ProbeQuestion& probe, LabelVariant which) {
  return text::fill_mask(probe.template_text,
                         which == LabelVariant::Pos ? probe.label_pos : probe.label_neg);
}

std::size_t mask_token_index(std::string_view template_text) {
  const auto pos = template_text.find(text::kMask);
  if (pos == std::string_view::npos) {
    throw ValidationError("", "template has no [MASK] placeholder");
  }
  return text::token_at(text::tokenize(template_text), pos);
}

namespace {

std::optional<RemaskResult> masked_at(const RemaskInput& in, text::ByteSpan span) {
  auto masked = text::replace_span(in.translated_sentence, span, text::kMask);
  if (text::count_occurrences(masked, text::kMask) != 1) return std::nullopt;
  RemaskResult r;
  r.masked_text = std::move(masked);
  r.label_surface = in.translated_sentence.substr(span.begin, span.size());
  return r;
}

/// Target tokens linked to the English label token, best link first.
std::vector<AlignmentLink> label_links(const RemaskInput& in, AlignerClient& aligner,
                                       std::size_t target_tokens) {
  std::vector<AlignmentLink> links;
  for (const auto& l : aligner.align({in.english_sentence, in.translated_sentence})) {
    if (l.source_token_index == in.english_label_token && l.target_token_index < target_tokens) {
      links.push_back(l);
    }
  }
  std::stable_sort(links.begin(), links.end(), [](const AlignmentLink& a, const AlignmentLink& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.target_token_index < b.target_token_index;
  });
  return links;
}

}  // namespace

std::optional<RemaskResult> remask_string_match(const RemaskInput& in, AlignerClient* aligner) {
  if (in.translated_sentence.empty() || in.local_label.empty()) return std::nullopt;
  // Only whole-word occurrences count; a hit inside an inflected form would
  // leave a word fragment next to the placeholder.
  std::vector<text::ByteSpan> spans;
  for (const auto& s : text::find_folded(in.translated_sentence, in.local_label)) {
    if (text::is_word_bounded(in.translated_sentence, s)) spans.push_back(s);
  }
  if (spans.empty()) return std::nullopt;

  std::optional<RemaskResult> result;
  if (spans.size() == 1) {
    result = masked_at(in, spans.front());
  } else {
    std::optional<text::ByteSpan> chosen;
    if (aligner != nullptr) {
      const auto tokens = text::tokenize(in.translated_sentence);
      for (const auto& link : label_links(in, *aligner, tokens.size())) {
        const auto& tok = tokens[link.target_token_index].full;
        auto it = std::find_if(spans.begin(), spans.end(), [&](const text::ByteSpan& s) {
          return s.begin >= tok.begin && s.end <= tok.end;
        });
        if (it != spans.end()) {
          chosen = *it;
          break;
        }
      }
    }
    const bool by_alignment = chosen.has_value();
    if (!chosen) chosen = spans.back();
    result = masked_at(in, *chosen);
    if (result) {
      result->tie_break = std::to_string(spans.size()) + " string matches; chose " +
                          (by_alignment ? "the aligned occurrence" : "the last occurrence");
    }
  }
  if (result) result->provenance = Provenance::StringMatch;
  return result;
}

std::optional<RemaskResult> remask_aligned(const RemaskInput& in, AlignerClient* aligner) {
  if (aligner == nullptr || in.translated_sentence.empty()) return std::nullopt;
  const auto tokens = text::tokenize(in.translated_sentence);
  for (const auto& link : label_links(in, *aligner, tokens.size())) {
    const auto& core = tokens[link.target_token_index].core;
    if (core.size() == 0) continue;
    auto result = masked_at(in, core);
    if (!result) continue;
    result->provenance = Provenance::Aligned;
    return result;
  }
  return std::nullopt;
}

std::optional<RemaskResult> remask_manual(const RemaskInput& in, const OverrideTable* overrides) {
  if (overrides == nullptr) return std::nullopt;
  const auto* entry = overrides->find(in.probe_id, in.language_code);
  if (entry == nullptr) return std::nullopt;
  RemaskResult r;
  r.masked_text = entry->masked_text;
  r.provenance = Provenance::Manual;
  r.label_surface = entry->label_pos_local;
  r.override_entry = entry;
  return r;
}

RemaskResult remask(const RemaskInput& in, AlignerClient* aligner, const OverrideTable* overrides) {
  if (auto r = remask_string_match(in, aligner)) return *r;
  if (auto r = remask_aligned(in, aligner)) return *r;
  if (auto r = remask_manual(in, overrides)) return *r;
  throw RemaskFailed("could not locate label '" + in.local_label + "' in '" +
                     in.translated_sentence + "'");
}

// ----------------------------------------------------------- whole corpus

namespace {

struct JobOutcome {
  std::optional<LocalizedProbe> probe;
  std::optional<LocalizationExclusion> exclusion;
  std::optional<LocalizationNote> note;
};

JobOutcome localize_one(const ProbeQuestion& probe, const std::string& language,
                        const LocalizationClients& clients, TranslationCache& cache) {
  JobOutcome out;
  auto exclude = [&](ExclusionReason reason, std::string detail) {
    out.exclusion = LocalizationExclusion{probe.id, language, reason, std::move(detail)};
    return out;
  };

  const auto english = render_for_translation(probe, LabelVariant::Pos);
  RemaskInput in;
  in.probe_id = probe.id;
  in.language_code = language;
  in.english_sentence = english;
  in.english_label_token = mask_token_index(probe.template_text);
  in.translated_sentence = translate(english, language, clients.translator, cache);
  in.local_label = translate(probe.label_pos, language, clients.translator, cache);
  const auto neg_local = translate(probe.label_neg, language, clients.translator, cache);

  std::optional<RemaskResult> result;
  const bool single = text::is_single_word(in.local_label) && text::is_single_word(neg_local);
  if (!single) {
    result = remask_manual(in, clients.overrides);
    if (!result) {
      return exclude(ExclusionReason::MultiWordLabel,
                     "translated labels '" + in.local_label + "' / '" + neg_local +
                         "' are not single words");
    }
  } else {
    try {
      result = remask(in, clients.aligner, clients.overrides);
    } catch (const RemaskFailed& e) {
      return exclude(ExclusionReason::RemaskFailed, e.what());
    }
  }

  LocalizedProbe lp;
  lp.probe_id = probe.id;
  lp.language_code = language;
  lp.provenance = result->provenance;
  lp.masked_text = result->masked_text;
  if (result->override_entry != nullptr) {
    lp.label_pos_local = result->override_entry->label_pos_local;
    lp.label_neg_local = result->override_entry->label_neg_local;
    lp.source_text = text::fill_mask(lp.masked_text, lp.label_pos_local);
  } else {
    lp.label_pos_local = result->label_surface;
    lp.label_neg_local = neg_local;
    lp.source_text = in.translated_sentence;
  }
  if (text::equals_folded(lp.label_pos_local, lp.label_neg_local)) {
    return exclude(ExclusionReason::LabelCollision,
                   "both labels localize to '" + lp.label_pos_local + "'");
  }
  try {
    validate_localized(lp);
  } catch (const ValidationError& e) {
    return exclude(ExclusionReason::RemaskFailed, e.rule());
  }
  if (result->tie_break) out.note = LocalizationNote{probe.id, language, *result->tie_break};
  out.probe = std::move(lp);
  return out;
}

template <class T>
void sort_by_key(std::vector<T>& v) {
  std::sort(v.begin(), v.end(), [](const T& a, const T& b) {
    return std::tie(a.probe_id, a.language_code) < std::tie(b.probe_id, b.language_code);
  });
}

}  // namespace

LocalizationResult localize_probes(std::span<const ProbeQuestion> probes,
                                   std::span<const std::string> languages,
                                   const LocalizationClients& clients,
                                   const LocalizeOptions& options) {
  TranslationCache scratch;
  TranslationCache& cache = clients.cache != nullptr ? *clients.cache : scratch;

  struct Job {
    const ProbeQuestion* probe;
    const std::string* language;
  };
  std::vector<Job> jobs;
  for (const auto& p : probes) {
    for (const auto& lang : languages) jobs.push_back({&p, &lang});
  }

  std::vector<JobOutcome> outcomes(jobs.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min(options.threads, jobs.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      outcomes[i] = localize_one(*jobs[i].probe, *jobs[i].language, clients, cache);
    }
  } else {
    std::vector<std::future<void>> futures;
    std::vector<std::exception_ptr> errors(jobs.size());
    for (std::size_t w = 0; w < workers; ++w) {
      futures.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < jobs.size(); i += workers) {
          try {
            outcomes[i] = localize_one(*jobs[i].probe, *jobs[i].language, clients, cache);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      }));
    }
    for (auto& f : futures) f.get();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  LocalizationResult result;
  for (auto& o : outcomes) {
    if (o.probe) result.probes.push_back(std::move(*o.probe));
    if (o.exclusion) result.exclusions.push_back(std::move(*o.exclusion));
    if (o.note) result.notes.push_back(std::move(*o.note));
  }
  sort_by_key(result.probes);
  sort_by_key(result.exclusions);
  sort_by_key(result.notes);
  return result;
}

LocalizationResult localize_corpus(const Corpus& corpus, std::span<const std::string> languages,
                                   const LocalizationClients& clients,
                                   const LocalizeOptions& options) {
  for (const auto& lang : languages) (void)corpus.culture().culture_of(lang);
  const auto probes = corpus.scoring_probes();
  return localize_probes(probes, languages, clients, options);
}

}  // namespace valueprobe
