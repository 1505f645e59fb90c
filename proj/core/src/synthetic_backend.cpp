#include <algorithm>
#include <cmath>
#include <set>

#include "hash.hpp"
#include "valueprobe/error.hpp"
#include "valueprobe/scoring.hpp"
#include "valueprobe/text.hpp"

namespace valueprobe {

namespace {

constexpr std::string_view kContinuation = "##";

// Padding so that label words never make up the whole vocabulary.
constexpr std::string_view kFillers[] = {
    "a",     "also",   "always", "an",    "and",   "any",   "are",   "be",    "but",
    "can",   "do",     "each",   "for",   "from",  "good",  "have",  "he",    "her",
    "his",   "how",    "i",      "in",    "is",    "it",    "just",  "like",  "make",
    "many",  "more",   "most",   "my",    "no",    "not",   "now",   "of",    "often",
    "on",    "one",    "only",   "or",    "other", "our",   "people", "same", "she",
    "so",    "some",   "such",   "that",  "the",   "their", "them",  "then",  "there",
    "they",  "this",   "time",   "to",    "very",  "was",   "we",    "well",  "what",
    "when",  "which",  "who",    "will",  "with",  "work",  "would", "year",  "you",
};

}  // namespace

int mask_position(std::string_view text) {
  const auto pos = text.find(text::kMask);
  if (pos == std::string_view::npos) {
    throw ValidationError("", "query text has no [MASK] placeholder");
  }
  return static_cast<int>(text::token_at(text::tokenize(text), pos));
}

std::vector<std::string> synthetic_vocabulary_for(std::span<const LocalizedProbe> probes) {
  std::set<std::string> words;
  for (auto f : kFillers) words.emplace(f);
  for (const auto& p : probes) {
    words.insert(text::fold_case(p.label_pos_local));
    words.insert(text::fold_case(p.label_neg_local));
  }
  return {words.begin(), words.end()};
}

SyntheticBackend::SyntheticBackend(SyntheticBackendConfig config) : config_(std::move(config)) {
  for (const auto& w : config_.vocabulary) {
    auto folded = text::fold_case(w);
    if (folded.empty()) continue;
    if (index_.emplace(folded, vocab_.size()).second) vocab_.push_back(std::move(folded));
  }
  if (vocab_.empty()) throw BackendUnavailable("synthetic backend needs a non-empty vocabulary");
}

std::optional<std::vector<std::size_t>> SyntheticBackend::tokenize_label(
    std::string_view surface) const {
  const auto word = text::fold_case(surface);
  if (word.empty()) return std::nullopt;
  std::vector<std::size_t> pieces;
  std::size_t pos = 0;
  while (pos < word.size()) {
    std::optional<std::size_t> match;
    for (std::size_t end = word.size(); end > pos; --end) {
      std::string candidate = pos == 0 ? std::string() : std::string(kContinuation);
      candidate.append(word, pos, end - pos);
      if (auto it = index_.find(candidate); it != index_.end()) {
        match = it->second;
        pos = end;
        break;
      }
    }
    if (!match) return std::nullopt;
    pieces.push_back(*match);
  }
  return pieces;
}

double SyntheticBackend::raw_score(std::string_view text, int position, std::size_t token) const {
  double raw = 0.0;
  if (!config_.uniform) {
    detail::Fnv1a h(config_.seed);
    h.mix(text).mix_u64(static_cast<std::uint64_t>(position)).mix(vocab_.at(token));
    raw = 8.0 * h.unit() - 8.0;
  }
  if (config_.position_offset_seed) {
    detail::Fnv1a h(*config_.position_offset_seed);
    h.mix(text).mix_u64(static_cast<std::uint64_t>(position));
    raw += 100.0 * (2.0 * h.unit() - 1.0);
  }
  return raw;
}

double SyntheticBackend::log_normalizer(std::string_view text, int position) const {
  std::vector<double> raws(vocab_.size());
  for (std::size_t i = 0; i < vocab_.size(); ++i) raws[i] = raw_score(text, position, i);
  const double peak = *std::max_element(raws.begin(), raws.end());
  double sum = 0.0;
  for (double r : raws) sum += std::exp(r - peak);
  return peak + std::log(sum);
}

std::vector<LogitRecord> SyntheticBackend::query(const MaskedQuery& q,
                                                 std::span<const LabelQuery> labels) {
  const int t = mask_position(q.text);
  std::vector<LogitRecord> out;
  out.reserve(labels.size());
  std::optional<double> single_norm;
  for (const auto& label : labels) {
    auto pieces = tokenize_label(label.surface);
    if (!pieces) {
      throw LabelNotScorable("'" + label.surface + "' is not in the synthetic vocabulary");
    }
    if (config_.strategy == TokenStrategy::SingleToken && pieces->size() > 1) {
      throw LabelNotScorable("'" + label.surface + "' splits into " +
                             std::to_string(pieces->size()) + " pieces");
    }
    LogitRecord rec;
    rec.model_id = config_.model_id;
    rec.probe_id = q.probe_id;
    rec.language_code = q.language_code;
    rec.label_role = label.role;
    rec.label_surface = label.surface;
    rec.token_count = static_cast<int>(pieces->size());
    rec.mask_index = t;
    rec.strategy = config_.strategy;

    if (config_.strategy == TokenStrategy::MeanSubtokens && pieces->size() > 1) {
      // One placeholder per piece, scored position by position.
      std::string masks(text::kMask);
      for (std::size_t k = 1; k < pieces->size(); ++k) masks += " " + std::string(text::kMask);
      const auto at = q.text.find(text::kMask);
      const auto multi = text::replace_span(q.text, {at, at + text::kMask.size()}, masks);
      double total = 0.0;
      for (std::size_t k = 0; k < pieces->size(); ++k) {
        const int pos = t + static_cast<int>(k);
        total += raw_score(multi, pos, (*pieces)[k]) - log_normalizer(multi, pos);
      }
      rec.log_prob = total / static_cast<double>(pieces->size());
    } else {
      if (!single_norm) single_norm = log_normalizer(q.text, t);
      rec.log_prob = raw_score(q.text, t, pieces->front()) - *single_norm;
    }
    rec.log_prob = std::min(rec.log_prob, 0.0);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace valueprobe
