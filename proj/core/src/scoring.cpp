#include "valueprobe/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <future>
#include <ostream>

#include "jsonl.hpp"
#include "valueprobe/error.hpp"

namespace valueprobe {

using detail::json;

std::string_view to_string(TokenStrategy s) {
  switch (s) {
    case TokenStrategy::SingleToken: return "single_token";
    case TokenStrategy::FirstSubtoken: return "first_subtoken";
    case TokenStrategy::MeanSubtokens: return "mean_subtokens";
  }
  return "?";
}

TokenStrategy token_strategy_from_string(std::string_view s) {
  if (s == "single_token") return TokenStrategy::SingleToken;
  if (s == "first_subtoken") return TokenStrategy::FirstSubtoken;
  if (s == "mean_subtokens") return TokenStrategy::MeanSubtokens;
  throw SchemaError("unknown label tokenization strategy '" + std::string(s) + "'");
}

std::string_view to_string(ScoreMode m) {
  switch (m) {
    case ScoreMode::Diff: return "diff";
    case ScoreMode::PosOnly: return "pos";
    case ScoreMode::NegOnly: return "neg";
  }
  return "?";
}

ScoreMode score_mode_from_string(std::string_view s) {
  if (s == "diff") return ScoreMode::Diff;
  if (s == "pos") return ScoreMode::PosOnly;
  if (s == "neg") return ScoreMode::NegOnly;
  throw SchemaError("unknown score mode '" + std::string(s) + "'");
}

void validate_logit_record(const LogitRecord& r) {
  const auto id = r.model_id + "/" + r.probe_id + "@" + r.language_code;
  if (!std::isfinite(r.log_prob) || r.log_prob > 0.0) {
    throw ValidationError(id, "log_prob must be finite and <= 0");
  }
  if (r.token_count < 1) throw ValidationError(id, "token_count must be >= 1");
  if (r.strategy == TokenStrategy::SingleToken && r.token_count != 1) {
    throw ValidationError(id, "single_token record with token_count != 1");
  }
  if (r.mask_index < 0) throw ValidationError(id, "mask_index must be >= 0");
}

std::vector<LogitRecord> query(Backend& backend, const MaskedQuery& q,
                               std::span<const LabelQuery> labels) {
  if (labels.empty()) throw LabelNotScorable("query needs at least one label");
  auto records = backend.query(q, labels);
  for (const auto& r : records) validate_logit_record(r);
  return records;
}

ScoreRecord score_probe(const LogitRecord& pos, const LogitRecord& neg, ScoreMode mode) {
  if (pos.model_id != neg.model_id || pos.probe_id != neg.probe_id ||
      pos.language_code != neg.language_code) {
    throw MismatchedRecords("pos/neg records refer to different (model, probe, language)");
  }
  if (pos.label_role != LabelRole::Pos || neg.label_role != LabelRole::Neg) {
    throw MismatchedRecords("label roles must be (pos, neg)");
  }
  ScoreRecord s{pos.model_id, pos.probe_id, pos.language_code, mode, 0.0};
  switch (mode) {
    case ScoreMode::Diff: s.score = pos.log_prob - neg.log_prob; break;
    case ScoreMode::PosOnly: s.score = pos.log_prob; break;
    case ScoreMode::NegOnly: s.score = neg.log_prob; break;
  }
  return s;
}

namespace {

struct ProbeOutcome {
  std::vector<LogitRecord> logits;
  std::optional<SkippedProbe> skipped;
};

ProbeOutcome score_one(Backend& backend, const LocalizedProbe& p) {
  ProbeOutcome out;
  const LabelQuery labels[] = {{LabelRole::Pos, p.label_pos_local},
                               {LabelRole::Neg, p.label_neg_local}};
  MaskedQuery q{p.probe_id, p.language_code, p.masked_text, std::nullopt};
  try {
    out.logits = query(backend, q, labels);
  } catch (const LabelNotScorable& e) {
    out.skipped = SkippedProbe{p.probe_id, p.language_code, e.what()};
  }
  return out;
}

}  // namespace

ScoringResult score_corpus(Backend& backend, std::span<const LocalizedProbe> probes,
                           std::span<const ScoreMode> modes, const ScoreOptions& options) {
  std::vector<ProbeOutcome> outcomes(probes.size());
  const std::size_t workers =
      backend.thread_safe() ? std::max<std::size_t>(1, std::min(options.threads, probes.size()))
                            : 1;
  if (workers <= 1) {
    for (std::size_t i = 0; i < probes.size(); ++i) outcomes[i] = score_one(backend, probes[i]);
  } else {
    std::vector<std::exception_ptr> errors(probes.size());
    std::vector<std::future<void>> futures;
    for (std::size_t w = 0; w < workers; ++w) {
      futures.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < probes.size(); i += workers) {
          try {
            outcomes[i] = score_one(backend, probes[i]);
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

  ScoringResult result;
  for (auto& o : outcomes) {
    if (o.skipped) {
      result.skipped.push_back(std::move(*o.skipped));
      continue;
    }
    const LogitRecord* pos = nullptr;
    const LogitRecord* neg = nullptr;
    for (const auto& r : o.logits) (r.label_role == LabelRole::Pos ? pos : neg) = &r;
    if (pos == nullptr || neg == nullptr) {
      throw BackendUnavailable("backend did not return both labels");
    }
    for (auto mode : modes) result.scores.push_back(score_probe(*pos, *neg, mode));
    for (auto& r : o.logits) result.logits.push_back(std::move(r));
  }
  std::sort(result.logits.begin(), result.logits.end(), [](const auto& a, const auto& b) {
    return std::tie(a.probe_id, a.language_code, a.label_role) <
           std::tie(b.probe_id, b.language_code, b.label_role);
  });
  std::sort(result.scores.begin(), result.scores.end(), [](const auto& a, const auto& b) {
    return std::tie(a.probe_id, a.language_code, a.mode) <
           std::tie(b.probe_id, b.language_code, b.mode);
  });
  std::sort(result.skipped.begin(), result.skipped.end(), [](const auto& a, const auto& b) {
    return std::tie(a.probe_id, a.language_code) < std::tie(b.probe_id, b.language_code);
  });
  return result;
}

void write_score_records(std::ostream& out, std::span<const ScoreRecord> records) {
  for (const auto& r : records) {
    out << "{\"model_id\":" << json(r.model_id).dump() << ",\"probe_id\":" << json(r.probe_id).dump()
        << ",\"language_code\":" << json(r.language_code).dump() << ",\"mode\":\""
        << to_string(r.mode) << "\",\"score\":" << format_log_prob(r.score) << "}\n";
  }
}

std::vector<ScoreRecord> read_score_records(std::istream& in) {
  std::vector<ScoreRecord> out;
  detail::for_each_record(in, "score file", [&](const json& rec, std::size_t lineno) {
    const auto at = detail::where("score file", lineno);
    detail::require_fields(rec, {"model_id", "probe_id", "language_code", "mode", "score"}, {}, at);
    ScoreRecord r;
    r.model_id = detail::get_string(rec, "model_id", at);
    r.probe_id = detail::get_string(rec, "probe_id", at);
    r.language_code = detail::get_string(rec, "language_code", at);
    r.mode = score_mode_from_string(detail::get_string(rec, "mode", at));
    r.score = detail::get_number(rec, "score", at);
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace valueprobe
