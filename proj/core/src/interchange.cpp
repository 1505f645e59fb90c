#include <fmt/format.h>

#include <ostream>

#include "jsonl.hpp"
#include "valueprobe/error.hpp"
#include "valueprobe/scoring.hpp"

namespace valueprobe {

using detail::json;

std::string format_log_prob(double v) {
  // 17 significant digits: exact double round trip, well above the 12 required.
  return fmt::format("{:.16e}", v);
}

void write_logit_records(std::ostream& out, std::span<const LogitRecord> records) {
  for (const auto& r : records) {
    validate_logit_record(r);
    out << "{\"model_id\":" << json(r.model_id).dump()
        << ",\"probe_id\":" << json(r.probe_id).dump()
        << ",\"language_code\":" << json(r.language_code).dump()
        << ",\"label_role\":\"" << to_string(r.label_role) << '"'
        << ",\"label_surface\":" << json(r.label_surface).dump()
        << ",\"token_count\":" << r.token_count
        << ",\"log_prob\":" << format_log_prob(r.log_prob)
        << ",\"mask_index\":" << r.mask_index
        << ",\"strategy\":\"" << to_string(r.strategy) << "\"}\n";
  }
}

std::vector<LogitRecord> read_logit_records(std::istream& in) {
  std::vector<LogitRecord> out;
  detail::for_each_record(in, "logit interchange", [&](const json& rec, std::size_t lineno) {
    const auto at = detail::where("logit interchange", lineno);
    detail::require_fields(rec,
                           {"model_id", "probe_id", "language_code", "label_role",
                            "label_surface", "token_count", "log_prob", "mask_index", "strategy"},
                           {}, at);
    LogitRecord r;
    try {
      r.model_id = detail::get_string(rec, "model_id", at);
      r.probe_id = detail::get_string(rec, "probe_id", at);
      r.language_code = detail::get_string(rec, "language_code", at);
      r.label_role = label_role_from_string(detail::get_string(rec, "label_role", at));
      r.label_surface = detail::get_string(rec, "label_surface", at);
      r.token_count = static_cast<int>(detail::get_integer(rec, "token_count", at));
      r.log_prob = detail::get_number(rec, "log_prob", at);
      r.mask_index = static_cast<int>(detail::get_integer(rec, "mask_index", at));
      r.strategy = token_strategy_from_string(detail::get_string(rec, "strategy", at));
      validate_logit_record(r);
    } catch (const SchemaError& e) {
      throw SchemaError(at + ": " + e.what());
    } catch (const ValidationError& e) {
      throw SchemaError(at + ": " + e.rule());
    }
    out.push_back(std::move(r));
  });
  return out;
}

InterchangeBackend::InterchangeBackend(const std::filesystem::path& path, std::string model_id,
                                       TokenStrategy strategy)
    : model_id_(std::move(model_id)), strategy_(strategy) {
  if (!std::filesystem::exists(path)) {
    throw BackendUnavailable("interchange file " + path.string() + " does not exist");
  }
  auto in = detail::open_input(path);
  index(read_logit_records(in));
}

InterchangeBackend::InterchangeBackend(std::vector<LogitRecord> records, std::string model_id,
                                       TokenStrategy strategy)
    : model_id_(std::move(model_id)), strategy_(strategy) {
  index(std::move(records));
}

void InterchangeBackend::index(std::vector<LogitRecord> records) {
  if (model_id_.empty()) {
    for (const auto& r : records) {
      if (model_id_.empty()) model_id_ = r.model_id;
      if (r.model_id != model_id_) {
        throw BackendUnavailable("interchange file holds several models; select one by id");
      }
    }
  }
  for (auto& r : records) {
    if (r.model_id != model_id_) continue;
    auto key = std::make_tuple(r.probe_id, r.language_code, r.label_role);
    records_.insert_or_assign(std::move(key), std::move(r));
  }
}

std::vector<LogitRecord> InterchangeBackend::query(const MaskedQuery& q,
                                                   std::span<const LabelQuery> labels) {
  std::vector<LogitRecord> out;
  for (const auto& label : labels) {
    auto it = records_.find({q.probe_id, q.language_code, label.role});
    if (it == records_.end()) {
      throw LabelNotScorable("no interchange record for " + q.probe_id + "@" + q.language_code +
                             " (" + std::string(to_string(label.role)) + ")");
    }
    const auto& r = it->second;
    if (r.label_surface != label.surface) {
      throw LabelNotScorable("interchange record for " + q.probe_id + "@" + q.language_code +
                             " scores '" + r.label_surface + "', expected '" + label.surface + "'");
    }
    if (r.strategy != strategy_) {
      throw LabelNotScorable("interchange record for " + q.probe_id + "@" + q.language_code +
                             " uses strategy " + std::string(to_string(r.strategy)));
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace valueprobe
