#include <algorithm>
#include <map>
#include <set>

#include "jsonl.hpp"
#include "valueprobe/aggregation.hpp"

namespace valueprobe {

using detail::json;

namespace {

constexpr std::string_view kHofstedeSchema = "valueprobe.reference.hofstede";
constexpr std::string_view kWvsSchema = "valueprobe.reference.wvs";

/// Reads the header record and hands every following record to `fn`.
void read_reference(std::istream& in, std::string_view schema, SurveyReference& ref,
                    const std::function<void(const json&, const std::string&)>& fn) {
  bool header = false;
  detail::for_each_record(in, schema, [&](const json& rec, std::size_t lineno) {
    const auto at = detail::where(schema, lineno);
    if (!header) {
      detail::check_header(rec, schema, 1, at);
      ref.provenance = rec.value("source", std::string{});
      header = true;
      return;
    }
    try {
      fn(rec, at);
    } catch (const json::exception& e) {
      throw SchemaError(at + ": " + e.what());
    }
  });
  if (!header) throw SchemaError(std::string(schema) + ": empty file");
}

}  // namespace

SurveyReference read_hofstede_reference(std::istream& in) {
  SurveyReference ref;
  ref.source = "HofstedePublished";
  std::set<std::string> seen;
  read_reference(in, kHofstedeSchema, ref, [&](const json& rec, const std::string& at) {
    detail::require_fields(rec, {"country", "pdi", "idv", "mas", "uai", "lto", "ivr"}, {}, at);
    HofstedeReferenceRow row;
    row.country = detail::get_string(rec, "country", at);
    if (!seen.insert(row.country).second) {
      throw ValidationError(row.country, "duplicate Hofstede reference row");
    }
    for (std::size_t d = 0; d < 6; ++d) {
      const std::string key(kHofstedeDimensionCodes[d]);
      row.values[d] = detail::get_number(rec, key.c_str(), at);
    }
    ref.hofstede.push_back(std::move(row));
  });
  return ref;
}

SurveyReference read_wvs_reference(std::istream& in) {
  SurveyReference ref;
  ref.source = "WVSWave7";
  std::set<std::pair<std::string, std::string>> seen;
  read_reference(in, kWvsSchema, ref, [&](const json& rec, const std::string& at) {
    detail::require_fields(rec, {"country", "question_id", "mean_response", "scale_min", "scale_max"},
                           {}, at);
    WvsReferenceRow row;
    row.country = detail::get_string(rec, "country", at);
    row.question_id = detail::get_string(rec, "question_id", at);
    row.mean_response = detail::get_number(rec, "mean_response", at);
    row.scale = {detail::get_number(rec, "scale_min", at), detail::get_number(rec, "scale_max", at)};
    if (!seen.insert({row.country, row.question_id}).second) {
      throw ValidationError(row.question_id, "duplicate WVS reference row for " + row.country);
    }
    if (!(row.scale.min < row.scale.max)) {
      throw ValidationError(row.question_id, "scale_min must be below scale_max");
    }
    if (!(row.mean_response >= row.scale.min && row.mean_response <= row.scale.max)) {
      throw ValidationError(row.question_id, "mean_response outside its scale for " + row.country);
    }
    ref.wvs.push_back(std::move(row));
  });

  // Every question the reference claims must cover the same set of countries.
  std::map<std::string, std::set<std::string>> by_question;
  std::set<std::string> countries;
  for (const auto& r : ref.wvs) {
    by_question[r.question_id].insert(r.country);
    countries.insert(r.country);
  }
  for (const auto& [q, cs] : by_question) {
    if (cs != countries) throw ValidationError(q, "WVS reference does not cover every country");
  }
  return ref;
}

SurveyReference load_hofstede_reference(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_hofstede_reference(in);
}

SurveyReference load_wvs_reference(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_wvs_reference(in);
}

}  // namespace valueprobe
