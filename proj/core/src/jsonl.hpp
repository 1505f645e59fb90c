#pragma once

// Private helpers for the line-delimited JSON record files used throughout.

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <istream>
#include <string>
#include <string_view>

#include "valueprobe/error.hpp"

namespace valueprobe::detail {

using json = nlohmann::json;

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

/// Calls `fn(record, line_number)` for every non-blank line.
inline void for_each_record(std::istream& in, std::string_view what,
                            const std::function<void(const json&, std::size_t)>& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(std::string(what) + " line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!rec.is_object()) {
      throw SchemaError(std::string(what) + " line " + std::to_string(lineno) +
                        ": record is not an object");
    }
    fn(rec, lineno);
  }
}

inline std::string where(std::string_view what, std::size_t lineno) {
  return std::string(what) + " line " + std::to_string(lineno);
}

inline void require_fields(const json& rec, std::initializer_list<std::string_view> required,
                           std::initializer_list<std::string_view> optional,
                           const std::string& where) {
  for (auto key : required) {
    if (!rec.contains(std::string(key))) {
      throw SchemaError(where + ": missing field '" + std::string(key) + "'");
    }
  }
  for (const auto& [key, value] : rec.items()) {
    bool known = false;
    for (auto k : required) known = known || k == key;
    for (auto k : optional) known = known || k == key;
    if (!known) throw SchemaError(where + ": unknown field '" + key + "'");
  }
}

inline std::string get_string(const json& rec, const char* key, const std::string& where) {
  const auto& v = rec.at(key);
  if (!v.is_string()) throw SchemaError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

inline double get_number(const json& rec, const char* key, const std::string& where) {
  const auto& v = rec.at(key);
  if (!v.is_number()) throw SchemaError(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

inline std::int64_t get_integer(const json& rec, const char* key, const std::string& where) {
  const auto& v = rec.at(key);
  if (!v.is_number_integer()) {
    throw SchemaError(where + ": field '" + key + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

/// Checks a `{"schema": ..., "version": ...}` header record.
inline void check_header(const json& rec, std::string_view schema, int version,
                         const std::string& where) {
  if (!rec.contains("schema") || rec.at("schema") != schema) {
    throw SchemaError(where + ": expected schema header '" + std::string(schema) + "'");
  }
  require_fields(rec, {"schema", "version"}, {"source", "notes"}, where);
  if (!rec.at("version").is_number_integer() || rec.at("version").get<int>() != version) {
    throw SchemaError(where + ": unsupported " + std::string(schema) + " version");
  }
}

inline std::string header_line(std::string_view schema, int version) {
  json h;
  h["schema"] = schema;
  h["version"] = version;
  return h.dump();
}

}  // namespace valueprobe::detail
