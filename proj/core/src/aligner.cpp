#include <fstream>

#include "http_util.hpp"
#include "jsonl.hpp"
#include "valueprobe/localization.hpp"

namespace valueprobe {

using detail::json;

namespace {

std::vector<AlignmentLink> parse_links(const json& links, const std::string& at) {
  if (!links.is_array()) throw SchemaError(at + ": 'links' must be an array");
  std::vector<AlignmentLink> out;
  for (const auto& l : links) {
    AlignmentLink link;
    if (l.is_array() && (l.size() == 2 || l.size() == 3)) {
      link.source_token_index = l.at(0).get<std::size_t>();
      link.target_token_index = l.at(1).get<std::size_t>();
      if (l.size() == 3) link.score = l.at(2).get<double>();
    } else if (l.is_object()) {
      link.source_token_index = l.at("source_token_index").get<std::size_t>();
      link.target_token_index = l.at("target_token_index").get<std::size_t>();
      link.score = l.value("score", 1.0);
    } else {
      throw SchemaError(at + ": malformed alignment link");
    }
    if (!(link.score >= 0.0 && link.score <= 1.0)) {
      throw SchemaError(at + ": alignment score outside [0,1]");
    }
    out.push_back(link);
  }
  return out;
}

json links_to_json(const std::vector<AlignmentLink>& links) {
  json arr = json::array();
  for (const auto& l : links) arr.push_back({l.source_token_index, l.target_token_index, l.score});
  return arr;
}

}  // namespace

FixtureAligner::FixtureAligner(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  detail::for_each_record(in, "alignment fixture", [&](const json& rec, std::size_t lineno) {
    const auto at = detail::where("alignment fixture " + path.string(), lineno);
    detail::require_fields(rec, {"source_sentence", "target_sentence", "links"}, {"note"}, at);
    try {
      add({detail::get_string(rec, "source_sentence", at),
           detail::get_string(rec, "target_sentence", at)},
          parse_links(rec.at("links"), at));
    } catch (const json::exception& e) {
      throw SchemaError(at + ": " + e.what());
    }
  });
}

void FixtureAligner::add(AlignmentRequest request, std::vector<AlignmentLink> links) {
  entries_[{std::move(request.source_sentence), std::move(request.target_sentence)}] =
      std::move(links);
}

std::vector<AlignmentLink> FixtureAligner::align(const AlignmentRequest& request) {
  auto it = entries_.find({request.source_sentence, request.target_sentence});
  return it == entries_.end() ? std::vector<AlignmentLink>{} : it->second;
}

HttpAligner::HttpAligner(std::string endpoint) : endpoint_(std::move(endpoint)) {}

std::vector<AlignmentLink> HttpAligner::align(const AlignmentRequest& request) {
  const auto ep = detail::split_endpoint(endpoint_);
  httplib::Client client(ep.origin);
  client.set_connection_timeout(10);
  client.set_read_timeout(60);
  json body;
  body["source_sentence"] = request.source_sentence;
  body["target_sentence"] = request.target_sentence;
  auto res = client.Post(ep.path, body.dump(), "application/json");
  if (!res) throw AlignerError("alignment request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw AlignerError("aligner returned HTTP " + std::to_string(res->status));
  }
  try {
    return parse_links(json::parse(res->body).at("links"), "aligner reply");
  } catch (const json::exception& e) {
    throw AlignerError(std::string("malformed aligner reply: ") + e.what());
  } catch (const SchemaError& e) {
    throw AlignerError(e.what());
  }
}

CachingAligner::CachingAligner(std::filesystem::path path, AlignerClient* upstream)
    : path_(std::move(path)), upstream_(upstream) {
  if (path_.empty() || !std::filesystem::exists(path_)) return;
  auto in = detail::open_input(path_);
  detail::for_each_record(in, "alignment cache", [&](const json& rec, std::size_t lineno) {
    const auto at = detail::where("alignment cache", lineno);
    detail::require_fields(rec, {"source_sentence", "target_sentence", "links"}, {"note"}, at);
    entries_[{detail::get_string(rec, "source_sentence", at),
              detail::get_string(rec, "target_sentence", at)}] = parse_links(rec.at("links"), at);
  });
}

std::vector<AlignmentLink> CachingAligner::align(const AlignmentRequest& request) {
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find({request.source_sentence, request.target_sentence});
    if (it != entries_.end()) return it->second;
  }
  if (upstream_ == nullptr) return {};
  auto links = upstream_->align(request);
  std::lock_guard lock(mutex_);
  entries_[{request.source_sentence, request.target_sentence}] = links;
  if (!path_.empty()) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    json rec;
    rec["source_sentence"] = request.source_sentence;
    rec["target_sentence"] = request.target_sentence;
    rec["links"] = links_to_json(links);
    out << rec.dump() << '\n';
  }
  return links;
}

}  // namespace valueprobe
