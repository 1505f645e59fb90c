#include <fstream>

#include "http_util.hpp"
#include "jsonl.hpp"
#include "valueprobe/localization.hpp"

namespace valueprobe {

using detail::json;

// ---------------------------------------------------------- FixtureTranslator

FixtureTranslator::FixtureTranslator(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  detail::for_each_record(in, "translation fixture", [&](const json& rec, std::size_t lineno) {
    const auto at = detail::where("translation fixture " + path.string(), lineno);
    detail::require_fields(rec, {"text", "source_lang", "target_lang", "translated_text"}, {}, at);
    add({detail::get_string(rec, "text", at), detail::get_string(rec, "source_lang", at),
         detail::get_string(rec, "target_lang", at)},
        detail::get_string(rec, "translated_text", at));
  });
}

void FixtureTranslator::add(TranslationRequest request, std::string translated) {
  entries_[{std::move(request.text), std::move(request.source_lang),
            std::move(request.target_lang)}] = std::move(translated);
}

std::string FixtureTranslator::translate(const TranslationRequest& request) {
  if (request.source_lang == request.target_lang) return request.text;
  auto it = entries_.find({request.text, request.source_lang, request.target_lang});
  if (it == entries_.end()) {
    throw TranslatorUnavailable("no fixture translation for '" + request.text + "' (" +
                                request.source_lang + "->" + request.target_lang + ")");
  }
  return it->second;
}

// ------------------------------------------------------------- HttpTranslator

HttpTranslator::HttpTranslator(std::string endpoint, std::string api_key)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)) {}

std::string HttpTranslator::translate(const TranslationRequest& request) {
  if (request.source_lang == request.target_lang) return request.text;
  const auto ep = detail::split_endpoint(endpoint_);
  httplib::Client client(ep.origin);
  client.set_connection_timeout(10);
  client.set_read_timeout(30);

  json body;
  body["q"] = request.text;
  body["source"] = request.source_lang;
  body["target"] = request.target_lang;
  body["format"] = "text";
  auto path = ep.path;
  if (!api_key_.empty()) {
    path += (path.find('?') == std::string::npos ? "?key=" : "&key=") + api_key_;
  }

  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) {
    throw TranslatorError("translation request failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 401 || res->status == 403) {
    throw TranslatorUnavailable("translation endpoint rejected credentials (HTTP " +
                                std::to_string(res->status) + ")");
  }
  if (res->status != 200) {
    throw TranslatorError("translation endpoint returned HTTP " + std::to_string(res->status));
  }
  try {
    const auto reply = json::parse(res->body);
    return reply.at("data").at("translations").at(0).at("translatedText").get<std::string>();
  } catch (const json::exception& e) {
    throw TranslatorError(std::string("malformed translation reply: ") + e.what());
  }
}

// ----------------------------------------------------------- TranslationCache

TranslationCache::TranslationCache(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  auto in = detail::open_input(path_);
  detail::for_each_record(in, "translation cache", [&](const json& rec, std::size_t lineno) {
    const auto at = detail::where("translation cache", lineno);
    detail::require_fields(rec, {"source_text", "language", "translation"}, {}, at);
    entries_[{detail::get_string(rec, "source_text", at), detail::get_string(rec, "language", at)}] =
        detail::get_string(rec, "translation", at);
  });
}

std::optional<std::string> TranslationCache::lookup(std::string_view source_text,
                                                    std::string_view language) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find({std::string(source_text), std::string(language)});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void TranslationCache::store(const std::string& source_text, const std::string& language,
                             const std::string& translation) {
  std::lock_guard lock(mutex_);
  auto [it, inserted] = entries_.insert_or_assign({source_text, language}, translation);
  (void)it;
  (void)inserted;
  if (path_.empty()) return;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot append to translation cache " + path_.string());
  json rec;
  rec["source_text"] = source_text;
  rec["language"] = language;
  rec["translation"] = translation;
  out << rec.dump() << '\n';
}

std::size_t TranslationCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::string CacheReplayTranslator::translate(const TranslationRequest& request) {
  if (request.source_lang == request.target_lang) return request.text;
  if (auto hit = cache_.lookup(request.text, request.target_lang)) return *hit;
  throw TranslatorUnavailable("translation cache has no entry for '" + request.text + "' (" +
                              request.target_lang + ")");
}

std::string translate(std::string_view text, std::string_view language_code,
                      TranslatorClient* client, TranslationCache& cache,
                      std::string_view source_lang) {
  if (auto hit = cache.lookup(text, language_code)) return *hit;
  if (client == nullptr) {
    throw TranslatorUnavailable("offline and no cached translation for '" + std::string(text) +
                                "' (" + std::string(language_code) + ")");
  }
  const TranslationRequest request{std::string(text), std::string(source_lang),
                                   std::string(language_code)};
  constexpr int kAttempts = 3;
  for (int attempt = 1;; ++attempt) {
    try {
      auto translated = client->translate(request);
      cache.store(request.text, request.target_lang, translated);
      return translated;
    } catch (const TranslatorError&) {
      if (attempt == kAttempts) throw;
    }
  }
}

}  // namespace valueprobe
