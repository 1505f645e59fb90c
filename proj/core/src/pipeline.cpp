#include "valueprobe/pipeline.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "jsonl.hpp"
#include "valueprobe/csv.hpp"
#include "valueprobe/localization.hpp"

namespace valueprobe {

namespace fs = std::filesystem;
using detail::json;

std::string_view version() { return VALUEPROBE_VERSION; }

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Validate: return "validate";
    case Command::Localize: return "localize";
    case Command::Score: return "score";
    case Command::Report: return "report";
    case Command::Run: return "run";
  }
  return "run";
}

Command command_from_string(std::string_view s) {
  for (auto c : {Command::Validate, Command::Localize, Command::Score, Command::Report,
                 Command::Run}) {
    if (to_string(c) == s) return c;
  }
  throw UsageError("unknown command '" + std::string(s) + "'");
}

// ------------------------------------------------------------------ config

BackendSpec parse_backend_spec(std::string_view text) {
  const auto colon = text.find(':');
  const auto kind = text.substr(0, colon);
  const auto arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (kind == "synthetic") {
    if (!arg.empty() && arg.find_first_not_of("0123456789") != std::string_view::npos) {
      throw UsageError("synthetic backend seed must be a non-negative integer");
    }
    return {BackendKind::Synthetic, std::string(arg)};
  }
  if (kind == "interchange" && !arg.empty()) return {BackendKind::Interchange, std::string(arg)};
  if (kind == "embedded" && !arg.empty()) return {BackendKind::Embedded, std::string(arg)};
  throw UsageError("unknown backend '" + std::string(text) +
                   "' (expected synthetic[:seed], interchange:<path> or embedded:<model>)");
}

std::string to_string(const BackendSpec& spec) {
  std::string kind = spec.kind == BackendKind::Synthetic     ? "synthetic"
                     : spec.kind == BackendKind::Interchange ? "interchange"
                                                             : "embedded";
  return spec.argument.empty() ? kind : kind + ":" + spec.argument;
}

std::vector<ScoreMode> parse_modes(std::string_view text) {
  if (text == "all") return {ScoreMode::Diff, ScoreMode::PosOnly, ScoreMode::NegOnly};
  std::vector<ScoreMode> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    const auto item = text.substr(start, end - start);
    try {
      const auto m = score_mode_from_string(item);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    } catch (const Error&) {
      throw UsageError("unknown mode '" + std::string(item) + "' (expected diff, pos, neg or all)");
    }
    start = end + 1;
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::vector<std::string> split_csv_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    auto item = std::string(text.substr(start, end - start));
    if (!item.empty()) out.push_back(item);
    start = end + 1;
  }
  return out;
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!obj.is_object()) throw UsageError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw UsageError(where + ": unknown key '" + key + "'");
    }
  }
}

fs::path resolve(const json& obj, const char* key, const fs::path& base) {
  if (!obj.contains(key)) return {};
  const auto& v = obj.at(key);
  if (!v.is_string()) throw UsageError(std::string("config key '") + key + "' must be a string");
  fs::path p(v.get<std::string>());
  if (p.empty()) return {};
  return (p.is_absolute() ? p : base / p).lexically_normal();
}

std::string model_id_for_seed(std::uint64_t seed) { return "synthetic-" + std::to_string(seed); }

}  // namespace

RunConfig parse_run_config(std::string_view json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  check_keys(j,
             {"corpus", "languages", "models", "modes", "alpha", "out", "translation", "alignment",
              "overrides", "reference", "hofstede_constants", "statistics", "threads"},
             "config");
  RunConfig c;
  try {
    if (!j.contains("corpus")) throw UsageError("config: missing 'corpus'");
    const auto& corpus = j.at("corpus");
    check_keys(corpus, {"probes", "culture_map"}, "config.corpus");
    c.probes = resolve(corpus, "probes", base_dir);
    c.culture_map = resolve(corpus, "culture_map", base_dir);
    if (c.probes.empty() || c.culture_map.empty()) {
      throw UsageError("config.corpus needs 'probes' and 'culture_map'");
    }
    if (j.contains("languages")) c.languages = j.at("languages").get<std::vector<std::string>>();
    if (j.contains("models")) {
      for (const auto& m : j.at("models")) {
        check_keys(m, {"id", "backend", "seed", "strategy"}, "config.models[]");
        ModelConfig mc;
        mc.backend = parse_backend_spec(m.value("backend", std::string("synthetic")));
        if (mc.backend.kind == BackendKind::Interchange) {
          fs::path p(mc.backend.argument);
          mc.backend.argument = (p.is_absolute() ? p : base_dir / p).lexically_normal().string();
        }
        if (mc.backend.kind == BackendKind::Synthetic && !mc.backend.argument.empty()) {
          mc.seed = std::stoull(mc.backend.argument);
        }
        if (m.contains("seed")) mc.seed = m.at("seed").get<std::uint64_t>();
        if (m.contains("strategy")) {
          mc.strategy = token_strategy_from_string(m.at("strategy").get<std::string>());
        }
        mc.id = m.value("id", std::string{});
        if (mc.id.empty() && mc.backend.kind == BackendKind::Synthetic) {
          mc.id = model_id_for_seed(mc.seed);
        }
        if (mc.id.empty() && mc.backend.kind == BackendKind::Embedded) mc.id = mc.backend.argument;
        c.models.push_back(std::move(mc));
      }
    }
    if (j.contains("modes")) {
      const auto& m = j.at("modes");
      if (m.is_string()) {
        c.modes = parse_modes(m.get<std::string>());
      } else {
        std::string joined;
        for (const auto& s : m) joined += (joined.empty() ? "" : ",") + s.get<std::string>();
        c.modes = parse_modes(joined);
      }
    }
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    c.out = resolve(j, "out", base_dir);
    if (c.out.empty()) c.out = (base_dir / "out").lexically_normal();
    if (j.contains("translation")) {
      const auto& t = j.at("translation");
      check_keys(t, {"fixtures", "cache", "endpoint"}, "config.translation");
      c.translation_fixtures = resolve(t, "fixtures", base_dir);
      c.translation_cache = resolve(t, "cache", base_dir);
      c.translator_endpoint = t.value("endpoint", std::string{});
    }
    if (j.contains("alignment")) {
      const auto& a = j.at("alignment");
      check_keys(a, {"fixtures", "cache", "endpoint"}, "config.alignment");
      c.alignment_fixtures = resolve(a, "fixtures", base_dir);
      c.alignment_cache = resolve(a, "cache", base_dir);
      c.aligner_endpoint = a.value("endpoint", std::string{});
    }
    c.overrides = resolve(j, "overrides", base_dir);
    if (j.contains("reference")) {
      const auto& r = j.at("reference");
      check_keys(r, {"hofstede", "wvs"}, "config.reference");
      c.hofstede_reference = resolve(r, "hofstede", base_dir);
      c.wvs_reference = resolve(r, "wvs", base_dir);
    }
    if (j.contains("hofstede_constants")) {
      const auto& k = j.at("hofstede_constants");
      check_keys(k, {"pdi", "idv", "mas", "uai", "lto", "ivr"}, "config.hofstede_constants");
      for (std::size_t d = 0; d < 6; ++d) {
        c.constants[d] = k.value(std::string(kHofstedeDimensionCodes[d]), 0.0);
      }
    }
    if (j.contains("statistics")) {
      const auto& s = j.at("statistics");
      check_keys(s, {"significance_test", "p_value", "resamples", "seed"}, "config.statistics");
      if (s.contains("significance_test")) {
        c.significance_test = pairwise_test_from_string(s.at("significance_test").get<std::string>());
      }
      if (s.contains("p_value")) {
        const auto m = s.at("p_value").get<std::string>();
        if (m == "t_approximation") {
          c.p_value_method = PValueMethod::TApproximation;
        } else if (m == "permutation") {
          c.p_value_method = PValueMethod::Permutation;
        } else {
          throw UsageError("config.statistics.p_value must be t_approximation or permutation");
        }
      }
      c.permutation_resamples = s.value("resamples", c.permutation_resamples);
      c.permutation_seed = s.value("seed", c.permutation_seed);
    }
    c.threads = j.value("threads", std::size_t{1});
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
  if (c.threads == 0) c.threads = 1;
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const auto base = fs::absolute(path).parent_path();
  return parse_run_config(ss.str(), base);
}

void apply_overrides(RunConfig& c, const ConfigOverrides& o) {
  if (o.backend) {
    ModelConfig m;
    m.backend = parse_backend_spec(*o.backend);
    switch (m.backend.kind) {
      case BackendKind::Synthetic:
        m.seed = m.backend.argument.empty() ? 0 : std::stoull(m.backend.argument);
        m.id = model_id_for_seed(m.seed);
        break;
      case BackendKind::Interchange:
        m.backend.argument = fs::absolute(m.backend.argument).lexically_normal().string();
        break;
      case BackendKind::Embedded:
        m.id = m.backend.argument;
        break;
    }
    c.models = {m};
  }
  if (o.seed) {
    std::uint64_t i = 0;
    for (auto& m : c.models) {
      if (m.backend.kind != BackendKind::Synthetic) continue;
      m.seed = *o.seed + i++;
      m.id = model_id_for_seed(m.seed);
    }
  }
  if (o.mode) c.modes = parse_modes(*o.mode);
  if (o.languages) c.languages = split_csv_list(*o.languages);
  if (o.alpha) {
    if (!(*o.alpha > 0.0 && *o.alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
    c.alpha = *o.alpha;
  }
  if (o.out) c.out = fs::absolute(*o.out).lexically_normal();
}

std::string RunConfig::snapshot() const {
  json j;
  j["corpus"] = {{"probes", probes.string()}, {"culture_map", culture_map.string()}};
  j["languages"] = languages;
  json models_json = json::array();
  for (const auto& m : models) {
    json mj{{"id", m.id},
            {"backend", to_string(m.backend)},
            {"strategy", std::string(to_string(m.strategy))}};
    if (m.backend.kind == BackendKind::Synthetic) mj["seed"] = m.seed;
    models_json.push_back(std::move(mj));
  }
  j["models"] = std::move(models_json);
  json modes_json = json::array();
  for (auto m : modes) modes_json.push_back(std::string(to_string(m)));
  j["modes"] = std::move(modes_json);
  j["alpha"] = alpha;
  j["out"] = out.string();
  j["translation"] = {{"fixtures", translation_fixtures.string()},
                      {"cache", translation_cache.string()},
                      {"endpoint", translator_endpoint}};
  j["alignment"] = {{"fixtures", alignment_fixtures.string()},
                    {"cache", alignment_cache.string()},
                    {"endpoint", aligner_endpoint}};
  j["overrides"] = overrides.string();
  j["reference"] = {{"hofstede", hofstede_reference.string()}, {"wvs", wvs_reference.string()}};
  json k;
  for (std::size_t d = 0; d < 6; ++d) k[std::string(kHofstedeDimensionCodes[d])] = constants[d];
  j["hofstede_constants"] = std::move(k);
  j["statistics"] = {
      {"significance_test", std::string(to_string(significance_test))},
      {"p_value", p_value_method == PValueMethod::Permutation ? "permutation" : "t_approximation"},
      {"resamples", permutation_resamples},
      {"seed", permutation_seed}};
  j["threads"] = threads;
  return j.dump();
}

// ------------------------------------------------------------------ layout

namespace {

std::string safe_name(std::string_view id) {
  std::string out;
  for (char ch : id) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '-' || ch == '_' || ch == '.';
    out += ok ? ch : '_';
  }
  return out.empty() ? "model" : out;
}

}  // namespace

fs::path layout::logits(const std::string& model_id) {
  return fs::path(kScoresDir) / safe_name(model_id) / "logits.jsonl";
}
fs::path layout::scores(const std::string& model_id) {
  return fs::path(kScoresDir) / safe_name(model_id) / "scores.jsonl";
}
fs::path layout::manifest(Command command) {
  return "manifest_" + std::string(to_string(command)) + ".json";
}

OutputLock::OutputLock(const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto path = out_dir / layout::kLockFile;
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw LockError("cannot open lock file " + path.string());
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw LockError("another run holds " + path.string());
  }
}

OutputLock::~OutputLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

std::string file_sha256(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

int exit_code_for(const std::exception& e, Command command) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const LockError*>(&e)) return kExitUsage;
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const SchemaError*>(&e) ||
      dynamic_cast<const UnknownLanguage*>(&e) || dynamic_cast<const UnknownGroup*>(&e) ||
      dynamic_cast<const ExcludedCategory*>(&e) || dynamic_cast<const OutOfScale*>(&e)) {
    return kExitValidation;
  }
  if (dynamic_cast<const TranslatorUnavailable*>(&e) || dynamic_cast<const TranslatorError*>(&e) ||
      dynamic_cast<const AlignerError*>(&e) || dynamic_cast<const RemaskFailed*>(&e)) {
    return kExitTranslation;
  }
  if (dynamic_cast<const BackendUnavailable*>(&e) || dynamic_cast<const LabelNotScorable*>(&e) ||
      dynamic_cast<const MismatchedRecords*>(&e)) {
    return kExitBackend;
  }
  if (dynamic_cast<const JoinError*>(&e) || dynamic_cast<const InsufficientOverlap*>(&e) ||
      dynamic_cast<const DegenerateInput*>(&e) || dynamic_cast<const EmptyCategory*>(&e) ||
      dynamic_cast<const MissingQuestion*>(&e)) {
    return kExitReport;
  }
  switch (command) {
    case Command::Validate: return kExitValidation;
    case Command::Localize: return kExitTranslation;
    case Command::Score: return kExitBackend;
    case Command::Report: return kExitReport;
    case Command::Run: return kExitUsage;
  }
  return kExitUsage;
}

// ------------------------------------------------------------------ stages

namespace {

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Writes `content` to out/rel and records the path.
void emit(const RunConfig& c, StageSummary& s, const fs::path& rel, const std::string& content) {
  auto out = detail::open_output(c.out / rel);
  out << content;
  out.close();
  if (!out) throw Error("failed writing " + (c.out / rel).string());
  s.outputs.push_back(rel);
}

void require_file(const fs::path& p, const char* what) {
  if (p.empty()) throw UsageError(std::string("config does not name a ") + what);
  if (!fs::exists(p)) throw SchemaError(std::string(what) + " not found: " + p.string());
}

Corpus load_configured_corpus(const RunConfig& c) {
  require_file(c.probes, "probe file");
  require_file(c.culture_map, "culture map");
  return load_corpus(c.probes, c.culture_map);
}

std::vector<std::string> resolve_languages(const RunConfig& c, const Corpus& corpus) {
  if (c.languages.empty()) return corpus.culture().languages();
  std::vector<std::string> out;
  for (const auto& l : c.languages) {
    if (!corpus.culture().has_language(l)) {
      throw UnknownLanguage("language '" + l + "' is not in the culture map");
    }
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  }
  return out;
}

void write_manifest(const RunConfig& c, Command command, const std::vector<StageSummary>& stages,
                    const std::string& started) {
  json m;
  m["command"] = std::string(to_string(command));
  m["tool_version"] = std::string(version());
  m["config"] = json::parse(c.snapshot());
  json checksums;
  if (fs::exists(c.probes)) checksums["probes"] = file_sha256(c.probes);
  if (fs::exists(c.culture_map)) checksums["culture_map"] = file_sha256(c.culture_map);
  m["corpus_checksum"] = std::move(checksums);
  json stage_json = json::array();
  for (const auto& s : stages) {
    json sj;
    sj["stage"] = s.stage;
    json counts = json::object();
    for (const auto& [k, v] : s.counts) counts[k] = v;
    sj["counts"] = std::move(counts);
    sj["exclusions"] = s.exclusions;
    json outputs = json::array();
    for (const auto& rel : s.outputs) {
      outputs.push_back({{"path", rel.generic_string()}, {"sha256", file_sha256(c.out / rel)}});
    }
    sj["outputs"] = std::move(outputs);
    stage_json.push_back(std::move(sj));
  }
  m["stages"] = std::move(stage_json);
  m["started_at"] = started;
  m["finished_at"] = utc_now();
  auto out = detail::open_output(c.out / layout::manifest(command));
  out << m.dump(2) << '\n';
}

// validate -----------------------------------------------------------------

StageSummary run_validate(const RunConfig& c, std::ostream& log) {
  StageSummary s{"validate", {}, {}, {}};
  const auto corpus = load_configured_corpus(c);
  const auto languages = resolve_languages(c, corpus);
  const auto scoring = corpus.scoring_probes();
  std::size_t excluded_wvs = 0;
  for (const auto& p : corpus.probes()) {
    if (p.survey == Survey::WVS && corpus.catalog().is_excluded(p.group)) ++excluded_wvs;
  }
  s.counts = {{"hofstede_probes", corpus.count(Survey::Hofstede)},
              {"wvs_probes", corpus.count(Survey::WVS)},
              {"wvs_excluded_probes", excluded_wvs},
              {"scoring_probes", scoring.size()},
              {"languages", languages.size()},
              {"hofstede_complete", corpus.has_complete_hofstede() ? 1u : 0u}};

  std::set<std::string> countries;
  for (const auto& e : corpus.culture().entries()) countries.insert(e.country);
  if (!c.hofstede_reference.empty()) {
    require_file(c.hofstede_reference, "Hofstede reference");
    const auto ref = load_hofstede_reference(c.hofstede_reference);
    for (const auto& r : ref.hofstede) {
      if (!countries.count(r.country)) {
        throw ValidationError(r.country, "Hofstede reference country not in the culture map");
      }
    }
    s.counts.emplace_back("hofstede_reference_rows", ref.hofstede.size());
  }
  if (!c.wvs_reference.empty()) {
    require_file(c.wvs_reference, "WVS reference");
    const auto ref = load_wvs_reference(c.wvs_reference);
    for (const auto& r : ref.wvs) {
      if (!countries.count(r.country)) {
        throw ValidationError(r.country, "WVS reference country not in the culture map");
      }
      const auto* p = corpus.find(r.question_id);
      if (p != nullptr && p->survey == Survey::WVS && !(p->scale == r.scale)) {
        throw ValidationError(r.question_id, "reference scale differs from the corpus scale");
      }
    }
    s.counts.emplace_back("wvs_reference_rows", ref.wvs.size());
  }
  if (!c.overrides.empty()) {
    require_file(c.overrides, "override table");
    s.counts.emplace_back("overrides", OverrideTable(c.overrides).size());
  }
  log << fmt::format("validate: {} Hofstede + {} WVS probes ({} WVS in excluded categories), {} "
                     "languages\n",
                     corpus.count(Survey::Hofstede), corpus.count(Survey::WVS), excluded_wvs,
                     languages.size());
  return s;
}

// localize -----------------------------------------------------------------

StageSummary run_localize(const RunConfig& c, std::ostream& log) {
  StageSummary s{"localize", {}, {}, {}};
  const auto corpus = load_configured_corpus(c);
  const auto languages = resolve_languages(c, corpus);

  std::unique_ptr<TranslatorClient> translator;
  if (!c.translation_fixtures.empty()) {
    require_file(c.translation_fixtures, "translation fixture file");
    translator = std::make_unique<FixtureTranslator>(c.translation_fixtures);
  } else if (!c.translator_endpoint.empty()) {
    if (const char* key = std::getenv("VALUEPROBE_TRANSLATOR_KEY"); key != nullptr && *key) {
      translator = std::make_unique<HttpTranslator>(c.translator_endpoint, key);
    }
  }
  TranslationCache cache = c.translation_cache.empty() ? TranslationCache()
                                                       : TranslationCache(c.translation_cache);

  std::unique_ptr<AlignerClient> upstream;
  if (!c.alignment_fixtures.empty()) {
    require_file(c.alignment_fixtures, "alignment fixture file");
    upstream = std::make_unique<FixtureAligner>(c.alignment_fixtures);
  } else if (!c.aligner_endpoint.empty()) {
    upstream = std::make_unique<HttpAligner>(c.aligner_endpoint);
  }
  std::unique_ptr<AlignerClient> aligner;
  if (!c.alignment_cache.empty()) {
    aligner = std::make_unique<CachingAligner>(c.alignment_cache, upstream.get());
  }
  AlignerClient* active_aligner = aligner ? aligner.get() : upstream.get();

  std::unique_ptr<OverrideTable> overrides;
  if (!c.overrides.empty()) {
    require_file(c.overrides, "override table");
    overrides = std::make_unique<OverrideTable>(c.overrides);
  }

  const auto result = localize_corpus(corpus, languages,
                                      {translator.get(), &cache, active_aligner, overrides.get()},
                                      {c.threads});

  std::ostringstream probes_out;
  write_localized(probes_out, result.probes);
  emit(c, s, layout::kLocalized, probes_out.str());

  json report;
  std::map<std::string, std::map<std::string, std::size_t>> per_language;
  for (const auto& l : languages) per_language[l];
  for (const auto& p : result.probes) {
    ++per_language[p.language_code][std::string(to_string(p.provenance))];
  }
  json langs = json::object();
  for (const auto& [lang, counts] : per_language) {
    json lj = json::object();
    for (auto prov : {Provenance::StringMatch, Provenance::Aligned, Provenance::Manual}) {
      const std::string key(to_string(prov));
      lj[key] = counts.count(key) ? counts.at(key) : 0;
    }
    langs[lang] = std::move(lj);
  }
  report["languages"] = std::move(langs);
  json excl = json::array();
  for (const auto& e : result.exclusions) {
    excl.push_back({{"probe_id", e.probe_id},
                    {"language_code", e.language_code},
                    {"reason", std::string(to_string(e.reason))},
                    {"detail", e.detail}});
    s.exclusions.push_back(fmt::format("{}/{}: {}", e.probe_id, e.language_code,
                                       to_string(e.reason)));
  }
  report["exclusions"] = std::move(excl);
  json notes = json::array();
  for (const auto& n : result.notes) {
    notes.push_back(
        {{"probe_id", n.probe_id}, {"language_code", n.language_code}, {"note", n.note}});
  }
  report["notes"] = std::move(notes);
  emit(c, s, layout::kLocalizationReport, report.dump(2) + "\n");

  s.counts = {{"localized", result.probes.size()},
              {"excluded", result.exclusions.size()},
              {"languages", languages.size()}};
  log << fmt::format("localize: {} localized probes, {} exclusions\n", result.probes.size(),
                     result.exclusions.size());
  return s;
}

// score --------------------------------------------------------------------

std::vector<LocalizedProbe> load_localized(const RunConfig& c, const Corpus& corpus) {
  const auto path = c.out / layout::kLocalized;
  if (!fs::exists(path)) throw SchemaError("localized probes not found: " + path.string());
  auto in = detail::open_input(path);
  auto probes = read_localized(in);
  const auto languages = resolve_languages(c, corpus);
  std::erase_if(probes, [&](const LocalizedProbe& p) {
    return std::find(languages.begin(), languages.end(), p.language_code) == languages.end();
  });
  return probes;
}

}  // namespace

std::unique_ptr<Backend> make_backend(const ModelConfig& model,
                                      std::span<const LocalizedProbe> probes) {
  switch (model.backend.kind) {
    case BackendKind::Synthetic: {
      SyntheticBackendConfig cfg;
      cfg.seed = model.seed;
      cfg.vocabulary = synthetic_vocabulary_for(probes);
      cfg.strategy = model.strategy;
      cfg.model_id = model.id.empty() ? model_id_for_seed(model.seed) : model.id;
      return std::make_unique<SyntheticBackend>(std::move(cfg));
    }
    case BackendKind::Interchange: {
      if (!fs::exists(model.backend.argument)) {
        throw BackendUnavailable("interchange file not found: " + model.backend.argument);
      }
      return std::make_unique<InterchangeBackend>(model.backend.argument, model.id, model.strategy);
    }
    case BackendKind::Embedded:
      throw BackendUnavailable("embedded inference for '" + model.backend.argument +
                               "' is not available in this build; export logits and use "
                               "interchange:<path>");
  }
  throw UsageError("unknown backend kind");
}

namespace {

StageSummary run_score(const RunConfig& c, std::ostream& log) {
  StageSummary s{"score", {}, {}, {}};
  if (c.models.empty()) throw UsageError("no models configured");
  const auto corpus = load_configured_corpus(c);
  const auto probes = load_localized(c, corpus);
  std::set<std::string> ids;
  for (const auto& model : c.models) {
    auto backend = make_backend(model, probes);
    const auto& id = backend->model_id();
    if (!ids.insert(safe_name(id)).second) throw UsageError("duplicate model id '" + id + "'");
    const auto result = score_corpus(*backend, probes, c.modes, {c.threads});

    std::ostringstream logits_out, scores_out;
    write_logit_records(logits_out, result.logits);
    write_score_records(scores_out, result.scores);
    emit(c, s, layout::logits(id), logits_out.str());
    emit(c, s, layout::scores(id), scores_out.str());

    s.counts.emplace_back(id + ".scores", result.scores.size());
    s.counts.emplace_back(id + ".skipped", result.skipped.size());
    for (const auto& k : result.skipped) {
      s.exclusions.push_back(fmt::format("{}: {}/{}: {}", id, k.probe_id, k.language_code, k.reason));
    }
    log << fmt::format("score: {} -> {} score records, {} skipped\n", id, result.scores.size(),
                       result.skipped.size());
  }
  return s;
}

// report -------------------------------------------------------------------

struct Level {
  const char* name;
  ScoreMatrix MatrixSet::*matrix;
};

constexpr Level kLevels[] = {
    {"hofstede_dimension", &MatrixSet::hofstede_dimension},
    {"hofstede_question", &MatrixSet::hofstede_question},
    {"wvs_question", &MatrixSet::wvs_question},
    {"wvs_category", &MatrixSet::wvs_category},
};

// Levels correlated against survey data; Hofstede is compared at dimension
// level only.
constexpr const char* kAlignmentLevels[] = {"hofstede_dimension", "wvs_question", "wvs_category"};
constexpr const char* kAgreementLevels[] = {"hofstede_dimension", "wvs_question", "wvs_category"};
constexpr const char* kSignificanceLevels[] = {"hofstede_dimension", "hofstede_question",
                                               "wvs_question"};
constexpr const char* kHeatmapLevels[] = {"hofstede_dimension", "wvs_category"};

const ScoreMatrix& level_of(const MatrixSet& set, std::string_view name) {
  for (const auto& l : kLevels) {
    if (name == l.name) return set.*(l.matrix);
  }
  throw Error("unknown matrix level");
}

std::string matrix_csv(const ScoreMatrix& m) {
  std::ostringstream out;
  write_matrix_csv(out, m);
  return out.str();
}

std::string matrix_json(const ScoreMatrix& m) {
  std::ostringstream out;
  write_matrix_json(out, m);
  return out.str();
}

std::string heatmap_csv(const ScoreMatrix& m) {
  std::ostringstream out;
  csv::write_row(out, {"country", "group", "score"});
  for (std::size_t r = 0; r < m.rows().size(); ++r) {
    for (std::size_t col = 0; col < m.columns().size(); ++col) {
      csv::write_row(out, {m.rows()[r], m.columns()[col], csv::number(m.at(r, col))});
    }
  }
  return out.str();
}

std::vector<std::string> correlation_fields(const CorrelationResult& r, double alpha) {
  return {r.name, csv::number(r.rho), csv::number(r.p_value), std::to_string(r.n),
          r.significant(alpha) ? "*" : "", std::string(to_string(r.status))};
}

struct ModelReport {
  std::string model_id;
  ScoreMode mode;
  MatrixSet matrices;
};

StageSummary run_report(const RunConfig& c, std::ostream& log) {
  StageSummary s{"report", {}, {}, {}};
  if (c.models.empty()) throw UsageError("no models configured");
  const auto corpus = load_configured_corpus(c);
  const auto languages = resolve_languages(c, corpus);
  const fs::path dir = layout::kReportDir;

  BuildOptions build;
  build.constants = c.constants;
  SpearmanOptions sp;
  sp.method = c.p_value_method;
  sp.resamples = c.permutation_resamples;
  sp.seed = c.permutation_seed;

  // Model side.
  std::vector<ModelReport> models;
  for (const auto& model : c.models) {
    std::string id = model.id;
    if (id.empty()) {
      // Interchange replays without an explicit id take the file's single model.
      id = InterchangeBackend(model.backend.argument, {}, model.strategy).model_id();
    }
    const auto path = c.out / layout::scores(id);
    if (!fs::exists(path)) throw SchemaError("score file not found: " + path.string());
    auto in = detail::open_input(path);
    const auto scores = read_score_records(in);
    for (auto mode : c.modes) {
      models.push_back({id, mode, build_model_matrices(scores, mode, corpus, languages, build)});
    }
  }
  for (const auto& m : models) {
    const auto stem = safe_name(m.model_id) + "_" + std::string(to_string(m.mode));
    for (const auto& l : kLevels) {
      const auto& mat = m.matrices.*(l.matrix);
      emit(c, s, dir / "matrices" / (stem + "_" + l.name + ".csv"), matrix_csv(mat));
      emit(c, s, dir / "matrices" / (stem + "_" + l.name + ".json"), matrix_json(mat));
    }
    for (const auto* level : kHeatmapLevels) {
      emit(c, s, dir / ("heatmap_" + stem + "_" + level + ".csv"),
           heatmap_csv(level_of(m.matrices, level)));
    }
  }

  // Survey side and alignment.
  std::optional<SurveyReference> hof_ref, wvs_ref;
  if (!c.hofstede_reference.empty()) {
    require_file(c.hofstede_reference, "Hofstede reference");
    hof_ref = load_hofstede_reference(c.hofstede_reference);
  }
  if (!c.wvs_reference.empty()) {
    require_file(c.wvs_reference, "WVS reference");
    wvs_ref = load_wvs_reference(c.wvs_reference);
  }
  std::size_t correlations = 0;
  if (hof_ref || wvs_ref) {
    const auto survey = build_survey_matrices(hof_ref ? &*hof_ref : nullptr,
                                              wvs_ref ? &*wvs_ref : nullptr, corpus, build);
    for (const auto& d : survey.dropped) s.exclusions.push_back("survey " + d);
    for (const auto* level : kAlignmentLevels) {
      const auto& sm = level_of(survey, level);
      if (sm.rows().empty()) continue;
      emit(c, s, dir / "matrices" / (std::string("survey_") + level + ".csv"), matrix_csv(sm));
      emit(c, s, dir / "matrices" / (std::string("survey_") + level + ".json"), matrix_json(sm));
      for (auto axis : {Axis::PerGroup, Axis::PerCountry}) {
        std::ostringstream out;
        csv::write_row(out, {"model", "mode", "name", "rho", "p_value", "n", "significant",
                             "status"});
        for (const auto& m : models) {
          const auto& mm = level_of(m.matrices, level);
          if (mm.columns().empty()) continue;
          for (const auto& r : alignment_correlations(mm, sm, axis, sp)) {
            auto fields = correlation_fields(r, c.alpha);
            fields.insert(fields.begin(), {m.model_id, std::string(to_string(m.mode))});
            csv::write_row(out, fields);
            ++correlations;
          }
        }
        emit(c, s,
             dir / (std::string("alignment_") + level + "_" + std::string(to_string(axis)) +
                    ".csv"),
             out.str());
      }
    }
  }

  // Model agreement.
  for (const auto* level : kAgreementLevels) {
    std::ostringstream out;
    csv::write_row(out, {"model_a", "model_b", "mode", "name", "rho", "p_value", "n",
                         "significant", "status"});
    bool any = false;
    for (std::size_t i = 0; i < models.size(); ++i) {
      for (std::size_t j = i + 1; j < models.size(); ++j) {
        if (models[i].mode != models[j].mode) continue;
        const auto& a = level_of(models[i].matrices, level);
        const auto& b = level_of(models[j].matrices, level);
        if (a.columns().empty()) continue;
        any = true;
        for (const auto& r : model_agreement(a, b, sp)) {
          auto fields = correlation_fields(r, c.alpha);
          fields.insert(fields.begin(), {models[i].model_id, models[j].model_id,
                                         std::string(to_string(models[i].mode))});
          csv::write_row(out, fields);
        }
      }
    }
    if (any) emit(c, s, dir / (std::string("agreement_") + level + ".csv"), out.str());
  }

  // Pairwise-culture significance.
  std::ostringstream pairs_out, summary_out;
  csv::write_row(pairs_out, {"model", "mode", "level", "country_a", "country_b", "statistic",
                             "p_value", "n_a", "n_b", "significant"});
  csv::write_row(summary_out, {"model", "mode", "level", "test", "alpha", "significant_pairs",
                               "total_pairs", "fraction", "percent"});
  std::size_t total_pairs = 0;
  for (const auto& m : models) {
    for (const auto* level : kSignificanceLevels) {
      auto by_country = rows_by_country(level_of(m.matrices, level));
      std::erase_if(by_country, [](const auto& kv) { return kv.second.empty(); });
      if (by_country.size() < 2) continue;
      const auto report = pairwise_significance(by_country, c.alpha, c.significance_test);
      const std::string mode(to_string(m.mode));
      for (const auto& p : report.pairs) {
        csv::write_row(pairs_out, {m.model_id, mode, level, p.country_a, p.country_b,
                                   csv::number(p.statistic), csv::number(p.p_value),
                                   std::to_string(p.n_a), std::to_string(p.n_b),
                                   p.p_value <= c.alpha ? "*" : ""});
      }
      const auto& sum = report.summary;
      csv::write_row(summary_out,
                     {m.model_id, mode, level, std::string(to_string(sum.test)),
                      csv::number(sum.alpha), std::to_string(sum.significant_pairs),
                      std::to_string(sum.total_pairs), csv::number(sum.fraction), sum.percent()});
      total_pairs += sum.total_pairs;
      log << fmt::format("report: {} {} {}: {}/{} pairs significant ({}%)\n", m.model_id, mode,
                         level, sum.significant_pairs, sum.total_pairs, sum.percent());
    }
  }
  emit(c, s, dir / "significance.csv", pairs_out.str());
  emit(c, s, dir / "significance_summary.csv", summary_out.str());

  json meta;
  meta["significance_test"] = std::string(to_string(c.significance_test));
  meta["alpha"] = c.alpha;
  meta["correlation"] = "spearman_average_ranks";
  meta["p_value"] = c.p_value_method == PValueMethod::Permutation ? "permutation" : "t_approximation";
  if (c.p_value_method == PValueMethod::Permutation) {
    meta["resamples"] = c.permutation_resamples;
    meta["permutation_seed"] = c.permutation_seed;
  }
  meta["missing_cells"] = "pairwise_deletion";
  meta["model_wvs_scores"] = "raw_diff_scores_averaged_per_category";
  meta["significance_marker"] = "p <= alpha";
  emit(c, s, dir / "metadata.json", meta.dump(2) + "\n");

  s.counts = {{"model_modes", models.size()},
              {"correlations", correlations},
              {"country_pairs", total_pairs}};
  return s;
}

template <class Fn>
StageSummary locked(const RunConfig& c, Command command, std::ostream& log, Fn fn) {
  const auto started = utc_now();
  OutputLock lock(c.out);
  auto summary = fn(c, log);
  write_manifest(c, command, {summary}, started);
  return summary;
}

}  // namespace

StageSummary cmd_validate(const RunConfig& c, std::ostream& log) {
  return locked(c, Command::Validate, log, run_validate);
}
StageSummary cmd_localize(const RunConfig& c, std::ostream& log) {
  return locked(c, Command::Localize, log, run_localize);
}
StageSummary cmd_score(const RunConfig& c, std::ostream& log) {
  return locked(c, Command::Score, log, run_score);
}
StageSummary cmd_report(const RunConfig& c, std::ostream& log) {
  return locked(c, Command::Report, log, run_report);
}

std::vector<StageSummary> cmd_run(const RunConfig& c, std::ostream& log) {
  const auto started = utc_now();
  OutputLock lock(c.out);
  std::vector<StageSummary> stages;
  stages.push_back(run_validate(c, log));
  stages.push_back(run_localize(c, log));
  stages.push_back(run_score(c, log));
  stages.push_back(run_report(c, log));
  write_manifest(c, Command::Run, stages, started);
  return stages;
}

}  // namespace valueprobe
