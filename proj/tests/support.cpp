#include "support.hpp"

#include <json.hpp>

#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace vptest {

using nlohmann::json;
using namespace valueprobe;

namespace {
constexpr const char* kChecksums = "SHA256SUMS";
}

fs::path source_dir() { return fs::path(VALUEPROBE_SOURCE_DIR); }
fs::path data_path(const fs::path& relative) { return source_dir() / "data" / relative; }
fs::path test_data_path(const fs::path& relative) {
  return source_dir() / "tests" / "data" / relative;
}
fs::path golden_dir() { return source_dir() / "tests" / "golden"; }

TempDir::TempDir(std::string_view tag) {
  std::random_device rd;
  for (;;) {
    auto p = fs::temp_directory_path() /
             (std::string(tag) + "-" + std::to_string(rd()) + std::to_string(rd()));
    if (fs::create_directory(p)) {
      path_ = std::move(p);
      return;
    }
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::vector<fs::path> list_files(const fs::path& root) {
  std::vector<fs::path> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

bool is_volatile(const fs::path& rel) {
  const auto name = rel.filename().string();
  return name.rfind("manifest_", 0) == 0 || name == layout::kLockFile;
}

}  // namespace

std::vector<std::string> compare_trees(const fs::path& a, const fs::path& b) {
  std::vector<std::string> diffs;
  std::set<fs::path> all;
  for (const auto& p : list_files(a)) all.insert(p);
  for (const auto& p : list_files(b)) all.insert(p);
  for (const auto& rel : all) {
    if (is_volatile(rel)) continue;
    const bool in_a = fs::exists(a / rel), in_b = fs::exists(b / rel);
    if (!in_a || !in_b) {
      diffs.push_back(rel.string() + ": only in " + (in_a ? a : b).string());
    } else if (read_file(a / rel) != read_file(b / rel)) {
      diffs.push_back(rel.string() + ": contents differ");
    }
  }
  return diffs;
}

Corpus bundled_corpus() {
  return load_corpus(data_path("corpus/probes.jsonl"), data_path("corpus/culture_map.jsonl"));
}

LocalizationResult localize_bundled(const Corpus& corpus) {
  FixtureTranslator translator(data_path("fixtures/translations.jsonl"));
  FixtureAligner aligner(data_path("fixtures/alignments.jsonl"));
  OverrideTable overrides(data_path("fixtures/overrides.jsonl"));
  LocalizationClients clients;
  clients.translator = &translator;
  clients.aligner = &aligner;
  clients.overrides = &overrides;
  return localize_corpus(corpus, corpus.culture().languages(), clients);
}

RunConfig golden_config(const fs::path& out) {
  auto config = load_run_config(data_path("configs/fixture_run.json"));
  ConfigOverrides o;
  o.backend = "synthetic:7";
  o.out = out;
  apply_overrides(config, o);
  return config;
}

namespace {

std::map<std::string, std::string> checksums_of(const fs::path& run_dir) {
  std::map<std::string, std::string> out;
  for (const auto& rel : list_files(run_dir)) {
    if (is_volatile(rel) || *rel.begin() == layout::kReportDir) continue;
    out[rel.generic_string()] = file_sha256(run_dir / rel);
  }
  return out;
}

}  // namespace

void write_golden(const fs::path& run_dir) {
  const auto dir = golden_dir();
  fs::remove_all(dir / layout::kReportDir);
  for (const auto& rel : list_files(run_dir / layout::kReportDir)) {
    write_file(dir / layout::kReportDir / rel, read_file(run_dir / layout::kReportDir / rel));
  }
  std::ostringstream sums;
  for (const auto& [rel, sha] : checksums_of(run_dir)) sums << sha << "  " << rel << '\n';
  write_file(dir / kChecksums, sums.str());
}

std::vector<std::string> check_golden(const fs::path& run_dir) {
  const auto dir = golden_dir();
  if (!fs::exists(dir / kChecksums)) return {"no golden files; run with --regenerate-golden"};
  auto diffs = compare_trees(dir / layout::kReportDir, run_dir / layout::kReportDir);
  std::map<std::string, std::string> expected;
  std::istringstream in(read_file(dir / kChecksums));
  for (std::string sha, rel; in >> sha >> rel;) expected[rel] = sha;
  const auto actual = checksums_of(run_dir);
  for (const auto& [rel, sha] : expected) {
    auto it = actual.find(rel);
    if (it == actual.end()) {
      diffs.push_back(rel + ": missing from run");
    } else if (it->second != sha) {
      diffs.push_back(rel + ": checksum differs");
    }
  }
  for (const auto& [rel, sha] : actual) {
    if (!expected.count(rel)) diffs.push_back(rel + ": not in golden checksums");
  }
  return diffs;
}

std::vector<ChainCase> load_chain_annotations() {
  std::ifstream in(test_data_path("localization_chain/expected.jsonl"));
  std::vector<ChainCase> out;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    const auto j = json::parse(line);
    ChainCase c;
    c.probe_id = j.at("probe_id");
    c.language_code = j.at("language_code");
    c.provenance = provenance_from_string(j.at("provenance").get<std::string>());
    c.masked_text = j.at("masked_text");
    c.label_pos_local = j.at("label_pos_local");
    c.label_neg_local = j.at("label_neg_local");
    c.note = j.value("note", std::string{});
    out.push_back(std::move(c));
  }
  return out;
}

ChainOutcome run_localization_chain() {
  const auto dir = test_data_path("localization_chain");
  std::ifstream probes_in(dir / "probes.jsonl");
  const auto probes = read_probes(probes_in);
  FixtureTranslator translator(dir / "translations.jsonl");
  FixtureAligner aligner(dir / "alignments.jsonl");
  OverrideTable overrides(dir / "overrides.jsonl");
  LocalizationClients clients;
  clients.translator = &translator;
  clients.aligner = &aligner;
  clients.overrides = &overrides;

  ChainOutcome out;
  for (const auto& c : load_chain_annotations()) {
    ++out.cases;
    auto it = std::find_if(probes.begin(), probes.end(),
                           [&](const ProbeQuestion& p) { return p.id == c.probe_id; });
    const auto where = c.probe_id + "/" + c.language_code;
    if (it == probes.end()) {
      out.mismatches.push_back(where + ": no such probe");
      continue;
    }
    const std::vector<std::string> langs{c.language_code};
    auto r = localize_probes(std::span(&*it, 1), langs, clients);
    for (const auto& e : r.exclusions) {
      out.mismatches.push_back(where + ": excluded (" + std::string(to_string(e.reason)) + ") " +
                               e.detail);
    }
    if (r.probes.size() != 1) {
      out.result.exclusions.insert(out.result.exclusions.end(), r.exclusions.begin(),
                                   r.exclusions.end());
      continue;
    }
    const auto& lp = r.probes.front();
    bool ok = true;
    auto expect = [&](std::string_view field, const std::string& got, const std::string& want) {
      if (got == want) return;
      ok = false;
      out.mismatches.push_back(where + ": " + std::string(field) + " '" + got + "' != '" + want +
                               "'");
    };
    expect("provenance", std::string(to_string(lp.provenance)), std::string(to_string(c.provenance)));
    expect("masked_text", lp.masked_text, c.masked_text);
    expect("label_pos_local", lp.label_pos_local, c.label_pos_local);
    expect("label_neg_local", lp.label_neg_local, c.label_neg_local);
    expect("note", r.notes.empty() ? std::string{} : r.notes.front().note, c.note);
    if (ok) ++out.resolved;
    out.result.probes.push_back(lp);
    out.result.notes.insert(out.result.notes.end(), r.notes.begin(), r.notes.end());
  }
  return out;
}

}  // namespace vptest
