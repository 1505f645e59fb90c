#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "valueprobe/corpus.hpp"
#include "valueprobe/localization.hpp"
#include "valueprobe/pipeline.hpp"

namespace vptest {

namespace fs = std::filesystem;

fs::path source_dir();
fs::path data_path(const fs::path& relative);
fs::path test_data_path(const fs::path& relative);
fs::path golden_dir();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(std::string_view tag = "vp");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const noexcept { return path_; }

 private:
  fs::path path_;
};

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view content);

/// Regular files below `root` as sorted relative paths.
std::vector<fs::path> list_files(const fs::path& root);

/// One line per difference between the two trees; manifests are skipped.
std::vector<std::string> compare_trees(const fs::path& a, const fs::path& b);

valueprobe::Corpus bundled_corpus();

/// Every scoring probe of the bundled corpus localized into every language
/// with the committed translation, alignment and override fixtures.
valueprobe::LocalizationResult localize_bundled(const valueprobe::Corpus& corpus);

/// The golden configuration: bundled fixtures, one synthetic model with seed
/// 7, every language and every mode.
valueprobe::RunConfig golden_config(const fs::path& out);

/// Report files are stored verbatim; every other output as a SHA-256 line.
void write_golden(const fs::path& run_dir);
std::vector<std::string> check_golden(const fs::path& run_dir);

struct ChainCase {
  std::string probe_id;
  std::string language_code;
  valueprobe::Provenance provenance = valueprobe::Provenance::StringMatch;
  std::string masked_text;
  std::string label_pos_local;
  std::string label_neg_local;
  std::string note;
};

struct ChainOutcome {
  std::size_t cases = 0;
  std::size_t resolved = 0;
  std::vector<std::string> mismatches;
  valueprobe::LocalizationResult result;
};

/// Localizes each hand-annotated (probe, language) pair of the chain fixture
/// and compares the outcome with its annotation.
ChainOutcome run_localization_chain();
std::vector<ChainCase> load_chain_annotations();

}  // namespace vptest
