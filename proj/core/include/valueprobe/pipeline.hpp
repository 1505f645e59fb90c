#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <optional>
#include <string>
#include <vector>

#include "valueprobe/aggregation.hpp"
#include "valueprobe/error.hpp"
#include "valueprobe/scoring.hpp"
#include "valueprobe/statistics.hpp"

namespace valueprobe {

/// Stable process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitValidation = 2,
  kExitTranslation = 3,
  kExitBackend = 4,
  kExitReport = 5,
};

enum class Command { Validate, Localize, Score, Report, Run };
std::string_view to_string(Command c);
Command command_from_string(std::string_view s);

enum class BackendKind { Synthetic, Interchange, Embedded };

/// "synthetic" | "synthetic:<seed>" | "interchange:<path>" | "embedded:<model id>".
struct BackendSpec {
  BackendKind kind = BackendKind::Synthetic;
  std::string argument;
};
BackendSpec parse_backend_spec(std::string_view text);
std::string to_string(const BackendSpec& spec);

struct ModelConfig {
  std::string id;
  BackendSpec backend;
  TokenStrategy strategy = TokenStrategy::SingleToken;
  std::uint64_t seed = 0;  // synthetic only
};

struct RunConfig {
  std::filesystem::path probes;
  std::filesystem::path culture_map;
  std::vector<std::string> languages;  // empty: every configured language
  std::vector<ModelConfig> models;
  std::vector<ScoreMode> modes{ScoreMode::Diff};
  double alpha = 0.05;
  std::filesystem::path out;

  std::filesystem::path translation_fixtures;
  std::filesystem::path translation_cache;
  std::string translator_endpoint;
  std::filesystem::path alignment_fixtures;
  std::filesystem::path alignment_cache;
  std::string aligner_endpoint;
  std::filesystem::path overrides;

  std::filesystem::path hofstede_reference;
  std::filesystem::path wvs_reference;
  HofstedeConstants constants{};

  PairwiseTest significance_test = PairwiseTest::MannWhitneyU;
  PValueMethod p_value_method = PValueMethod::TApproximation;
  std::size_t permutation_resamples = 10000;
  std::uint64_t permutation_seed = 0;
  std::size_t threads = 1;

  /// Snapshot of the parsed configuration with paths resolved.
  std::string snapshot() const;
};

/// Relative paths resolve against the directory holding the file. Throws
/// UsageError.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir);

/// Command-line values that replace their configuration counterparts.
struct ConfigOverrides {
  std::optional<std::string> backend;
  std::optional<std::string> mode;  // diff | pos | neg | all
  std::optional<std::string> languages;  // comma separated
  std::optional<double> alpha;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
};
void apply_overrides(RunConfig& config, const ConfigOverrides& overrides);

std::vector<ScoreMode> parse_modes(std::string_view text);

/// Paths of every file a stage writes, relative to RunConfig::out.
namespace layout {
inline constexpr const char* kLocalized = "localized.jsonl";
inline constexpr const char* kLocalizationReport = "localization_report.json";
inline constexpr const char* kScoresDir = "scores";
inline constexpr const char* kReportDir = "report";
inline constexpr const char* kLockFile = ".valueprobe.lock";
std::filesystem::path logits(const std::string& model_id);
std::filesystem::path scores(const std::string& model_id);
std::filesystem::path manifest(Command command);
}  // namespace layout

/// Exclusive advisory lock on the output directory for the life of the object.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& out_dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  int fd_ = -1;
};

struct StageSummary {
  std::string stage;
  std::vector<std::pair<std::string, std::size_t>> counts;
  std::vector<std::string> exclusions;
  std::vector<std::filesystem::path> outputs;  // relative to RunConfig::out
};

/// Each command writes its outputs and manifest_<command>.json. Errors
/// propagate as exceptions; see exit_code_for.
StageSummary cmd_validate(const RunConfig& config, std::ostream& log);
StageSummary cmd_localize(const RunConfig& config, std::ostream& log);
StageSummary cmd_score(const RunConfig& config, std::ostream& log);
StageSummary cmd_report(const RunConfig& config, std::ostream& log);
std::vector<StageSummary> cmd_run(const RunConfig& config, std::ostream& log);

/// Exit code for an exception escaping `command`.
int exit_code_for(const std::exception& e, Command command);

/// Resolves one configured model to a backend. Embedded models need an
/// inference runtime this build does not carry and raise BackendUnavailable.
std::unique_ptr<Backend> make_backend(const ModelConfig& model,
                                      std::span<const LocalizedProbe> probes);

/// SHA-256 hex digest of a file's bytes.
std::string file_sha256(const std::filesystem::path& path);

std::string_view version();

}  // namespace valueprobe
