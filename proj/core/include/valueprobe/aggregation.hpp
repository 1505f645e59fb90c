#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "valueprobe/corpus.hpp"
#include "valueprobe/scoring.hpp"

namespace valueprobe {

// ------------------------------------------------------------------- matrix

/// Country x group grid. A cell is either a finite value or absent with a
/// recorded reason.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(std::string name, std::vector<std::string> rows, std::vector<std::string> columns);

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& rows() const noexcept { return rows_; }
  const std::vector<std::string>& columns() const noexcept { return columns_; }

  std::optional<std::size_t> row_index(std::string_view row) const;
  std::optional<std::size_t> column_index(std::string_view column) const;

  const std::optional<double>& at(std::size_t row, std::size_t column) const;
  std::optional<double> get(std::string_view row, std::string_view column) const;
  void set(std::size_t row, std::size_t column, double value);
  void exclude(std::size_t row, std::size_t column, std::string reason);

  /// Reason for every absent cell, keyed by (row, column) name.
  const std::map<std::pair<std::string, std::string>, std::string>& exclusions() const noexcept {
    return exclusions_;
  }

  /// True when every absent cell carries an exclusion reason.
  bool is_complete() const;

  std::vector<std::optional<double>> row_values(std::size_t row) const;
  std::vector<std::optional<double>> column_values(std::size_t column) const;

 private:
  std::string name_;
  std::vector<std::string> rows_;
  std::vector<std::string> columns_;
  std::vector<std::optional<double>> cells_;
  std::map<std::pair<std::string, std::string>, std::string> exclusions_;
};

/// CSV: header "country,<columns...>", absent cells empty.
void write_matrix_csv(std::ostream& out, const ScoreMatrix& m);
/// Structured form carrying exclusion annotations.
void write_matrix_json(std::ostream& out, const ScoreMatrix& m);
ScoreMatrix read_matrix_json(std::istream& in);

// ------------------------------------------------------------ aggregation

struct CountryQuestionScore {
  std::string country;
  std::string question_id;
  double value = 0.0;
  /// Present for raw survey responses, which get min-max normalized.
  std::optional<ScaleSpec> scale;
};

struct CategoryScore {
  std::string country;
  std::string category;
  double value = 0.0;
  std::size_t question_count = 0;
};

/// (value - min) / (max - min). Throws OutOfScale.
double normalize_response(double value, const ScaleSpec& scale);

/// Arithmetic mean over one country's questions of one category; inputs that
/// carry a scale are normalized first. Throws EmptyCategory.
CategoryScore aggregate_category(std::span<const CountryQuestionScore> scores,
                                 std::string_view category);

enum class Dimension { pdi, idv, mas, uai, lto, ivr };
inline constexpr std::array<Dimension, 6> kDimensions = {Dimension::pdi, Dimension::idv,
                                                         Dimension::mas, Dimension::uai,
                                                         Dimension::lto, Dimension::ivr};
std::string_view to_string(Dimension d);

/// Each dimension is w1 * (m[a1] - m[b1]) + w2 * (m[a2] - m[b2]) + C.
struct DimensionFormula {
  Dimension dimension;
  int w1, a1, b1;
  int w2, a2, b2;
};

inline constexpr std::array<DimensionFormula, 6> kDimensionFormulas = {{
    {Dimension::pdi, 35, 7, 2, 25, 20, 23},
    {Dimension::idv, 35, 4, 1, 35, 9, 6},
    {Dimension::mas, 35, 5, 3, 35, 8, 10},
    {Dimension::uai, 40, 18, 15, 25, 21, 24},
    {Dimension::lto, 40, 13, 14, 25, 19, 22},
    {Dimension::ivr, 35, 12, 11, 40, 17, 16},
}};

/// Evaluates the six formulas over item means indexed 1..24 (slot 0 unused).
/// Works for integral types as well as floating point.
template <class T>
constexpr std::array<T, 6> evaluate_dimensions(const std::array<T, 25>& m,
                                               const std::array<T, 6>& constants = {}) {
  std::array<T, 6> out{};
  for (std::size_t i = 0; i < kDimensionFormulas.size(); ++i) {
    const auto& f = kDimensionFormulas[i];
    out[i] = static_cast<T>(f.w1) * (m[f.a1] - m[f.b1]) +
             static_cast<T>(f.w2) * (m[f.a2] - m[f.b2]) + constants[i];
  }
  return out;
}

using HofstedeConstants = std::array<double, 6>;  // C(pd), C(ic), C(mf), C(ua), C(ls), C(ir)

struct DimensionScore {
  std::string country;
  Dimension dimension = Dimension::pdi;
  double value = 0.0;
};

/// Six dimension scores from item means keyed by index. Throws MissingQuestion
/// listing every absent item the formulas need.
std::vector<DimensionScore> hofstede_dimensions(const std::map<int, double>& question_scores,
                                                const HofstedeConstants& constants = {},
                                                std::string country = {});

// ------------------------------------------------------ survey references

struct HofstedeReferenceRow {
  std::string country;
  std::array<double, 6> values{};  // pdi, idv, mas, uai, lto, ivr
};

struct WvsReferenceRow {
  std::string country;
  std::string question_id;
  double mean_response = 0.0;
  ScaleSpec scale;
};

struct SurveyReference {
  std::string source;  // "HofstedePublished" | "WVSWave7"
  std::string provenance;
  std::vector<HofstedeReferenceRow> hofstede;
  std::vector<WvsReferenceRow> wvs;
};

SurveyReference load_hofstede_reference(const std::filesystem::path& path);
SurveyReference load_wvs_reference(const std::filesystem::path& path);
SurveyReference read_hofstede_reference(std::istream& in);
SurveyReference read_wvs_reference(std::istream& in);

// --------------------------------------------------------------- matrices

struct MatrixSet {
  ScoreMatrix hofstede_dimension;  // countries x pdi..ivr
  ScoreMatrix hofstede_question;   // countries x Hofstede probe ids (model side only)
  ScoreMatrix wvs_question;        // countries x retained WVS probe ids
  ScoreMatrix wvs_category;        // countries x retained categories
  /// Raw rows dropped because they belong to excluded categories.
  std::vector<std::string> dropped;
};

struct BuildOptions {
  HofstedeConstants constants{};
  /// Throw EmptyCategory / MissingQuestion instead of recording exclusions.
  bool strict = false;
};

/// Model side: per-country question scores for one mode, WVS category means
/// and Hofstede dimensions evaluated on the per-item model scores.
MatrixSet build_model_matrices(std::span<const ScoreRecord> scores, ScoreMode mode,
                               const Corpus& corpus, std::span<const std::string> languages,
                               const BuildOptions& options = {});

/// Survey side: published Hofstede dimensions pass through; WVS responses are
/// normalized per question scale and averaged per retained category.
MatrixSet build_survey_matrices(const SurveyReference* hofstede, const SurveyReference* wvs,
                                const Corpus& corpus, const BuildOptions& options = {});

}  // namespace valueprobe
