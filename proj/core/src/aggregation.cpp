#include "valueprobe/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include "jsonl.hpp"
#include "valueprobe/csv.hpp"
#include "valueprobe/error.hpp"

namespace valueprobe {

using detail::json;

// ---------------------------------------------------------------- ScoreMatrix

ScoreMatrix::ScoreMatrix(std::string name, std::vector<std::string> rows,
                         std::vector<std::string> columns)
    : name_(std::move(name)),
      rows_(std::move(rows)),
      columns_(std::move(columns)),
      cells_(rows_.size() * columns_.size()) {}

std::optional<std::size_t> ScoreMatrix::row_index(std::string_view row) const {
  auto it = std::find(rows_.begin(), rows_.end(), row);
  if (it == rows_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - rows_.begin());
}

std::optional<std::size_t> ScoreMatrix::column_index(std::string_view column) const {
  auto it = std::find(columns_.begin(), columns_.end(), column);
  if (it == columns_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - columns_.begin());
}

const std::optional<double>& ScoreMatrix::at(std::size_t row, std::size_t column) const {
  return cells_.at(row * columns_.size() + column);
}

std::optional<double> ScoreMatrix::get(std::string_view row, std::string_view column) const {
  auto r = row_index(row);
  auto c = column_index(column);
  if (!r || !c) return std::nullopt;
  return at(*r, *c);
}

void ScoreMatrix::set(std::size_t row, std::size_t column, double value) {
  if (!std::isfinite(value)) {
    exclude(row, column, "non-finite value");
    return;
  }
  cells_.at(row * columns_.size() + column) = value;
  exclusions_.erase({rows_[row], columns_[column]});
}

void ScoreMatrix::exclude(std::size_t row, std::size_t column, std::string reason) {
  cells_.at(row * columns_.size() + column).reset();
  exclusions_[{rows_.at(row), columns_.at(column)}] = std::move(reason);
}

bool ScoreMatrix::is_complete() const {
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (!at(r, c) && !exclusions_.count({rows_[r], columns_[c]})) return false;
    }
  }
  return true;
}

std::vector<std::optional<double>> ScoreMatrix::row_values(std::size_t row) const {
  std::vector<std::optional<double>> out;
  for (std::size_t c = 0; c < columns_.size(); ++c) out.push_back(at(row, c));
  return out;
}

std::vector<std::optional<double>> ScoreMatrix::column_values(std::size_t column) const {
  std::vector<std::optional<double>> out;
  for (std::size_t r = 0; r < rows_.size(); ++r) out.push_back(at(r, column));
  return out;
}

void write_matrix_csv(std::ostream& out, const ScoreMatrix& m) {
  std::vector<std::string> header{"country"};
  header.insert(header.end(), m.columns().begin(), m.columns().end());
  csv::write_row(out, header);
  for (std::size_t r = 0; r < m.rows().size(); ++r) {
    std::vector<std::string> row{m.rows()[r]};
    for (std::size_t c = 0; c < m.columns().size(); ++c) row.push_back(csv::number(m.at(r, c)));
    csv::write_row(out, row);
  }
}

void write_matrix_json(std::ostream& out, const ScoreMatrix& m) {
  json j;
  j["name"] = m.name();
  j["rows"] = m.rows();
  j["columns"] = m.columns();
  json cells = json::array();
  for (std::size_t r = 0; r < m.rows().size(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.columns().size(); ++c) {
      const auto& v = m.at(r, c);
      row.push_back(v ? json(*v) : json(nullptr));
    }
    cells.push_back(std::move(row));
  }
  j["cells"] = std::move(cells);
  json excl = json::array();
  for (const auto& [key, reason] : m.exclusions()) {
    excl.push_back({{"row", key.first}, {"column", key.second}, {"reason", reason}});
  }
  j["exclusions"] = std::move(excl);
  out << j.dump(1) << '\n';
}

ScoreMatrix read_matrix_json(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
    ScoreMatrix m(j.at("name").get<std::string>(), j.at("rows").get<std::vector<std::string>>(),
                  j.at("columns").get<std::vector<std::string>>());
    const auto& cells = j.at("cells");
    for (std::size_t r = 0; r < m.rows().size(); ++r) {
      for (std::size_t c = 0; c < m.columns().size(); ++c) {
        const auto& v = cells.at(r).at(c);
        if (!v.is_null()) m.set(r, c, v.get<double>());
      }
    }
    for (const auto& e : j.at("exclusions")) {
      auto r = m.row_index(e.at("row").get<std::string>());
      auto c = m.column_index(e.at("column").get<std::string>());
      if (!r || !c) throw SchemaError("matrix exclusion refers to an unknown cell");
      m.exclude(*r, *c, e.at("reason").get<std::string>());
    }
    return m;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("matrix file: ") + e.what());
  }
}

// ---------------------------------------------------------------- aggregation

double normalize_response(double value, const ScaleSpec& scale) {
  if (!(scale.min < scale.max)) throw OutOfScale("degenerate scale");
  if (!(value >= scale.min && value <= scale.max)) {
    throw OutOfScale("response " + csv::number(value) + " outside [" + csv::number(scale.min) +
                     ", " + csv::number(scale.max) + "]");
  }
  return (value - scale.min) / (scale.max - scale.min);
}

CategoryScore aggregate_category(std::span<const CountryQuestionScore> scores,
                                 std::string_view category) {
  if (scores.empty()) {
    throw EmptyCategory("no questions for category '" + std::string(category) + "'");
  }
  CategoryScore out;
  out.country = scores.front().country;
  out.category = std::string(category);
  // Sum in a canonical order so the mean does not depend on input order.
  std::vector<double> values;
  values.reserve(scores.size());
  for (const auto& s : scores) {
    if (s.country != out.country) {
      throw ValidationError(s.question_id, "aggregate_category mixes countries");
    }
    values.push_back(s.scale ? normalize_response(s.value, *s.scale) : s.value);
  }
  std::sort(values.begin(), values.end());
  out.value = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  out.question_count = values.size();
  return out;
}

std::string_view to_string(Dimension d) {
  return kHofstedeDimensionCodes[static_cast<std::size_t>(d)];
}

namespace {

std::vector<int> missing_items(const DimensionFormula& f, const std::map<int, double>& m) {
  std::vector<int> missing;
  for (int idx : {f.a1, f.b1, f.a2, f.b2}) {
    if (!m.count(idx)) missing.push_back(idx);
  }
  return missing;
}

double evaluate(const DimensionFormula& f, const std::map<int, double>& m, double constant) {
  return f.w1 * (m.at(f.a1) - m.at(f.b1)) + f.w2 * (m.at(f.a2) - m.at(f.b2)) + constant;
}

std::string describe_missing(const std::vector<int>& items) {
  std::string s = "missing items";
  for (int i : items) s += " m" + std::string(i < 10 ? "0" : "") + std::to_string(i);
  return s;
}

}  // namespace

std::vector<DimensionScore> hofstede_dimensions(const std::map<int, double>& question_scores,
                                                const HofstedeConstants& constants,
                                                std::string country) {
  for (const auto& [idx, v] : question_scores) {
    if (idx < 1 || idx > 24) {
      throw ValidationError("hofstede", "item index " + std::to_string(idx) + " outside 1..24");
    }
  }
  std::vector<int> missing;
  for (const auto& f : kDimensionFormulas) {
    auto m = missing_items(f, question_scores);
    missing.insert(missing.end(), m.begin(), m.end());
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    throw MissingQuestion(describe_missing(missing), missing);
  }
  std::vector<DimensionScore> out;
  for (std::size_t i = 0; i < kDimensionFormulas.size(); ++i) {
    const auto& f = kDimensionFormulas[i];
    out.push_back({country, f.dimension, evaluate(f, question_scores, constants[i])});
  }
  return out;
}

// ------------------------------------------------------------------ matrices

namespace {

std::vector<std::string> dimension_columns() {
  return {std::begin(kHofstedeDimensionCodes), std::end(kHofstedeDimensionCodes)};
}

std::vector<const ProbeQuestion*> retained_wvs(const Corpus& corpus) {
  std::vector<const ProbeQuestion*> out;
  for (const auto& p : corpus.probes()) {
    if (p.survey == Survey::WVS && corpus.catalog().is_retained(p.group)) out.push_back(&p);
  }
  return out;
}

void fill_categories(MatrixSet& set, const std::vector<const ProbeQuestion*>& wvs,
                     const BuildOptions& options) {
  const auto& q = set.wvs_question;
  auto& cat = set.wvs_category;
  for (std::size_t r = 0; r < cat.rows().size(); ++r) {
    for (std::size_t c = 0; c < cat.columns().size(); ++c) {
      const auto& category = cat.columns()[c];
      std::vector<CountryQuestionScore> inputs;
      for (const auto* p : wvs) {
        if (p->group != category) continue;
        auto qc = q.column_index(p->id);
        if (!qc) continue;
        if (const auto& v = q.at(r, *qc)) {
          // Question matrix already holds normalized survey values.
          inputs.push_back({cat.rows()[r], p->id, *v, std::nullopt});
        }
      }
      try {
        cat.set(r, c, aggregate_category(inputs, category).value);
      } catch (const EmptyCategory& e) {
        if (options.strict) throw;
        cat.exclude(r, c, "no scored questions in category");
      }
    }
  }
}

}  // namespace

MatrixSet build_model_matrices(std::span<const ScoreRecord> scores, ScoreMode mode,
                               const Corpus& corpus, std::span<const std::string> languages,
                               const BuildOptions& options) {
  std::vector<std::string> langs(languages.begin(), languages.end());
  if (langs.empty()) {
    std::set<std::string> seen;
    for (const auto& s : scores) seen.insert(s.language_code);
    langs.assign(seen.begin(), seen.end());
  }
  if (langs.empty()) throw InsufficientOverlap("no countries to build matrices for");

  std::vector<std::pair<std::string, std::string>> country_lang;
  for (const auto& l : langs) country_lang.emplace_back(corpus.culture().culture_of(l), l);
  std::sort(country_lang.begin(), country_lang.end());
  std::vector<std::string> countries;
  for (const auto& [c, l] : country_lang) countries.push_back(c);

  std::map<std::pair<std::string, std::string>, double> by_key;  // (probe, lang)
  for (const auto& s : scores) {
    if (s.mode == mode) by_key[{s.probe_id, s.language_code}] = s.score;
  }
  auto lookup = [&](const std::string& probe,
                    const std::string& lang) -> std::optional<double> {
    auto it = by_key.find({probe, lang});
    if (it == by_key.end()) return std::nullopt;
    return it->second;
  };

  const auto wvs = retained_wvs(corpus);
  std::vector<std::string> qcols;
  for (const auto* p : wvs) qcols.push_back(p->id);
  std::vector<std::string> ccols;
  if (!wvs.empty()) ccols = corpus.catalog().retained;
  const bool has_hofstede = corpus.count(Survey::Hofstede) > 0;
  std::vector<std::string> hcols;
  for (const auto& p : corpus.probes()) {
    if (p.survey == Survey::Hofstede) hcols.push_back(p.id);
  }

  const std::string suffix = std::string(":") + std::string(to_string(mode));
  MatrixSet set{
      ScoreMatrix("model_hofstede_dimension" + suffix, countries,
                  has_hofstede ? dimension_columns() : std::vector<std::string>{}),
      ScoreMatrix("model_hofstede_question" + suffix, countries, hcols),
      ScoreMatrix("model_wvs_question" + suffix, countries, qcols),
      ScoreMatrix("model_wvs_category" + suffix, countries, ccols),
      {}};

  for (std::size_t r = 0; r < countries.size(); ++r) {
    const auto& lang = country_lang[r].second;
    for (std::size_t c = 0; c < qcols.size(); ++c) {
      if (auto v = lookup(qcols[c], lang)) {
        set.wvs_question.set(r, c, *v);
      } else {
        set.wvs_question.exclude(r, c, "no score (probe excluded or unscorable)");
      }
    }
    if (has_hofstede) {
      std::map<int, double> items;
      for (const auto& p : corpus.probes()) {
        if (p.survey != Survey::Hofstede) continue;
        const auto hc = *set.hofstede_question.column_index(p.id);
        if (auto v = lookup(p.id, lang)) {
          items[*p.hofstede_index] = *v;
          set.hofstede_question.set(r, hc, *v);
        } else {
          set.hofstede_question.exclude(r, hc, "no score (probe unscorable)");
        }
      }
      if (options.strict) {
        const auto dims = hofstede_dimensions(items, options.constants, countries[r]);
        for (std::size_t d = 0; d < dims.size(); ++d) set.hofstede_dimension.set(r, d, dims[d].value);
      } else {
        for (std::size_t d = 0; d < kDimensionFormulas.size(); ++d) {
          const auto& f = kDimensionFormulas[d];
          auto missing = missing_items(f, items);
          if (missing.empty()) {
            set.hofstede_dimension.set(r, d, evaluate(f, items, options.constants[d]));
          } else {
            set.hofstede_dimension.exclude(r, d, describe_missing(missing));
          }
        }
      }
    }
  }
  fill_categories(set, wvs, options);
  return set;
}

MatrixSet build_survey_matrices(const SurveyReference* hofstede, const SurveyReference* wvs_ref,
                                const Corpus& corpus, const BuildOptions& options) {
  MatrixSet set;

  if (hofstede != nullptr) {
    std::vector<HofstedeReferenceRow> rows = hofstede->hofstede;
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.country < b.country; });
    std::vector<std::string> countries;
    for (const auto& r : rows) countries.push_back(r.country);
    set.hofstede_dimension = ScoreMatrix("survey_hofstede_dimension", countries, dimension_columns());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t d = 0; d < 6; ++d) set.hofstede_dimension.set(r, d, rows[r].values[d]);
    }
  }

  if (wvs_ref != nullptr) {
    const auto wvs = retained_wvs(corpus);
    std::set<std::string> countries_set;
    std::set<std::string> present;
    std::map<std::pair<std::string, std::string>, double> normalized;
    for (const auto& row : wvs_ref->wvs) {
      const auto* probe = corpus.find(row.question_id);
      if (probe == nullptr || probe->survey != Survey::WVS) {
        set.dropped.push_back(row.country + "/" + row.question_id + ": not in corpus");
        continue;
      }
      if (corpus.catalog().is_excluded(probe->group)) {
        set.dropped.push_back(row.country + "/" + row.question_id + ": excluded category '" +
                              probe->group + "'");
        continue;
      }
      if (!(row.scale == probe->scale)) {
        throw ValidationError(row.question_id, "reference scale differs from the corpus scale");
      }
      countries_set.insert(row.country);
      present.insert(row.question_id);
      normalized[{row.country, row.question_id}] = normalize_response(row.mean_response, row.scale);
    }
    std::vector<std::string> countries(countries_set.begin(), countries_set.end());
    std::vector<std::string> qcols;
    for (const auto* p : wvs) {
      if (present.count(p->id)) qcols.push_back(p->id);
    }
    set.wvs_question = ScoreMatrix("survey_wvs_question", countries, qcols);
    set.wvs_category = ScoreMatrix("survey_wvs_category", countries, corpus.catalog().retained);
    for (std::size_t r = 0; r < countries.size(); ++r) {
      for (std::size_t c = 0; c < qcols.size(); ++c) {
        auto it = normalized.find({countries[r], qcols[c]});
        if (it != normalized.end()) {
          set.wvs_question.set(r, c, it->second);
        } else {
          set.wvs_question.exclude(r, c, "no survey response");
        }
      }
    }
    fill_categories(set, wvs, options);
  }
  return set;
}

}  // namespace valueprobe
