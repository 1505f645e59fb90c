#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace valueprobe {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define VALUEPROBE_DEFINE_ERROR(Name) \
  class Name : public Error {         \
   public:                            \
    using Error::Error;               \
  }

// corpus
VALUEPROBE_DEFINE_ERROR(SchemaError);
VALUEPROBE_DEFINE_ERROR(UnknownLanguage);
VALUEPROBE_DEFINE_ERROR(UnknownGroup);
VALUEPROBE_DEFINE_ERROR(ExcludedCategory);

// localization
VALUEPROBE_DEFINE_ERROR(TranslatorUnavailable);
VALUEPROBE_DEFINE_ERROR(TranslatorError);
VALUEPROBE_DEFINE_ERROR(AlignerError);
VALUEPROBE_DEFINE_ERROR(RemaskFailed);

// scoring
VALUEPROBE_DEFINE_ERROR(BackendUnavailable);
VALUEPROBE_DEFINE_ERROR(LabelNotScorable);
VALUEPROBE_DEFINE_ERROR(MismatchedRecords);

// aggregation
VALUEPROBE_DEFINE_ERROR(OutOfScale);
VALUEPROBE_DEFINE_ERROR(EmptyCategory);

// statistics
VALUEPROBE_DEFINE_ERROR(DegenerateInput);
VALUEPROBE_DEFINE_ERROR(InsufficientOverlap);
VALUEPROBE_DEFINE_ERROR(JoinError);

// cli
VALUEPROBE_DEFINE_ERROR(UsageError);
VALUEPROBE_DEFINE_ERROR(LockError);

#undef VALUEPROBE_DEFINE_ERROR

/// Invariant violation on a loaded record. Carries the offending record id
/// and the rule it broke so callers can report both.
class ValidationError : public Error {
 public:
  ValidationError(std::string record_id, std::string rule)
      : Error(record_id.empty() ? rule : record_id + ": " + rule),
        record_id_(std::move(record_id)),
        rule_(std::move(rule)) {}

  const std::string& record_id() const noexcept { return record_id_; }
  const std::string& rule() const noexcept { return rule_; }

 private:
  std::string record_id_;
  std::string rule_;
};

class MissingQuestion : public Error {
 public:
  MissingQuestion(std::string message, std::vector<int> indices)
      : Error(std::move(message)), indices_(std::move(indices)) {}

  const std::vector<int>& indices() const noexcept { return indices_; }

 private:
  std::vector<int> indices_;
};

}  // namespace valueprobe
