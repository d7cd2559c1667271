#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ccgdoc {

/// Malformed category string. `offset()` is the byte offset of the failure.
class CategoryParseError : public std::runtime_error {
 public:
  CategoryParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Input file or configuration does not satisfy its schema.
class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// No complete derivation exists under the rule set and candidate sets.
class NoParseError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An exhaustive oracle was asked to enumerate more than its configured limit.
class OracleLimitError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class TemplateGapError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ReductionLimitError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class TermParseError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ScorerError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ccgdoc
