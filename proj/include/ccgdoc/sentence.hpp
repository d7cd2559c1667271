#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "ccgdoc/category.hpp"

namespace ccgdoc {

using ScoreMatrix = Eigen::MatrixXd;

/// One sentence with its precomputed supertag and head scores, natural log.
///
/// `tag_log_prob` is M x |vocabulary|; `dep_log_prob` is M x (M+1) with
/// column 0 standing for the virtual root and column j+1 for token j.
struct ScoredSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> pos;     // empty or one per token
  std::vector<std::string> lemmas;  // empty or one per token
  std::vector<Category> categories;
  ScoreMatrix tag_log_prob;
  ScoreMatrix dep_log_prob;

  int size() const { return static_cast<int>(tokens.size()); }
  int vocabulary_size() const { return static_cast<int>(categories.size()); }
  bool has_pos() const { return !pos.empty(); }

  /// Lemma if present, else the lower-cased surface form.
  std::string base_form(int token) const;

  /// Index of `c` in the vocabulary, or -1.
  int category_index(const Category& c) const;
};

/// Rows must be log-normalised to within this tolerance.
inline constexpr double kRowNormalisationTolerance = 1e-3;
inline constexpr double kPositiveEntryTolerance = 1e-6;

/// Throws ValidationError naming `label` and the offending row or field.
void validate_sentence(const ScoredSentence& s, const std::string& label = "sentence");

/// Reads the JSON schema
/// `{"tokens", "pos"?, "lemmas"?, "categories", "tag_log_prob", "dep_log_prob",
///   "prob_domain"?: "log"|"linear"}`.
/// Linear-domain rows are converted to natural log. Validates the result.
ScoredSentence sentence_from_json(const nlohmann::json& j, const std::string& label = "sentence");
nlohmann::json sentence_to_json(const ScoredSentence& s);

std::string to_lower(std::string s);

}  // namespace ccgdoc
