#include "ccgdoc/sentence.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>

#include "ccgdoc/errors.hpp"

namespace ccgdoc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  double m = row.maxCoeff();
  if (m == kNegInf) return kNegInf;
  return m + std::log((row.array() - m).exp().sum());
}

void validate_rows(const ScoreMatrix& m, const std::string& label, const char* field) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    std::string where = label + ": " + field + " row " + std::to_string(r);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (std::isnan(row(c))) throw ValidationError(where + " contains NaN");
      if (row(c) > kPositiveEntryTolerance)
        throw ValidationError(where + " has a positive log-probability at column " +
                              std::to_string(c));
    }
    if (row.maxCoeff() == kNegInf) throw ValidationError(where + " is entirely -inf");
    double lse = log_sum_exp(row);
    if (std::abs(lse) > kRowNormalisationTolerance)
      throw ValidationError(where + " is not normalised (log-sum-exp " + std::to_string(lse) + ")");
  }
}

ScoreMatrix read_matrix(const nlohmann::json& j, const std::string& label, const char* field,
                        bool linear) {
  if (!j.contains(field) || !j[field].is_array())
    throw ValidationError(label + ": missing array '" + field + "'");
  const auto& rows = j[field];
  std::size_t cols = rows.empty() ? 0 : rows[0].size();
  ScoreMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_array() || rows[r].size() != cols)
      throw ValidationError(label + ": " + field + " row " + std::to_string(r) +
                            " has the wrong length");
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& v = rows[r][c];
      double x;
      if (v.is_null()) {
        x = linear ? 0.0 : kNegInf;
      } else if (v.is_number()) {
        x = v.get<double>();
      } else {
        throw ValidationError(label + ": " + field + " row " + std::to_string(r) +
                              " has a non-numeric entry");
      }
      if (linear) {
        if (x < 0.0)
          throw ValidationError(label + ": " + field + " row " + std::to_string(r) +
                                " has a negative probability");
        x = x == 0.0 ? kNegInf : std::log(x);
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = x;
    }
  }
  return m;
}

std::vector<std::string> read_strings(const nlohmann::json& j, const std::string& label,
                                      const char* field, bool required) {
  if (!j.contains(field)) {
    if (required) throw ValidationError(label + ": missing '" + field + "'");
    return {};
  }
  if (!j[field].is_array()) throw ValidationError(label + ": '" + field + "' must be an array");
  std::vector<std::string> out;
  for (const auto& v : j[field]) {
    if (!v.is_string()) throw ValidationError(label + ": '" + field + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

nlohmann::json matrix_to_json(const ScoreMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (std::isinf(m(r, c)))
        row.push_back(nullptr);
      else
        row.push_back(m(r, c));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

std::string ScoredSentence::base_form(int token) const {
  if (!lemmas.empty()) return lemmas.at(static_cast<std::size_t>(token));
  return to_lower(tokens.at(static_cast<std::size_t>(token)));
}

int ScoredSentence::category_index(const Category& c) const {
  for (std::size_t i = 0; i < categories.size(); ++i)
    if (categories[i] == c) return static_cast<int>(i);
  return -1;
}

void validate_sentence(const ScoredSentence& s, const std::string& label) {
  const auto m = static_cast<Eigen::Index>(s.tokens.size());
  if (m < 1) throw ValidationError(label + ": no tokens");
  if (!s.pos.empty() && s.pos.size() != s.tokens.size())
    throw ValidationError(label + ": pos has " + std::to_string(s.pos.size()) + " entries for " +
                          std::to_string(m) + " tokens");
  if (!s.lemmas.empty() && s.lemmas.size() != s.tokens.size())
    throw ValidationError(label + ": lemmas length does not match tokens");
  if (s.categories.empty()) throw ValidationError(label + ": empty category vocabulary");
  std::set<std::string> seen;
  for (const auto& c : s.categories)
    if (!seen.insert(c.str()).second)
      throw ValidationError(label + ": duplicate category " + c.str());
  const auto t = static_cast<Eigen::Index>(s.categories.size());
  if (s.tag_log_prob.rows() != m || s.tag_log_prob.cols() != t)
    throw ValidationError(label + ": tag_log_prob must be " + std::to_string(m) + " x " +
                          std::to_string(t));
  if (s.dep_log_prob.rows() != m || s.dep_log_prob.cols() != m + 1)
    throw ValidationError(label + ": dep_log_prob must be " + std::to_string(m) + " x " +
                          std::to_string(m + 1));
  validate_rows(s.tag_log_prob, label, "tag_log_prob");
  validate_rows(s.dep_log_prob, label, "dep_log_prob");
}

ScoredSentence sentence_from_json(const nlohmann::json& j, const std::string& label) {
  if (!j.is_object()) throw ValidationError(label + ": expected an object");
  bool linear = false;
  if (j.contains("prob_domain")) {
    std::string domain = j["prob_domain"].get<std::string>();
    if (domain == "linear")
      linear = true;
    else if (domain != "log")
      throw ValidationError(label + ": prob_domain must be 'log' or 'linear'");
  }
  ScoredSentence s;
  s.tokens = read_strings(j, label, "tokens", true);
  s.pos = read_strings(j, label, "pos", false);
  s.lemmas = read_strings(j, label, "lemmas", false);
  for (const auto& text : read_strings(j, label, "categories", true)) {
    try {
      s.categories.push_back(parse_category(text));
    } catch (const CategoryParseError& e) {
      throw ValidationError(label + ": category '" + text + "': " + e.what());
    }
  }
  s.tag_log_prob = read_matrix(j, label, "tag_log_prob", linear);
  s.dep_log_prob = read_matrix(j, label, "dep_log_prob", linear);
  validate_sentence(s, label);
  return s;
}

nlohmann::json sentence_to_json(const ScoredSentence& s) {
  nlohmann::json j;
  j["tokens"] = s.tokens;
  if (!s.pos.empty()) j["pos"] = s.pos;
  if (!s.lemmas.empty()) j["lemmas"] = s.lemmas;
  nlohmann::json cats = nlohmann::json::array();
  for (const auto& c : s.categories) cats.push_back(c.str());
  j["categories"] = cats;
  j["tag_log_prob"] = matrix_to_json(s.tag_log_prob);
  j["dep_log_prob"] = matrix_to_json(s.dep_log_prob);
  return j;
}

}  // namespace ccgdoc
