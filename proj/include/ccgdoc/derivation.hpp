#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ccgdoc/category.hpp"
#include "ccgdoc/rules.hpp"
#include "ccgdoc/sentence.hpp"

namespace ccgdoc {

struct DerivationNode {
  Category category;
  RuleKind rule;
  std::string label;  // rule_label(rule), or the unary rule's own label
  int start;
  int end;
  int head;                // token index heading this span
  int left = -1;           // child node indices; leaves have none,
  int right = -1;          // unary nodes only `left`
  int vocabulary_index = -1;  // leaves only
  int unary_rule_index = -1;  // unary only
};

/// A binary CCG tree over one sentence. Nodes are stored children-first;
/// the root is the last node.
///
/// `heads[i]` uses dep_log_prob column indexing: 0 is the virtual root and
/// j+1 is token j.
class Derivation {
 public:
  Derivation() = default;
  Derivation(std::vector<DerivationNode> nodes, std::vector<int> categories,
             std::vector<int> heads, double score);

  const std::vector<DerivationNode>& nodes() const { return nodes_; }
  const DerivationNode& root() const { return nodes_.back(); }
  int size() const { return static_cast<int>(categories_.size()); }

  /// Vocabulary index of each token's lexical category.
  const std::vector<int>& categories() const { return categories_; }
  const std::vector<int>& heads() const { return heads_; }
  double score() const { return score_; }

  const Category& leaf_category(int token) const;

  /// `(S[dcl] ba (NP john) (S[dcl]\NP runs))` style bracketing.
  std::string bracketed(const ScoredSentence& s) const;
  nlohmann::json to_json(const ScoredSentence& s) const;

  friend bool operator==(const Derivation& a, const Derivation& b);

 private:
  std::vector<DerivationNode> nodes_;
  std::vector<int> categories_;
  std::vector<int> heads_;
  std::vector<int> leaf_nodes_;
  double score_ = 0.0;
};

/// Checks leaf coverage, single root attachment, and that every internal
/// node is licensed by `rules`. Returns an error message or nullopt.
std::optional<std::string> check_derivation(const Derivation& d, const ScoredSentence& s,
                                            const RuleSet& rules);

/// sum_i (tag[i][c_i] - penalty[i][c_i]) + sum_i dep[i][h_i], summed in that
/// order. Every score in the parsers is accumulated in this same order.
double tree_score(const Derivation& d, const ScoredSentence& s,
                  const ScoreMatrix* penalties = nullptr);

double tree_score(const std::vector<int>& categories, const std::vector<int>& heads,
                  const ScoredSentence& s, const ScoreMatrix* penalties = nullptr);

}  // namespace ccgdoc
