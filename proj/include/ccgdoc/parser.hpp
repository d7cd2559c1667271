#pragma once

#include <vector>

#include "ccgdoc/category.hpp"
#include "ccgdoc/derivation.hpp"
#include "ccgdoc/rules.hpp"
#include "ccgdoc/sentence.hpp"

namespace ccgdoc {

/// Ordering among derivations whose scores are exactly equal. Only one
/// policy exists: lexicographic over the per-token vocabulary indices, then
/// over the head vector, then structurally (binary before unary, leftmost
/// split first, lower rule kind first, children by category string).
enum class TieBreak { LexicographicCategories };

struct ParseConfig {
  /// Keep category c for token i when p(c) >= beta * max_c' p(c').
  double beta = 1e-5;
  int max_categories = 50;
  RuleSet rules = RuleSet::defaults();
  /// Categories accepted at the root; empty accepts any category.
  std::vector<Category> root_categories;
  TieBreak tie_break = TieBreak::LexicographicCategories;
  /// Longest sentence parse_exhaustive accepts.
  int oracle_max_tokens = 8;

  void validate() const;
};

/// Per token, ascending vocabulary indices of the categories that survive
/// pruning on the unpenalised tag scores.
using CandidateSet = std::vector<std::vector<int>>;

CandidateSet prune_candidates(const ScoredSentence& s, const ParseConfig& cfg);

/// Upper bound on the score contributed by tokens outside [begin, end):
/// for each such token, its best penalised tag score plus its best head score.
double heuristic_outside(const ScoredSentence& s, const ScoreMatrix* penalties, int begin, int end);

struct ParseStats {
  long pushed = 0;
  long popped = 0;
  /// Smallest priority (inside score plus outside bound) among popped items.
  double min_popped_priority = 0.0;
};

/// Exact best derivation by agenda-driven A* search. `penalties`, when
/// given, is M x |vocabulary| and is subtracted from the tag scores.
/// Throws NoParseError when no complete derivation exists.
Derivation parse_astar(const ScoredSentence& s, const ParseConfig& cfg,
                       const ScoreMatrix* penalties = nullptr, ParseStats* stats = nullptr);
Derivation parse_astar(const ScoredSentence& s, const ParseConfig& cfg,
                       const CandidateSet& candidates, const ScoreMatrix* penalties = nullptr,
                       ParseStats* stats = nullptr);

/// Full CKY over the same search space as parse_astar, with the same tie
/// break. Throws OracleLimitError above cfg.oracle_max_tokens.
Derivation parse_exhaustive(const ScoredSentence& s, const ParseConfig& cfg,
                            const ScoreMatrix* penalties = nullptr);
Derivation parse_exhaustive(const ScoredSentence& s, const ParseConfig& cfg,
                            const CandidateSet& candidates, const ScoreMatrix* penalties = nullptr);

}  // namespace ccgdoc
