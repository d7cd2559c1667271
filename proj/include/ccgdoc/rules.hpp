#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ccgdoc/category.hpp"

namespace ccgdoc {

enum class RuleKind : int {
  Lexical,
  ForwardApplication,
  BackwardApplication,
  ForwardComposition,
  BackwardComposition,
  GeneralizedForwardComposition,
  GeneralizedBackwardComposition,
  Conjunction,
  Unary,
};

/// Short label used in derivation output ("fa", "ba", "fc", ...).
std::string_view rule_label(RuleKind kind);

enum class HeadSide { Left, Right };

struct Combination {
  Category category;
  RuleKind rule;
  HeadSide head;

  friend bool operator==(const Combination&, const Combination&) = default;
};

/// Type-changing rewrite `from -> to`. `from` is matched as a pattern, so
/// an unmarked atom in `from` accepts any feature.
struct UnaryRule {
  Category from;
  Category to;
  std::string label;  // "N→NP" unless given explicitly
};

UnaryRule make_unary_rule(const Category& from, const Category& to);

struct UnaryResult {
  Category category;
  std::string label;
  int rule_index;

  friend bool operator==(const UnaryResult&, const UnaryResult&) = default;
};

struct RuleSet {
  bool forward_application = true;
  bool backward_application = true;
  bool forward_composition = true;
  bool backward_composition = true;
  /// Second-order composition: X/Y (Y/Z)/W -> (X/Z)/W and its mirror.
  bool generalized_composition = false;
  /// conj X -> X\X
  bool conjunction = true;
  /// Application with a modifier functor (X/X, X\X) makes the argument the
  /// head; otherwise the functor heads. Composition always keeps the
  /// primary functor as head.
  bool modifiers_pass_head = true;
  std::vector<UnaryRule> unary_rules;

  /// Application, first-order composition, conjunction and N -> NP.
  static RuleSet defaults();
};

/// All categories derivable from `left right` by the enabled binary rules,
/// in a fixed rule order. Feature unification allows one variable binding
/// per application.
std::vector<Combination> combine(const Category& left, const Category& right, const RuleSet& rules);

/// All enabled unary rewrites of `c`, in rule-table order.
std::vector<UnaryResult> apply_unary(const Category& c, const RuleSet& rules);

bool is_punctuation(const Category& c);

}  // namespace ccgdoc
