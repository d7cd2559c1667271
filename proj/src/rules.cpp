#include "ccgdoc/rules.hpp"

namespace ccgdoc {

namespace {

const Category& conj_category() {
  static const Category conj = Category::atom("conj");
  return conj;
}

HeadSide application_head(const Category& functor, HeadSide functor_side, const RuleSet& rules) {
  if (rules.modifiers_pass_head && functor.is_modifier())
    return functor_side == HeadSide::Left ? HeadSide::Right : HeadSide::Left;
  return functor_side;
}

}  // namespace

std::string_view rule_label(RuleKind kind) {
  switch (kind) {
    case RuleKind::Lexical: return "lex";
    case RuleKind::ForwardApplication: return "fa";
    case RuleKind::BackwardApplication: return "ba";
    case RuleKind::ForwardComposition: return "fc";
    case RuleKind::BackwardComposition: return "bc";
    case RuleKind::GeneralizedForwardComposition: return "gfc";
    case RuleKind::GeneralizedBackwardComposition: return "gbc";
    case RuleKind::Conjunction: return "conj";
    case RuleKind::Unary: return "unary";
  }
  return "?";
}

UnaryRule make_unary_rule(const Category& from, const Category& to) {
  return UnaryRule{from, to, from.str() + "→" + to.str()};
}

RuleSet RuleSet::defaults() {
  RuleSet rules;
  rules.unary_rules.push_back(make_unary_rule(Category::atom("N"), Category::atom("NP")));
  return rules;
}

bool is_punctuation(const Category& c) {
  if (!c.is_atomic()) return false;
  const std::string& b = c.base();
  return b == "," || b == "." || b == ";" || b == ":" || b == "LRB" || b == "RRB";
}

std::vector<Combination> combine(const Category& left, const Category& right, const RuleSet& rules) {
  std::vector<Combination> out;

  // X/Y Y -> X
  if (rules.forward_application && left.is_functor() && left.slash() == Slash::Forward) {
    FeatureBinding b;
    if (unify(left.argument(), right, FeatureMatch::Combinatory, b)) {
      out.push_back({substitute(left.result(), b), RuleKind::ForwardApplication,
                     application_head(left, HeadSide::Left, rules)});
    }
  }
  // Y X\Y -> X
  if (rules.backward_application && right.is_functor() && right.slash() == Slash::Backward) {
    FeatureBinding b;
    if (unify(right.argument(), left, FeatureMatch::Combinatory, b)) {
      out.push_back({substitute(right.result(), b), RuleKind::BackwardApplication,
                     application_head(right, HeadSide::Right, rules)});
    }
  }
  // X/Y Y/Z -> X/Z
  if (rules.forward_composition && left.is_functor() && right.is_functor() &&
      left.slash() == Slash::Forward && right.slash() == Slash::Forward) {
    FeatureBinding b;
    if (unify(left.argument(), right.result(), FeatureMatch::Combinatory, b)) {
      out.push_back({Category::functor(substitute(left.result(), b), Slash::Forward,
                                       substitute(right.argument(), b)),
                     RuleKind::ForwardComposition, HeadSide::Left});
    }
  }
  // Y\Z X\Y -> X\Z
  if (rules.backward_composition && left.is_functor() && right.is_functor() &&
      left.slash() == Slash::Backward && right.slash() == Slash::Backward) {
    FeatureBinding b;
    if (unify(right.argument(), left.result(), FeatureMatch::Combinatory, b)) {
      out.push_back({Category::functor(substitute(right.result(), b), Slash::Backward,
                                       substitute(left.argument(), b)),
                     RuleKind::BackwardComposition, HeadSide::Right});
    }
  }
  if (rules.generalized_composition) {
    // X/Y (Y/Z)/W -> (X/Z)/W
    if (left.is_functor() && left.slash() == Slash::Forward && right.is_functor() &&
        right.slash() == Slash::Forward && right.result().is_functor() &&
        right.result().slash() == Slash::Forward) {
      FeatureBinding b;
      if (unify(left.argument(), right.result().result(), FeatureMatch::Combinatory, b)) {
        Category inner = Category::functor(substitute(left.result(), b), Slash::Forward,
                                           substitute(right.result().argument(), b));
        out.push_back({Category::functor(inner, Slash::Forward, substitute(right.argument(), b)),
                       RuleKind::GeneralizedForwardComposition, HeadSide::Left});
      }
    }
    // (Y\Z)\W X\Y -> (X\Z)\W
    if (right.is_functor() && right.slash() == Slash::Backward && left.is_functor() &&
        left.slash() == Slash::Backward && left.result().is_functor() &&
        left.result().slash() == Slash::Backward) {
      FeatureBinding b;
      if (unify(right.argument(), left.result().result(), FeatureMatch::Combinatory, b)) {
        Category inner = Category::functor(substitute(right.result(), b), Slash::Backward,
                                           substitute(left.result().argument(), b));
        out.push_back({Category::functor(inner, Slash::Backward, substitute(left.argument(), b)),
                       RuleKind::GeneralizedBackwardComposition, HeadSide::Right});
      }
    }
  }
  // conj X -> X\X
  if (rules.conjunction && left == conj_category() && !(right == conj_category()) &&
      !is_punctuation(right)) {
    out.push_back({Category::functor(right, Slash::Backward, right), RuleKind::Conjunction,
                   HeadSide::Right});
  }
  return out;
}

std::vector<UnaryResult> apply_unary(const Category& c, const RuleSet& rules) {
  std::vector<UnaryResult> out;
  for (std::size_t i = 0; i < rules.unary_rules.size(); ++i) {
    const UnaryRule& rule = rules.unary_rules[i];
    FeatureBinding b;
    if (unify(rule.from, c, FeatureMatch::Pattern, b))
      out.push_back({substitute(rule.to, b), rule.label, static_cast<int>(i)});
  }
  return out;
}

}  // namespace ccgdoc
