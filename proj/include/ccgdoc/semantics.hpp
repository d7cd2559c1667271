#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ccgdoc/category.hpp"
#include "ccgdoc/derivation.hpp"
#include "ccgdoc/lambda.hpp"
#include "ccgdoc/sentence.hpp"

namespace ccgdoc {

/// Constant in a schema that is replaced by the word's base form.
inline constexpr const char* kWordHole = "__W__";

struct TemplateRule {
  Category category;  // matched as a pattern: unmarked features accept any value
  std::optional<std::string> pos_guard;  // POS prefix
  std::vector<std::string> words;        // lower-cased surface forms; empty accepts any
  Term schema;
};

/// Meaning of a type-changing rule, applied to the child's term.
struct ShiftRule {
  Category from;
  Category to;
  Term schema;
};

/// Ordered template rules; the first rule that matches a leaf wins.
class TemplateSet {
 public:
  std::vector<TemplateRule> rules;
  std::vector<ShiftRule> shifts;

  /// Neo-Davidsonian defaults: event verbs with subj/obj/iobj roles,
  /// quantifier determiners, predicate nouns.
  static TemplateSet defaults();

  /// `{"templates": [{"category", "pos_guard"?, "words"?, "schema"}],
  ///   "unary": [{"from", "to", "schema"}]}`. Throws ValidationError.
  static TemplateSet from_json(const nlohmann::json& j);

  const TemplateRule* match(const Category& c, const std::string& surface,
                            const std::string& pos) const;
  const ShiftRule* match_shift(const Category& from, const Category& to) const;
};

/// One closed term per token. Throws TemplateGapError naming the token and
/// its category when no rule matches.
std::vector<Term> assign_lexical_terms(const Derivation& d, const ScoredSentence& s,
                                       const TemplateSet& templates);

/// Bottom-up composition following the derivation's rules, beta-normalised
/// and canonically renamed. Application of a non-modifier functor to an NP
/// argument scopes the argument's quantifier over the functor:
/// `\x1..xn. a(\y. f(y, x1, ..., xn))`.
Term compose_semantics(const Derivation& d, const std::vector<Term>& leaves,
                       const TemplateSet& templates, int max_steps = kDefaultReductionSteps);

/// assign_lexical_terms followed by compose_semantics.
Term sentence_semantics(const Derivation& d, const ScoredSentence& s, const TemplateSet& templates);

/// Predicates with their arities, and (role, predicate) links for role
/// equations `role(e) = x` whose event variable `e` is the sole argument of
/// that predicate.
struct PredArgStructure {
  std::set<std::pair<std::string, int>> predicates;
  std::set<std::pair<std::string, std::string>> roles;

  /// The part of the structure that mentions `predicate`: its arities and
  /// the roles linked to it.
  PredArgStructure restricted_to(const std::string& predicate) const;
  bool empty() const { return predicates.empty() && roles.empty(); }
  nlohmann::json to_json() const;

  friend bool operator==(const PredArgStructure&, const PredArgStructure&) = default;
};

PredArgStructure extract_pred_args(const Term& t);

}  // namespace ccgdoc
