#include "ccgdoc/semantics.hpp"

#include <algorithm>
#include <map>

#include "ccgdoc/errors.hpp"

namespace ccgdoc {

namespace {

// Kept identical to data/templates.json.
constexpr const char* kDefaultTemplates = R"json({
  "templates": [
    {"category": "NP/N", "words": ["no"], "schema": "\\P.\\Q.-exists x.(P(x) & Q(x))"},
    {"category": "NP/N", "words": ["every", "each", "all"], "schema": "\\P.\\Q.forall x.(P(x) -> Q(x))"},
    {"category": "NP/N", "schema": "\\P.\\Q.exists x.(P(x) & Q(x))"},
    {"category": "N", "schema": "\\x.__W__(x)"},
    {"category": "NP", "schema": "\\F.F(__W__)"},
    {"category": "N/N", "schema": "\\P.\\x.(__W__(x) & P(x))"},
    {"category": "N\\N", "schema": "\\P.\\x.(P(x) & __W__(x))"},
    {"category": "(S\\NP)/(S\\NP)", "schema": "\\V.V"},
    {"category": "(S\\NP[thr])/NP", "schema": "\\y.\\t.exists e.(__W__(e) & (subj(e) = y))"},
    {"category": "S\\NP", "schema": "\\x.exists e.(__W__(e) & (subj(e) = x))"},
    {"category": "(S\\NP)/NP", "schema": "\\y.\\x.exists e.(__W__(e) & (subj(e) = x) & (obj(e) = y))"},
    {"category": "((S\\NP)/NP)/NP", "schema": "\\z.\\y.\\x.exists e.(__W__(e) & (subj(e) = x) & (obj(e) = y) & (iobj(e) = z))"},
    {"category": "(S\\NP)\\(S\\NP)", "schema": "\\V.\\x.(V(x) & __W__(x))"},
    {"category": "S/S", "schema": "\\p.(__W__ & p)"},
    {"category": "conj", "schema": "__W__"}
  ],
  "unary": [
    {"from": "N", "to": "NP", "schema": "\\P.\\Q.exists x.(P(x) & Q(x))"},
    {"from": "S\\NP", "to": "N\\N", "schema": "\\V.\\P.\\x.(P(x) & V(x))"}
  ]
})json";

bool pattern_matches(const Category& pattern, const Category& c) {
  FeatureBinding b;
  return unify(pattern, c, FeatureMatch::Pattern, b);
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.compare(0, prefix.size(), prefix) == 0;
}

Term parse_schema(const nlohmann::json& entry, const std::string& where) {
  if (!entry.contains("schema") || !entry["schema"].is_string())
    throw ValidationError(where + ": missing schema");
  Term t;
  try {
    t = parse_term(entry["schema"].get<std::string>());
  } catch (const TermParseError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  auto free = free_variables(t);
  if (!free.empty()) throw ValidationError(where + ": schema has free variable '" + *free.begin() + "'");
  return t;
}

Category parse_field(const nlohmann::json& entry, const char* key, const std::string& where) {
  if (!entry.contains(key) || !entry[key].is_string())
    throw ValidationError(where + ": missing " + key);
  try {
    return parse_category(entry[key].get<std::string>());
  } catch (const CategoryParseError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

/// Number of arguments a term of category `c` takes before it becomes a
/// formula. Nouns are predicates and noun phrases are quantifiers, so both
/// take one.
int term_arity(const Category& c) {
  if (c.is_functor()) return 1 + term_arity(c.result());
  return c.base() == "N" || c.base() == "NP" ? 1 : 0;
}

bool is_np(const Category& c) { return c.is_atomic() && c.base() == "NP"; }

Term apply_functor(const Category& functor, const Term& f, const Term& a) {
  if (functor.is_modifier() || !is_np(functor.argument())) return Term::apply(f, a);
  const int n = term_arity(functor.result());
  std::vector<std::string> xs;
  for (int i = 1; i <= n; ++i) xs.push_back("v" + std::to_string(i));
  Term inner = Term::apply(f, Term::var("u"));
  for (const auto& x : xs) inner = Term::apply(inner, Term::var(x));
  Term out = Term::apply(a, Term::lambda("u", inner));
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) out = Term::lambda(*it, out);
  return out;
}

/// \f.\g.\z1..zn. f(g(z1..zn)) applied to the two terms.
Term compose(const Term& f, const Term& g, int n) {
  Term inner = g;
  std::vector<std::string> zs;
  for (int i = 1; i <= n; ++i) {
    zs.push_back("z" + std::to_string(i));
    inner = Term::apply(inner, Term::var(zs.back()));
  }
  Term out = Term::apply(f, inner);
  for (auto it = zs.rbegin(); it != zs.rend(); ++it) out = Term::lambda(*it, out);
  return out;
}

/// Meaning of `conj X` as X\X: \L.\v1..vk.(L(v..) op R(v..)).
Term conjoin(const Term& right, const Category& x, const std::string& op) {
  const int k = term_arity(x);
  Term l = Term::var("l");
  Term r = right;
  for (int i = 1; i <= k; ++i) {
    l = Term::apply(l, Term::var("w" + std::to_string(i)));
    r = Term::apply(r, Term::var("w" + std::to_string(i)));
  }
  Term out = Term::call(Term::constant(op), {l, r});
  for (int i = k; i >= 1; --i) out = Term::lambda("w" + std::to_string(i), out);
  return Term::lambda("l", out);
}

void walk(const Term& t, PredArgStructure& out, std::vector<std::pair<std::string, std::string>>& role_vars,
          std::map<std::string, std::set<std::string>>& event_preds) {
  static const std::set<std::string> kOperators{"&", "|", "->", "=", "-", "exists", "forall"};
  static const std::set<std::string> kRoles{"subj", "obj", "iobj"};
  switch (t.kind()) {
    case Term::Kind::Variable:
    case Term::Kind::Constant:
      return;
    case Term::Kind::Abstraction:
      walk(t.body(), out, role_vars, event_preds);
      return;
    case Term::Kind::Application:
      break;
  }
  std::vector<Term> args;
  Term head = t;
  while (head.is_app()) {
    args.push_back(head.arg());
    head = head.fun();
  }
  std::reverse(args.begin(), args.end());
  if (head.is_const() && head.name() == "=" && args.size() == 2 && args[0].is_app() &&
      args[0].fun().is_const() && kRoles.count(args[0].fun().name()) && args[0].arg().is_var()) {
    out.predicates.insert({args[0].fun().name(), 2});
    role_vars.push_back({args[0].fun().name(), args[0].arg().name()});
    walk(args[1], out, role_vars, event_preds);
    return;
  }
  if (head.is_const() && !kOperators.count(head.name())) {
    out.predicates.insert({head.name(), static_cast<int>(args.size())});
    if (args.size() == 1 && args[0].is_var()) event_preds[args[0].name()].insert(head.name());
  } else if (!head.is_const()) {
    walk(head, out, role_vars, event_preds);
  }
  for (const auto& a : args) walk(a, out, role_vars, event_preds);
}

}  // namespace

TemplateSet TemplateSet::defaults() { return from_json(nlohmann::json::parse(kDefaultTemplates)); }

TemplateSet TemplateSet::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("templates") || !j["templates"].is_array())
    throw ValidationError("template file: expected {\"templates\": [...]}");
  TemplateSet set;
  const auto& list = j["templates"];
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string where = "template " + std::to_string(i);
    TemplateRule rule{parse_field(list[i], "category", where), std::nullopt, {}, parse_schema(list[i], where)};
    if (list[i].contains("pos_guard")) rule.pos_guard = list[i]["pos_guard"].get<std::string>();
    if (list[i].contains("words"))
      for (const auto& w : list[i]["words"]) rule.words.push_back(to_lower(w.get<std::string>()));
    set.rules.push_back(std::move(rule));
  }
  if (j.contains("unary")) {
    const auto& shifts = j["unary"];
    for (std::size_t i = 0; i < shifts.size(); ++i) {
      const std::string where = "unary template " + std::to_string(i);
      set.shifts.push_back({parse_field(shifts[i], "from", where), parse_field(shifts[i], "to", where),
                            parse_schema(shifts[i], where)});
    }
  }
  return set;
}

const TemplateRule* TemplateSet::match(const Category& c, const std::string& surface,
                                       const std::string& pos) const {
  const std::string lower = to_lower(surface);
  for (const auto& rule : rules) {
    if (rule.pos_guard && !starts_with(pos, *rule.pos_guard)) continue;
    if (!rule.words.empty() && std::find(rule.words.begin(), rule.words.end(), lower) == rule.words.end())
      continue;
    if (pattern_matches(rule.category, c)) return &rule;
  }
  return nullptr;
}

const ShiftRule* TemplateSet::match_shift(const Category& from, const Category& to) const {
  for (const auto& s : shifts)
    if (pattern_matches(s.from, from) && pattern_matches(s.to, to)) return &s;
  return nullptr;
}

std::vector<Term> assign_lexical_terms(const Derivation& d, const ScoredSentence& s,
                                       const TemplateSet& templates) {
  std::vector<Term> out;
  for (int i = 0; i < s.size(); ++i) {
    const Category& c = d.leaf_category(i);
    const std::string& word = s.tokens[static_cast<std::size_t>(i)];
    const std::string pos = s.has_pos() ? s.pos[static_cast<std::size_t>(i)] : std::string();
    const TemplateRule* rule = templates.match(c, word, pos);
    if (!rule)
      throw TemplateGapError("no semantic template for token " + std::to_string(i) + " '" + word +
                             "' with category " + c.str());
    out.push_back(replace_constant(rule->schema, kWordHole, Term::constant(s.base_form(i))));
  }
  return out;
}

Term compose_semantics(const Derivation& d, const std::vector<Term>& leaves, const TemplateSet& templates,
                       int max_steps) {
  const auto& nodes = d.nodes();
  std::vector<Term> terms;
  terms.reserve(nodes.size());
  for (const auto& n : nodes) {
    Term t;
    const Term* l = n.left >= 0 ? &terms[static_cast<std::size_t>(n.left)] : nullptr;
    const Term* r = n.right >= 0 ? &terms[static_cast<std::size_t>(n.right)] : nullptr;
    const Category* lc = n.left >= 0 ? &nodes[static_cast<std::size_t>(n.left)].category : nullptr;
    const Category* rc = n.right >= 0 ? &nodes[static_cast<std::size_t>(n.right)].category : nullptr;
    switch (n.rule) {
      case RuleKind::Lexical:
        t = leaves.at(static_cast<std::size_t>(n.start));
        break;
      case RuleKind::ForwardApplication:
        t = apply_functor(*lc, *l, *r);
        break;
      case RuleKind::BackwardApplication:
        t = apply_functor(*rc, *r, *l);
        break;
      case RuleKind::ForwardComposition:
        t = compose(*l, *r, 1);
        break;
      case RuleKind::BackwardComposition:
        t = compose(*r, *l, 1);
        break;
      case RuleKind::GeneralizedForwardComposition:
        t = compose(*l, *r, 2);
        break;
      case RuleKind::GeneralizedBackwardComposition:
        t = compose(*r, *l, 2);
        break;
      case RuleKind::Conjunction: {
        const bool disjunction = l->is_const() && l->name() == "or";
        t = conjoin(*r, *rc, disjunction ? "|" : "&");
        break;
      }
      case RuleKind::Unary: {
        const ShiftRule* shift = templates.match_shift(*lc, n.category);
        if (!shift)
          throw TemplateGapError("no semantic template for type change " + lc->str() + " -> " +
                                 n.category.str());
        t = Term::apply(shift->schema, *l);
        break;
      }
    }
    terms.push_back(n.rule == RuleKind::Lexical ? t : beta_reduce(t, max_steps, false));
  }
  return canonicalize(terms.back());
}

Term sentence_semantics(const Derivation& d, const ScoredSentence& s, const TemplateSet& templates) {
  return compose_semantics(d, assign_lexical_terms(d, s, templates), templates);
}

PredArgStructure PredArgStructure::restricted_to(const std::string& predicate) const {
  PredArgStructure out;
  for (const auto& p : predicates)
    if (p.first == predicate) out.predicates.insert(p);
  for (const auto& r : roles)
    if (r.second == predicate) out.roles.insert(r);
  return out;
}

nlohmann::json PredArgStructure::to_json() const {
  nlohmann::json preds = nlohmann::json::array();
  for (const auto& [name, arity] : predicates) preds.push_back(name + "/" + std::to_string(arity));
  nlohmann::json links = nlohmann::json::array();
  for (const auto& [role, pred] : roles) links.push_back({role, pred});
  return {{"predicates", preds}, {"roles", links}};
}

PredArgStructure extract_pred_args(const Term& t) {
  PredArgStructure out;
  std::vector<std::pair<std::string, std::string>> role_vars;
  std::map<std::string, std::set<std::string>> event_preds;
  walk(t, out, role_vars, event_preds);
  for (const auto& [role, var] : role_vars) {
    auto it = event_preds.find(var);
    if (it == event_preds.end()) continue;
    for (const auto& p : it->second) out.roles.insert({role, p});
  }
  return out;
}

}  // namespace ccgdoc
