#include "ccgdoc/lambda.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <regex>
#include <vector>

#include "ccgdoc/errors.hpp"

namespace ccgdoc {

struct Term::Node {
  Kind kind;
  std::string name;
  Term a{nullptr};
  Term b{nullptr};
};

Term Term::var(std::string name) {
  return Term(std::make_shared<const Node>(Node{Kind::Variable, std::move(name)}));
}

Term Term::constant(std::string name) {
  return Term(std::make_shared<const Node>(Node{Kind::Constant, std::move(name)}));
}

Term Term::lambda(std::string var, Term body) {
  return Term(std::make_shared<const Node>(Node{Kind::Abstraction, std::move(var), std::move(body)}));
}

Term Term::apply(Term fun, Term arg) {
  return Term(std::make_shared<const Node>(Node{Kind::Application, {}, std::move(fun), std::move(arg)}));
}

Term Term::call(Term fun, std::initializer_list<Term> args) {
  for (const auto& a : args) fun = apply(std::move(fun), a);
  return fun;
}

Term::Kind Term::kind() const { return node_->kind; }
const std::string& Term::name() const { return node_->name; }
const Term& Term::body() const { return node_->a; }
const Term& Term::fun() const { return node_->a; }
const Term& Term::arg() const { return node_->b; }

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Term::Kind::Variable:
    case Term::Kind::Constant:
      return a.name() == b.name();
    case Term::Kind::Abstraction:
      return a.name() == b.name() && a.body() == b.body();
    case Term::Kind::Application:
      return a.fun() == b.fun() && a.arg() == b.arg();
  }
  return false;
}

namespace {

bool is_binary_op(const std::string& s) { return s == "&" || s == "|" || s == "->" || s == "="; }
bool is_quantifier(const std::string& s) { return s == "exists" || s == "forall"; }

/// Head and arguments of a left-nested application.
std::pair<Term, std::vector<Term>> spine(const Term& t) {
  std::vector<Term> args;
  Term head = t;
  while (head.is_app()) {
    args.push_back(head.arg());
    head = head.fun();
  }
  return {head, {args.rbegin(), args.rend()}};
}

bool is_binder(const Term& t) {
  if (t.is_lambda()) return true;
  if (!t.is_app()) return false;
  auto [head, args] = spine(t);
  if (!head.is_const()) return false;
  if (is_quantifier(head.name()) && args.size() == 1 && args[0].is_lambda()) return true;
  return head.name() == "-" && args.size() == 1;
}

std::string render(const Term& t);

std::string render_operand(const Term& t) {
  std::string s = render(t);
  return is_binder(t) ? "(" + s + ")" : s;
}

std::string render(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Variable:
    case Term::Kind::Constant:
      return t.name();
    case Term::Kind::Abstraction:
      return "\\" + t.name() + "." + render(t.body());
    case Term::Kind::Application:
      break;
  }
  auto [head, args] = spine(t);
  if (head.is_const()) {
    const std::string& op = head.name();
    if (is_binary_op(op) && args.size() == 2)
      return "(" + render_operand(args[0]) + " " + op + " " + render(args[1]) + ")";
    if (is_quantifier(op) && args.size() == 1 && args[0].is_lambda())
      return op + " " + args[0].name() + "." + render(args[0].body());
    if (op == "-" && args.size() == 1) return "-" + render(args[0]);
  }
  std::string out = head.is_var() || head.is_const() ? head.name() : "(" + render(head) + ")";
  out += "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += render(args[i]);
  }
  return out + ")";
}

class TermParser {
 public:
  explicit TermParser(std::string_view text) : text_(text) {}

  Term parse() {
    Term t = term();
    skip();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return t;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<std::string> bound_;

  [[noreturn]] void fail(const std::string& msg) const {
    throw TermParseError(msg + " at offset " + std::to_string(pos_) + " in '" + std::string(text_) + "'");
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(std::string_view s) {
    skip();
    return text_.substr(pos_, s.size()) == s;
  }

  bool accept(std::string_view s) {
    if (!peek(s)) return false;
    pos_ += s.size();
    return true;
  }

  void expect(std::string_view s) {
    if (!accept(s)) fail("expected '" + std::string(s) + "'");
  }

  static bool ident_char(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || c == '\'' || u >= 0x80;
  }

  std::optional<std::string> peek_ident() {
    skip();
    std::size_t end = pos_;
    while (end < text_.size() && ident_char(text_[end])) ++end;
    if (end == pos_) return std::nullopt;
    return std::string(text_.substr(pos_, end - pos_));
  }

  std::string ident() {
    auto id = peek_ident();
    if (!id) fail("expected identifier");
    pos_ += id->size();
    return *id;
  }

  Term binder_body(const std::string& var) {
    bound_.push_back(var);
    Term body = term();
    bound_.pop_back();
    return body;
  }

  Term term() {
    if (accept("\\")) {
      std::string v = ident();
      expect(".");
      return Term::lambda(v, binder_body(v));
    }
    if (auto id = peek_ident(); id && is_quantifier(*id)) {
      std::size_t save = pos_;
      pos_ += id->size();
      if (auto v = peek_ident()) {
        pos_ += v->size();
        if (accept(".")) return Term::apply(Term::constant(*id), Term::lambda(*v, binder_body(*v)));
      }
      pos_ = save;
    }
    return implication();
  }

  Term implication() {
    Term left = disjunction();
    if (accept("->")) return Term::call(Term::constant("->"), {left, implication()});
    return left;
  }

  Term disjunction() {
    Term left = conjunction();
    while (accept("|")) left = Term::call(Term::constant("|"), {left, conjunction()});
    return left;
  }

  Term conjunction() {
    Term left = equality();
    while (accept("&")) left = Term::call(Term::constant("&"), {left, equality()});
    return left;
  }

  Term equality() {
    Term left = unary();
    if (accept("=")) return Term::call(Term::constant("="), {left, unary()});
    return left;
  }

  Term unary() {
    if (!peek("->") && accept("-")) return Term::apply(Term::constant("-"), unary());
    if (peek("\\")) return term();
    if (auto id = peek_ident(); id && is_quantifier(*id)) {
      std::size_t save = pos_;
      pos_ += id->size();
      bool binder = peek_ident().has_value();
      pos_ = save;
      if (binder) return term();
    }
    return application();
  }

  // `f(a, b)` and juxtaposition `f a b` both apply left to right.
  Term application() {
    Term t = atom();
    while (true) {
      if (accept("(")) {
        std::vector<Term> args{term()};
        while (accept(",")) args.push_back(term());
        expect(")");
        for (auto& a : args) t = Term::apply(t, a);
        continue;
      }
      auto id = peek_ident();
      if (!id || is_quantifier(*id)) break;
      t = Term::apply(t, atom());
    }
    return t;
  }

  Term atom() {
    if (accept("(")) {
      Term t = term();
      expect(")");
      return t;
    }
    for (std::string_view op : {"->", "&", "|", "=", "-"}) {
      skip();
      if (text_.substr(pos_, op.size()) == op && text_.substr(pos_ + op.size(), 1) == "(") {
        pos_ += op.size();
        return Term::constant(std::string(op));
      }
    }
    std::string id = ident();
    for (auto it = bound_.rbegin(); it != bound_.rend(); ++it)
      if (*it == id) return Term::var(id);
    static const std::regex free_var("[a-z][0-9']*");
    if (std::regex_match(id, free_var)) return Term::var(id);
    return Term::constant(id);
  }
};

void collect_free(const Term& t, std::vector<std::string>& bound, std::set<std::string>& out) {
  switch (t.kind()) {
    case Term::Kind::Variable:
      if (std::find(bound.begin(), bound.end(), t.name()) == bound.end()) out.insert(t.name());
      return;
    case Term::Kind::Constant:
      return;
    case Term::Kind::Abstraction:
      bound.push_back(t.name());
      collect_free(t.body(), bound, out);
      bound.pop_back();
      return;
    case Term::Kind::Application:
      collect_free(t.fun(), bound, out);
      collect_free(t.arg(), bound, out);
      return;
  }
}

bool occurs_free(const Term& t, const std::string& name) {
  switch (t.kind()) {
    case Term::Kind::Variable:
      return t.name() == name;
    case Term::Kind::Constant:
      return false;
    case Term::Kind::Abstraction:
      return t.name() != name && occurs_free(t.body(), name);
    case Term::Kind::Application:
      return occurs_free(t.fun(), name) || occurs_free(t.arg(), name);
  }
  return false;
}

Term subst(const Term& t, const std::string& name, const Term& value, const std::set<std::string>& value_free) {
  switch (t.kind()) {
    case Term::Kind::Variable:
      return t.name() == name ? value : t;
    case Term::Kind::Constant:
      return t;
    case Term::Kind::Application: {
      Term f = subst(t.fun(), name, value, value_free);
      Term a = subst(t.arg(), name, value, value_free);
      return Term::apply(std::move(f), std::move(a));
    }
    case Term::Kind::Abstraction:
      break;
  }
  if (t.name() == name || !occurs_free(t.body(), name)) return t;
  if (!value_free.count(t.name()))
    return Term::lambda(t.name(), subst(t.body(), name, value, value_free));
  std::string fresh = t.name() + "'";
  auto body_free = free_variables(t.body());
  while (value_free.count(fresh) || body_free.count(fresh) || fresh == name) fresh += "'";
  Term renamed = subst(t.body(), t.name(), Term::var(fresh), {fresh});
  return Term::lambda(fresh, subst(renamed, name, value, value_free));
}

/// One leftmost-outermost contraction, or nullopt at normal form.
std::optional<Term> step(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Variable:
    case Term::Kind::Constant:
      return std::nullopt;
    case Term::Kind::Abstraction:
      if (auto b = step(t.body())) return Term::lambda(t.name(), *b);
      return std::nullopt;
    case Term::Kind::Application:
      break;
  }
  if (t.fun().is_lambda()) return substitute(t.fun().body(), t.fun().name(), t.arg());
  if (auto f = step(t.fun())) return Term::apply(*f, t.arg());
  if (auto a = step(t.arg())) return Term::apply(t.fun(), *a);
  return std::nullopt;
}

Term rename(const Term& t, std::map<std::string, std::vector<std::string>>& env, int& counter,
            const std::set<std::string>& avoid) {
  switch (t.kind()) {
    case Term::Kind::Variable: {
      auto it = env.find(t.name());
      return it != env.end() && !it->second.empty() ? Term::var(it->second.back()) : t;
    }
    case Term::Kind::Constant:
      return t;
    case Term::Kind::Application: {
      Term f = rename(t.fun(), env, counter, avoid);
      return Term::apply(std::move(f), rename(t.arg(), env, counter, avoid));
    }
    case Term::Kind::Abstraction:
      break;
  }
  std::string fresh;
  do {
    fresh = "x" + std::to_string(++counter);
  } while (avoid.count(fresh));
  env[t.name()].push_back(fresh);
  Term body = rename(t.body(), env, counter, avoid);
  env[t.name()].pop_back();
  return Term::lambda(fresh, std::move(body));
}

Term canonicalize_avoiding(const Term& t, const std::set<std::string>& avoid) {
  std::map<std::string, std::vector<std::string>> env;
  int counter = 0;
  return rename(t, env, counter, avoid);
}

}  // namespace

std::string Term::str() const { return render(*this); }

Term parse_term(std::string_view text) { return TermParser(text).parse(); }

std::set<std::string> free_variables(const Term& t) {
  std::vector<std::string> bound;
  std::set<std::string> out;
  collect_free(t, bound, out);
  return out;
}

Term substitute(const Term& t, const std::string& name, const Term& value) {
  return subst(t, name, value, free_variables(value));
}

Term replace_constant(const Term& t, const std::string& name, const Term& value) {
  switch (t.kind()) {
    case Term::Kind::Variable:
      return t;
    case Term::Kind::Constant:
      return t.name() == name ? value : t;
    case Term::Kind::Abstraction:
      return Term::lambda(t.name(), replace_constant(t.body(), name, value));
    case Term::Kind::Application:
      return Term::apply(replace_constant(t.fun(), name, value), replace_constant(t.arg(), name, value));
  }
  return t;
}

Term beta_reduce(const Term& t, int max_steps, bool rename) {
  Term current = t;
  for (int n = 0;; ++n) {
    auto next = step(current);
    if (!next) break;
    if (n >= max_steps)
      throw ReductionLimitError("beta reduction did not terminate within " + std::to_string(max_steps) +
                                " steps");
    current = std::move(*next);
  }
  return rename ? canonicalize(current) : current;
}

Term canonicalize(const Term& t) { return canonicalize_avoiding(t, free_variables(t)); }

bool alpha_equivalent(const Term& a, const Term& b) {
  auto avoid = free_variables(a);
  auto fb = free_variables(b);
  if (avoid != fb) return false;
  return canonicalize_avoiding(a, avoid) == canonicalize_avoiding(b, avoid);
}

}  // namespace ccgdoc
