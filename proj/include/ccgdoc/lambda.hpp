#pragma once

#include <memory>
#include <set>
#include <string>
#include <string_view>

namespace ccgdoc {

/// Untyped lambda term. Logical connectives and quantifiers are constants
/// applied to their operands: `a & b` is `((& a) b)`, `exists x.p` is
/// `(exists (\x.p))`, `-p` is `(- p)`.
class Term {
 public:
  enum class Kind { Variable, Constant, Abstraction, Application };

  /// A placeholder constant; assign before use.
  Term() : Term(constant("_")) {}

  static Term var(std::string name);
  static Term constant(std::string name);
  static Term lambda(std::string var, Term body);
  static Term apply(Term fun, Term arg);
  /// Left-nested application of `fun` to each argument in turn.
  static Term call(Term fun, std::initializer_list<Term> args);

  Kind kind() const;
  /// Variable or constant name, or the bound variable of an abstraction.
  const std::string& name() const;
  const Term& body() const;
  const Term& fun() const;
  const Term& arg() const;

  bool is_var() const { return kind() == Kind::Variable; }
  bool is_const() const { return kind() == Kind::Constant; }
  bool is_lambda() const { return kind() == Kind::Abstraction; }
  bool is_app() const { return kind() == Kind::Application; }

  /// Plain-text rendering in the syntax accepted by parse_term.
  std::string str() const;

  /// Structural equality, bound names included.
  friend bool operator==(const Term& a, const Term& b);

 private:
  struct Node;
  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Parses `\x.`, `exists x.`, `forall x.`, `&`, `|`, `->`, `-`, `=`,
/// `f(a, b)` and parentheses. An identifier bound by an enclosing binder is
/// a variable; otherwise a single lower-case letter optionally followed by
/// digits or primes is a free variable and anything else is a constant.
/// Throws TermParseError.
Term parse_term(std::string_view text);

std::set<std::string> free_variables(const Term& t);

/// Capture-avoiding t[name := value]. Clashing binders are renamed by
/// appending primes.
Term substitute(const Term& t, const std::string& name, const Term& value);

/// Replaces every constant called `name` by `value`.
Term replace_constant(const Term& t, const std::string& name, const Term& value);

inline constexpr int kDefaultReductionSteps = 10000;

/// Normal-order reduction to beta-normal form. Throws ReductionLimitError
/// after `max_steps` contractions. With `rename`, the result is also
/// put in canonical form.
Term beta_reduce(const Term& t, int max_steps = kDefaultReductionSteps, bool rename = true);

/// Renames bound variables to x1, x2, ... in binding order, skipping
/// names that occur free.
Term canonicalize(const Term& t);

bool alpha_equivalent(const Term& a, const Term& b);

}  // namespace ccgdoc
