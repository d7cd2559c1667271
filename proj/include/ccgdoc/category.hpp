#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace ccgdoc {

enum class Slash : std::uint8_t { Forward, Backward };

/// A morphosyntactic feature such as `dcl` in `S[dcl]`. Single upper-case
/// letters (`S[X]`) are feature variables and unify with any concrete value.
struct Feature {
  std::string value;
  bool variable = false;

  friend bool operator==(const Feature&, const Feature&) = default;
};

/// Immutable CCG category. Either an atom (`N`, `S[dcl]`) or a functor
/// `result/argument` / `result\argument`. Copies share structure, so a
/// Category is cheap to pass by value and safe to share across threads.
class Category {
 public:
  static Category atom(std::string base, std::optional<Feature> feature = std::nullopt);
  static Category functor(Category result, Slash slash, Category argument);

  bool is_atomic() const;
  bool is_functor() const { return !is_atomic(); }

  // Atom accessors.
  const std::string& base() const;
  const std::optional<Feature>& feature() const;

  // Functor accessors.
  const Category& result() const;
  const Category& argument() const;
  Slash slash() const;

  /// X/X or X\X, compared with features.
  bool is_modifier() const;

  /// Number of arguments along the result spine: arity(S) == 0,
  /// arity((S\NP)/NP) == 2.
  int arity() const;

  /// Canonical rendering; complex children are always parenthesised.
  const std::string& str() const;
  std::size_t hash() const;

  friend bool operator==(const Category& a, const Category& b);
  friend bool operator!=(const Category& a, const Category& b) { return !(a == b); }

 private:
  struct Node;
  explicit Category(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Canonical-string ordering, used wherever categories need a total order
/// that does not depend on interning order.
struct CategoryLess {
  bool operator()(const Category& a, const Category& b) const { return a.str() < b.str(); }
};

struct CategoryHash {
  std::size_t operator()(const Category& c) const { return c.hash(); }
};

/// Parses the bracketed-feature notation, e.g. `(S[dcl]\NP)/NP`. Slashes
/// without parentheses associate to the left. Throws CategoryParseError.
Category parse_category(std::string_view text);

inline std::string render_category(const Category& c) { return c.str(); }

/// Removes every feature (and feature variable) from every atom.
Category simplify(const Category& c);

/// Shape of a category with features erased; equal skeletons mean the
/// categories differ at most in features.
bool same_skeleton(const Category& a, const Category& b);

/// How an absent feature behaves during unification.
enum class FeatureMatch {
  /// Absent on either side matches anything (CCGbank convention for rules).
  Combinatory,
  /// Absent on the pattern side matches anything; absent on the target side
  /// only matches an absent pattern feature.
  Pattern,
  /// Absent matches only absent; variables still bind.
  Exact,
};

/// At most one feature-variable binding per rule application.
struct FeatureBinding {
  std::optional<std::string> value;
};

bool unify(const Category& pattern, const Category& target, FeatureMatch mode,
           FeatureBinding& binding);

/// Replaces feature variables by the bound value, if any.
Category substitute(const Category& c, const FeatureBinding& binding);

}  // namespace ccgdoc

template <>
struct std::hash<ccgdoc::Category> {
  std::size_t operator()(const ccgdoc::Category& c) const noexcept { return c.hash(); }
};
