#include "ccgdoc/category.hpp"

#include <cctype>

#include "ccgdoc/errors.hpp"

namespace ccgdoc {

struct Category::Node {
  bool atomic = true;
  std::string base;
  std::optional<Feature> feature;
  std::optional<Category> result;
  std::optional<Category> argument;
  Slash slash = Slash::Forward;
  std::string repr;
  std::size_t hash = 0;
};

namespace {

std::string wrap(const Category& c) { return c.is_atomic() ? c.str() : "(" + c.str() + ")"; }

bool is_punctuation_base(char ch) { return ch == ',' || ch == '.' || ch == ';' || ch == ':'; }

bool is_variable_name(const std::string& v) {
  return v.size() == 1 && std::isupper(static_cast<unsigned char>(v[0]));
}

class CategoryReader {
 public:
  explicit CategoryReader(std::string_view text) : text_(text) {}

  Category read() {
    if (text_.empty()) throw CategoryParseError("empty category string", 0);
    Category c = read_category();
    if (pos_ != text_.size()) throw CategoryParseError("unexpected character", pos_);
    return c;
  }

 private:
  Category read_category() {
    Category lhs = read_primary();
    while (pos_ < text_.size() && (text_[pos_] == '/' || text_[pos_] == '\\')) {
      Slash slash = text_[pos_] == '/' ? Slash::Forward : Slash::Backward;
      ++pos_;
      Category rhs = read_primary();
      lhs = Category::functor(std::move(lhs), slash, std::move(rhs));
    }
    return lhs;
  }

  Category read_primary() {
    if (pos_ >= text_.size()) throw CategoryParseError("expected category", pos_);
    if (text_[pos_] == '(') {
      ++pos_;
      Category inner = read_category();
      if (pos_ >= text_.size() || text_[pos_] != ')')
        throw CategoryParseError("expected ')'", pos_);
      ++pos_;
      return inner;
    }
    return read_atom();
  }

  Category read_atom() {
    std::size_t start = pos_;
    std::string base;
    if (std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
      while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_])))
        base.push_back(text_[pos_++]);
    } else if (is_punctuation_base(text_[pos_])) {
      base.push_back(text_[pos_++]);
    } else {
      throw CategoryParseError("expected category", start);
    }
    if (pos_ < text_.size() && text_[pos_] == '[') {
      std::size_t feature_start = ++pos_;
      std::string value;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_])))
        value.push_back(text_[pos_++]);
      if (value.empty()) throw CategoryParseError("empty feature", feature_start);
      if (pos_ >= text_.size() || text_[pos_] != ']')
        throw CategoryParseError("expected ']'", pos_);
      ++pos_;
      bool variable = is_variable_name(value);
      if (variable && base != "S")
        throw CategoryParseError("feature variable on non-S atom", feature_start);
      return Category::atom(std::move(base), Feature{std::move(value), variable});
    }
    return Category::atom(std::move(base));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

bool unify_feature(const std::optional<Feature>& p, const std::optional<Feature>& t,
                   FeatureMatch mode, FeatureBinding& binding) {
  if (!p || !t) {
    if (!p && !t) return true;
    switch (mode) {
      case FeatureMatch::Combinatory:
        return true;
      case FeatureMatch::Pattern:
        return !p;
      case FeatureMatch::Exact:
        return false;
    }
  }
  if (p->variable && t->variable) return true;
  if (p->variable || t->variable) {
    const std::string& concrete = p->variable ? t->value : p->value;
    if (!binding.value) {
      binding.value = concrete;
      return true;
    }
    return *binding.value == concrete;
  }
  return p->value == t->value;
}

}  // namespace

Category Category::atom(std::string base, std::optional<Feature> feature) {
  auto node = std::make_shared<Node>();
  node->atomic = true;
  node->repr = base;
  if (feature) node->repr += "[" + feature->value + "]";
  node->base = std::move(base);
  node->feature = std::move(feature);
  node->hash = std::hash<std::string>{}(node->repr);
  return Category(std::move(node));
}

Category Category::functor(Category result, Slash slash, Category argument) {
  auto node = std::make_shared<Node>();
  node->atomic = false;
  node->slash = slash;
  node->repr = wrap(result) + (slash == Slash::Forward ? "/" : "\\") + wrap(argument);
  node->result = std::move(result);
  node->argument = std::move(argument);
  node->hash = std::hash<std::string>{}(node->repr);
  return Category(std::move(node));
}

bool Category::is_atomic() const { return node_->atomic; }
const std::string& Category::base() const { return node_->base; }
const std::optional<Feature>& Category::feature() const { return node_->feature; }
const Category& Category::result() const { return *node_->result; }
const Category& Category::argument() const { return *node_->argument; }
Slash Category::slash() const { return node_->slash; }
const std::string& Category::str() const { return node_->repr; }
std::size_t Category::hash() const { return node_->hash; }

bool Category::is_modifier() const { return is_functor() && result() == argument(); }

int Category::arity() const { return is_atomic() ? 0 : 1 + result().arity(); }

bool operator==(const Category& a, const Category& b) {
  return a.node_ == b.node_ || (a.node_->hash == b.node_->hash && a.node_->repr == b.node_->repr);
}

Category parse_category(std::string_view text) { return CategoryReader(text).read(); }

Category simplify(const Category& c) {
  if (c.is_atomic()) return c.feature() ? Category::atom(c.base()) : c;
  return Category::functor(simplify(c.result()), c.slash(), simplify(c.argument()));
}

bool same_skeleton(const Category& a, const Category& b) {
  if (a.is_atomic() != b.is_atomic()) return false;
  if (a.is_atomic()) return a.base() == b.base();
  return a.slash() == b.slash() && same_skeleton(a.result(), b.result()) &&
         same_skeleton(a.argument(), b.argument());
}

bool unify(const Category& pattern, const Category& target, FeatureMatch mode,
           FeatureBinding& binding) {
  if (pattern.is_atomic() != target.is_atomic()) return false;
  if (pattern.is_atomic()) {
    return pattern.base() == target.base() &&
           unify_feature(pattern.feature(), target.feature(), mode, binding);
  }
  return pattern.slash() == target.slash() &&
         unify(pattern.result(), target.result(), mode, binding) &&
         unify(pattern.argument(), target.argument(), mode, binding);
}

Category substitute(const Category& c, const FeatureBinding& binding) {
  if (!binding.value) return c;
  if (c.is_atomic()) {
    if (c.feature() && c.feature()->variable) return Category::atom(c.base(), Feature{*binding.value, false});
    return c;
  }
  return Category::functor(substitute(c.result(), binding), c.slash(),
                           substitute(c.argument(), binding));
}

}  // namespace ccgdoc
