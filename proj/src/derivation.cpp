#include "ccgdoc/derivation.hpp"

#include "ccgdoc/errors.hpp"

namespace ccgdoc {

Derivation::Derivation(std::vector<DerivationNode> nodes, std::vector<int> categories,
                       std::vector<int> heads, double score)
    : nodes_(std::move(nodes)),
      categories_(std::move(categories)),
      heads_(std::move(heads)),
      leaf_nodes_(categories_.size(), -1),
      score_(score) {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].rule == RuleKind::Lexical)
      leaf_nodes_.at(static_cast<std::size_t>(nodes_[i].start)) = static_cast<int>(i);
}

const Category& Derivation::leaf_category(int token) const {
  return nodes_.at(static_cast<std::size_t>(leaf_nodes_.at(static_cast<std::size_t>(token))))
      .category;
}

bool operator==(const Derivation& a, const Derivation& b) {
  if (a.categories_ != b.categories_ || a.heads_ != b.heads_ || a.score_ != b.score_ ||
      a.nodes_.size() != b.nodes_.size())
    return false;
  for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
    const auto& x = a.nodes_[i];
    const auto& y = b.nodes_[i];
    if (!(x.category == y.category) || x.rule != y.rule || x.label != y.label ||
        x.start != y.start || x.end != y.end || x.head != y.head || x.left != y.left ||
        x.right != y.right || x.vocabulary_index != y.vocabulary_index ||
        x.unary_rule_index != y.unary_rule_index)
      return false;
  }
  return true;
}

std::string Derivation::bracketed(const ScoredSentence& s) const {
  auto render = [&](auto&& self, int index) -> std::string {
    const DerivationNode& n = nodes_.at(static_cast<std::size_t>(index));
    if (n.rule == RuleKind::Lexical)
      return "(" + n.category.str() + " " + s.tokens.at(static_cast<std::size_t>(n.start)) + ")";
    std::string out = "(" + n.category.str() + " " + n.label + " " + self(self, n.left);
    if (n.right >= 0) out += " " + self(self, n.right);
    return out + ")";
  };
  return render(render, static_cast<int>(nodes_.size()) - 1);
}

nlohmann::json Derivation::to_json(const ScoredSentence& s) const {
  auto tree = [&](auto&& self, int index) -> nlohmann::json {
    const DerivationNode& n = nodes_.at(static_cast<std::size_t>(index));
    nlohmann::json j;
    j["category"] = n.category.str();
    j["rule"] = n.label;
    j["span"] = {n.start, n.end};
    j["head"] = n.head;
    if (n.rule == RuleKind::Lexical) {
      j["word"] = s.tokens.at(static_cast<std::size_t>(n.start));
    } else {
      nlohmann::json children = nlohmann::json::array();
      children.push_back(self(self, n.left));
      if (n.right >= 0) children.push_back(self(self, n.right));
      j["children"] = children;
    }
    return j;
  };
  nlohmann::json j;
  nlohmann::json cats = nlohmann::json::array();
  for (int v : categories_) cats.push_back(s.categories.at(static_cast<std::size_t>(v)).str());
  j["categories"] = cats;
  j["heads"] = heads_;
  j["score"] = score_;
  j["tree"] = tree(tree, static_cast<int>(nodes_.size()) - 1);
  return j;
}

std::optional<std::string> check_derivation(const Derivation& d, const ScoredSentence& s,
                                            const RuleSet& rules) {
  const int m = s.size();
  if (d.size() != m) return "derivation covers " + std::to_string(d.size()) + " tokens, sentence has " +
                            std::to_string(m);
  if (d.nodes().empty()) return "empty derivation";
  std::vector<int> seen(static_cast<std::size_t>(m), 0);
  std::vector<int> heads(static_cast<std::size_t>(m), -1);
  const auto& nodes = d.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const DerivationNode& n = nodes[i];
    if (n.rule == RuleKind::Lexical) {
      if (n.end != n.start + 1 || n.start < 0 || n.start >= m) return "bad leaf span";
      ++seen[static_cast<std::size_t>(n.start)];
      if (n.vocabulary_index != d.categories()[static_cast<std::size_t>(n.start)])
        return "leaf category disagrees with category vector";
      if (!(s.categories.at(static_cast<std::size_t>(n.vocabulary_index)) == n.category))
        return "leaf category is not its vocabulary entry";
      if (n.head != n.start) return "leaf head must be the token itself";
      continue;
    }
    if (n.left < 0 || static_cast<std::size_t>(n.left) >= i) return "child after parent";
    const DerivationNode& l = nodes[static_cast<std::size_t>(n.left)];
    if (n.rule == RuleKind::Unary) {
      if (n.right >= 0 || l.start != n.start || l.end != n.end) return "bad unary node";
      bool ok = false;
      for (const auto& r : apply_unary(l.category, rules))
        ok = ok || (r.category == n.category && r.rule_index == n.unary_rule_index);
      if (!ok) return "unary node not licensed: " + n.category.str();
      if (n.head != l.head) return "unary node changed head";
      continue;
    }
    if (n.right < 0 || static_cast<std::size_t>(n.right) >= i) return "bad binary node";
    const DerivationNode& r = nodes[static_cast<std::size_t>(n.right)];
    if (l.start != n.start || l.end != r.start || r.end != n.end) return "children do not tile span";
    bool ok = false;
    for (const auto& c : combine(l.category, r.category, rules)) {
      if (c.category == n.category && c.rule == n.rule) {
        int head = c.head == HeadSide::Left ? l.head : r.head;
        int dependent = c.head == HeadSide::Left ? r.head : l.head;
        if (head == n.head) {
          ok = true;
          heads[static_cast<std::size_t>(dependent)] = head + 1;
        }
      }
    }
    if (!ok) return "binary node not licensed: " + n.category.str();
  }
  for (int i = 0; i < m; ++i)
    if (seen[static_cast<std::size_t>(i)] != 1) return "token " + std::to_string(i) + " not covered once";
  heads[static_cast<std::size_t>(d.root().head)] = 0;
  if (heads != d.heads()) return "head vector does not match tree";
  int roots = 0;
  for (int h : d.heads()) roots += h == 0 ? 1 : 0;
  if (roots != 1) return "expected exactly one root attachment";
  return std::nullopt;
}

double tree_score(const std::vector<int>& categories, const std::vector<int>& heads,
                  const ScoredSentence& s, const ScoreMatrix* penalties) {
  const int m = s.size();
  if (static_cast<int>(categories.size()) != m || static_cast<int>(heads.size()) != m)
    throw ValidationError("derivation length does not match sentence length");
  if (penalties && (penalties->rows() != m || penalties->cols() != s.vocabulary_size()))
    throw ValidationError("penalty matrix has the wrong shape");
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    int c = categories[static_cast<std::size_t>(i)];
    acc += penalties ? s.tag_log_prob(i, c) - (*penalties)(i, c) : s.tag_log_prob(i, c);
  }
  for (int i = 0; i < m; ++i) acc += s.dep_log_prob(i, heads[static_cast<std::size_t>(i)]);
  return acc;
}

double tree_score(const Derivation& d, const ScoredSentence& s, const ScoreMatrix* penalties) {
  return tree_score(d.categories(), d.heads(), s, penalties);
}

}  // namespace ccgdoc
