#include "ccgdoc/parser.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <unordered_map>

#include "ccgdoc/errors.hpp"

namespace ccgdoc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMaxTokens = 1023;

struct Item {
  int start = 0;
  int end = 0;
  int cat = 0;   // interned category id
  int head = 0;  // token index
  bool unary = false;
  bool goal = false;
  RuleKind rule = RuleKind::Lexical;
  int unary_rule = -1;
  int left = -1;  // item indices; a goal's `left` is the item it completes
  int right = -1;
  int vocab = -1;
  std::vector<int> cats;   // vocabulary index per token in span
  std::vector<int> heads;  // dep column per token in span, -1 while unattached
  double priority = kNegInf;
};

struct CachedCombination {
  int cat;
  RuleKind rule;
  HeadSide head;
};

struct CachedUnary {
  int cat;
  int rule_index;
};

/// Chart machinery shared by the A* and CKY decoders so that both score,
/// order and build items identically.
class ChartEngine {
 public:
  ChartEngine(const ScoredSentence& s, const ParseConfig& cfg, const CandidateSet& candidates,
              const ScoreMatrix* penalties)
      : s_(s), cfg_(cfg), candidates_(candidates), penalties_(penalties), m_(s.size()) {
    if (m_ > kMaxTokens) throw ValidationError("sentence too long for the chart");
    if (static_cast<int>(candidates.size()) != m_)
      throw ValidationError("candidate set does not match sentence length");
    if (penalties && (penalties->rows() != m_ || penalties->cols() != s.vocabulary_size()))
      throw ValidationError("penalty matrix has the wrong shape");
    max_tag_.assign(static_cast<std::size_t>(m_), kNegInf);
    max_dep_.assign(static_cast<std::size_t>(m_), kNegInf);
    for (int i = 0; i < m_; ++i) {
      for (int v : candidates_[static_cast<std::size_t>(i)])
        max_tag_[static_cast<std::size_t>(i)] = std::max(max_tag_[static_cast<std::size_t>(i)], term(i, v));
      for (int col = 0; col <= m_; ++col)
        if (col != i + 1)
          max_dep_[static_cast<std::size_t>(i)] =
              std::max(max_dep_[static_cast<std::size_t>(i)], s_.dep_log_prob(i, col));
    }
    for (const auto& c : cfg.root_categories) root_ids_.push_back(intern(c));
  }

  double term(int token, int vocab) const {
    double tag = s_.tag_log_prob(token, vocab);
    return penalties_ ? tag - (*penalties_)(token, vocab) : tag;
  }

  int size() const { return m_; }
  std::vector<Item>& items() { return items_; }
  const Item& item(int i) const { return items_[static_cast<std::size_t>(i)]; }

  int intern(const Category& c) {
    auto [it, inserted] = ids_.try_emplace(c.str(), static_cast<int>(table_.size()));
    if (inserted) table_.push_back(c);
    return it->second;
  }
  const Category& category(int id) const { return table_[static_cast<std::size_t>(id)]; }

  /// Canonical score: tag terms for every token left to right, then head
  /// terms left to right. Tokens outside the span, and the span's own head,
  /// contribute their best achievable value. Floating-point addition is
  /// monotone, so this bounds every completion exactly and equals
  /// tree_score on a finished derivation.
  double priority(const Item& x) const {
    double acc = 0.0;
    for (int i = 0; i < m_; ++i)
      acc += (i >= x.start && i < x.end) ? term(i, x.cats[static_cast<std::size_t>(i - x.start)])
                                         : max_tag_[static_cast<std::size_t>(i)];
    for (int i = 0; i < m_; ++i) {
      int h = (i >= x.start && i < x.end) ? x.heads[static_cast<std::size_t>(i - x.start)] : -1;
      acc += h < 0 ? max_dep_[static_cast<std::size_t>(i)] : s_.dep_log_prob(i, h);
    }
    return acc;
  }

  std::vector<Item> leaves(int token) {
    std::vector<Item> out;
    for (int v : candidates_[static_cast<std::size_t>(token)]) {
      if (term(token, v) == kNegInf) continue;
      Item x;
      x.start = token;
      x.end = token + 1;
      x.cat = intern(s_.categories[static_cast<std::size_t>(v)]);
      x.head = token;
      x.vocab = v;
      x.cats = {v};
      x.heads = {-1};
      x.priority = priority(x);
      if (x.priority != kNegInf) out.push_back(std::move(x));
    }
    return out;
  }

  std::vector<Item> unary_of(int index) {
    std::vector<Item> out;
    const Item& child = item(index);
    if (child.unary) return out;
    for (const auto& u : unaries(child.cat)) {
      Item x;
      x.start = child.start;
      x.end = child.end;
      x.cat = u.cat;
      x.head = child.head;
      x.unary = true;
      x.rule = RuleKind::Unary;
      x.unary_rule = u.rule_index;
      x.left = index;
      x.cats = child.cats;
      x.heads = child.heads;
      x.priority = child.priority;
      out.push_back(std::move(x));
    }
    return out;
  }

  std::vector<Item> binary_of(int li, int ri) {
    std::vector<Item> out;
    const Item& l = item(li);
    const Item& r = item(ri);
    for (const auto& c : combinations(l.cat, r.cat)) {
      Item x;
      x.start = l.start;
      x.end = r.end;
      x.cat = c.cat;
      x.rule = c.rule;
      x.left = li;
      x.right = ri;
      int dependent = c.head == HeadSide::Left ? r.head : l.head;
      x.head = c.head == HeadSide::Left ? l.head : r.head;
      x.cats = l.cats;
      x.cats.insert(x.cats.end(), r.cats.begin(), r.cats.end());
      x.heads = l.heads;
      x.heads.insert(x.heads.end(), r.heads.begin(), r.heads.end());
      x.heads[static_cast<std::size_t>(dependent - x.start)] = x.head + 1;
      x.priority = priority(x);
      if (x.priority != kNegInf) out.push_back(std::move(x));
    }
    return out;
  }

  bool root_allowed(int cat) const {
    return root_ids_.empty() || std::find(root_ids_.begin(), root_ids_.end(), cat) != root_ids_.end();
  }

  /// Goal wrapping a full-span item: the head attaches to the virtual root.
  std::optional<Item> goal_of(int index) const {
    const Item& x = item(index);
    if (x.start != 0 || x.end != m_ || !root_allowed(x.cat)) return std::nullopt;
    Item g = x;
    g.goal = true;
    g.left = index;
    g.right = -1;
    g.heads[static_cast<std::size_t>(x.head)] = 0;
    g.priority = priority(g);
    if (g.priority == kNegInf) return std::nullopt;
    return g;
  }

  static std::uint64_t signature(const Item& x) {
    return (static_cast<std::uint64_t>(x.start) << 53) | (static_cast<std::uint64_t>(x.end) << 43) |
           (static_cast<std::uint64_t>(x.head) << 33) | (static_cast<std::uint64_t>(x.unary) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(x.cat));
  }

  /// Strict total order: true when `a` ranks before `b`.
  bool better(const Item& a, const Item& b) const {
    if (a.priority != b.priority) return a.priority > b.priority;
    if (a.goal != b.goal) return !a.goal;
    int la = a.end - a.start;
    int lb = b.end - b.start;
    if (la != lb) return la < lb;
    if (a.start != b.start) return a.start < b.start;
    if (a.cats != b.cats) return a.cats < b.cats;
    if (a.heads != b.heads) return a.heads < b.heads;
    int s = compare_structure(a, b);
    if (s != 0) return s < 0;
    return category(a.cat).str() < category(b.cat).str();
  }

  Derivation build(const Item& goal) const {
    std::vector<DerivationNode> nodes;
    auto emit = [&](auto&& self, int index) -> int {
      const Item& x = item(index);
      DerivationNode n{category(x.cat), x.rule, std::string(rule_label(x.rule)), x.start, x.end, x.head};
      if (x.rule == RuleKind::Lexical) {
        n.vocabulary_index = x.vocab;
      } else if (x.rule == RuleKind::Unary) {
        n.left = self(self, x.left);
        n.unary_rule_index = x.unary_rule;
        n.label = cfg_.rules.unary_rules[static_cast<std::size_t>(x.unary_rule)].label;
      } else {
        n.left = self(self, x.left);
        n.right = self(self, x.right);
      }
      nodes.push_back(std::move(n));
      return static_cast<int>(nodes.size()) - 1;
    };
    emit(emit, goal.left);
    double score = tree_score(goal.cats, goal.heads, s_, penalties_);
    return Derivation(std::move(nodes), goal.cats, goal.heads, score);
  }

 private:
  // Only called for items over the same span with equal leaves and heads,
  // or recursively on their children.
  int compare_structure(const Item& a, const Item& b) const {
    if (a.unary != b.unary) return a.unary ? 1 : -1;
    if (a.rule == RuleKind::Lexical || b.rule == RuleKind::Lexical) {
      if (a.rule == b.rule) return 0;
      return a.rule == RuleKind::Lexical ? -1 : 1;
    }
    if (a.unary) {
      if (a.unary_rule != b.unary_rule) return a.unary_rule < b.unary_rule ? -1 : 1;
      return compare_child(a.left, b.left);
    }
    int sa = item(a.left).end;
    int sb = item(b.left).end;
    if (sa != sb) return sa < sb ? -1 : 1;
    if (a.rule != b.rule) return static_cast<int>(a.rule) < static_cast<int>(b.rule) ? -1 : 1;
    int c = compare_child(a.left, b.left);
    return c != 0 ? c : compare_child(a.right, b.right);
  }

  int compare_child(int ia, int ib) const {
    if (ia == ib) return 0;
    const Item& a = item(ia);
    const Item& b = item(ib);
    int c = category(a.cat).str().compare(category(b.cat).str());
    if (c != 0) return c < 0 ? -1 : 1;
    if (a.head != b.head) return a.head < b.head ? -1 : 1;
    if (a.heads != b.heads) return a.heads < b.heads ? -1 : 1;
    return compare_structure(a, b);
  }

  const std::vector<CachedCombination>& combinations(int left, int right) {
    std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(left)) << 32) |
                        static_cast<std::uint32_t>(right);
    auto it = combine_cache_.find(key);
    if (it != combine_cache_.end()) return it->second;
    std::vector<CachedCombination> out;
    for (const auto& c : combine(category(left), category(right), cfg_.rules))
      out.push_back({intern(c.category), c.rule, c.head});
    return combine_cache_.emplace(key, std::move(out)).first->second;
  }

  const std::vector<CachedUnary>& unaries(int cat) {
    auto it = unary_cache_.find(cat);
    if (it != unary_cache_.end()) return it->second;
    std::vector<CachedUnary> out;
    for (const auto& u : apply_unary(category(cat), cfg_.rules))
      out.push_back({intern(u.category), u.rule_index});
    return unary_cache_.emplace(cat, std::move(out)).first->second;
  }

  const ScoredSentence& s_;
  const ParseConfig& cfg_;
  const CandidateSet& candidates_;
  const ScoreMatrix* penalties_;
  int m_;
  std::vector<double> max_tag_;
  std::vector<double> max_dep_;
  std::vector<int> root_ids_;
  std::vector<Item> items_;
  std::unordered_map<std::string, int> ids_;
  std::vector<Category> table_;
  std::unordered_map<std::uint64_t, std::vector<CachedCombination>> combine_cache_;
  std::unordered_map<int, std::vector<CachedUnary>> unary_cache_;
};

void check_inputs(const ScoredSentence& s, const ParseConfig& cfg) {
  cfg.validate();
  if (s.size() < 1) throw ValidationError("empty sentence");
}

std::string no_parse_message(const ScoredSentence& s) {
  std::string text;
  for (int i = 0; i < s.size() && i < 12; ++i) text += (i ? " " : "") + s.tokens[static_cast<std::size_t>(i)];
  if (s.size() > 12) text += " ...";
  return "no complete derivation for \"" + text + "\"";
}

}  // namespace

void ParseConfig::validate() const {
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in (0, 1]");
  if (max_categories < 1) throw ConfigError("max_categories must be at least 1");
  if (oracle_max_tokens < 1) throw ConfigError("oracle_max_tokens must be at least 1");
}

CandidateSet prune_candidates(const ScoredSentence& s, const ParseConfig& cfg) {
  cfg.validate();
  CandidateSet out(static_cast<std::size_t>(s.size()));
  const double log_beta = std::log(cfg.beta);
  for (int i = 0; i < s.size(); ++i) {
    const double best = s.tag_log_prob.row(i).maxCoeff();
    std::vector<int> kept;
    for (int v = 0; v < s.vocabulary_size(); ++v) {
      double x = s.tag_log_prob(i, v);
      if (x != kNegInf && x >= best + log_beta) kept.push_back(v);
    }
    std::stable_sort(kept.begin(), kept.end(),
                     [&](int a, int b) { return s.tag_log_prob(i, a) > s.tag_log_prob(i, b); });
    if (static_cast<int>(kept.size()) > cfg.max_categories)
      kept.resize(static_cast<std::size_t>(cfg.max_categories));
    std::sort(kept.begin(), kept.end());
    out[static_cast<std::size_t>(i)] = std::move(kept);
  }
  return out;
}

double heuristic_outside(const ScoredSentence& s, const ScoreMatrix* penalties, int begin, int end) {
  if (begin < 0 || begin >= end || end > s.size())
    throw std::out_of_range("invalid span [" + std::to_string(begin) + "," + std::to_string(end) + ")");
  double acc = 0.0;
  for (int k = 0; k < s.size(); ++k) {
    if (k >= begin && k < end) continue;
    double best_tag = kNegInf;
    for (int v = 0; v < s.vocabulary_size(); ++v) {
      double t = penalties ? s.tag_log_prob(k, v) - (*penalties)(k, v) : s.tag_log_prob(k, v);
      best_tag = std::max(best_tag, t);
    }
    acc += best_tag + s.dep_log_prob.row(k).maxCoeff();
  }
  return acc;
}

Derivation parse_astar(const ScoredSentence& s, const ParseConfig& cfg, const ScoreMatrix* penalties,
                       ParseStats* stats) {
  return parse_astar(s, cfg, prune_candidates(s, cfg), penalties, stats);
}

Derivation parse_astar(const ScoredSentence& s, const ParseConfig& cfg, const CandidateSet& candidates,
                       const ScoreMatrix* penalties, ParseStats* stats) {
  check_inputs(s, cfg);
  ChartEngine engine(s, cfg, candidates, penalties);
  auto& items = engine.items();
  auto worse = [&](int a, int b) { return engine.better(engine.item(b), engine.item(a)); };
  std::priority_queue<int, std::vector<int>, decltype(worse)> agenda(worse);
  ParseStats local;
  local.min_popped_priority = std::numeric_limits<double>::infinity();

  auto push = [&](Item x) {
    items.push_back(std::move(x));
    agenda.push(static_cast<int>(items.size()) - 1);
    ++local.pushed;
  };

  for (int i = 0; i < engine.size(); ++i)
    for (auto& leaf : engine.leaves(i)) push(std::move(leaf));

  std::unordered_map<std::uint64_t, int> finalized;
  std::vector<std::vector<int>> by_start(static_cast<std::size_t>(engine.size() + 1));
  std::vector<std::vector<int>> by_end(static_cast<std::size_t>(engine.size() + 1));

  while (!agenda.empty()) {
    int index = agenda.top();
    agenda.pop();
    ++local.popped;
    const double priority = engine.item(index).priority;
    local.min_popped_priority = std::min(local.min_popped_priority, priority);
    if (engine.item(index).goal) {
      if (stats) *stats = local;
      return engine.build(engine.item(index));
    }
    if (!finalized.emplace(ChartEngine::signature(engine.item(index)), index).second) continue;
    const int start = engine.item(index).start;
    const int end = engine.item(index).end;
    by_start[static_cast<std::size_t>(start)].push_back(index);
    by_end[static_cast<std::size_t>(end)].push_back(index);

    if (auto goal = engine.goal_of(index)) push(std::move(*goal));
    for (auto& u : engine.unary_of(index)) push(std::move(u));
    // Copy the neighbour lists: pushing may grow `items` but not these.
    const std::vector<int> lefts = by_end[static_cast<std::size_t>(start)];
    for (int l : lefts)
      for (auto& x : engine.binary_of(l, index)) push(std::move(x));
    const std::vector<int> rights = by_start[static_cast<std::size_t>(end)];
    for (int r : rights)
      for (auto& x : engine.binary_of(index, r)) push(std::move(x));
  }
  if (stats) *stats = local;
  throw NoParseError(no_parse_message(s));
}

Derivation parse_exhaustive(const ScoredSentence& s, const ParseConfig& cfg, const ScoreMatrix* penalties) {
  return parse_exhaustive(s, cfg, prune_candidates(s, cfg), penalties);
}

Derivation parse_exhaustive(const ScoredSentence& s, const ParseConfig& cfg, const CandidateSet& candidates,
                            const ScoreMatrix* penalties) {
  check_inputs(s, cfg);
  if (s.size() > cfg.oracle_max_tokens)
    throw OracleLimitError("sentence has " + std::to_string(s.size()) + " tokens; oracle limit is " +
                           std::to_string(cfg.oracle_max_tokens));
  ChartEngine engine(s, cfg, candidates, penalties);
  auto& items = engine.items();
  const int m = engine.size();
  using Cell = std::unordered_map<std::uint64_t, int>;
  std::vector<Cell> chart(static_cast<std::size_t>((m + 1) * (m + 1)));
  auto cell = [&](int start, int end) -> Cell& {
    return chart[static_cast<std::size_t>(start * (m + 1) + end)];
  };
  auto offer = [&](Cell& target, Item x) {
    std::uint64_t key = ChartEngine::signature(x);
    auto it = target.find(key);
    if (it != target.end() && !engine.better(x, engine.item(it->second))) return;
    items.push_back(std::move(x));
    target[key] = static_cast<int>(items.size()) - 1;
  };
  auto unary_pass = [&](Cell& target) {
    std::vector<int> sources;
    for (const auto& [key, index] : target)
      if (!engine.item(index).unary) sources.push_back(index);
    for (int index : sources)
      for (auto& u : engine.unary_of(index)) offer(target, std::move(u));
  };

  for (int i = 0; i < m; ++i) {
    for (auto& leaf : engine.leaves(i)) offer(cell(i, i + 1), std::move(leaf));
    unary_pass(cell(i, i + 1));
  }
  for (int len = 2; len <= m; ++len) {
    for (int start = 0; start + len <= m; ++start) {
      const int end = start + len;
      Cell& target = cell(start, end);
      for (int split = start + 1; split < end; ++split) {
        std::vector<int> lefts;
        std::vector<int> rights;
        for (const auto& [k, index] : cell(start, split)) lefts.push_back(index);
        for (const auto& [k, index] : cell(split, end)) rights.push_back(index);
        for (int l : lefts)
          for (int r : rights)
            for (auto& x : engine.binary_of(l, r)) offer(target, std::move(x));
      }
      unary_pass(target);
    }
  }

  std::optional<Item> best;
  std::vector<int> finals;
  for (const auto& [k, index] : cell(0, m)) finals.push_back(index);
  for (int index : finals) {
    auto goal = engine.goal_of(index);
    if (goal && (!best || engine.better(*goal, *best))) best = std::move(goal);
  }
  if (!best) throw NoParseError(no_parse_message(s));
  return engine.build(*best);
}

}  // namespace ccgdoc
