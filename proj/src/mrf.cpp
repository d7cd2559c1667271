#include "ccgdoc/mrf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include "ccgdoc/errors.hpp"

namespace ccgdoc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.compare(0, prefix.size(), prefix) == 0;
}

/// (key, word) occurrences in document order, then greedy assignment of
/// words to the earliest-appearing key that still qualifies.
ConsistencyGraph assemble(const Document& doc, const std::vector<std::pair<std::string, WordRef>>& occurrences) {
  std::vector<std::string> key_order;
  std::unordered_map<std::string, std::vector<WordRef>> by_key;
  for (const auto& [key, word] : occurrences) {
    auto [it, inserted] = by_key.try_emplace(key);
    if (inserted) key_order.push_back(key);
    if (std::find(it->second.begin(), it->second.end(), word) == it->second.end())
      it->second.push_back(word);
  }
  ConsistencyGraph graph;
  std::set<WordRef> taken;
  for (const auto& key : key_order) {
    ContextNode node{key, {}};
    bool premise = false;
    bool hypothesis = false;
    for (const auto& w : by_key[key]) {
      if (taken.count(w)) continue;
      node.members.push_back(w);
      (doc.roles[static_cast<std::size_t>(w.sentence)] == Role::Premise ? premise : hypothesis) = true;
    }
    if (node.members.size() < 2 || !premise || !hypothesis) continue;
    for (const auto& w : node.members) taken.insert(w);
    graph.contexts.push_back(std::move(node));
  }
  return graph;
}

bool matches(const Category& pattern, const Category& target, FeatureBinding& b) {
  return unify(pattern, target, FeatureMatch::Exact, b);
}

}  // namespace

void Document::validate() const {
  if (sentences.empty()) throw ValidationError("document has no sentences");
  if (roles.size() != sentences.size()) throw ValidationError("every sentence needs a role");
  for (std::size_t i = 0; i < sentences.size(); ++i)
    validate_sentence(sentences[i], "sentence " + std::to_string(i));
}

std::vector<Category> Document::vocabulary() const {
  std::vector<Category> out;
  std::set<std::string> seen;
  for (const auto& s : sentences)
    for (const auto& c : s.categories)
      if (seen.insert(c.str()).second) out.push_back(c);
  return out;
}

Document document_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("sentences") || !j["sentences"].is_array())
    throw ValidationError("document: expected {\"sentences\": [...]}");
  Document doc;
  const auto& sentences = j["sentences"];
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    std::string label = "sentence " + std::to_string(i);
    doc.sentences.push_back(sentence_from_json(sentences[i], label));
    std::string role = sentences[i].value("role", "");
    if (role == "T" || role == "premise")
      doc.roles.push_back(Role::Premise);
    else if (role == "H" || role == "hypothesis")
      doc.roles.push_back(Role::Hypothesis);
    else
      throw ValidationError(label + ": role must be \"T\" or \"H\"");
  }
  doc.validate();
  return doc;
}

nlohmann::json document_to_json(const Document& doc) {
  nlohmann::json sentences = nlohmann::json::array();
  for (int i = 0; i < doc.size(); ++i) {
    nlohmann::json s = sentence_to_json(doc.sentences[static_cast<std::size_t>(i)]);
    s["role"] = doc.roles[static_cast<std::size_t>(i)] == Role::Premise ? "T" : "H";
    sentences.push_back(std::move(s));
  }
  return {{"sentences", sentences}};
}

std::vector<WordRef> ConsistencyGraph::word_nodes() const {
  std::vector<WordRef> out;
  for (const auto& c : contexts) out.insert(out.end(), c.members.begin(), c.members.end());
  return out;
}

int ConsistencyGraph::word_count() const {
  int n = 0;
  for (const auto& c : contexts) n += static_cast<int>(c.members.size());
  return n;
}

void ConsistencyGraph::validate(const Document& doc) const {
  std::set<WordRef> seen;
  for (const auto& c : contexts) {
    for (const auto& w : c.members) {
      if (w.sentence < 0 || w.sentence >= doc.size() || w.token < 0 ||
          w.token >= doc.sentences[static_cast<std::size_t>(w.sentence)].size())
        throw ValidationError("context '" + c.key + "' refers to a missing word");
      if (!seen.insert(w).second)
        throw ValidationError("word (" + std::to_string(w.sentence) + "," + std::to_string(w.token) +
                              ") belongs to more than one context; graph is not a star forest");
    }
  }
}

ContextStrategy ContextStrategy::japanese_reading_a() {
  return pos_patterns({{{"名詞"}, 0}, {{"動詞", "副詞"}, 0}});
}

ContextStrategy ContextStrategy::japanese_reading_b() {
  return pos_patterns({{{"名詞", "副詞"}, 0}, {{"動詞", "副詞"}, 0}});
}

ConsistencyGraph build_graph(const Document& doc, const ContextStrategy& strategy,
                             const GraphOptions& options) {
  std::set<std::string> stop;
  for (const auto& w : options.stopwords) stop.insert(to_lower(w));
  std::vector<std::pair<std::string, WordRef>> occurrences;

  if (strategy.kind == ContextStrategy::Kind::SurfaceUnigram) {
    for (int s = 0; s < doc.size(); ++s) {
      const auto& sent = doc.sentences[static_cast<std::size_t>(s)];
      for (int t = 0; t < sent.size(); ++t) {
        std::string key = to_lower(sent.tokens[static_cast<std::size_t>(t)]);
        if (!stop.count(key)) occurrences.push_back({key, WordRef{s, t}});
      }
    }
    return assemble(doc, occurrences);
  }

  for (int s = 0; s < doc.size(); ++s)
    if (!doc.sentences[static_cast<std::size_t>(s)].has_pos())
      throw ValidationError("pos-pattern contexts need POS tags; sentence " + std::to_string(s) +
                            " has none");
  for (const auto& pattern : strategy.patterns)
    if (pattern.tags.empty() || pattern.anchor < 0 ||
        pattern.anchor >= static_cast<int>(pattern.tags.size()))
      throw ConfigError("malformed POS pattern");

  for (int s = 0; s < doc.size(); ++s) {
    const auto& sent = doc.sentences[static_cast<std::size_t>(s)];
    for (int p = 0; p < sent.size(); ++p) {
      for (const auto& pattern : strategy.patterns) {
        const int len = static_cast<int>(pattern.tags.size());
        if (p + len > sent.size()) continue;
        bool ok = true;
        for (int k = 0; k < len && ok; ++k)
          ok = starts_with(sent.pos[static_cast<std::size_t>(p + k)], pattern.tags[static_cast<std::size_t>(k)]);
        if (!ok) continue;
        std::string key;
        for (int k = 0; k < len; ++k) {
          if (k) key += ' ';
          key += to_lower(sent.tokens[static_cast<std::size_t>(p + k)]);
        }
        const std::string anchor = to_lower(sent.tokens[static_cast<std::size_t>(p + pattern.anchor)]);
        if (!stop.count(anchor)) occurrences.push_back({key, WordRef{s, p + pattern.anchor}});
      }
    }
  }
  return assemble(doc, occurrences);
}

ConsistencyPotentials::ConsistencyPotentials(double delta1, double delta2, double delta3,
                                             std::vector<EquivalencePair> equivalences)
    : delta1_(delta1), delta2_(delta2), delta3_(delta3), equivalences_(std::move(equivalences)) {
  if (!(delta1 >= delta2 && delta2 >= delta3))
    throw ConfigError("potentials must satisfy delta1 >= delta2 >= delta3");
}

std::vector<EquivalencePair> ConsistencyPotentials::english_equivalences() {
  auto pair = [](const char* a, const char* b) {
    return EquivalencePair{parse_category(a), parse_category(b)};
  };
  return {pair("N/N", "S[ng]\\NP"), pair("N/N", "N"), pair("(S[X]\\NP)/NP", "S[X]\\NP"),
          pair("(S[X]\\NP)/PP", "S[X]\\NP")};
}

ConsistencyPotentials ConsistencyPotentials::english_defaults() {
  return ConsistencyPotentials(0.9, 0.1, 0.0, english_equivalences());
}

std::vector<EquivalencePair> equivalences_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("equivalence pairs must be a list of category pairs");
  std::vector<EquivalencePair> out;
  for (const auto& entry : j) {
    if (!entry.is_array() || entry.size() != 2)
      throw ConfigError("each equivalence pair must hold two category strings");
    try {
      out.push_back({parse_category(entry[0].get<std::string>()),
                     parse_category(entry[1].get<std::string>())});
    } catch (const CategoryParseError& e) {
      throw ConfigError(std::string("equivalence pair: ") + e.what());
    }
  }
  return out;
}

bool equivalent(const Category& a, const Category& b, const std::vector<EquivalencePair>& pairs) {
  for (const auto& p : pairs) {
    FeatureBinding forward;
    if (matches(p.first, a, forward) && matches(p.second, b, forward)) return true;
    FeatureBinding backward;
    if (matches(p.first, b, backward) && matches(p.second, a, backward)) return true;
  }
  return false;
}

double pair_potential(const Category& word, const std::optional<Category>& context,
                      const ConsistencyPotentials& p) {
  if (context) {
    if (word == *context || equivalent(word, *context, p.equivalences())) return p.delta1();
    if (simplify(word) == simplify(*context)) return p.delta2();
    return 0.0;
  }
  return p.delta3();
}

WordDomains word_domains(const ConsistencyGraph& graph, const std::vector<CandidateSet>& candidates) {
  WordDomains out;
  for (const auto& w : graph.word_nodes())
    out.push_back(candidates.at(static_cast<std::size_t>(w.sentence)).at(static_cast<std::size_t>(w.token)));
  return out;
}

namespace {

double member_term(double unary, double pair, const WordWeights* weights, std::size_t word,
                   std::size_t position) {
  double term = unary + pair;
  if (weights) term += (*weights)[word][position];
  return term;
}

std::size_t position_in(const std::vector<int>& domain, int v) {
  auto it = std::lower_bound(domain.begin(), domain.end(), v);
  if (it == domain.end() || *it != v) throw ValidationError("word label outside its domain");
  return static_cast<std::size_t>(it - domain.begin());
}

void check_shapes(const ConsistencyGraph& graph, const Document& doc, const WordDomains& domains,
                  const WordWeights* weights) {
  graph.validate(doc);
  const auto n = static_cast<std::size_t>(graph.word_count());
  if (domains.size() != n) throw ValidationError("one domain per word node is required");
  for (const auto& d : domains)
    if (d.empty()) throw ValidationError("empty word-node domain");
  if (weights) {
    if (weights->size() != n) throw ValidationError("one weight row per word node is required");
    for (std::size_t i = 0; i < n; ++i)
      if ((*weights)[i].size() != domains[i].size())
        throw ValidationError("weight row does not match its domain");
  }
}

Assignment make_assignment(const ConsistencyGraph& graph, const Document& doc,
                           const std::vector<Category>& vocab, std::vector<int> word_labels,
                           std::vector<int> context_labels, double score) {
  Assignment a;
  std::size_t w = 0;
  for (const auto& c : graph.contexts) {
    for (const auto& ref : c.members) {
      const auto& s = doc.sentences[static_cast<std::size_t>(ref.sentence)];
      a.word_categories.push_back(s.categories[static_cast<std::size_t>(word_labels[w++])]);
    }
  }
  for (int l : context_labels)
    a.context_categories.push_back(l < 0 ? std::nullopt
                                         : std::optional<Category>(vocab[static_cast<std::size_t>(l)]));
  a.word_labels = std::move(word_labels);
  a.context_labels = std::move(context_labels);
  a.score = score;
  return a;
}

}  // namespace

double mrf_objective(const ConsistencyGraph& graph, const Document& doc, const ConsistencyPotentials& p,
                     const WordDomains& domains, const std::vector<int>& word_labels,
                     const std::vector<int>& context_labels, const WordWeights* weights) {
  const auto vocab = doc.vocabulary();
  double total = 0.0;
  std::size_t w = 0;
  for (std::size_t c = 0; c < graph.contexts.size(); ++c) {
    std::optional<Category> label;
    if (context_labels[c] >= 0) label = vocab[static_cast<std::size_t>(context_labels[c])];
    double clique = 0.0;
    for (const auto& ref : graph.contexts[c].members) {
      const auto& s = doc.sentences[static_cast<std::size_t>(ref.sentence)];
      const int v = word_labels[w];
      clique += member_term(s.tag_log_prob(ref.token, v),
                            pair_potential(s.categories[static_cast<std::size_t>(v)], label, p), weights,
                            w, position_in(domains[w], v));
      ++w;
    }
    total += clique;
  }
  return total;
}

Assignment decode_mrf(const ConsistencyGraph& graph, const Document& doc, const ConsistencyPotentials& p,
                      const WordDomains& domains, const WordWeights* weights) {
  check_shapes(graph, doc, domains, weights);
  const auto vocab = doc.vocabulary();
  const int labels = static_cast<int>(vocab.size());
  std::vector<int> word_labels(static_cast<std::size_t>(graph.word_count()), -1);
  std::vector<int> context_labels;
  std::size_t first = 0;
  for (const auto& context : graph.contexts) {
    double best_total = kNegInf;
    int best_label = labels;
    std::vector<int> best_words;
    std::vector<int> words(context.members.size());
    // Label `labels` stands for NULL and is tried last.
    for (int l = 0; l <= labels; ++l) {
      std::optional<Category> label;
      if (l < labels) label = vocab[static_cast<std::size_t>(l)];
      double clique = 0.0;
      for (std::size_t m = 0; m < context.members.size(); ++m) {
        const WordRef& ref = context.members[m];
        const auto& s = doc.sentences[static_cast<std::size_t>(ref.sentence)];
        const auto& domain = domains[first + m];
        double best = kNegInf;
        for (std::size_t k = 0; k < domain.size(); ++k) {
          const int v = domain[k];
          double term = member_term(s.tag_log_prob(ref.token, v),
                                    pair_potential(s.categories[static_cast<std::size_t>(v)], label, p),
                                    weights, first + m, k);
          if (k == 0 || term > best) {
            best = term;
            words[m] = v;
          }
        }
        clique += best;
      }
      if (l == 0 || clique > best_total) {
        best_total = clique;
        best_label = l;
        best_words = words;
      }
    }
    for (std::size_t m = 0; m < context.members.size(); ++m) word_labels[first + m] = best_words[m];
    context_labels.push_back(best_label == labels ? -1 : best_label);
    first += context.members.size();
  }
  double score = mrf_objective(graph, doc, p, domains, word_labels, context_labels, weights);
  return make_assignment(graph, doc, vocab, std::move(word_labels), std::move(context_labels), score);
}

Assignment decode_mrf_bruteforce(const ConsistencyGraph& graph, const Document& doc,
                                 const ConsistencyPotentials& p, const WordDomains& domains,
                                 const WordWeights* weights, double limit) {
  check_shapes(graph, doc, domains, weights);
  const auto vocab = doc.vocabulary();
  const int labels = static_cast<int>(vocab.size());
  // Odometer positions in lexicographic order: per clique, the context
  // label (NULL last) followed by each member's domain position.
  std::vector<int> radix;
  double total = 1.0;
  std::size_t w = 0;
  for (const auto& c : graph.contexts) {
    radix.push_back(labels + 1);
    total *= labels + 1;
    for (std::size_t m = 0; m < c.members.size(); ++m, ++w) {
      radix.push_back(static_cast<int>(domains[w].size()));
      total *= static_cast<double>(domains[w].size());
    }
  }
  if (total > limit)
    throw OracleLimitError("MRF enumeration needs " + std::to_string(total) + " labellings; limit is " +
                           std::to_string(limit));
  std::vector<int> digits(radix.size(), 0);
  std::vector<int> word_labels(static_cast<std::size_t>(graph.word_count()));
  std::vector<int> context_labels(graph.contexts.size());
  std::vector<int> best_words = word_labels;
  std::vector<int> best_contexts = context_labels;
  double best = kNegInf;
  bool have = false;
  while (true) {
    std::size_t d = 0;
    w = 0;
    for (std::size_t c = 0; c < graph.contexts.size(); ++c) {
      context_labels[c] = digits[d] == labels ? -1 : digits[d];
      ++d;
      for (std::size_t m = 0; m < graph.contexts[c].members.size(); ++m, ++w, ++d)
        word_labels[w] = domains[w][static_cast<std::size_t>(digits[d])];
    }
    double score = mrf_objective(graph, doc, p, domains, word_labels, context_labels, weights);
    if (!have || score > best) {
      have = true;
      best = score;
      best_words = word_labels;
      best_contexts = context_labels;
    }
    std::size_t k = digits.size();
    while (k > 0) {
      --k;
      if (++digits[k] < radix[k]) break;
      digits[k] = 0;
      if (k == 0) {
        k = digits.size() + 1;
        break;
      }
    }
    if (digits.empty() || k == digits.size() + 1) break;
  }
  return make_assignment(graph, doc, vocab, std::move(best_words), std::move(best_contexts), best);
}

nlohmann::json graph_to_json(const ConsistencyGraph& graph, const Assignment* assignment) {
  nlohmann::json contexts = nlohmann::json::array();
  std::size_t w = 0;
  for (std::size_t c = 0; c < graph.contexts.size(); ++c) {
    nlohmann::json node;
    node["key"] = graph.contexts[c].key;
    nlohmann::json members = nlohmann::json::array();
    nlohmann::json labels = nlohmann::json::array();
    for (const auto& ref : graph.contexts[c].members) {
      members.push_back({ref.sentence, ref.token});
      if (assignment) labels.push_back(assignment->word_categories[w].str());
      ++w;
    }
    node["members"] = members;
    if (assignment) {
      const auto& label = assignment->context_categories[c];
      node["label"] = label ? nlohmann::json(label->str()) : nlohmann::json("NULL");
      node["word_labels"] = labels;
    }
    contexts.push_back(std::move(node));
  }
  return {{"contexts", contexts}};
}

}  // namespace ccgdoc
