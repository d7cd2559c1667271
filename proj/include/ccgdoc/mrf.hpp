#pragma once

#include <compare>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ccgdoc/category.hpp"
#include "ccgdoc/parser.hpp"
#include "ccgdoc/sentence.hpp"

namespace ccgdoc {

enum class Role { Premise, Hypothesis };

/// The sentences decoded together, each tagged as premise (T) or
/// hypothesis (H).
struct Document {
  std::vector<ScoredSentence> sentences;
  std::vector<Role> roles;

  int size() const { return static_cast<int>(sentences.size()); }
  void validate() const;

  /// Union of the sentences' vocabularies in first-appearance order. This is
  /// the label domain of context nodes (plus NULL, ranked last).
  std::vector<Category> vocabulary() const;
};

Document document_from_json(const nlohmann::json& j);
nlohmann::json document_to_json(const Document& doc);

struct WordRef {
  int sentence = 0;
  int token = 0;

  friend auto operator<=>(const WordRef&, const WordRef&) = default;
};

struct ContextNode {
  std::string key;
  std::vector<WordRef> members;
};

/// Star forest: one clique per context node, each word in at most one clique.
struct ConsistencyGraph {
  std::vector<ContextNode> contexts;

  /// Members of all contexts in order; the index of a word in this list is
  /// its word-node index.
  std::vector<WordRef> word_nodes() const;
  int word_count() const;
  bool empty() const { return contexts.empty(); }

  /// Throws ValidationError if a word appears twice or is out of range.
  void validate(const Document& doc) const;
};

/// A sequence of POS prefixes; `anchor` is the position that becomes the
/// word node. The context key is the lower-cased surface forms of the whole
/// match joined by a space.
struct PosPattern {
  std::vector<std::string> tags;
  int anchor = 0;
};

struct ContextStrategy {
  enum class Kind { SurfaceUnigram, PosPattern };
  Kind kind = Kind::SurfaceUnigram;
  std::vector<PosPattern> patterns;

  static ContextStrategy surface_unigram() { return {}; }
  static ContextStrategy pos_patterns(std::vector<PosPattern> patterns) {
    return {Kind::PosPattern, std::move(patterns)};
  }
  /// Two readings of the Japanese "noun or verb followed by an adverb"
  /// rule. Reading A: a noun, or a verb followed by an adverb. Reading B: a
  /// noun or a verb, in either case followed by an adverb.
  static ContextStrategy japanese_reading_a();
  static ContextStrategy japanese_reading_b();
};

struct GraphOptions {
  std::vector<std::string> stopwords;  // compared after lower-casing
};

ConsistencyGraph build_graph(const Document& doc, const ContextStrategy& strategy,
                             const GraphOptions& options = {});

/// Unordered category pair scored as an exact match. Feature variables in
/// the pair unify with a single binding across both members.
struct EquivalencePair {
  Category first;
  Category second;
};

class ConsistencyPotentials {
 public:
  /// Throws ConfigError unless delta1 >= delta2 >= delta3.
  ConsistencyPotentials(double delta1, double delta2, double delta3,
                        std::vector<EquivalencePair> equivalences = {});

  /// delta = (0.9, 0.1, 0.0) and the four English equivalence pairs.
  static ConsistencyPotentials english_defaults();
  static std::vector<EquivalencePair> english_equivalences();

  double delta1() const { return delta1_; }
  double delta2() const { return delta2_; }
  double delta3() const { return delta3_; }
  const std::vector<EquivalencePair>& equivalences() const { return equivalences_; }
  ConsistencyPotentials with_deltas(double d1, double d2, double d3) const {
    return ConsistencyPotentials(d1, d2, d3, equivalences_);
  }

 private:
  double delta1_;
  double delta2_;
  double delta3_;
  std::vector<EquivalencePair> equivalences_;
};

std::vector<EquivalencePair> equivalences_from_json(const nlohmann::json& j);

bool equivalent(const Category& a, const Category& b, const std::vector<EquivalencePair>& pairs);

/// Edge potential between a word label and its context label (nullopt is
/// NULL). Cases are tried in order: exact or equivalent, same after
/// simplify, NULL, otherwise 0.
double pair_potential(const Category& word, const std::optional<Category>& context,
                      const ConsistencyPotentials& p);

/// Per word node (graph.word_nodes() order), the candidate vocabulary
/// indices in ascending order.
using WordDomains = std::vector<std::vector<int>>;

WordDomains word_domains(const ConsistencyGraph& graph, const std::vector<CandidateSet>& candidates);

/// Additive label weights per word node, aligned with WordDomains.
using WordWeights = std::vector<std::vector<double>>;

struct Assignment {
  /// Per word node: vocabulary index in its own sentence.
  std::vector<int> word_labels;
  /// Per word node: the category itself.
  std::vector<Category> word_categories;
  /// Per context: index into Document::vocabulary(), or -1 for NULL.
  std::vector<int> context_labels;
  std::vector<std::optional<Category>> context_categories;
  /// g(z) plus the weight terms that were passed to the decoder.
  double score = 0.0;
};

/// Objective of a fixed labelling, summed clique by clique, member by member,
/// each member term being (f_w + f_wc) + weight.
double mrf_objective(const ConsistencyGraph& graph, const Document& doc,
                     const ConsistencyPotentials& p, const WordDomains& domains,
                     const std::vector<int>& word_labels,
                     const std::vector<int>& context_labels, const WordWeights* weights = nullptr);

/// Exact MAP labelling, clique by clique. Ties go to the lowest index.
Assignment decode_mrf(const ConsistencyGraph& graph, const Document& doc,
                      const ConsistencyPotentials& p, const WordDomains& domains,
                      const WordWeights* weights = nullptr);

/// Enumerates every labelling of the whole graph. Throws OracleLimitError
/// when the number of labellings exceeds `limit`.
Assignment decode_mrf_bruteforce(const ConsistencyGraph& graph, const Document& doc,
                                 const ConsistencyPotentials& p, const WordDomains& domains,
                                 const WordWeights* weights = nullptr, double limit = 1e6);

/// `{"contexts": [{"key", "members": [[s,t],...], "label"?, "word_labels"?}]}`
nlohmann::json graph_to_json(const ConsistencyGraph& graph, const Assignment* assignment = nullptr);

}  // namespace ccgdoc
