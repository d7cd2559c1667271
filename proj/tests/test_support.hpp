#pragma once

#include <random>
#include <string>
#include <vector>

#include "ccgdoc/joint.hpp"
#include "ccgdoc/mrf.hpp"
#include "ccgdoc/parser.hpp"
#include "ccgdoc/sentence.hpp"

namespace ccgdoc::testing {

using Rng = std::mt19937_64;

/// Rows are given directly in natural log.
ScoredSentence make_sentence(const std::vector<std::string>& tokens, const std::vector<std::string>& categories,
                             const std::vector<std::vector<double>>& tags,
                             const std::vector<std::vector<double>>& deps);

/// log(p / sum(p)) for each entry.
std::vector<double> log_normalise(const std::vector<double>& p);

/// Categories drawn from a pool that combines often, with random rows. With
/// `ties`, probabilities are multiples of 1/8 so equal scores are common.
ScoredSentence random_sentence(Rng& rng, int tokens, int vocabulary, bool ties = false);

/// Sentence over the small test lexicon: each word's own categories share
/// the probability mass, everything else gets 1e-9.
ScoredSentence lexicon_sentence(Rng& rng, const std::vector<std::string>& words);

/// Two or three lexicon sentences, premise first, that share words and
/// all parse under `cfg`.
Document random_document(Rng& rng, const ParseConfig& cfg, int sentences = 2);

/// Document whose sentences share no surface form.
Document disjoint_document(Rng& rng, const ParseConfig& cfg);

/// Best score over every derivation, found by enumerating all trees span by
/// span; independent of the chart engine. nullopt when nothing parses.
std::optional<double> enumerate_best_score(const ScoredSentence& s, const ParseConfig& cfg,
                                           const ScoreMatrix* penalties = nullptr);

/// g(z) recomputed from the definition: per clique, per member,
/// log P_tag + pair potential.
double oracle_mrf_score(const Document& doc, const ConsistencyGraph& graph, const ConsistencyPotentials& p,
                        const std::vector<int>& word_labels, const std::vector<int>& context_labels);

/// 20 tokens, 50 candidates each, one clearly preferred category per token.
ScoredSentence long_sentence(Rng& rng);

}  // namespace ccgdoc::testing
