#include "ccgdoc/joint.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <optional>

#include "ccgdoc/errors.hpp"

namespace ccgdoc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<CandidateSet> prune_all(const Document& doc, const ParseConfig& cfg) {
  std::vector<CandidateSet> out;
  out.reserve(doc.sentences.size());
  for (const auto& s : doc.sentences) out.push_back(prune_candidates(s, cfg));
  return out;
}

std::size_t position_of(const std::vector<int>& domain, int v) {
  for (std::size_t k = 0; k < domain.size(); ++k)
    if (domain[k] == v) return k;
  throw ValidationError("parser chose a category outside the word's candidate set");
}

}  // namespace

void DualConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("decay must lie in (0, 1]");
}

DualState::DualState(const WordDomains& domains, double alpha) : alpha_(alpha) {
  units_.reserve(domains.size());
  for (const auto& d : domains) units_.emplace_back(d.size(), 0);
}

double DualState::value(std::size_t word, std::size_t position) const {
  return std::ldexp(static_cast<double>(units_[word][position]), -kFractionBits);
}

std::vector<std::int64_t> DualState::row_sums() const {
  std::vector<std::int64_t> out;
  out.reserve(units_.size());
  for (const auto& row : units_) {
    std::int64_t sum = 0;
    for (auto u : row) sum += u;
    out.push_back(sum);
  }
  return out;
}

void update_multipliers(DualState& state, const WordDomains& domains, const std::vector<int>& z,
                        const std::vector<int>& c, double decay) {
  if (z.size() != domains.size() || c.size() != domains.size() ||
      state.units_.size() != domains.size())
    throw ValidationError("multiplier update: word-node counts differ");
  const auto step = static_cast<std::int64_t>(std::llround(std::ldexp(state.alpha_, DualState::kFractionBits)));
  for (std::size_t w = 0; w < domains.size(); ++w) {
    if (z[w] == c[w]) continue;
    state.units_[w][position_of(domains[w], z[w])] += step;
    state.units_[w][position_of(domains[w], c[w])] -= step;
  }
  state.alpha_ *= decay;
  ++state.iteration_;
}

nlohmann::json trace_to_json(const TraceEntry& e) {
  return {{"k", e.k}, {"dual", e.dual}, {"disagreements", e.disagreements}, {"alpha", e.alpha}};
}

std::vector<int> derivation_labels(const ConsistencyGraph& graph,
                                   const std::vector<Derivation>& derivations) {
  std::vector<int> out;
  for (const auto& ref : graph.word_nodes())
    out.push_back(derivations.at(static_cast<std::size_t>(ref.sentence))
                      .categories()
                      .at(static_cast<std::size_t>(ref.token)));
  return out;
}

double joint_objective(const Document& doc, const ConsistencyGraph& graph,
                       const ConsistencyPotentials& potentials, const WordDomains& domains,
                       const Assignment& assignment, const std::vector<Derivation>& derivations) {
  double total = mrf_objective(graph, doc, potentials, domains, assignment.word_labels,
                               assignment.context_labels);
  for (std::size_t s = 0; s < derivations.size(); ++s)
    total += tree_score(derivations[s], doc.sentences[s]);
  return total;
}

JointResult solve_joint(const Document& doc, const ConsistencyGraph& graph,
                        const ConsistencyPotentials& potentials, const ParseConfig& parse_cfg,
                        const DualConfig& dual_cfg, const DualObserver& observer) {
  dual_cfg.validate();
  parse_cfg.validate();
  graph.validate(doc);
  const auto candidates = prune_all(doc, parse_cfg);
  const auto domains = word_domains(graph, candidates);
  const auto nodes = graph.word_nodes();
  const std::size_t n = nodes.size();

  std::vector<bool> coupled(doc.sentences.size(), false);
  for (const auto& ref : nodes) coupled[static_cast<std::size_t>(ref.sentence)] = true;

  DualState state(domains, dual_cfg.alpha);
  JointResult result;
  std::vector<ScoreMatrix> penalties(doc.sentences.size());
  for (std::size_t s = 0; s < doc.sentences.size(); ++s)
    if (coupled[s])
      penalties[s] = ScoreMatrix::Zero(doc.sentences[s].size(), doc.sentences[s].vocabulary_size());
  WordWeights weights(n);

  for (int k = 1; k <= dual_cfg.max_iterations; ++k) {
    if (observer) observer(state);
    // The MRF sees -u and the parser +u; with the update rule below this is
    // a descent step on the dual.
    for (std::size_t w = 0; w < n; ++w) {
      const auto& ref = nodes[w];
      weights[w].assign(domains[w].size(), 0.0);
      for (std::size_t p = 0; p < domains[w].size(); ++p) {
        const double u = state.value(w, p);
        weights[w][p] = -u;
        penalties[static_cast<std::size_t>(ref.sentence)](ref.token, domains[w][p]) = -u;
      }
    }
    Assignment z = decode_mrf(graph, doc, potentials, domains, n ? &weights : nullptr);
    std::vector<Derivation> ys;
    ys.reserve(doc.sentences.size());
    double dual = z.score;
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      ys.push_back(parse_astar(doc.sentences[s], parse_cfg, candidates[s],
                               coupled[s] ? &penalties[s] : nullptr));
      dual += ys.back().score();
    }
    const auto c = derivation_labels(graph, ys);
    int disagreements = 0;
    for (std::size_t w = 0; w < n; ++w) disagreements += z.word_labels[w] != c[w] ? 1 : 0;

    result.dual_values.push_back(dual);
    result.trace.push_back({k, dual, disagreements, state.alpha()});
    result.iterations = k;
    const bool last = disagreements == 0 || k == dual_cfg.max_iterations;
    if (last) {
      z.score = mrf_objective(graph, doc, potentials, domains, z.word_labels, z.context_labels);
      result.converged = disagreements == 0;
      result.primal_value = joint_objective(doc, graph, potentials, domains, z, ys);
      result.assignment = std::move(z);
      // Report model scores, not the penalised ones used in the search.
      for (std::size_t s = 0; s < ys.size(); ++s)
        result.derivations.emplace_back(ys[s].nodes(), ys[s].categories(), ys[s].heads(),
                                        tree_score(ys[s], doc.sentences[s]));
      break;
    }
    update_multipliers(state, domains, z.word_labels, c, dual_cfg.decay);
  }
  return result;
}

JointOptimum joint_bruteforce(const Document& doc, const ConsistencyGraph& graph,
                              const ConsistencyPotentials& potentials, const ParseConfig& parse_cfg,
                              double limit) {
  parse_cfg.validate();
  graph.validate(doc);
  const auto candidates = prune_all(doc, parse_cfg);
  const auto domains = word_domains(graph, candidates);
  const auto nodes = graph.word_nodes();
  const std::size_t n = nodes.size();

  double tuples = 1.0;
  for (const auto& d : domains) tuples *= static_cast<double>(d.size());
  if (tuples > limit)
    throw OracleLimitError("joint enumeration needs " + std::to_string(tuples) + " tuples; limit is " +
                           std::to_string(limit));

  std::vector<std::vector<std::size_t>> by_sentence(doc.sentences.size());
  for (std::size_t w = 0; w < n; ++w) by_sentence[static_cast<std::size_t>(nodes[w].sentence)].push_back(w);

  std::vector<std::map<std::vector<int>, std::optional<Derivation>>> memo(doc.sentences.size());
  auto parse_under = [&](std::size_t s, const std::vector<int>& labels) -> const std::optional<Derivation>& {
    std::vector<int> key;
    for (std::size_t w : by_sentence[s]) key.push_back(labels[w]);
    auto it = memo[s].find(key);
    if (it != memo[s].end()) return it->second;
    const auto& sent = doc.sentences[s];
    std::optional<Derivation> d;
    try {
      if (by_sentence[s].empty()) {
        d = parse_exhaustive(sent, parse_cfg, candidates[s]);
      } else {
        ScoreMatrix pen = ScoreMatrix::Zero(sent.size(), sent.vocabulary_size());
        for (std::size_t w : by_sentence[s])
          for (int v : domains[w])
            if (v != labels[w]) pen(nodes[w].token, v) = kInf;
        Derivation raw = parse_exhaustive(sent, parse_cfg, candidates[s], &pen);
        d = Derivation(raw.nodes(), raw.categories(), raw.heads(), tree_score(raw, sent));
      }
    } catch (const NoParseError&) {
    }
    return memo[s].emplace(std::move(key), std::move(d)).first->second;
  };

  const auto vocab = doc.vocabulary();
  const int label_count = static_cast<int>(vocab.size());
  std::vector<std::size_t> digits(n, 0);
  std::vector<int> labels(n);
  std::optional<JointOptimum> best;
  while (true) {
    for (std::size_t w = 0; w < n; ++w) labels[w] = domains[w][digits[w]];
    std::vector<Derivation> ys;
    bool feasible = true;
    for (std::size_t s = 0; s < doc.sentences.size() && feasible; ++s) {
      const auto& d = parse_under(s, labels);
      if (d)
        ys.push_back(*d);
      else
        feasible = false;
    }
    if (feasible) {
      std::vector<int> context_labels;
      std::size_t first = 0;
      for (const auto& context : graph.contexts) {
        double best_clique = 0.0;
        int best_label = -1;
        for (int l = 0; l <= label_count; ++l) {
          std::optional<Category> label;
          if (l < label_count) label = vocab[static_cast<std::size_t>(l)];
          double clique = 0.0;
          for (std::size_t m = 0; m < context.members.size(); ++m) {
            const auto& ref = context.members[m];
            const auto& s = doc.sentences[static_cast<std::size_t>(ref.sentence)];
            const int v = labels[first + m];
            clique += s.tag_log_prob(ref.token, v) +
                      pair_potential(s.categories[static_cast<std::size_t>(v)], label, potentials);
          }
          if (l == 0 || clique > best_clique) {
            best_clique = clique;
            best_label = l == label_count ? -1 : l;
          }
        }
        context_labels.push_back(best_label);
        first += context.members.size();
      }
      Assignment z;
      z.word_labels = labels;
      z.context_labels = context_labels;
      for (std::size_t w = 0; w < n; ++w)
        z.word_categories.push_back(
            doc.sentences[static_cast<std::size_t>(nodes[w].sentence)].categories[static_cast<std::size_t>(labels[w])]);
      for (int l : context_labels)
        z.context_categories.push_back(l < 0 ? std::nullopt
                                             : std::optional<Category>(vocab[static_cast<std::size_t>(l)]));
      z.score = mrf_objective(graph, doc, potentials, domains, z.word_labels, z.context_labels);
      const double score = joint_objective(doc, graph, potentials, domains, z, ys);
      if (!best || score > best->score) best = JointOptimum{std::move(ys), std::move(z), score};
    }
    std::size_t k = n;
    bool done = true;
    while (k > 0) {
      --k;
      if (++digits[k] < domains[k].size()) {
        done = false;
        break;
      }
      digits[k] = 0;
    }
    if (done) break;
  }
  if (!best) throw NoParseError("no agreeing labelling admits a derivation of every sentence");
  return std::move(*best);
}

}  // namespace ccgdoc
