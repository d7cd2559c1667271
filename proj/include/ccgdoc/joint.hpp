#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "json.hpp"

#include "ccgdoc/derivation.hpp"
#include "ccgdoc/mrf.hpp"
#include "ccgdoc/parser.hpp"

namespace ccgdoc {

struct DualConfig {
  double alpha = 0.0002;
  int max_iterations = 500;
  /// Applied to alpha after every multiplier update.
  double decay = 0.9;

  /// Throws ConfigError unless 0 < alpha <= 1, max_iterations >= 1 and
  /// 0 < decay <= 1.
  void validate() const;
};

/// Lagrange multipliers u_{w,c}, one row per word node aligned with its
/// domain.
///
/// Values are held as integer multiples of 2^-48 and every update moves
/// the same number of units up and down, so each row sums to exactly zero.
class DualState {
 public:
  static constexpr int kFractionBits = 48;

  DualState() = default;
  DualState(const WordDomains& domains, double alpha);

  double value(std::size_t word, std::size_t position) const;
  const std::vector<std::vector<std::int64_t>>& units() const { return units_; }
  /// Exact row sums in units; all zero by construction.
  std::vector<std::int64_t> row_sums() const;

  int iteration() const { return iteration_; }
  double alpha() const { return alpha_; }

 private:
  friend void update_multipliers(DualState& state, const WordDomains& domains,
                                 const std::vector<int>& z, const std::vector<int>& c,
                                 double decay);
  std::vector<std::vector<std::int64_t>> units_;
  int iteration_ = 1;
  double alpha_ = 0.0;
};

/// u_{w,c} += alpha * (1[z_w = c] - 1[c_w = c]) for every (w, c), then
/// alpha *= decay. `z` and `c` hold the word-node labels (vocabulary
/// indices) chosen by the MRF and by the parser in the same iteration.
void update_multipliers(DualState& state, const WordDomains& domains, const std::vector<int>& z,
                        const std::vector<int>& c, double decay);

struct TraceEntry {
  int k = 0;
  double dual = 0.0;
  int disagreements = 0;
  double alpha = 0.0;
};

nlohmann::json trace_to_json(const TraceEntry& e);

struct JointResult {
  std::vector<Derivation> derivations;
  Assignment assignment;
  bool converged = false;
  int iterations = 0;
  std::vector<double> dual_values;
  /// g(z) + sum_s log P(Y_s | X_s) of the returned pair, without multipliers.
  double primal_value = 0.0;
  std::vector<TraceEntry> trace;
};

/// Called once per iteration with the multipliers used in that iteration.
using DualObserver = std::function<void(const DualState&)>;

/// Alternates exact MRF decoding and per-sentence A* parsing, adjusting the
/// multipliers until the two agree on every word node or the iteration
/// budget runs out.
JointResult solve_joint(const Document& doc, const ConsistencyGraph& graph,
                        const ConsistencyPotentials& potentials, const ParseConfig& parse_cfg,
                        const DualConfig& dual_cfg, const DualObserver& observer = {});

/// Word-node labels (vocabulary indices) of a set of derivations, in
/// graph.word_nodes() order.
std::vector<int> derivation_labels(const ConsistencyGraph& graph,
                                   const std::vector<Derivation>& derivations);

/// g(z) + sum of unpenalised tree scores.
double joint_objective(const Document& doc, const ConsistencyGraph& graph,
                       const ConsistencyPotentials& potentials, const WordDomains& domains,
                       const Assignment& assignment, const std::vector<Derivation>& derivations);

struct JointOptimum {
  std::vector<Derivation> derivations;
  Assignment assignment;
  double score = 0.0;
};

/// Exact maximiser of the joint objective under agreement, by enumerating
/// every tuple of word-node categories. Throws OracleLimitError when the
/// tuple count exceeds `limit` and NoParseError when no tuple is parseable.
JointOptimum joint_bruteforce(const Document& doc, const ConsistencyGraph& graph,
                              const ConsistencyPotentials& potentials, const ParseConfig& parse_cfg,
                              double limit = 1e5);

}  // namespace ccgdoc
