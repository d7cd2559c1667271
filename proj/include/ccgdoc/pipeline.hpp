#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ccgdoc/joint.hpp"
#include "ccgdoc/mrf.hpp"
#include "ccgdoc/parser.hpp"
#include "ccgdoc/semantics.hpp"

namespace ccgdoc {

struct RunConfig {
  /// "surface", "japanese-a", "japanese-b" or "pos" (uses `strategy.patterns`).
  std::string strategy_name = "surface";
  ContextStrategy strategy = ContextStrategy::surface_unigram();
  GraphOptions graph;
  ConsistencyPotentials potentials = ConsistencyPotentials::english_defaults();
  ParseConfig parse;
  DualConfig dual;
  /// With the MRF off, the joint output is the baseline parse.
  bool mrf = true;
  bool semantics = true;
  /// Empty selects TemplateSet::defaults().
  std::string templates_path;

  void validate() const;
};

/// Reads the config schema documented in the README. Relative paths are
/// resolved against `base_dir`. Throws ConfigError.
RunConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
nlohmann::json config_to_json(const RunConfig& cfg);

ContextStrategy strategy_from_name(const std::string& name, std::vector<PosPattern> patterns = {});

nlohmann::json read_json_file(const std::string& path);
TemplateSet load_templates(const RunConfig& cfg);

struct Metrics {
  bool converged = true;
  int iterations = 0;
  int disagreements_at_first = 0;
  /// Agreeing pairs over all pairs of word nodes sharing a clique, judged
  /// on the final categories; nullopt without cliques.
  std::optional<double> consistency_rate;
  int category_changes = 0;
  int contexts = 0;
  int word_nodes = 0;
};

nlohmann::json metrics_to_json(const Metrics& m);

struct SentenceOutput {
  Derivation baseline;
  Derivation joint;
  std::optional<Term> baseline_formula;
  std::optional<Term> joint_formula;
};

struct RunResult {
  std::vector<SentenceOutput> sentences;
  ConsistencyGraph graph;
  Assignment assignment;
  Metrics metrics;
  std::vector<TraceEntry> trace;
};

/// Baseline parses, joint decoding and (optionally) formulas for one
/// document. Throws NoParseError, TemplateGapError, ConfigError.
RunResult run_document(const Document& doc, const RunConfig& cfg, const TemplateSet& templates);

nlohmann::json run_result_to_json(const Document& doc, const RunResult& r);
std::string run_result_text(const Document& doc, const RunResult& r);
std::string trace_jsonl(const RunResult& r);

/// Aggregate over documents: convergence rate, mean iterations, mean
/// consistency rate over documents that have cliques, category changes.
nlohmann::json report_metrics(const std::vector<Metrics>& results);

using DeltaTriple = std::array<double, 3>;

/// Every (d1, d2, d3) from {0.0, 0.1, ..., 0.9} with d1 >= d2 >= d3, in
/// ascending lexicographic order.
std::vector<DeltaTriple> delta_grid();

/// Scores a set of run results; higher is better.
using Scorer = std::function<double(const std::vector<Document>&, const std::vector<RunResult>&)>;

/// Mean consistency rate over documents with cliques (0 when none have any).
Scorer consistency_scorer();

/// Writes the results as JSON to a temporary file, runs `command <file>`
/// and reads a number from its standard output. Throws ScorerError.
Scorer command_scorer(std::string command);

struct GridEntry {
  DeltaTriple delta;
  double score = 0.0;
};

/// Runs every triple of delta_grid() over the dev set and ranks them by
/// score, best first; ties keep grid order.
std::vector<GridEntry> grid_search_deltas(const std::vector<Document>& dev, const RunConfig& cfg,
                                          const TemplateSet& templates, const Scorer& scorer);

}  // namespace ccgdoc
