#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "ccgdoc/errors.hpp"
#include "ccgdoc/pipeline.hpp"
#include "test_support.hpp"

using namespace ccgdoc;
using namespace ccgdoc::testing;
using nlohmann::json;

namespace {

const std::string kData = CCGDOC_DATA_DIR;

Document exercising_doc() { return document_from_json(read_json_file(kData + "/exercising.json")); }
RunConfig exercising_config() { return config_from_json(read_json_file(kData + "/exercising_config.json"), kData); }

}  // namespace

TEST(Config, Defaults) {
  RunConfig c = config_from_json(json::object());
  EXPECT_EQ(c.strategy_name, "surface");
  EXPECT_EQ(c.potentials.delta1(), 0.9);
  EXPECT_EQ(c.potentials.delta2(), 0.1);
  EXPECT_EQ(c.potentials.delta3(), 0.0);
  EXPECT_EQ(c.potentials.equivalences().size(), 4u);
  EXPECT_EQ(c.dual.alpha, 0.0002);
  EXPECT_EQ(c.dual.max_iterations, 500);
  EXPECT_EQ(c.dual.decay, 0.9);
  EXPECT_TRUE(c.mrf);
  EXPECT_TRUE(c.semantics);
}

TEST(Config, ShippedToyConfig) {
  RunConfig c = exercising_config();
  ASSERT_EQ(c.parse.root_categories.size(), 1u);
  EXPECT_EQ(c.parse.root_categories[0].str(), "S[dcl]");
  EXPECT_EQ(c.parse.rules.unary_rules.size(), 2u);
  EXPECT_EQ(c.potentials.equivalences().size(), 4u);
  EXPECT_FALSE(c.templates_path.empty());
}

TEST(Config, RoundTrip) {
  RunConfig c = exercising_config();
  RunConfig d = config_from_json(config_to_json(c), kData);
  EXPECT_EQ(config_to_json(d), config_to_json(c));
}

TEST(Config, Errors) {
  EXPECT_THROW(config_from_json(json::parse(R"({"potentials": {"delta": [0.1, 0.9, 0.0]}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"potentials": {"delta": [0.9, 0.1]}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"dual": {"alpha": -1}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"dual": {"decay": 0}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"context": {"strategy": "bigram"}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"parser": {"root_categories": ["(S"]}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"potentials": {"equivalences": "missing.json"}})"), "/nonexistent"),
               ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"context": {"strategy": "pos"}})")), ConfigError);
}

TEST(Config, JapaneseStrategies) {
  EXPECT_EQ(strategy_from_name("japanese-a").patterns.size(), 2u);
  EXPECT_EQ(strategy_from_name("japanese-b").patterns[0].tags.size(), 2u);
  EXPECT_THROW(strategy_from_name("unknown"), ConfigError);
}

TEST(RunDocument, ExercisingPairFlips) {
  Document doc = exercising_doc();
  RunConfig cfg = exercising_config();
  RunResult r = run_document(doc, cfg, load_templates(cfg));
  const auto& h = r.sentences[1];
  EXPECT_EQ(h.baseline.leaf_category(4).str(), "N");
  EXPECT_EQ(h.joint.leaf_category(4).str(), "S[ng]\\NP");
  EXPECT_TRUE(r.metrics.converged);
  EXPECT_EQ(r.metrics.category_changes, 2);
  EXPECT_EQ(r.metrics.contexts, 3);
  EXPECT_EQ(r.metrics.word_nodes, 6);
  ASSERT_TRUE(r.sentences[0].joint_formula && h.joint_formula && h.baseline_formula);
  auto t_args = extract_pred_args(*r.sentences[0].joint_formula).restricted_to("exercise");
  EXPECT_EQ(t_args, extract_pred_args(*h.joint_formula).restricted_to("exercise"));
  EXPECT_NE(t_args, extract_pred_args(*h.baseline_formula).restricted_to("exercise"));
  // man: N in both. is: the two readings of the copula differ. exercising:
  // S[ng]\NP in both once jointly decoded.
  ASSERT_TRUE(r.metrics.consistency_rate.has_value());
  EXPECT_NEAR(*r.metrics.consistency_rate, 2.0 / 3.0, 1e-12);

  json j = run_result_to_json(doc, r);
  EXPECT_EQ(j["sentences"].size(), 2u);
  EXPECT_TRUE(j.contains("graph"));
  EXPECT_TRUE(j.contains("metrics"));
  EXPECT_EQ(static_cast<int>(j["trace"].size()), r.metrics.iterations);
  std::string text = run_result_text(doc, r);
  EXPECT_NE(text.find("converged: yes"), std::string::npos);
  std::string lines = trace_jsonl(r);
  EXPECT_EQ(std::count(lines.begin(), lines.end(), '\n'), r.metrics.iterations);
}

TEST(RunDocument, EmptyGraphMatchesBaseline) {
  Rng rng(12);
  RunConfig cfg;
  RunConfig off = cfg;
  off.mrf = false;
  for (int n = 0; n < 5; ++n) {
    Document doc = disjoint_document(rng, cfg.parse);
    RunResult a = run_document(doc, cfg, TemplateSet::defaults());
    RunResult b = run_document(doc, off, TemplateSet::defaults());
    EXPECT_TRUE(a.graph.empty());
    EXPECT_EQ(run_result_to_json(doc, a)["sentences"].dump(), run_result_to_json(doc, b)["sentences"].dump());
    EXPECT_FALSE(a.metrics.consistency_rate.has_value());
    for (const auto& s : a.sentences) EXPECT_TRUE(s.baseline == s.joint);
  }
}

TEST(RunDocument, NoSemantics) {
  Document doc = exercising_doc();
  RunConfig cfg = exercising_config();
  cfg.semantics = false;
  RunResult r = run_document(doc, cfg, load_templates(cfg));
  EXPECT_FALSE(r.sentences[0].joint_formula.has_value());
}

TEST(RunDocument, MalformedRowNamesSentenceAndRow) {
  json j = read_json_file(kData + "/exercising.json");
  j["sentences"][1]["dep_log_prob"][2][0] = 0.5;
  try {
    document_from_json(j);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("sentence 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
  }
}

TEST(DeltaGrid, Enumeration) {
  auto g = delta_grid();
  EXPECT_EQ(g.size(), 220u);
  EXPECT_NE(std::find(g.begin(), g.end(), DeltaTriple{0.9, 0.1, 0.0}), g.end());
  EXPECT_EQ(std::find(g.begin(), g.end(), DeltaTriple{0.1, 0.9, 0.0}), g.end());
  EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
  for (const auto& t : g) EXPECT_TRUE(t[0] >= t[1] && t[1] >= t[2]);
}

TEST(GridSearch, RanksBestFirstAndKeepsTies) {
  std::vector<Document> dev{exercising_doc()};
  RunConfig cfg = exercising_config();
  cfg.semantics = false;
  cfg.dual.max_iterations = 20;
  // Converged runs score 1, others 0, so many triples tie.
  Scorer scorer = [](const std::vector<Document>&, const std::vector<RunResult>& rs) {
    return rs[0].metrics.converged ? 1.0 : 0.0;
  };
  auto ranked = grid_search_deltas(dev, cfg, load_templates(cfg), scorer);
  ASSERT_EQ(ranked.size(), 220u);
  for (std::size_t i = 1; i < ranked.size(); ++i) {
    EXPECT_GE(ranked[i - 1].score, ranked[i].score);
    if (ranked[i - 1].score == ranked[i].score) EXPECT_LT(ranked[i - 1].delta, ranked[i].delta);
  }
  EXPECT_THROW(grid_search_deltas({}, cfg, load_templates(cfg), scorer), ConfigError);
}

TEST(ReportMetrics, ConvergenceRate) {
  Metrics ok;
  ok.converged = true;
  ok.iterations = 3;
  ok.consistency_rate = 1.0;
  Metrics bad;
  bad.converged = false;
  bad.iterations = 500;
  EXPECT_DOUBLE_EQ(report_metrics({ok})["convergence_rate"].get<double>(), 1.0);
  json two = report_metrics({ok, bad});
  EXPECT_DOUBLE_EQ(two["convergence_rate"].get<double>(), 0.5);
  EXPECT_DOUBLE_EQ(two["mean_iterations"].get<double>(), 251.5);
  EXPECT_EQ(two["documents_with_cliques"], 1);
  EXPECT_DOUBLE_EQ(two["mean_consistency_rate"].get<double>(), 1.0);
  EXPECT_TRUE(report_metrics({})["convergence_rate"].is_null());
}

TEST(CommandScorer, ReadsNumberAndReportsFailures) {
  Document doc = exercising_doc();
  RunConfig cfg = exercising_config();
  RunResult r = run_document(doc, cfg, load_templates(cfg));
  // The scorer receives a JSON array with one result per document.
  Scorer count = command_scorer("python3 -c 'import json,sys; print(len(json.load(open(sys.argv[1]))) / 4)'");
  EXPECT_DOUBLE_EQ(count({doc}, {r}), 0.25);
  EXPECT_THROW(command_scorer("false")({doc}, {r}), ScorerError);
  EXPECT_THROW(command_scorer("echo nothing")({doc}, {r}), ScorerError);
}

TEST(ConsistencyScorer, MeanOverDocumentsWithCliques) {
  Document doc = exercising_doc();
  RunConfig cfg = exercising_config();
  RunResult r = run_document(doc, cfg, load_templates(cfg));
  Rng rng(4);
  Document empty = disjoint_document(rng, cfg.parse);
  RunConfig plain;
  RunResult e = run_document(empty, plain, TemplateSet::defaults());
  EXPECT_NEAR(consistency_scorer()({doc, empty}, {r, e}), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(consistency_scorer()({empty}, {e}), 0.0);
}
