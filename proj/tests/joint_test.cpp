#include <algorithm>
#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "ccgdoc/errors.hpp"
#include "ccgdoc/joint.hpp"
#include "ccgdoc/pipeline.hpp"
#include "test_support.hpp"

using namespace ccgdoc;
using namespace ccgdoc::testing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Two one-token sentences "w" over {N, NP}.
Document degenerate(double t_n, double h_n) {
  auto sent = [](double p) { return make_sentence({"w"}, {"N", "NP"}, {log_normalise({p, 1 - p})}, {{0.0, -kInf}}); };
  Document doc;
  doc.sentences = {sent(t_n), sent(h_n)};
  doc.roles = {Role::Premise, Role::Hypothesis};
  return doc;
}

WordDomains two_words() { return {{0, 1, 2}, {0, 1, 2}}; }

}  // namespace

TEST(UpdateMultipliers, AgreementLeavesUnchanged) {
  DualState s(two_words(), 0.0002);
  update_multipliers(s, two_words(), {1, 2}, {1, 2}, 0.9);
  for (const auto& row : s.units())
    for (auto u : row) EXPECT_EQ(u, 0);
  EXPECT_EQ(s.iteration(), 2);
}

TEST(UpdateMultipliers, DisagreementMovesBothLabels) {
  DualState s(two_words(), 0.0002);
  update_multipliers(s, two_words(), {0, 2}, {1, 2}, 0.9);
  EXPECT_NEAR(s.value(0, 0), 0.0002, 1e-15);
  EXPECT_NEAR(s.value(0, 1), -0.0002, 1e-15);
  EXPECT_EQ(s.value(0, 2), 0.0);
  EXPECT_EQ(s.value(1, 0), 0.0);
  EXPECT_NEAR(s.alpha(), 0.00018, 1e-18);
  EXPECT_EQ(s.row_sums(), (std::vector<std::int64_t>{0, 0}));
  update_multipliers(s, two_words(), {0, 2}, {1, 2}, 0.9);
  EXPECT_NEAR(s.value(0, 0), 0.00038, 1e-15);
  EXPECT_NEAR(s.alpha(), 0.000162, 1e-18);
}

TEST(DualConfig, Validation) {
  EXPECT_NO_THROW(DualConfig{}.validate());
  EXPECT_THROW((DualConfig{0.0, 500, 0.9}.validate()), ConfigError);
  EXPECT_THROW((DualConfig{0.0002, 0, 0.9}.validate()), ConfigError);
  EXPECT_THROW((DualConfig{0.0002, 500, 1.5}.validate()), ConfigError);
}

TEST(SolveJoint, EmptyGraphIsIndependentParsing) {
  Rng rng(8);
  ParseConfig cfg;
  Document doc = disjoint_document(rng, cfg);
  ConsistencyGraph g;
  JointResult r = solve_joint(doc, g, ConsistencyPotentials::english_defaults(), cfg, DualConfig{});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_TRUE(r.assignment.word_labels.empty());
  for (int s = 0; s < doc.size(); ++s)
    EXPECT_TRUE(r.derivations[static_cast<std::size_t>(s)] == parse_astar(doc.sentences[static_cast<std::size_t>(s)], cfg));
  JointOptimum opt = joint_bruteforce(doc, g, ConsistencyPotentials::english_defaults(), cfg);
  EXPECT_TRUE(opt.assignment.word_labels.empty());
  EXPECT_NEAR(opt.score, r.primal_value, 1e-12);
}

TEST(SolveJoint, DegenerateCliqueByHand) {
  // T prefers N, H prefers NP. Joint score of (c_T, c_H, label) is
  // 2 f_T + 2 f_H + phi(c_T, label) + phi(c_H, label); dep scores are 0.
  Document doc = degenerate(0.7, 0.4);
  ConsistencyGraph g = build_graph(doc, ContextStrategy::surface_unigram());
  ASSERT_EQ(g.word_count(), 2);
  auto p = ConsistencyPotentials(0.9, 0.1, 0.0);
  double best = -kInf;
  int best_t = -1, best_h = -1;
  const double ft[2] = {std::log(0.7), std::log(0.3)};
  const double fh[2] = {std::log(0.4), std::log(0.6)};
  for (int ct = 0; ct < 2; ++ct)
    for (int ch = 0; ch < 2; ++ch)
      for (double phi : {0.0, ct == ch ? 1.8 : 0.9}) {
        double score = 2 * ft[ct] + 2 * fh[ch] + phi;
        if (score > best) {
          best = score;
          best_t = ct;
          best_h = ch;
        }
      }
  ASSERT_EQ(best_t, 0);
  ASSERT_EQ(best_h, 0);
  JointOptimum opt = joint_bruteforce(doc, g, p, ParseConfig{});
  EXPECT_NEAR(opt.score, best, 1e-12);
  EXPECT_EQ(opt.derivations[1].categories()[0], 0);

  DualConfig dc;
  dc.alpha = 0.5;
  JointResult r = solve_joint(doc, g, p, ParseConfig{}, dc);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.primal_value, best, 1e-12);
  EXPECT_EQ(r.derivations[1].categories()[0], 0);
}

TEST(SolveJoint, ExercisingPair) {
  const std::string data = CCGDOC_DATA_DIR;
  Document doc = document_from_json(read_json_file(data + "/exercising.json"));
  RunConfig cfg = config_from_json(read_json_file(data + "/exercising_config.json"), data);
  ConsistencyGraph g = build_graph(doc, cfg.strategy, cfg.graph);
  const ScoredSentence& h = doc.sentences[1];
  Derivation baseline = parse_astar(h, cfg.parse);
  EXPECT_EQ(baseline.leaf_category(3).str(), "N/N");
  EXPECT_EQ(baseline.leaf_category(4).str(), "N");

  JointResult r = solve_joint(doc, g, cfg.potentials, cfg.parse, cfg.dual);
  ASSERT_TRUE(r.converged);
  EXPECT_EQ(r.derivations[1].leaf_category(3).str(), "N");
  EXPECT_EQ(r.derivations[1].leaf_category(4).str(), "S[ng]\\NP");
  EXPECT_EQ(r.derivations[0].leaf_category(3).str(), "S[ng]\\NP");

  JointOptimum opt = joint_bruteforce(doc, g, cfg.potentials, cfg.parse);
  EXPECT_NEAR(opt.score, r.primal_value, 1e-9);
  EXPECT_TRUE(opt.derivations[1] == r.derivations[1]);
}

TEST(SolveJoint, TraceAndDualBounds) {
  Rng rng(17);
  ParseConfig cfg;
  auto p = ConsistencyPotentials::english_defaults();
  int converged = 0;
  int stalled = 0;
  for (int n = 0; n < 40; ++n) {
    Document doc = random_document(rng, cfg);
    ConsistencyGraph g = build_graph(doc, ContextStrategy::surface_unigram());
    JointOptimum opt;
    try {
      opt = joint_bruteforce(doc, g, p, cfg);
    } catch (const OracleLimitError&) {
      continue;
    }
    JointResult r = solve_joint(doc, g, p, cfg, DualConfig{});
    ASSERT_EQ(static_cast<int>(r.trace.size()), r.iterations);
    ASSERT_EQ(r.dual_values.size(), r.trace.size());
    for (std::size_t k = 0; k < r.trace.size(); ++k) {
      EXPECT_EQ(r.trace[k].k, static_cast<int>(k) + 1);
      EXPECT_GE(r.dual_values[k], opt.score - 1e-9);
    }
    if (r.converged) {
      ++converged;
      EXPECT_EQ(r.trace.back().disagreements, 0);
      EXPECT_NEAR(r.primal_value, opt.score, 1e-9);
      auto domains = word_domains(g, [&] {
        std::vector<CandidateSet> c;
        for (const auto& s : doc.sentences) c.push_back(prune_candidates(s, cfg));
        return c;
      }());
      EXPECT_NEAR(joint_objective(doc, g, p, domains, r.assignment, r.derivations), r.primal_value, 1e-12);
    } else {
      // The step size underflows the multiplier resolution well before
      // K = 500, after which the dual value stays put.
      ++stalled;
      EXPECT_EQ(r.iterations, 500);
      for (std::size_t k = 400; k < r.dual_values.size(); ++k) EXPECT_LE(r.dual_values[k], r.dual_values[k - 1]);
    }
  }
  EXPECT_GT(converged, 0);
  RecordProperty("stalled", stalled);
}

TEST(SolveJoint, ObserverSeesZeroSumRows) {
  Rng rng(23);
  ParseConfig cfg;
  Document doc = random_document(rng, cfg, 3);
  ConsistencyGraph g = build_graph(doc, ContextStrategy::surface_unigram());
  DualConfig dc;
  dc.alpha = 0.3;
  dc.max_iterations = 50;
  int calls = 0;
  solve_joint(doc, g, ConsistencyPotentials::english_defaults(), cfg, dc, [&](const DualState& s) {
    ++calls;
    for (auto sum : s.row_sums()) EXPECT_EQ(sum, 0);
  });
  EXPECT_GT(calls, 0);
}

TEST(JointBruteforce, Limit) {
  Rng rng(2);
  ParseConfig cfg;
  Document doc = random_document(rng, cfg, 3);
  ConsistencyGraph g = build_graph(doc, ContextStrategy::surface_unigram());
  ASSERT_FALSE(g.empty());
  EXPECT_THROW(joint_bruteforce(doc, g, ConsistencyPotentials::english_defaults(), cfg, 1), OracleLimitError);
}

TEST(Trace, Json) {
  auto j = trace_to_json(TraceEntry{3, -1.5, 2, 0.000162});
  EXPECT_EQ(j["k"], 3);
  EXPECT_EQ(j["disagreements"], 2);
  EXPECT_DOUBLE_EQ(j["dual"].get<double>(), -1.5);
  EXPECT_DOUBLE_EQ(j["alpha"].get<double>(), 0.000162);
}
