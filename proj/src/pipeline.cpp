#include "ccgdoc/pipeline.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "ccgdoc/errors.hpp"

namespace ccgdoc {

namespace {

std::string resolve(const std::string& base_dir, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

Category config_category(const nlohmann::json& j, const std::string& where) {
  try {
    return parse_category(j.get<std::string>());
  } catch (const CategoryParseError& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + ": expected a category string");
  }
}

nlohmann::json formula_json(const std::optional<Term>& t) {
  if (!t) return nullptr;
  return {{"formula", t->str()}, {"pred_args", extract_pred_args(*t).to_json()}};
}

Metrics compute_metrics(const RunResult& r) {
  Metrics m;
  m.contexts = static_cast<int>(r.graph.contexts.size());
  m.word_nodes = r.graph.word_count();
  if (!r.trace.empty()) {
    m.iterations = static_cast<int>(r.trace.size());
    m.disagreements_at_first = r.trace.front().disagreements;
    m.converged = r.trace.back().disagreements == 0;
  }
  long pairs = 0;
  long agreeing = 0;
  for (const auto& c : r.graph.contexts) {
    for (std::size_t i = 0; i < c.members.size(); ++i) {
      for (std::size_t j = i + 1; j < c.members.size(); ++j) {
        const auto& a = c.members[i];
        const auto& b = c.members[j];
        const Category& ca = r.sentences[static_cast<std::size_t>(a.sentence)].joint.leaf_category(a.token);
        const Category& cb = r.sentences[static_cast<std::size_t>(b.sentence)].joint.leaf_category(b.token);
        ++pairs;
        agreeing += ca == cb ? 1 : 0;
      }
    }
  }
  if (pairs > 0) m.consistency_rate = static_cast<double>(agreeing) / static_cast<double>(pairs);
  for (std::size_t s = 0; s < r.sentences.size(); ++s) {
    const auto& base = r.sentences[s].baseline.categories();
    const auto& joint = r.sentences[s].joint.categories();
    for (std::size_t t = 0; t < base.size(); ++t) m.category_changes += base[t] != joint[t] ? 1 : 0;
  }
  return m;
}

}  // namespace

void RunConfig::validate() const {
  parse.validate();
  dual.validate();
  if (strategy.kind == ContextStrategy::Kind::PosPattern && strategy.patterns.empty())
    throw ConfigError("pos-pattern strategy needs at least one pattern");
  if (!templates_path.empty() && !std::filesystem::exists(templates_path))
    throw ConfigError("template file not found: " + templates_path);
}

ContextStrategy strategy_from_name(const std::string& name, std::vector<PosPattern> patterns) {
  if (name == "surface") return ContextStrategy::surface_unigram();
  if (name == "japanese-a") return ContextStrategy::japanese_reading_a();
  if (name == "japanese-b") return ContextStrategy::japanese_reading_b();
  if (name == "pos") return ContextStrategy::pos_patterns(std::move(patterns));
  throw ConfigError("unknown context strategy '" + name + "'");
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

RunConfig config_from_json(const nlohmann::json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig cfg;
  try {
    if (j.contains("context")) {
      const auto& c = j["context"];
      cfg.strategy_name = c.value("strategy", cfg.strategy_name);
      std::vector<PosPattern> patterns;
      if (c.contains("patterns"))
        for (const auto& p : c["patterns"])
          patterns.push_back({p.at("tags").get<std::vector<std::string>>(), p.value("anchor", 0)});
      cfg.strategy = strategy_from_name(cfg.strategy_name, std::move(patterns));
      if (c.contains("stopwords")) cfg.graph.stopwords = c["stopwords"].get<std::vector<std::string>>();
    }
    if (j.contains("potentials")) {
      const auto& p = j["potentials"];
      auto eq = ConsistencyPotentials::english_equivalences();
      if (p.contains("equivalences")) {
        const auto& e = p["equivalences"];
        eq = equivalences_from_json(e.is_string() ? read_json_file(resolve(base_dir, e.get<std::string>())) : e);
      }
      auto d = p.value("delta", std::vector<double>{0.9, 0.1, 0.0});
      if (d.size() != 3) throw ConfigError("potentials.delta must hold three numbers");
      cfg.potentials = ConsistencyPotentials(d[0], d[1], d[2], std::move(eq));
    }
    if (j.contains("parser")) {
      const auto& p = j["parser"];
      cfg.parse.beta = p.value("beta", cfg.parse.beta);
      cfg.parse.max_categories = p.value("max_categories", cfg.parse.max_categories);
      cfg.parse.oracle_max_tokens = p.value("oracle_max_tokens", cfg.parse.oracle_max_tokens);
      if (p.contains("root_categories"))
        for (const auto& c : p["root_categories"])
          cfg.parse.root_categories.push_back(config_category(c, "parser.root_categories"));
      auto& r = cfg.parse.rules;
      r.forward_application = p.value("forward_application", r.forward_application);
      r.backward_application = p.value("backward_application", r.backward_application);
      r.forward_composition = p.value("forward_composition", r.forward_composition);
      r.backward_composition = p.value("backward_composition", r.backward_composition);
      r.generalized_composition = p.value("generalized_composition", r.generalized_composition);
      r.conjunction = p.value("conjunction", r.conjunction);
      r.modifiers_pass_head = p.value("modifiers_pass_head", r.modifiers_pass_head);
      if (p.contains("unary_rules")) {
        r.unary_rules.clear();
        for (const auto& u : p["unary_rules"]) {
          UnaryRule rule = make_unary_rule(config_category(u.at("from"), "parser.unary_rules"),
                                           config_category(u.at("to"), "parser.unary_rules"));
          if (u.contains("label")) rule.label = u["label"].get<std::string>();
          r.unary_rules.push_back(std::move(rule));
        }
      }
    }
    if (j.contains("dual")) {
      const auto& d = j["dual"];
      cfg.dual.alpha = d.value("alpha", cfg.dual.alpha);
      cfg.dual.max_iterations = d.value("max_iterations", cfg.dual.max_iterations);
      cfg.dual.decay = d.value("decay", cfg.dual.decay);
    }
    cfg.mrf = j.value("mrf", cfg.mrf);
    cfg.semantics = j.value("semantics", cfg.semantics);
    if (j.contains("templates")) cfg.templates_path = resolve(base_dir, j["templates"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json patterns = nlohmann::json::array();
  for (const auto& p : cfg.strategy.patterns) patterns.push_back({{"tags", p.tags}, {"anchor", p.anchor}});
  nlohmann::json eq = nlohmann::json::array();
  for (const auto& e : cfg.potentials.equivalences()) eq.push_back({e.first.str(), e.second.str()});
  nlohmann::json roots = nlohmann::json::array();
  for (const auto& c : cfg.parse.root_categories) roots.push_back(c.str());
  nlohmann::json unary = nlohmann::json::array();
  for (const auto& u : cfg.parse.rules.unary_rules)
    unary.push_back({{"from", u.from.str()}, {"to", u.to.str()}, {"label", u.label}});
  const auto& r = cfg.parse.rules;
  nlohmann::json j = {
      {"context", {{"strategy", cfg.strategy_name}, {"patterns", patterns}, {"stopwords", cfg.graph.stopwords}}},
      {"potentials",
       {{"delta", {cfg.potentials.delta1(), cfg.potentials.delta2(), cfg.potentials.delta3()}},
        {"equivalences", eq}}},
      {"parser",
       {{"beta", cfg.parse.beta},
        {"max_categories", cfg.parse.max_categories},
        {"oracle_max_tokens", cfg.parse.oracle_max_tokens},
        {"root_categories", roots},
        {"forward_application", r.forward_application},
        {"backward_application", r.backward_application},
        {"forward_composition", r.forward_composition},
        {"backward_composition", r.backward_composition},
        {"generalized_composition", r.generalized_composition},
        {"conjunction", r.conjunction},
        {"modifiers_pass_head", r.modifiers_pass_head},
        {"unary_rules", unary}}},
      {"dual",
       {{"alpha", cfg.dual.alpha}, {"max_iterations", cfg.dual.max_iterations}, {"decay", cfg.dual.decay}}},
      {"mrf", cfg.mrf},
      {"semantics", cfg.semantics}};
  if (!cfg.templates_path.empty()) j["templates"] = cfg.templates_path;
  return j;
}

TemplateSet load_templates(const RunConfig& cfg) {
  if (cfg.templates_path.empty()) return TemplateSet::defaults();
  return TemplateSet::from_json(read_json_file(cfg.templates_path));
}

nlohmann::json metrics_to_json(const Metrics& m) {
  return {{"converged", m.converged},
          {"iterations", m.iterations},
          {"disagreements_at_first", m.disagreements_at_first},
          {"consistency_rate", m.consistency_rate ? nlohmann::json(*m.consistency_rate) : nlohmann::json(nullptr)},
          {"category_changes", m.category_changes},
          {"contexts", m.contexts},
          {"word_nodes", m.word_nodes}};
}

RunResult run_document(const Document& doc, const RunConfig& cfg, const TemplateSet& templates) {
  cfg.validate();
  doc.validate();
  RunResult r;
  r.sentences.resize(doc.sentences.size());
  for (std::size_t s = 0; s < doc.sentences.size(); ++s)
    r.sentences[s].baseline = parse_astar(doc.sentences[s], cfg.parse);

  if (cfg.mrf) {
    r.graph = build_graph(doc, cfg.strategy, cfg.graph);
    JointResult joint = solve_joint(doc, r.graph, cfg.potentials, cfg.parse, cfg.dual);
    for (std::size_t s = 0; s < doc.sentences.size(); ++s)
      r.sentences[s].joint = std::move(joint.derivations[s]);
    r.assignment = std::move(joint.assignment);
    r.trace = std::move(joint.trace);
  } else {
    for (auto& out : r.sentences) out.joint = out.baseline;
  }

  if (cfg.semantics) {
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      auto& out = r.sentences[s];
      out.baseline_formula = sentence_semantics(out.baseline, doc.sentences[s], templates);
      out.joint_formula = out.joint == out.baseline
                              ? out.baseline_formula
                              : std::optional<Term>(sentence_semantics(out.joint, doc.sentences[s], templates));
    }
  }
  r.metrics = compute_metrics(r);
  return r;
}

nlohmann::json run_result_to_json(const Document& doc, const RunResult& r) {
  nlohmann::json sentences = nlohmann::json::array();
  for (std::size_t s = 0; s < r.sentences.size(); ++s) {
    const auto& sent = doc.sentences[s];
    const auto& out = r.sentences[s];
    nlohmann::json baseline = out.baseline.to_json(sent);
    baseline["bracketed"] = out.baseline.bracketed(sent);
    baseline["semantics"] = formula_json(out.baseline_formula);
    nlohmann::json joint = out.joint.to_json(sent);
    joint["bracketed"] = out.joint.bracketed(sent);
    joint["semantics"] = formula_json(out.joint_formula);
    sentences.push_back({{"index", s},
                         {"role", doc.roles[s] == Role::Premise ? "T" : "H"},
                         {"tokens", sent.tokens},
                         {"baseline", baseline},
                         {"joint", joint}});
  }
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& e : r.trace) trace.push_back(trace_to_json(e));
  return {{"sentences", sentences},
          {"graph", graph_to_json(r.graph, r.graph.empty() ? nullptr : &r.assignment)},
          {"metrics", metrics_to_json(r.metrics)},
          {"trace", trace}};
}

std::string run_result_text(const Document& doc, const RunResult& r) {
  std::ostringstream out;
  for (std::size_t s = 0; s < r.sentences.size(); ++s) {
    const auto& sent = doc.sentences[s];
    const auto& o = r.sentences[s];
    out << "# sentence " << s << " (" << (doc.roles[s] == Role::Premise ? "T" : "H") << ")";
    for (const auto& t : sent.tokens) out << ' ' << t;
    out << "\nbaseline: " << o.baseline.bracketed(sent) << '\n';
    if (o.baseline_formula) out << "  formula: " << o.baseline_formula->str() << '\n';
    out << "joint:    " << o.joint.bracketed(sent) << '\n';
    if (o.joint_formula) out << "  formula: " << o.joint_formula->str() << '\n';
  }
  const auto& m = r.metrics;
  out << "converged: " << (m.converged ? "yes" : "no") << ", iterations: " << m.iterations
      << ", contexts: " << m.contexts << ", category changes: " << m.category_changes << '\n';
  return out.str();
}

std::string trace_jsonl(const RunResult& r) {
  std::string out;
  for (const auto& e : r.trace) out += trace_to_json(e).dump() + "\n";
  return out;
}

nlohmann::json report_metrics(const std::vector<Metrics>& results) {
  int converged = 0;
  long iterations = 0;
  long changes = 0;
  int with_cliques = 0;
  double rate_sum = 0.0;
  for (const auto& m : results) {
    converged += m.converged ? 1 : 0;
    iterations += m.iterations;
    changes += m.category_changes;
    if (m.consistency_rate) {
      ++with_cliques;
      rate_sum += *m.consistency_rate;
    }
  }
  const double n = static_cast<double>(results.size());
  nlohmann::json j;
  j["documents"] = results.size();
  j["converged"] = converged;
  j["convergence_rate"] = results.empty() ? nlohmann::json(nullptr) : nlohmann::json(converged / n);
  j["mean_iterations"] = results.empty() ? nlohmann::json(nullptr) : nlohmann::json(static_cast<double>(iterations) / n);
  j["documents_with_cliques"] = with_cliques;
  j["mean_consistency_rate"] = with_cliques ? nlohmann::json(rate_sum / with_cliques) : nlohmann::json(nullptr);
  j["category_changes"] = changes;
  return j;
}

std::vector<DeltaTriple> delta_grid() {
  std::vector<DeltaTriple> out;
  for (int a = 0; a <= 9; ++a)
    for (int b = 0; b <= a; ++b)
      for (int c = 0; c <= b; ++c) out.push_back({a / 10.0, b / 10.0, c / 10.0});
  std::sort(out.begin(), out.end());
  return out;
}

Scorer consistency_scorer() {
  return [](const std::vector<Document>&, const std::vector<RunResult>& results) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : results) {
      if (!r.metrics.consistency_rate) continue;
      sum += *r.metrics.consistency_rate;
      ++n;
    }
    return n ? sum / n : 0.0;
  };
}

Scorer command_scorer(std::string command) {
  return [command](const std::vector<Document>& docs, const std::vector<RunResult>& results) {
    nlohmann::json all = nlohmann::json::array();
    for (std::size_t i = 0; i < results.size(); ++i) all.push_back(run_result_to_json(docs[i], results[i]));
    std::string path = (std::filesystem::temp_directory_path() / "ccgdoc-scoreXXXXXX").string();
    int fd = mkstemp(path.data());
    if (fd < 0) throw ScorerError("cannot create a temporary results file");
    close(fd);
    {
      std::ofstream out(path);
      out << all.dump();
    }
    const std::string cmd = command + " '" + path + "'";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
      std::filesystem::remove(path);
      throw ScorerError("cannot run scorer: " + command);
    }
    std::string output;
    char buf[256];
    while (std::fgets(buf, sizeof buf, pipe)) output += buf;
    const int status = pclose(pipe);
    std::filesystem::remove(path);
    if (status != 0) throw ScorerError("scorer exited with status " + std::to_string(status) + ": " + command);
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(output.c_str(), &end);
    if (end == output.c_str() || errno != 0)
      throw ScorerError("scorer printed no number: '" + output + "'");
    return value;
  };
}

std::vector<GridEntry> grid_search_deltas(const std::vector<Document>& dev, const RunConfig& cfg,
                                          const TemplateSet& templates, const Scorer& scorer) {
  if (dev.empty()) throw ConfigError("grid search needs at least one document");
  std::vector<GridEntry> out;
  RunConfig run = cfg;
  for (const auto& d : delta_grid()) {
    run.potentials = cfg.potentials.with_deltas(d[0], d[1], d[2]);
    std::vector<RunResult> results;
    results.reserve(dev.size());
    for (const auto& doc : dev) results.push_back(run_document(doc, run, templates));
    out.push_back({d, scorer(dev, results)});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const GridEntry& a, const GridEntry& b) { return a.score > b.score; });
  return out;
}

}  // namespace ccgdoc
