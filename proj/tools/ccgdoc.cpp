// Command-line front end: parse, batch, grid-search, validate.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ccgdoc/errors.hpp"
#include "ccgdoc/pipeline.hpp"

namespace {

using namespace ccgdoc;

enum ExitCode {
  kOk = 0,
  kOther = 1,
  kConfig = 2,
  kNoParse = 3,
  kTemplateGap = 4,
  kScorer = 5,
};

int verbosity() {
  const char* v = std::getenv("CCGDOC_VERBOSE");
  return v ? std::atoi(v) : 0;
}

void log(const std::string& msg) {
  if (verbosity() > 0) std::cerr << "ccgdoc: " << msg << '\n';
}

/// Command-line overrides applied on top of the config file.
struct Overrides {
  std::string config_path;
  std::vector<double> delta;
  std::string equivalences;
  std::optional<double> alpha;
  std::optional<int> max_iterations;
  std::optional<double> decay;
  std::optional<double> beta;
  std::optional<int> max_categories;
  std::vector<std::string> root_categories;
  std::vector<std::string> unary_rules;
  std::optional<bool> generalized_composition;
  std::string strategy;
  std::vector<std::string> stopwords;
  std::string templates;
  bool no_mrf = false;
  bool no_semantics = false;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app->add_option("--delta", delta, "potentials d1 d2 d3")->expected(3)->delimiter(',');
    app->add_option("--equivalences", equivalences, "equivalence pair file")->check(CLI::ExistingFile);
    app->add_option("--alpha", alpha, "initial step size");
    app->add_option("--max-iterations", max_iterations, "iteration budget K");
    app->add_option("--decay", decay, "step size decay per iteration");
    app->add_option("--beta", beta, "supertag pruning threshold");
    app->add_option("--max-categories", max_categories, "candidate categories kept per token");
    app->add_option("--root-category", root_categories, "category accepted at the root (repeatable)");
    app->add_option("--unary-rule", unary_rules, "type-changing rule FROM=>TO (repeatable; replaces defaults)");
    app->add_option("--generalized-composition", generalized_composition, "enable second-order composition");
    app->add_option("--strategy", strategy, "surface, japanese-a, japanese-b or pos");
    app->add_option("--stopword", stopwords, "surface form excluded from contexts (repeatable)");
    app->add_option("--templates", templates, "semantic template file")->check(CLI::ExistingFile);
    app->add_flag("--no-mrf", no_mrf, "baseline parsing only");
    app->add_flag("--no-semantics", no_semantics, "skip formula composition");
  }

  RunConfig build() const {
    nlohmann::json j = nlohmann::json::object();
    std::string base = ".";
    if (!config_path.empty()) {
      j = read_json_file(config_path);
      base = std::filesystem::path(config_path).parent_path().string();
      if (base.empty()) base = ".";
    }
    if (!delta.empty()) j["potentials"]["delta"] = delta;
    if (!equivalences.empty())
      j["potentials"]["equivalences"] = std::filesystem::absolute(equivalences).string();
    if (alpha) j["dual"]["alpha"] = *alpha;
    if (max_iterations) j["dual"]["max_iterations"] = *max_iterations;
    if (decay) j["dual"]["decay"] = *decay;
    if (beta) j["parser"]["beta"] = *beta;
    if (max_categories) j["parser"]["max_categories"] = *max_categories;
    if (!root_categories.empty()) j["parser"]["root_categories"] = root_categories;
    if (generalized_composition) j["parser"]["generalized_composition"] = *generalized_composition;
    if (!unary_rules.empty()) {
      nlohmann::json rules = nlohmann::json::array();
      for (const auto& r : unary_rules) {
        auto sep = r.find("=>");
        if (sep == std::string::npos) throw ConfigError("unary rule must look like FROM=>TO: " + r);
        rules.push_back({{"from", r.substr(0, sep)}, {"to", r.substr(sep + 2)}});
      }
      j["parser"]["unary_rules"] = rules;
    }
    if (!strategy.empty()) j["context"]["strategy"] = strategy;
    if (!stopwords.empty()) j["context"]["stopwords"] = stopwords;
    if (!templates.empty()) j["templates"] = std::filesystem::absolute(templates).string();
    if (no_mrf) j["mrf"] = false;
    if (no_semantics) j["semantics"] = false;
    return config_from_json(j, base);
  }
};

Document load_document(const std::string& path) {
  log("reading " + path);
  return document_from_json(read_json_file(path));
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

int run(int argc, char** argv) {
  CLI::App app{"Document-level CCG parsing with cross-sentence category consistency"};
  app.require_subcommand(1);

  Overrides parse_opts;
  std::string parse_doc;
  std::string parse_format = "json";
  std::string parse_out;
  std::string parse_trace;
  auto* parse = app.add_subcommand("parse", "decode one document");
  parse->add_option("document", parse_doc, "document JSON")->required()->check(CLI::ExistingFile);
  parse->add_option("--format", parse_format, "json or text")->check(CLI::IsMember({"json", "text"}));
  parse->add_option("-o,--output", parse_out, "output file (default stdout)");
  parse->add_option("--trace", parse_trace, "solver trace as JSON lines");
  parse_opts.add_to(parse);

  Overrides batch_opts;
  std::vector<std::string> batch_docs;
  std::string batch_dir;
  auto* batch = app.add_subcommand("batch", "decode several documents and aggregate metrics");
  batch->add_option("documents", batch_docs, "document JSON files")->required()->check(CLI::ExistingFile);
  batch->add_option("--output-dir", batch_dir, "write one result file per document here");
  batch_opts.add_to(batch);

  Overrides grid_opts;
  std::vector<std::string> grid_docs;
  std::string scorer_command;
  std::string grid_out;
  auto* grid = app.add_subcommand("grid-search", "rank potential triples on a dev set");
  grid->add_option("documents", grid_docs, "dev documents")->required()->check(CLI::ExistingFile);
  grid->add_option("--scorer-command", scorer_command,
                   "external scorer; receives a results file path and prints a number");
  grid->add_option("-o,--output", grid_out, "output file (default stdout)");
  grid_opts.add_to(grid);

  std::vector<std::string> validate_files;
  std::string validate_kind = "document";
  auto* validate = app.add_subcommand("validate", "check input files against their schema");
  validate->add_option("files", validate_files, "files to check")->required()->check(CLI::ExistingFile);
  validate->add_option("--kind", validate_kind, "document, config or templates")
      ->check(CLI::IsMember({"document", "config", "templates"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  if (parse->parsed()) {
    RunConfig cfg = parse_opts.build();
    Document doc = load_document(parse_doc);
    RunResult r = run_document(doc, cfg, load_templates(cfg));
    log("iterations: " + std::to_string(r.metrics.iterations));
    write_text(parse_out, parse_format == "json" ? run_result_to_json(doc, r).dump(2) + "\n"
                                                 : run_result_text(doc, r));
    if (!parse_trace.empty()) write_text(parse_trace, trace_jsonl(r));
    return kOk;
  }

  if (batch->parsed()) {
    RunConfig cfg = batch_opts.build();
    TemplateSet templates = load_templates(cfg);
    std::vector<Metrics> metrics;
    nlohmann::json per_doc = nlohmann::json::array();
    for (const auto& path : batch_docs) {
      Document doc = load_document(path);
      RunResult r = run_document(doc, cfg, templates);
      metrics.push_back(r.metrics);
      per_doc.push_back({{"document", path}, {"metrics", metrics_to_json(r.metrics)}});
      if (!batch_dir.empty()) {
        std::filesystem::create_directories(batch_dir);
        auto name = std::filesystem::path(path).stem().string() + ".result.json";
        write_text((std::filesystem::path(batch_dir) / name).string(), run_result_to_json(doc, r).dump(2) + "\n");
      }
    }
    nlohmann::json report = {{"summary", report_metrics(metrics)}, {"documents", per_doc}};
    std::string text = report.dump(2) + "\n";
    if (!batch_dir.empty()) write_text((std::filesystem::path(batch_dir) / "report.json").string(), text);
    std::cout << text;
    return kOk;
  }

  if (grid->parsed()) {
    RunConfig cfg = grid_opts.build();
    std::vector<Document> dev;
    for (const auto& path : grid_docs) dev.push_back(load_document(path));
    Scorer scorer = scorer_command.empty() ? consistency_scorer() : command_scorer(scorer_command);
    auto ranked = grid_search_deltas(dev, cfg, load_templates(cfg), scorer);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : ranked) out.push_back({{"delta", e.delta}, {"score", e.score}});
    write_text(grid_out, out.dump(2) + "\n");
    return kOk;
  }

  if (validate->parsed()) {
    for (const auto& path : validate_files) {
      nlohmann::json j = read_json_file(path);
      if (validate_kind == "document") {
        document_from_json(j);
      } else if (validate_kind == "config") {
        config_from_json(j, std::filesystem::path(path).parent_path().string());
      } else {
        TemplateSet::from_json(j);
      }
      std::cout << path << ": ok\n";
    }
    return kOk;
  }
  return kOther;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ccgdoc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ccgdoc::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kConfig;
  } catch (const ccgdoc::CategoryParseError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kConfig;
  } catch (const ccgdoc::NoParseError& e) {
    std::cerr << "no parse: " << e.what() << '\n';
    return kNoParse;
  } catch (const ccgdoc::TemplateGapError& e) {
    std::cerr << "template gap: " << e.what() << '\n';
    return kTemplateGap;
  } catch (const ccgdoc::ScorerError& e) {
    std::cerr << "scorer failure: " << e.what() << '\n';
    return kScorer;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
}
