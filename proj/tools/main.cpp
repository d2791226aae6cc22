#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "llata/encoding_tree.hpp"
#include "llata/error.hpp"
#include "llata/kernels.hpp"
#include "llata/pipeline.hpp"
#include "llata/sbm.hpp"

namespace {

int cmd_run(const llata::PipelineConfig& cfg) {
  const llata::RunReport report = llata::run_pipeline(cfg);
  std::cout << "entropy: flat " << report.entropy_flat << " -> minimized "
            << report.entropy_minimized << '\n';
  std::cout << "communities: " << report.communities_selected << "/" << report.communities_total
            << " selected\n";
  std::cout << "oracle: " << report.oracle_calls << " calls, " << report.cache_hits
            << " cache hits, " << report.parse_fallbacks << " parse fallbacks\n";
  std::cout << "refinement: " << report.refinement_splits << " splits, "
            << report.refinement_reallocations << " reallocations\n";
  std::cout << "edges: " << report.edges_before << " -> " << report.edges_after << " (+"
            << report.edges_added << " / -" << report.edges_removed << ", "
            << report.edges_skipped << " skipped)\n";
  if (report.homophily_before && report.homophily_after) {
    std::cout << "homophily: " << *report.homophily_before << " -> " << *report.homophily_after
              << '\n';
  }
  return 0;
}

int cmd_gen_sbm(const llata::SbmParams& params, const std::string& out_dir) {
  const llata::Graph g = llata::generate_sbm(params);
  llata::write_sbm_dataset(g, out_dir);
  std::cout << "wrote " << g.node_count() << " nodes / " << g.edge_count() << " edges to "
            << out_dir << '\n';
  return 0;
}

int cmd_entropy(const std::string& graph_path, int height, const std::string& dump_path) {
  const llata::Graph g = llata::load_edge_list(graph_path);
  const double flat = llata::EncodingTree::flat(g).entropy();
  const llata::EncodingTree tree = llata::minimize_entropy(g, height);
  std::cout << "nodes " << g.node_count() << ", edges " << g.edge_count() << '\n';
  std::cout << "flat entropy:      " << flat << " bits\n";
  std::cout << "minimized entropy: " << tree.entropy() << " bits (height <= " << height << ")\n";
  if (!dump_path.empty()) {
    std::ofstream out(dump_path);
    if (!out) throw llata::InputError("cannot write " + dump_path);
    out << tree.to_json() << '\n';
    std::cout << "tree dump: " << dump_path << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LLaTA: tree-guided, training-free graph structure learning"};
  app.set_config("--config", "", "Config file (key=value, flags take precedence)");
  app.require_subcommand(1);

  // run
  llata::PipelineConfig cfg;
  std::string mode = "both";
  std::string oracle_backend = "mock";
  auto* run = app.add_subcommand("run", "Rewire a graph with the full pipeline");
  run->add_option("--graph", cfg.paths.graph, "Edge list path")->required();
  run->add_option("--texts", cfg.paths.texts, "JSON-lines node texts")->required();
  run->add_option("--features", cfg.paths.features, "CSV node features");
  run->add_option("--labels", cfg.paths.labels, "Per-node class ids");
  run->add_option("--classes", cfg.paths.classes, "JSON class names/descriptions");
  run->add_option("--prompt-template", cfg.paths.prompt_template, "Prompt template override");
  run->add_option("--height", cfg.height, "Encoding tree height K (2..8)");
  run->add_option("--epsilon", cfg.epsilon, "Text-sharing similarity threshold");
  run->add_option("--ktop", cfg.k_top, "Max texts appended per node");
  run->add_option("--theta", cfg.theta, "Candidate set size");
  run->add_option("--rate", cfg.rate, "Sampling frequency multiplier r");
  run->add_option("--s", cfg.s, "Silhouette improvement threshold");
  run->add_option("--mode", mode, "add|remove|both")
      ->check(CLI::IsMember({"add", "remove", "both"}));
  run->add_option("--fraction", cfg.fraction, "Fraction of communities optimized");
  run->add_option("--oracle", oracle_backend, "mock|remote")
      ->check(CLI::IsMember({"mock", "remote"}));
  run->add_option("--endpoint", cfg.oracle.endpoint, "Chat-completion endpoint URL");
  run->add_option("--model", cfg.oracle.model, "Model name");
  run->add_option("--api-key-env", cfg.oracle.api_key_env, "Env var holding the bearer token");
  run->add_option("--timeout", cfg.oracle.timeout_seconds, "Request timeout (s)");
  run->add_option("--retries", cfg.oracle.max_retries, "Max retries per request");
  run->add_option("--max-in-flight", cfg.oracle.max_in_flight, "Concurrent oracle requests");
  run->add_option("--mock-noise", cfg.oracle.mock_noise, "Mock oracle noise p");
  run->add_option("--seed", cfg.seed, "Random seed");
  run->add_option("--out", cfg.paths.output, "Rewired edge list path")->required();
  run->add_option("--report", cfg.paths.report, "Run report JSON path");
  run->add_option("--cache", cfg.paths.cache, "Oracle cache path (JSON-lines)");
  run->add_option("--actions", cfg.paths.actions, "Edge-action log path");
  run->add_option("--refine-log", cfg.paths.refine_log, "Refinement move log path");

  // gen-sbm
  llata::SbmParams sbm;
  std::string sbm_dir;
  auto* gen = app.add_subcommand("gen-sbm", "Generate a seeded stochastic block model dataset");
  gen->add_option("--blocks", sbm.blocks, "Number of blocks")->required();
  gen->add_option("--size", sbm.block_size, "Nodes per block")->required();
  gen->add_option("--pintra", sbm.p_intra, "Within-block edge probability")->required();
  gen->add_option("--pinter", sbm.p_inter, "Cross-block edge probability")->required();
  gen->add_option("--seed", sbm.seed, "Random seed");
  gen->add_option("--out", sbm_dir, "Output directory")->required();

  // entropy
  std::string entropy_graph;
  int entropy_height = 3;
  std::string entropy_dump;
  auto* entropy = app.add_subcommand("entropy", "Minimize and report structural entropy");
  entropy->add_option("--graph", entropy_graph, "Edge list path")->required();
  entropy->add_option("--height", entropy_height, "Encoding tree height K");
  entropy->add_option("--out", entropy_dump, "Tree JSON dump path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      cfg.mode = mode == "add"      ? llata::SamplingMode::add
                 : mode == "remove" ? llata::SamplingMode::remove
                                    : llata::SamplingMode::both;
      cfg.oracle.backend = oracle_backend == "remote" ? llata::OracleBackend::remote
                                                      : llata::OracleBackend::mock;
      return cmd_run(cfg);
    }
    if (gen->parsed()) return cmd_gen_sbm(sbm, sbm_dir);
    if (entropy->parsed()) return cmd_entropy(entropy_graph, entropy_height, entropy_dump);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
