#include "llata/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>

#include "json.hpp"
#include "llata/error.hpp"
#include "llata/kernels.hpp"
#include "llata/refinement.hpp"

namespace llata {

ScoreWeights ScoreWeights::normalized() const {
  if (structure < 0.0 || label < 0.0 || textsim < 0.0) {
    throw ConfigError("lambda weights must be non-negative");
  }
  const double total = structure + label + textsim;
  if (total <= 0.0) throw ConfigError("lambda weights must not all be zero");
  return {structure / total, label / total, textsim / total};
}

namespace {

double shannon_bits(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log2(x);
  }
  return h;
}

}  // namespace

double community_score(const NodeSet& community, const EncodingTree& tree,
                       const std::vector<SoftLabel>* soft_labels, std::size_t class_count,
                       const ScoreWeights& weights) {
  const ScoreWeights w = weights.normalized();
  const Graph& g = tree.graph();

  double h_struct = 0.0;
  for (NodeId v : community) {
    h_struct += tree.node_entropy(tree.leaf_of(v));
  }

  std::vector<double> mean(class_count, 1.0 / static_cast<double>(class_count));
  if (soft_labels != nullptr && !community.empty()) {
    std::fill(mean.begin(), mean.end(), 0.0);
    for (NodeId v : community) {
      const auto& p = (*soft_labels)[v].probs;
      for (std::size_t c = 0; c < class_count; ++c) mean[c] += p[c];
    }
    for (double& x : mean) x /= static_cast<double>(community.size());
  }
  const double h_label = shannon_bits(mean);

  double mu_textsim = 1.0;  // singleton convention
  if (community.size() > 1) {
    double total = 0.0;
    std::size_t pairs = 0;
    const auto& ids = community.ids();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        total += g.has_features()
                     ? kernels::cosine(g.features.row(ids[i]), g.features.row(ids[j]))
                     : 0.0;
        ++pairs;
      }
    }
    mu_textsim = total / static_cast<double>(pairs);
  }

  return w.structure * h_struct + w.label * h_label + w.textsim * (1.0 - mu_textsim);
}

std::vector<int> select_communities(const std::vector<std::pair<int, double>>& scores,
                                    double fraction) {
  if (fraction <= 0.0 || fraction > 1.0) throw ConfigError("fraction must be in (0, 1]");
  if (scores.empty()) return {};
  const auto want = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(scores.size()) - 1e-9));
  std::vector<std::pair<int, double>> ranked = scores;
  std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  ranked.resize(std::min(want, ranked.size()));
  std::vector<int> ids;
  ids.reserve(ranked.size());
  for (const auto& [id, score] : ranked) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

void PipelineConfig::validate() const {
  if (paths.graph.empty()) throw ConfigError("graph path is required");
  if (paths.output.empty()) throw ConfigError("output path is required");
  if (height < 2 || height > 8) throw ConfigError("tree height K must be in [2, 8]");
  if (epsilon < 0.0 || epsilon > 1.0) throw ConfigError("epsilon must be in [0, 1]");
  if (fraction <= 0.0 || fraction > 1.0) throw ConfigError("fraction must be in (0, 1]");
  if (s <= 0.0) throw ConfigError("silhouette threshold s must be positive");
  SamplingConfig probe{theta, rate, mode, seed};
  probe.validate();
  lambda.normalized();
  oracle.validate();
}

std::string RunReport::to_json() const {
  nlohmann::json j;
  j["schema_version"] = schema_version;
  j["entropy"]["flat"] = entropy_flat;
  j["entropy"]["minimized"] = entropy_minimized;
  j["communities"]["total"] = communities_total;
  j["communities"]["selected"] = communities_selected;
  j["oracle"]["calls"] = oracle_calls;
  j["oracle"]["cache_hits"] = cache_hits;
  j["oracle"]["parse_fallbacks"] = parse_fallbacks;
  j["refinement"]["splits"] = refinement_splits;
  j["refinement"]["reallocations"] = refinement_reallocations;
  j["edges"]["before"] = edges_before;
  j["edges"]["after"] = edges_after;
  j["edges"]["added"] = edges_added;
  j["edges"]["removed"] = edges_removed;
  j["edges"]["skipped"] = edges_skipped;
  if (homophily_before) {
    j["homophily"]["before"] = *homophily_before;
  } else {
    j["homophily"]["before"] = nullptr;
  }
  if (homophily_after) {
    j["homophily"]["after"] = *homophily_after;
  } else {
    j["homophily"]["after"] = nullptr;
  }
  j["stage_ms"] = stage_ms;
  return j.dump(2);
}

void emit_report(const RunReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write report " + path);
  out << report.to_json() << '\n';
  if (!out) throw InputError("write failed for report " + path);
}

namespace {

class StageClock {
 public:
  StageClock(RunReport& report, std::string name)
      : report_(report), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~StageClock() {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    report_.stage_ms[name_] =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(elapsed).count();
  }

 private:
  RunReport& report_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

template <typename Fn>
auto run_stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const PipelineStageError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineStageError(name, e.what());
  }
}

std::vector<ClassInfo> resolve_classes(const PipelineConfig& cfg, const Graph& g) {
  std::vector<ClassInfo> classes;
  if (!cfg.paths.classes.empty()) {
    classes = load_class_info(cfg.paths.classes);
  } else if (g.has_labels()) {
    const int c = *std::max_element(g.labels.begin(), g.labels.end()) + 1;
    for (int k = 0; k < c; ++k) {
      classes.push_back({"Class " + std::to_string(k), {}});
    }
  }
  if (classes.size() < 2) {
    throw ConfigError("need a class file or labels declaring at least two classes");
  }
  if (g.has_labels()) {
    const int c = *std::max_element(g.labels.begin(), g.labels.end()) + 1;
    if (static_cast<std::size_t>(c) > classes.size()) {
      throw ConfigError("label file references more classes than declared");
    }
  }
  bool missing_description = false;
  for (const ClassInfo& cls : classes) {
    if (cls.description.empty()) missing_description = true;
  }
  if (missing_description && !cfg.paths.classes.empty()) {
    std::cerr << "[prompt] note: some classes have no description; listing names only\n";
  }
  return classes;
}

std::string read_template(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw InputError("cannot open prompt template " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return text;
}

}  // namespace

RunReport run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  RunReport report;

  // ---- load ----
  Graph g = run_stage("load", [&] {
    StageClock clock(report, "load");
    return load_graph({cfg.paths.graph, cfg.paths.texts, cfg.paths.features, cfg.paths.labels});
  });
  const std::vector<ClassInfo> classes = run_stage("load", [&] { return resolve_classes(cfg, g); });
  const std::string prompt_template =
      run_stage("load", [&] { return read_template(cfg.paths.prompt_template); });
  const std::size_t class_count = classes.size();
  if (g.has_labels()) report.homophily_before = edge_homophily(g, g.labels);
  report.edges_before = g.edge_count();

  // ---- minimize ----
  EncodingTree tree = run_stage("minimize", [&] {
    StageClock clock(report, "minimize");
    report.entropy_flat = EncodingTree::flat(g).entropy();
    EncodingTree t = minimize_entropy(g, cfg.height, cfg.seed);
    report.entropy_minimized = t.entropy();
    return t;
  });

  // ---- select ----
  const auto communities = tree.low_level_communities();
  report.communities_total = communities.size();
  std::vector<int> selected_ids = run_stage("select", [&] {
    StageClock clock(report, "select");
    if (cfg.fraction >= 1.0) {
      std::vector<int> all;
      all.reserve(communities.size());
      for (const auto& [id, members] : communities) all.push_back(id);
      return all;
    }
    std::vector<std::pair<int, double>> scores;
    scores.reserve(communities.size());
    for (const auto& [id, members] : communities) {
      scores.emplace_back(id, community_score(members, tree, nullptr, class_count, cfg.lambda));
    }
    return select_communities(scores, cfg.fraction);
  });
  report.communities_selected = selected_ids.size();

  std::vector<char> node_selected(g.node_count(), 0);
  {
    std::size_t next = 0;
    for (const auto& [id, members] : communities) {
      while (next < selected_ids.size() && selected_ids[next] < id) ++next;
      if (next < selected_ids.size() && selected_ids[next] == id) {
        for (NodeId v : members) node_selected[v] = 1;
      }
    }
  }

  // ---- prompt + infer ----
  std::vector<SoftLabel> soft_labels(g.node_count(), SoftLabel::uniform(class_count));
  run_stage("infer", [&] {
    StageClock clock(report, "infer");
    std::vector<NodeId> nodes;
    std::vector<std::string> prompts;
    for (const auto& [id, members] : communities) {
      for (NodeId v : members) {
        if (!node_selected[v]) continue;
        AugmentedText payload = augment_text(g, members, v, cfg.epsilon, cfg.k_top);
        PromptBundle bundle;
        bundle.classes = classes;
        bundle.topology_description =
            "Graph context: the target paper belongs to a community of " +
            std::to_string(members.size()) + " closely linked papers; " +
            std::to_string(payload.appended.size()) +
            " of the most related abstracts are quoted above.";
        bundle.payload = std::move(payload);
        nodes.push_back(v);
        prompts.push_back(build_prompt(bundle, prompt_template, cfg.max_chars_per_text));
      }
    }
    OracleConfig ocfg = cfg.oracle;
    if (!cfg.paths.cache.empty()) ocfg.cache_path = cfg.paths.cache;
    Oracle oracle(ocfg, g.labels);
    const auto logits = oracle.infer_many(nodes, prompts, class_count);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      soft_labels[nodes[i]] = to_soft_label(logits[i]);
    }
    report.oracle_calls = oracle.stats().calls;
    report.cache_hits = oracle.stats().cache_hits;
    report.parse_fallbacks = oracle.stats().parse_fallbacks;
    return 0;
  });

  // ---- refine ----
  RefinedTree refined = run_stage("refine", [&] {
    StageClock clock(report, "refine");
    RefinedTree r = refine_tree(tree, soft_labels, cfg.s, cfg.seed);
    if (!cfg.paths.refine_log.empty()) write_refinement_log(r.moves, cfg.paths.refine_log);
    return r;
  });
  for (const RefinementMove& mv : refined.moves) {
    if (mv.action == RefinementMove::Action::split) {
      ++report.refinement_splits;
    } else {
      ++report.refinement_reallocations;
    }
  }

  // ---- sample ----
  SamplingResult result = run_stage("sample", [&] {
    StageClock clock(report, "sample");
    std::vector<int> selected_refined;
    for (const auto& [id, members] : refined.tree.low_level_communities()) {
      for (NodeId v : members) {
        if (node_selected[v]) {
          selected_refined.push_back(id);
          break;
        }
      }
    }
    SamplingConfig scfg{cfg.theta, cfg.rate, cfg.mode, cfg.seed};
    return run_sampling(g, refined.tree, soft_labels, scfg, selected_refined);
  });
  for (const EdgeAction& action : result.actions) {
    switch (action.kind) {
      case EdgeAction::Kind::added: ++report.edges_added; break;
      case EdgeAction::Kind::removed: ++report.edges_removed; break;
      case EdgeAction::Kind::skipped: ++report.edges_skipped; break;
    }
  }
  report.edges_after = result.graph.edge_count();

  // ---- write ----
  run_stage("write", [&] {
    {
      StageClock clock(report, "write");
      save_edge_list(result.graph, cfg.paths.output);
      const std::string actions_path =
          cfg.paths.actions.empty() ? cfg.paths.output + ".actions.jsonl" : cfg.paths.actions;
      write_action_log(result.actions, actions_path);
      if (g.has_labels()) {
        report.homophily_after = edge_homophily(result.graph, g.labels);
      }
    }
    if (!cfg.paths.report.empty()) emit_report(report, cfg.paths.report);
    return 0;
  });

  return report;
}

}  // namespace llata
