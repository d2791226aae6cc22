#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "llata/encoding_tree.hpp"
#include "llata/oracle.hpp"
#include "llata/sampler.hpp"
#include "llata/text_context.hpp"

namespace llata {

/// Composite community-score weights (normalized to sum 1 on use).
struct ScoreWeights {
  double structure = 1.0 / 3.0;  // summed leaf entropy terms
  double label = 1.0 / 3.0;      // entropy of the mean soft label
  double textsim = 1.0 / 3.0;    // 1 - mean pairwise feature cosine

  ScoreWeights normalized() const;  // throws ConfigError when all zero
};

/// Appendix-style composite score guiding which communities get oracle
/// attention. `soft_labels` may be null before inference; the label term
/// then falls back to the uniform distribution.
double community_score(const NodeSet& community, const EncodingTree& tree,
                       const std::vector<SoftLabel>* soft_labels, std::size_t class_count,
                       const ScoreWeights& weights);

/// Top ceil(fraction * count) community ids by score, ties to the smaller
/// id. Returned ascending.
std::vector<int> select_communities(const std::vector<std::pair<int, double>>& scores,
                                    double fraction);

struct PipelinePaths {
  std::string graph;            // edge list (required)
  std::string texts;            // JSON-lines texts
  std::string features;         // CSV features
  std::string labels;           // one class id per line
  std::string classes;          // JSON class names/descriptions
  std::string prompt_template;  // placeholder template override
  std::string output;           // rewired edge list (required)
  std::string report;           // run report JSON
  std::string cache;            // oracle logit cache
  std::string actions;          // edge-action JSON-lines ("" = <output>.actions.jsonl)
  std::string refine_log;       // refinement move JSON-lines ("" = off)
};

struct PipelineConfig {
  PipelinePaths paths;
  int height = 3;          // K
  double epsilon = 0.45;
  std::size_t k_top = 3;
  std::size_t theta = 5;
  std::size_t rate = 1;    // r
  double s = 0.01;
  SamplingMode mode = SamplingMode::both;
  double fraction = 1.0;   // f
  std::uint64_t seed = 42;
  ScoreWeights lambda;
  OracleConfig oracle;
  std::size_t max_chars_per_text = 2000;

  void validate() const;  // throws ConfigError
};

struct RunReport {
  int schema_version = 1;
  double entropy_flat = 0.0;
  double entropy_minimized = 0.0;
  std::size_t communities_total = 0;
  std::size_t communities_selected = 0;
  std::size_t oracle_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t parse_fallbacks = 0;
  std::size_t refinement_splits = 0;
  std::size_t refinement_reallocations = 0;
  std::size_t edges_before = 0;
  std::size_t edges_after = 0;
  std::size_t edges_added = 0;
  std::size_t edges_removed = 0;
  std::size_t edges_skipped = 0;
  std::optional<double> homophily_before;
  std::optional<double> homophily_after;
  std::map<std::string, double> stage_ms;

  std::string to_json() const;
};

/// Stage failure, tagged with the stage name.
class PipelineStageError : public std::runtime_error {
 public:
  PipelineStageError(std::string stage, const std::string& message)
      : std::runtime_error("[" + stage + "] " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Full run: load -> minimize -> select -> prompt+infer -> refine -> sample
/// -> write. Deterministic for identical inputs, config, seed and warm
/// cache.
RunReport run_pipeline(const PipelineConfig& cfg);

void emit_report(const RunReport& report, const std::string& path);

}  // namespace llata
