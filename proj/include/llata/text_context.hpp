#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "llata/graph.hpp"

namespace llata {

/// One class of the node-classification task.
struct ClassInfo {
  std::string name;
  std::string description;  // may be empty; prompt then lists the name only
};

/// Load a JSON array of {name, description} records.
std::vector<ClassInfo> load_class_info(const std::string& path);

/// Per-community softmax weights over exp(cosine feature similarity),
/// excluding the target itself from candidates and normalization.
/// Returns (node, weight) pairs for every other community member, ascending
/// by node id; empty for singleton communities. Weights sum to 1.
std::vector<std::pair<NodeId, double>> similarity_weights(const Graph& g,
                                                          const NodeSet& community,
                                                          NodeId alpha);

struct AugmentedText {
  NodeId node = 0;
  std::string base_text;
  // (source node, text), descending weight order; each source passed the
  // epsilon filter and has non-empty text.
  std::vector<std::pair<NodeId, std::string>> appended;

  /// Base text joined with the appended texts behind a fixed separator.
  std::string concatenated() const;
};

/// Append the texts of the up-to-k_top highest-weight community members with
/// weight >= epsilon. Members with empty text are skipped before the cap.
AugmentedText augment_text(const Graph& g, const NodeSet& community, NodeId alpha,
                           double epsilon, std::size_t k_top);

struct PromptBundle {
  std::string task_description;
  std::string topology_description;  // community membership / neighbor note
  std::vector<ClassInfo> classes;
  AugmentedText payload;
  std::string entity = "paper";  // noun used by the default wording
};

/// Example-format line for the probability elicitation: c integers in
/// brackets. Matches the documented 6-class example exactly.
std::string format_line(std::size_t class_count);

/// Render the prompt: class list with descriptions, target text, related
/// community texts (omitted when empty), then the 0-9 integer elicitation
/// instruction. Deterministic for a given bundle. `template_text`, when
/// non-empty, overrides the default layout via {classes}, {target_text},
/// {related_texts}, {format_line} (and {topology}) placeholders.
/// `max_chars_per_text` caps each text (0 = uncapped).
std::string build_prompt(const PromptBundle& bundle, const std::string& template_text = {},
                         std::size_t max_chars_per_text = 2000);

}  // namespace llata
