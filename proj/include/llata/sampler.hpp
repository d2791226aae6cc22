#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "llata/encoding_tree.hpp"
#include "llata/oracle.hpp"

namespace llata {

enum class SamplingMode { add, remove, both };

struct SamplingConfig {
  std::size_t theta = 5;   // candidate-set size
  std::size_t rate = 1;    // per-community iteration multiplier r
  SamplingMode mode = SamplingMode::both;
  std::uint64_t seed = 42;

  void validate() const;  // throws ConfigError
};

struct EdgeAction {
  enum class Kind { added, removed, skipped };
  Kind kind;
  NodeId u = 0;
  std::optional<NodeId> v;
  std::string reason;  // set for skips
};

/// Softmax over the members' leaf entropy terms. Members and the returned
/// probabilities are index-aligned.
std::vector<double> p_topo(const EncodingTree& tree, const NodeSet& community);

/// Softmax over cos(soft label of candidate, soft label of alpha).
std::vector<double> p_sema(std::span<const SoftLabel> soft_labels, NodeId alpha,
                           std::span<const NodeId> candidates);

/// Candidate set for alpha: its low-level community minus itself, expanded
/// with whole sibling communities under the grandparent (descending mean
/// soft-label similarity) while smaller than theta, then capped to the theta
/// individually most-similar members.
std::vector<NodeId> expand_candidates(const EncodingTree& tree, NodeId alpha, std::size_t theta,
                                      std::span<const SoftLabel> soft_labels);

struct SamplingResult {
  Graph graph;
  std::vector<EdgeAction> actions;
};

/// Leaf-oriented two-step sampling over the selected low-level communities
/// (tree node ids). Entropy terms are frozen from the tree; edge mutations
/// apply to a working copy of the graph. Deterministic given the seed.
SamplingResult run_sampling(const Graph& g, const EncodingTree& tree,
                            std::span<const SoftLabel> soft_labels, const SamplingConfig& cfg,
                            std::span<const int> selected_communities);

/// Append the action log as JSON-lines {kind, u, v, reason?}.
void write_action_log(const std::vector<EdgeAction>& actions, const std::string& path);

}  // namespace llata
