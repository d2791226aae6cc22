#include "llata/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "llata/error.hpp"
#include "llata/kernels.hpp"
#include "llata/rng.hpp"

namespace llata {

void SamplingConfig::validate() const {
  if (theta < 1) throw ConfigError("theta must be >= 1");
  if (rate < 1) throw ConfigError("sampling rate r must be >= 1");
}

std::vector<double> p_topo(const EncodingTree& tree, const NodeSet& community) {
  std::vector<double> probs;
  probs.reserve(community.size());
  for (NodeId v : community) {
    probs.push_back(tree.node_entropy(tree.leaf_of(v)));
  }
  kernels::softmax_inplace(probs);
  return probs;
}

std::vector<double> p_sema(std::span<const SoftLabel> soft_labels, NodeId alpha,
                           std::span<const NodeId> candidates) {
  std::vector<double> probs;
  probs.reserve(candidates.size());
  const auto ya = soft_labels[alpha].view();
  for (NodeId beta : candidates) {
    probs.push_back(kernels::cosine(soft_labels[beta].view(), ya));
  }
  kernels::softmax_inplace(probs);
  return probs;
}

namespace {

// One ranking: descending similarity to alpha, ties toward the smaller node
// id. The ascending order used for removals is its exact reverse, so tied
// candidates end up on opposite ends instead of colliding with additions.
void sort_by_similarity(std::vector<NodeId>& nodes, std::span<const SoftLabel> soft_labels,
                        NodeId alpha, bool descending) {
  const auto ya = soft_labels[alpha].view();
  std::vector<std::pair<double, NodeId>> keyed;
  keyed.reserve(nodes.size());
  for (NodeId v : nodes) {
    keyed.emplace_back(kernels::cosine(soft_labels[v].view(), ya), v);
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  if (!descending) std::reverse(keyed.begin(), keyed.end());
  for (std::size_t i = 0; i < keyed.size(); ++i) nodes[i] = keyed[i].second;
}

std::vector<double> mean_soft_label(const EncodingTree& tree, int node_id,
                                    std::span<const SoftLabel> soft_labels) {
  NodeSet leaves = tree.community(node_id);
  std::vector<double> mean;
  for (NodeId v : leaves) {
    const auto& p = soft_labels[v].probs;
    if (mean.empty()) mean.assign(p.size(), 0.0);
    for (std::size_t d = 0; d < p.size(); ++d) mean[d] += p[d];
  }
  if (!leaves.empty()) {
    for (double& x : mean) x /= static_cast<double>(leaves.size());
  }
  return mean;
}

std::vector<NodeId> leaf_members(const EncodingTree& tree, int community_id) {
  std::vector<NodeId> members;
  for (int c : tree.node(community_id).children) {
    if (tree.node(c).is_leaf()) {
      members.push_back(static_cast<NodeId>(tree.node(c).graph_node));
    }
  }
  std::sort(members.begin(), members.end());
  return members;
}

}  // namespace

std::vector<NodeId> expand_candidates(const EncodingTree& tree, NodeId alpha, std::size_t theta,
                                      std::span<const SoftLabel> soft_labels) {
  const int leaf = tree.leaf_of(alpha);
  const int parent = tree.node(leaf).parent;

  std::vector<NodeId> candidates = leaf_members(tree, parent);
  std::erase(candidates, alpha);

  if (candidates.size() < theta) {
    const int grandparent = tree.node(parent).parent;
    if (grandparent >= 0) {
      std::vector<std::pair<double, int>> siblings;  // (similarity, community id)
      const auto ya = soft_labels[alpha].view();
      for (int c : tree.node(grandparent).children) {
        if (c == parent || tree.node(c).is_leaf()) continue;
        const auto mean = mean_soft_label(tree, c, soft_labels);
        siblings.emplace_back(kernels::cosine(std::span<const double>(mean), ya), c);
      }
      std::sort(siblings.begin(), siblings.end(), [](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first > y.first;
        return x.second < y.second;
      });
      for (const auto& [sim, c] : siblings) {
        if (candidates.size() >= theta) break;
        for (NodeId v : tree.community(c)) {
          candidates.push_back(v);
        }
      }
    }
  }

  if (candidates.size() > theta) {
    sort_by_similarity(candidates, soft_labels, alpha, /*descending=*/true);
    candidates.resize(theta);
    std::sort(candidates.begin(), candidates.end());
  }
  return candidates;
}

SamplingResult run_sampling(const Graph& g, const EncodingTree& tree,
                            std::span<const SoftLabel> soft_labels, const SamplingConfig& cfg,
                            std::span<const int> selected_communities) {
  cfg.validate();
  if (soft_labels.size() != g.node_count()) {
    throw std::invalid_argument("run_sampling needs a soft label for every node");
  }

  SamplingResult out{g, {}};
  Rng rng(cfg.seed);

  std::vector<int> selected(selected_communities.begin(), selected_communities.end());
  std::sort(selected.begin(), selected.end());

  for (int comm_id : selected) {
    const std::vector<NodeId> members = leaf_members(tree, comm_id);
    if (members.empty()) continue;
    const NodeSet member_set = NodeSet::from_unsorted(members);
    const std::vector<double> topo = p_topo(tree, member_set);

    const std::size_t iterations = members.size() * cfg.rate;
    for (std::size_t i = 0; i < iterations; ++i) {
      const bool adding = cfg.mode == SamplingMode::add ||
                          (cfg.mode == SamplingMode::both && i % 2 == 0);
      const NodeId alpha = members[rng.draw_discrete(topo)];
      std::vector<NodeId> candidates = expand_candidates(tree, alpha, cfg.theta, soft_labels);

      if (adding) {
        if (candidates.empty()) {
          out.actions.push_back({EdgeAction::Kind::skipped, alpha, std::nullopt, "no candidates"});
          continue;
        }
        sort_by_similarity(candidates, soft_labels, alpha, /*descending=*/true);
        candidates.resize(std::max<std::size_t>(1, candidates.size() / 2));
        const auto probs = p_sema(soft_labels, alpha, candidates);
        const NodeId beta = candidates[rng.draw_discrete(probs)];
        if (out.graph.has_edge(alpha, beta)) {
          out.actions.push_back({EdgeAction::Kind::skipped, alpha, beta, "edge exists"});
        } else {
          out.graph.add_edge(alpha, beta);
          out.actions.push_back({EdgeAction::Kind::added, alpha, beta, {}});
        }
      } else {
        // least-similar half of the candidate ordering, then current
        // neighbors only: removing a non-edge is meaningless
        sort_by_similarity(candidates, soft_labels, alpha, /*descending=*/false);
        candidates.resize(std::max<std::size_t>(1, candidates.size() / 2));
        std::erase_if(candidates,
                      [&](NodeId c) { return !out.graph.has_edge(alpha, c); });
        if (candidates.empty()) {
          out.actions.push_back(
              {EdgeAction::Kind::skipped, alpha, std::nullopt, "no candidate neighbors"});
          continue;
        }
        const auto probs = p_sema(soft_labels, alpha, candidates);
        const NodeId beta = candidates[rng.draw_discrete(probs)];
        out.graph.remove_edge(alpha, beta);
        out.actions.push_back({EdgeAction::Kind::removed, alpha, beta, {}});
      }
    }
  }
  return out;
}

void write_action_log(const std::vector<EdgeAction>& actions, const std::string& path) {
  std::ofstream outfile(path);
  if (!outfile) throw InputError("cannot write " + path);
  for (const EdgeAction& action : actions) {
    nlohmann::json j;
    switch (action.kind) {
      case EdgeAction::Kind::added: j["kind"] = "added"; break;
      case EdgeAction::Kind::removed: j["kind"] = "removed"; break;
      case EdgeAction::Kind::skipped: j["kind"] = "skipped"; break;
    }
    j["u"] = action.u;
    if (action.v) {
      j["v"] = *action.v;
    } else {
      j["v"] = nullptr;
    }
    if (!action.reason.empty()) j["reason"] = action.reason;
    outfile << j.dump() << '\n';
  }
}

}  // namespace llata
