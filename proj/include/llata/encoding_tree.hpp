#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "llata/graph.hpp"

namespace llata {

struct TreeNode {
  int id = -1;
  int parent = -1;                 // -1 for the root
  std::vector<int> children;
  std::uint64_t vol = 0;           // cached volume of the community
  std::uint64_t cut = 0;           // cached edges crossing the community
  int graph_node = -1;             // >= 0 for leaves
  bool alive = true;

  bool is_leaf() const { return graph_node >= 0; }
};

struct TreeAuditEntry {
  enum class Op { combine, lift };
  Op op;
  int a;      // combined/lifted node
  int b;      // combine partner, or the parent the node was lifted out of
  double delta;  // entropy(before) - entropy(after), in bits
};

/// Hierarchical encoding tree over a fixed graph. Leaves biject to graph
/// nodes; every internal node is a community. Volume and cut are cached per
/// node and maintained incrementally by combine/lift; the total entropy (Eq.
/// over all non-root nodes of -(g/2m) log2(vol/parent vol)) is kept as a
/// running accumulator.
///
/// The graph must outlive the tree and stay unmodified while the tree is in
/// use; structure edits downstream happen on a working copy of the graph.
class EncodingTree {
 public:
  /// Height-1 tree: root plus one leaf per graph node.
  static EncodingTree flat(const Graph& g);

  const Graph& graph() const { return *g_; }
  int root() const { return root_; }
  const TreeNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  std::size_t node_slots() const { return nodes_.size(); }
  int leaf_of(NodeId v) const { return leaf_of_[v]; }

  /// Alive node ids, ascending.
  std::vector<int> alive_ids() const;

  /// Max number of edges from the root to any leaf.
  std::size_t height() const;

  /// Graph nodes below a tree node (the node's community).
  NodeSet community(int id) const;

  /// Entropy contribution of one non-root node, in bits. Zero when the cut
  /// or volume is zero. Throws std::domain_error for the root.
  double node_entropy(int id) const;

  /// Incrementally maintained total entropy in bits.
  double entropy() const { return entropy_bits_; }

  /// Sum of node_entropy over all alive non-root nodes, ascending id order.
  double tree_entropy() const;

  /// Entropy drop of combining siblings a and b (positive = improvement).
  double delta_combine(int a, int b) const;

  /// Insert a new parent over siblings a and b. Returns the new node id.
  int combine(int a, int b);

  /// Entropy drop of lifting `a` to its grandparent.
  double delta_lift(int a) const;

  /// Reattach `a` to its grandparent; delete the old parent if left
  /// childless. Throws std::domain_error when the parent is the root.
  void lift(int a);

  /// Distinct parents of leaves with their leaf members, ascending id.
  std::vector<std::pair<int, NodeSet>> low_level_communities() const;

  /// Full invariant check (structure, bijection, exact cache equality, and
  /// optionally height). Throws InternalError with a dump on failure.
  void validate(std::optional<std::size_t> max_height = std::nullopt) const;

  /// Per-node JSON dump {id, parent, children, community, g, vol,
  /// entropy_term} for debugging and golden tests.
  std::string to_json() const;

  const std::vector<TreeAuditEntry>& audit_log() const { return audit_; }

  // Low-level surgery for tree refinement. These edit structure only;
  // callers must finish with recompute_caches() and validate().
  int new_child(int parent_id);
  void reparent(int node_id, int new_parent_id);
  void remove_if_childless(int node_id);
  void recompute_caches();

 private:
  explicit EncodingTree(const Graph& g) : g_(&g) {}

  TreeNode& mut(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  double entropy_term(std::uint64_t cut, std::uint64_t vol, std::uint64_t parent_vol) const;
  std::uint64_t cross_edges(int a, int b) const;
  void collect_leaves(int id, std::vector<NodeId>& out) const;

  const Graph* g_ = nullptr;
  std::vector<TreeNode> nodes_;
  int root_ = -1;
  std::vector<int> leaf_of_;
  std::uint64_t two_m_ = 0;
  double entropy_bits_ = 0.0;
  std::vector<TreeAuditEntry> audit_;
};

/// Greedy structural-entropy minimization: combine root children by argmax
/// entropy drop while the root has more than two children (connected pairs
/// only), then lift by argmax drop until the height is at most K. Ties break
/// toward the smallest id pair, so the result is deterministic. `tie_seed`
/// is reserved for a future randomized mode and unused.
EncodingTree minimize_entropy(const Graph& g, int K, std::uint64_t tie_seed = 0);

}  // namespace llata
