#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace llata {

using NodeId = std::uint32_t;

/// Sorted sequence of distinct node ids.
class NodeSet {
 public:
  NodeSet() = default;
  static NodeSet from_unsorted(std::vector<NodeId> ids);
  static NodeSet singleton(NodeId v);

  bool contains(NodeId v) const;
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const std::vector<NodeId>& ids() const { return ids_; }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }

  /// Nodes of [0, n) not in this set.
  NodeSet complement(std::size_t n) const;

 private:
  std::vector<NodeId> ids_;
};

struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<float> data;  // row-major

  bool empty() const { return rows == 0; }
  std::span<const float> row(NodeId v) const {
    return {data.data() + static_cast<std::size_t>(v) * dim, dim};
  }
};

/// Undirected, unweighted text-attributed graph. No self-loops, no duplicate
/// edges; adjacency lists are kept sorted and symmetric.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n) : adj_(n) {}

  std::size_t node_count() const { return adj_.size(); }
  std::size_t edge_count() const { return m_; }

  std::size_t degree(NodeId v) const { return adj_[v].size(); }
  std::span<const NodeId> neighbors(NodeId v) const { return adj_[v]; }
  bool has_edge(NodeId u, NodeId v) const;

  /// Insert the undirected edge {u, v}. Returns false (no-op) if present.
  /// Throws InputError for self-loops or out-of-range endpoints.
  bool add_edge(NodeId u, NodeId v);
  /// Remove the undirected edge {u, v}. Returns false (no-op) if absent.
  bool remove_edge(NodeId u, NodeId v);

  /// Sum of degrees over the set. Volume of the full node set is 2m.
  std::uint64_t volume(const NodeSet& s) const;
  /// Number of edges with exactly one endpoint in the set.
  std::uint64_t cut_size(const NodeSet& s) const;

  /// All edges as (u, v) with u < v, sorted.
  std::vector<std::pair<NodeId, NodeId>> edges() const;

  // Node attributes, filled by the loader. Mutation ops leave them alone.
  std::vector<std::string> texts;  // size n when loaded with texts
  FeatureMatrix features;
  std::vector<int> labels;  // size n or empty

  bool has_labels() const { return !labels.empty(); }
  bool has_features() const { return !features.empty(); }

 private:
  void check_endpoints(NodeId u, NodeId v) const;

  std::vector<std::vector<NodeId>> adj_;
  std::size_t m_ = 0;
};

/// Fraction of edges whose endpoints share a label. Throws MetricError when
/// the graph has no edges.
double edge_homophily(const Graph& g, std::span<const int> labels);

struct LoadPaths {
  std::string edges;
  std::string texts;     // empty string = absent
  std::string features;  // empty string = absent
  std::string labels;    // empty string = absent
};

/// Load a text-attributed graph.
///
/// Formats: edge list is two whitespace-separated integers per line with
/// '#'-prefixed comment lines; texts are JSON-lines {"id": int, "text": str};
/// features are CSV rows of floats with row index = node id; labels are one
/// integer per line. The node count comes from the texts/features/labels
/// census (max over their declared ranges); edge endpoints are range-checked
/// against it. Without any census records, n = 1 + max edge endpoint.
Graph load_graph(const LoadPaths& paths);

/// Structure-only load of an edge list (n inferred from endpoints).
Graph load_edge_list(const std::string& path);

/// Write the edge list: "u v" per line, u < v, sorted by (u, v).
void save_edge_list(const Graph& g, const std::string& path);

}  // namespace llata
