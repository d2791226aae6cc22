#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "llata/encoding_tree.hpp"
#include "llata/oracle.hpp"

namespace llata {

struct ClusterAssignment {
  std::vector<std::size_t> labels;  // per-point cluster index in [0, k)
  std::size_t k = 0;
  double mean_silhouette = 0.0;     // filled by adaptive_cluster
};

/// Lloyd's k-means on soft-label vectors (Euclidean distance), deterministic
/// given the seed. Empty clusters are repaired by reseeding from the point
/// farthest from its centroid. 2 <= k <= |points| required.
ClusterAssignment kmeans(std::span<const SoftLabel> points, std::size_t k, std::uint64_t seed);

/// Mean silhouette over all points: (b - a) / max(a, b) with a the mean
/// intra-cluster distance and b the smallest mean distance to another
/// cluster. Singleton clusters and degenerate a = b = 0 points score 0.
double silhouette(std::span<const SoftLabel> points, const ClusterAssignment& assignment);

/// Scan k = 2 .. floor(|points| / 2) keeping the last k whose silhouette
/// improved on the running maximum by at least `s`; stop at the first k that
/// does not. Returns nullopt ("unchanged") for fewer than 4 points or when
/// no k was accepted.
std::optional<ClusterAssignment> adaptive_cluster(std::span<const SoftLabel> points, double s,
                                                  std::uint64_t seed);

struct RefinementMove {
  enum class Action { split, reallocate };
  int community;  // tree node id of the low-level community acted on
  Action action;
  std::vector<NodeId> members;
};

struct RefinedTree {
  EncodingTree tree;
  std::vector<RefinementMove> moves;
};

/// Leaf dependency allocation: adaptively re-cluster each low-level
/// community on its members' soft labels; clusters of size >= 2 become new
/// sibling communities under the original community's parent, and singleton
/// clusters are reallocated to the sibling community with the most similar
/// mean soft label (cosine; ties to the smallest id). Caches are recomputed
/// and the full invariant suite re-validated afterwards.
RefinedTree refine_tree(const EncodingTree& tree, std::span<const SoftLabel> soft_labels,
                        double s, std::uint64_t seed);

/// Append the move log as JSON-lines {community, action, members}.
void write_refinement_log(const std::vector<RefinementMove>& moves, const std::string& path);

}  // namespace llata
