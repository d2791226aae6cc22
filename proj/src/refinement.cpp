#include "llata/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "llata/error.hpp"
#include "llata/kernels.hpp"
#include "llata/rng.hpp"

namespace llata {

namespace {

double sqdist(const SoftLabel& a, std::span<const double> b) {
  return kernels::squared_distance(a.view(), b);
}

std::vector<std::vector<double>> centroids_from(std::span<const SoftLabel> points,
                                                const std::vector<std::size_t>& labels,
                                                std::size_t k) {
  const std::size_t dim = points[0].size();
  std::vector<std::vector<double>> centroids(k, std::vector<double>(dim, 0.0));
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    ++counts[labels[i]];
    for (std::size_t d = 0; d < dim; ++d) centroids[labels[i]][d] += points[i].probs[d];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    for (double& x : centroids[c]) x /= static_cast<double>(counts[c]);
  }
  return centroids;
}

}  // namespace

ClusterAssignment kmeans(std::span<const SoftLabel> points, std::size_t k, std::uint64_t seed) {
  const std::size_t n = points.size();
  if (k < 2 || k > n) throw std::domain_error("kmeans needs 2 <= k <= |points|");

  ClusterAssignment out;
  out.k = k;
  out.labels.assign(n, 0);
  if (k == n) {
    for (std::size_t i = 0; i < n; ++i) out.labels[i] = i;
    return out;
  }

  Rng rng(seed);
  auto seeds = rng.sample_indices(n, k);
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  for (std::size_t s : seeds) {
    centroids.emplace_back(points[s].probs);
  }

  for (int iter = 0; iter < 200; ++iter) {
    std::vector<std::size_t> labels(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      double best = sqdist(points[i], centroids[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = sqdist(points[i], centroids[c]);
        if (d < best) {  // strict: ties keep the lower cluster index
          best = d;
          labels[i] = c;
        }
      }
    }

    // repair empty clusters from the point farthest from its own centroid
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t l : labels) ++counts[l];
    for (std::size_t empty = 0; empty < k; ++empty) {
      if (counts[empty] != 0) continue;
      std::size_t pick = n;
      double worst = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[labels[i]] < 2) continue;
        const double d = sqdist(points[i], centroids[labels[i]]);
        if (d > worst) {
          worst = d;
          pick = i;
        }
      }
      if (pick == n) break;  // nothing movable; duplicated points
      --counts[labels[pick]];
      labels[pick] = empty;
      ++counts[empty];
    }

    const bool converged = labels == out.labels && iter > 0;
    out.labels = std::move(labels);
    if (converged) break;
    centroids = centroids_from(points, out.labels, k);
  }
  return out;
}

double silhouette(std::span<const SoftLabel> points, const ClusterAssignment& assignment) {
  const std::size_t n = points.size();
  const std::size_t k = assignment.k;
  if (k < 2) throw std::domain_error("silhouette needs at least two clusters");
  if (n < 3) throw std::domain_error("silhouette needs at least three points");

  std::vector<std::size_t> counts(k, 0);
  for (std::size_t l : assignment.labels) ++counts[l];

  double total = 0.0;
  std::vector<double> sums(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[assignment.labels[j]] +=
          std::sqrt(kernels::squared_distance(points[i].view(), points[j].view()));
    }
    const std::size_t own = assignment.labels[i];
    if (counts[own] < 2) continue;  // singleton clusters contribute 0
    const double a = sums[own] / static_cast<double>(counts[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c == own || counts[c] == 0) continue;
      b = std::min(b, sums[c] / static_cast<double>(counts[c]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;  // a == b == 0 contributes 0
  }
  return total / static_cast<double>(n);
}

std::optional<ClusterAssignment> adaptive_cluster(std::span<const SoftLabel> points, double s,
                                                  std::uint64_t seed) {
  if (s <= 0.0) throw std::domain_error("improvement threshold s must be positive");
  const std::size_t m = points.size();
  if (m < 4) return std::nullopt;

  std::optional<ClusterAssignment> best;
  double sil_max = 0.0;
  for (std::size_t k = 2; k <= m / 2; ++k) {
    ClusterAssignment asg = kmeans(points, k, seed);
    const double sil = silhouette(points, asg);
    if (sil - sil_max < s) break;
    sil_max = sil;
    asg.mean_silhouette = sil;
    best = std::move(asg);
  }
  return best;
}

namespace {

std::vector<double> mean_leaf_soft_label(const EncodingTree& t, int community_id,
                                         std::span<const SoftLabel> soft_labels) {
  std::vector<double> mean;
  std::size_t count = 0;
  for (int c : t.node(community_id).children) {
    const TreeNode& child = t.node(c);
    if (!child.is_leaf()) continue;
    const auto& p = soft_labels[static_cast<std::size_t>(child.graph_node)].probs;
    if (mean.empty()) mean.assign(p.size(), 0.0);
    for (std::size_t d = 0; d < p.size(); ++d) mean[d] += p[d];
    ++count;
  }
  if (count > 0) {
    for (double& x : mean) x /= static_cast<double>(count);
  }
  return mean;
}

bool has_leaf_child(const EncodingTree& t, int id) {
  for (int c : t.node(id).children) {
    if (t.node(c).is_leaf()) return true;
  }
  return false;
}

}  // namespace

RefinedTree refine_tree(const EncodingTree& tree, std::span<const SoftLabel> soft_labels,
                        double s, std::uint64_t seed) {
  if (soft_labels.size() != tree.graph().node_count()) {
    throw std::invalid_argument("refine_tree needs a soft label for every node");
  }

  RefinedTree out{tree, {}};
  EncodingTree& t = out.tree;

  const auto snapshot = t.low_level_communities();
  for (const auto& [comm_id, members] : snapshot) {
    std::vector<SoftLabel> pts;
    pts.reserve(members.size());
    for (NodeId v : members) pts.push_back(soft_labels[v]);

    const auto clustering = adaptive_cluster(pts, s, seed);
    if (!clustering) continue;

    std::vector<std::vector<NodeId>> groups(clustering->k);
    {
      std::size_t i = 0;
      for (NodeId v : members) groups[clustering->labels[i++]].push_back(v);
    }

    const int parent_for_new = comm_id == t.root() ? t.root() : t.node(comm_id).parent;

    for (const auto& group : groups) {
      if (group.size() < 2) continue;
      const int fresh = t.new_child(parent_for_new);
      for (NodeId v : group) t.reparent(t.leaf_of(v), fresh);
      out.moves.push_back({comm_id, RefinementMove::Action::split, group});
    }

    for (const auto& group : groups) {
      if (group.size() != 1) continue;
      const NodeId v = group[0];
      int target = -1;
      double best_sim = -std::numeric_limits<double>::infinity();
      std::vector<int> candidates(t.node(parent_for_new).children);
      std::sort(candidates.begin(), candidates.end());
      for (int c : candidates) {
        if (c == comm_id || t.node(c).is_leaf() || !has_leaf_child(t, c)) continue;
        const auto mean = mean_leaf_soft_label(t, c, soft_labels);
        const double sim = kernels::cosine(soft_labels[v].view(), std::span<const double>(mean));
        if (sim > best_sim) {  // strict: ties keep the smallest community id
          best_sim = sim;
          target = c;
        }
      }
      if (target < 0) continue;  // no sibling community; the leaf stays put
      t.reparent(t.leaf_of(v), target);
      out.moves.push_back({comm_id, RefinementMove::Action::reallocate, {v}});
    }

    t.remove_if_childless(comm_id);
  }

  t.recompute_caches();
  t.validate();
  return out;
}

void write_refinement_log(const std::vector<RefinementMove>& moves, const std::string& path) {
  std::ofstream outfile(path);
  if (!outfile) throw InputError("cannot write " + path);
  for (const RefinementMove& mv : moves) {
    nlohmann::json j;
    j["community"] = mv.community;
    j["action"] = mv.action == RefinementMove::Action::split ? "split" : "reallocate";
    j["members"] = mv.members;
    outfile << j.dump() << '\n';
  }
}

}  // namespace llata
