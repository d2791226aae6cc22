#include "llata/encoding_tree.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <map>

#include "json.hpp"
#include "llata/error.hpp"

namespace llata {

EncodingTree EncodingTree::flat(const Graph& g) {
  EncodingTree t(g);
  const std::size_t n = g.node_count();
  if (n == 0) throw InputError("cannot build a tree over an empty graph");
  t.two_m_ = 2 * g.edge_count();
  t.nodes_.reserve(n + 1);

  TreeNode root;
  root.id = 0;
  root.vol = t.two_m_;
  root.cut = 0;
  t.nodes_.push_back(root);
  t.root_ = 0;

  t.leaf_of_.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    TreeNode leaf;
    leaf.id = static_cast<int>(t.nodes_.size());
    leaf.parent = 0;
    leaf.graph_node = static_cast<int>(v);
    leaf.vol = g.degree(v);
    leaf.cut = g.degree(v);  // singleton cut equals degree (no self-loops)
    t.leaf_of_[v] = leaf.id;
    t.nodes_[0].children.push_back(leaf.id);
    t.nodes_.push_back(std::move(leaf));
  }
  t.entropy_bits_ = t.tree_entropy();
  return t;
}

std::vector<int> EncodingTree::alive_ids() const {
  std::vector<int> ids;
  ids.reserve(nodes_.size());
  for (const TreeNode& nd : nodes_) {
    if (nd.alive) ids.push_back(nd.id);
  }
  return ids;
}

std::size_t EncodingTree::height() const {
  std::size_t best = 0;
  std::vector<std::pair<int, std::size_t>> stack{{root_, 0}};
  while (!stack.empty()) {
    auto [id, depth] = stack.back();
    stack.pop_back();
    best = std::max(best, depth);
    for (int c : node(id).children) stack.emplace_back(c, depth + 1);
  }
  return best;
}

void EncodingTree::collect_leaves(int id, std::vector<NodeId>& out) const {
  const TreeNode& nd = node(id);
  if (nd.is_leaf()) {
    out.push_back(static_cast<NodeId>(nd.graph_node));
    return;
  }
  for (int c : nd.children) collect_leaves(c, out);
}

NodeSet EncodingTree::community(int id) const {
  std::vector<NodeId> leaves;
  collect_leaves(id, leaves);
  return NodeSet::from_unsorted(std::move(leaves));
}

double EncodingTree::entropy_term(std::uint64_t cut, std::uint64_t vol,
                                  std::uint64_t parent_vol) const {
  // 0 * log(.) = 0 conventions: degree-0 communities and uncut communities
  // contribute nothing; vol == parent_vol gives log2(1) = 0.
  if (cut == 0 || vol == 0 || parent_vol == 0 || vol == parent_vol) return 0.0;
  const double ratio = static_cast<double>(vol) / static_cast<double>(parent_vol);
  return -(static_cast<double>(cut) / static_cast<double>(two_m_)) * std::log2(ratio);
}

double EncodingTree::node_entropy(int id) const {
  const TreeNode& nd = node(id);
  if (nd.parent < 0) throw std::domain_error("node entropy undefined for the root");
  return entropy_term(nd.cut, nd.vol, node(nd.parent).vol);
}

double EncodingTree::tree_entropy() const {
  double total = 0.0;
  for (const TreeNode& nd : nodes_) {
    if (!nd.alive || nd.parent < 0) continue;
    total += entropy_term(nd.cut, nd.vol, node(nd.parent).vol);
  }
  return total;
}

std::uint64_t EncodingTree::cross_edges(int a, int b) const {
  NodeSet ca = community(a);
  NodeSet cb = community(b);
  const bool a_smaller = node(a).vol <= node(b).vol;
  const NodeSet& from = a_smaller ? ca : cb;
  const NodeSet& into = a_smaller ? cb : ca;
  std::uint64_t count = 0;
  for (NodeId v : from) {
    for (NodeId w : g_->neighbors(v)) {
      if (into.contains(w)) ++count;
    }
  }
  return count;
}

double EncodingTree::delta_combine(int a, int b) const {
  const TreeNode& na = node(a);
  const TreeNode& nb = node(b);
  if (a == b || !na.alive || !nb.alive) throw std::domain_error("combine needs two distinct nodes");
  if (na.parent < 0 || na.parent != nb.parent) {
    throw std::domain_error("combine needs siblings");
  }
  const std::uint64_t parent_vol = node(na.parent).vol;
  const std::uint64_t cross = cross_edges(a, b);

  const double before = entropy_term(na.cut, na.vol, parent_vol) +
                        entropy_term(nb.cut, nb.vol, parent_vol);
  const std::uint64_t new_vol = na.vol + nb.vol;
  const std::uint64_t new_cut =
      static_cast<std::uint64_t>(static_cast<std::int64_t>(na.cut + nb.cut) -
                                 2 * static_cast<std::int64_t>(cross));
  const double after = entropy_term(na.cut, na.vol, new_vol) +
                       entropy_term(nb.cut, nb.vol, new_vol) +
                       entropy_term(new_cut, new_vol, parent_vol);
  return before - after;
}

int EncodingTree::combine(int a, int b) {
  const double delta = delta_combine(a, b);
  TreeNode& na = mut(a);
  TreeNode& nb = mut(b);
  const int parent = na.parent;
  const std::uint64_t cross = cross_edges(a, b);

  TreeNode phi;
  phi.id = static_cast<int>(nodes_.size());
  phi.parent = parent;
  phi.children = {a, b};
  phi.vol = na.vol + nb.vol;
  phi.cut = static_cast<std::uint64_t>(static_cast<std::int64_t>(na.cut + nb.cut) -
                                       2 * static_cast<std::int64_t>(cross));
  na.parent = phi.id;
  nb.parent = phi.id;

  auto& siblings = mut(parent).children;
  std::erase(siblings, a);
  std::erase(siblings, b);
  siblings.push_back(phi.id);

  nodes_.push_back(std::move(phi));
  entropy_bits_ -= delta;
  audit_.push_back({TreeAuditEntry::Op::combine, a, b, delta});
  return static_cast<int>(nodes_.size()) - 1;
}

namespace {
struct LiftInfo {
  double delta;
  std::uint64_t edges_within_parent;  // edges between C_a and C_parent \ C_a
};
}  // namespace

double EncodingTree::delta_lift(int a) const {
  const TreeNode& na = node(a);
  if (na.parent < 0) throw std::domain_error("cannot lift the root");
  const TreeNode& nb = node(na.parent);
  if (nb.parent < 0) throw std::domain_error("lift parent is the root");
  const TreeNode& ng = node(nb.parent);

  NodeSet ca = community(a);
  NodeSet cb = community(na.parent);
  std::uint64_t e_ad = 0;
  for (NodeId v : ca) {
    for (NodeId w : g_->neighbors(v)) {
      if (cb.contains(w) && !ca.contains(w)) ++e_ad;
    }
  }

  double before = entropy_term(na.cut, na.vol, nb.vol) +
                  entropy_term(nb.cut, nb.vol, ng.vol);
  for (int x : nb.children) {
    if (x != a) before += entropy_term(node(x).cut, node(x).vol, nb.vol);
  }

  double after = entropy_term(na.cut, na.vol, ng.vol);
  if (nb.children.size() > 1) {
    const std::uint64_t new_vol = nb.vol - na.vol;
    const std::uint64_t new_cut =
        static_cast<std::uint64_t>(static_cast<std::int64_t>(nb.cut) -
                                   static_cast<std::int64_t>(na.cut) +
                                   2 * static_cast<std::int64_t>(e_ad));
    after += entropy_term(new_cut, new_vol, ng.vol);
    for (int x : nb.children) {
      if (x != a) after += entropy_term(node(x).cut, node(x).vol, new_vol);
    }
  }
  return before - after;
}

void EncodingTree::lift(int a) {
  const double delta = delta_lift(a);  // also validates preconditions

  TreeNode& na = mut(a);
  const int b = na.parent;
  TreeNode& nb = mut(b);
  const int gp = nb.parent;

  NodeSet ca = community(a);
  NodeSet cb = community(b);
  std::uint64_t e_ad = 0;
  for (NodeId v : ca) {
    for (NodeId w : g_->neighbors(v)) {
      if (cb.contains(w) && !ca.contains(w)) ++e_ad;
    }
  }

  nb.vol -= na.vol;
  nb.cut = static_cast<std::uint64_t>(static_cast<std::int64_t>(nb.cut) -
                                      static_cast<std::int64_t>(na.cut) +
                                      2 * static_cast<std::int64_t>(e_ad));
  std::erase(nb.children, a);
  na.parent = gp;
  mut(gp).children.push_back(a);

  if (nb.children.empty()) {
    std::erase(mut(gp).children, b);
    nb.alive = false;
  }
  entropy_bits_ -= delta;
  audit_.push_back({TreeAuditEntry::Op::lift, a, b, delta});
}

std::vector<std::pair<int, NodeSet>> EncodingTree::low_level_communities() const {
  std::vector<std::pair<int, NodeSet>> out;
  for (const TreeNode& nd : nodes_) {
    if (!nd.alive || nd.is_leaf()) continue;
    std::vector<NodeId> members;
    for (int c : nd.children) {
      if (node(c).is_leaf()) members.push_back(static_cast<NodeId>(node(c).graph_node));
    }
    if (!members.empty()) {
      out.emplace_back(nd.id, NodeSet::from_unsorted(std::move(members)));
    }
  }
  return out;  // ascending id: nodes_ scanned in id order
}

void EncodingTree::validate(std::optional<std::size_t> max_height) const {
  auto fail = [&](const std::string& what) {
    throw InternalError("encoding tree invariant violated: " + what);
  };

  const std::size_t n = g_->node_count();
  if (root_ < 0 || !node(root_).alive || node(root_).parent != -1) fail("bad root");

  std::size_t leaf_count = 0;
  std::vector<char> leaf_seen(n, 0);
  for (const TreeNode& nd : nodes_) {
    if (!nd.alive) continue;
    if (nd.id != root_) {
      if (nd.parent < 0 || !node(nd.parent).alive) fail("dangling parent");
      const auto& pc = node(nd.parent).children;
      if (std::count(pc.begin(), pc.end(), nd.id) != 1) fail("parent/child mismatch");
    }
    for (int c : nd.children) {
      if (!node(c).alive || node(c).parent != nd.id) fail("child link broken");
    }
    if (nd.is_leaf()) {
      if (!nd.children.empty()) fail("leaf with children");
      const auto v = static_cast<std::size_t>(nd.graph_node);
      if (v >= n || leaf_seen[v]) fail("leaf bijection broken");
      leaf_seen[v] = 1;
      if (leaf_of_[v] != nd.id) fail("leaf_of mapping stale");
      ++leaf_count;
    } else if (nd.children.empty() && nd.id != root_) {
      fail("empty internal node");
    }
  }
  if (leaf_count != n) fail("leaf count != node count");

  // Community partition plus exact cache equality against the graph.
  for (const TreeNode& nd : nodes_) {
    if (!nd.alive) continue;
    NodeSet comm = community(nd.id);
    if (!nd.is_leaf()) {
      std::size_t child_total = 0;
      for (int c : nd.children) child_total += community(c).size();
      if (child_total != comm.size()) fail("children do not partition parent");
    }
    if (nd.id == root_ && comm.size() != n) fail("root community != V");
    if (g_->volume(comm) != nd.vol) fail("stale volume cache at node " + std::to_string(nd.id));
    if (g_->cut_size(comm) != nd.cut) fail("stale cut cache at node " + std::to_string(nd.id));
  }
  if (node(root_).cut != 0) fail("root cut != 0");

  if (max_height && height() > *max_height) fail("height exceeds bound");
}

std::string EncodingTree::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const TreeNode& nd : nodes_) {
    if (!nd.alive) continue;
    nlohmann::json j;
    j["id"] = nd.id;
    if (nd.parent >= 0) {
      j["parent"] = nd.parent;
    } else {
      j["parent"] = nullptr;
    }
    j["children"] = nd.children;
    j["community"] = community(nd.id).ids();
    j["g"] = nd.cut;
    j["vol"] = nd.vol;
    j["entropy_term"] = nd.parent >= 0 ? node_entropy(nd.id) : 0.0;
    out.push_back(std::move(j));
  }
  return out.dump(2);
}

int EncodingTree::new_child(int parent_id) {
  TreeNode nd;
  nd.id = static_cast<int>(nodes_.size());
  nd.parent = parent_id;
  mut(parent_id).children.push_back(nd.id);
  nodes_.push_back(std::move(nd));
  return static_cast<int>(nodes_.size()) - 1;
}

void EncodingTree::reparent(int node_id, int new_parent_id) {
  TreeNode& nd = mut(node_id);
  if (nd.parent == new_parent_id) return;
  std::erase(mut(nd.parent).children, node_id);
  nd.parent = new_parent_id;
  mut(new_parent_id).children.push_back(node_id);
}

void EncodingTree::remove_if_childless(int node_id) {
  TreeNode& nd = mut(node_id);
  if (node_id == root_ || nd.is_leaf() || !nd.children.empty()) return;
  std::erase(mut(nd.parent).children, node_id);
  nd.alive = false;
}

void EncodingTree::recompute_caches() {
  for (TreeNode& nd : nodes_) {
    if (!nd.alive) continue;
    NodeSet comm = community(nd.id);
    nd.vol = g_->volume(comm);
    nd.cut = g_->cut_size(comm);
  }
  entropy_bits_ = tree_entropy();
}

namespace {

struct CombineCand {
  double delta;
  int a;
  int b;
};

// Max-heap on delta; ties fall to the smallest (a, b) pair.
struct CombineWorse {
  bool operator()(const CombineCand& x, const CombineCand& y) const {
    if (x.delta != y.delta) return x.delta < y.delta;
    if (x.a != y.a) return x.a > y.a;
    return x.b > y.b;
  }
};

}  // namespace

EncodingTree minimize_entropy(const Graph& g, int K, std::uint64_t tie_seed) {
  (void)tie_seed;  // reserved for a future randomized tie-break mode
  if (K < 2) throw ConfigError("tree height K must be >= 2");
  if (g.edge_count() == 0) {
    throw std::domain_error("structural entropy minimization needs at least one edge");
  }

  EncodingTree t = EncodingTree::flat(g);
  const int root = t.root();

  // --- Combine phase: greedy merging of connected root children. ---
  // Cross-edge counts between current root children; pair deltas stay valid
  // while both endpoints remain root children, so the queue only needs lazy
  // liveness checks.
  std::unordered_map<int, std::unordered_map<int, std::uint64_t>> cross;
  for (auto [u, v] : g.edges()) {
    const int a = t.leaf_of(u);
    const int b = t.leaf_of(v);
    ++cross[a][b];
    ++cross[b][a];
  }

  std::priority_queue<CombineCand, std::vector<CombineCand>, CombineWorse> queue;
  for (const auto& [a, nbrs] : cross) {
    for (const auto& [b, c] : nbrs) {
      if (a < b) queue.push({t.delta_combine(a, b), a, b});
    }
  }

  auto is_root_child = [&](int id) {
    const TreeNode& nd = t.node(id);
    return nd.alive && nd.parent == root;
  };

  while (t.node(root).children.size() > 2) {
    CombineCand best{};
    bool found = false;
    while (!queue.empty()) {
      best = queue.top();
      queue.pop();
      if (is_root_child(best.a) && is_root_child(best.b)) {
        found = true;
        break;
      }
    }
    if (!found) break;  // remaining root children are mutually disconnected

    const int phi = t.combine(best.a, best.b);

    auto na = std::move(cross[best.a]);
    auto nb = std::move(cross[best.b]);
    cross.erase(best.a);
    cross.erase(best.b);
    std::map<int, std::uint64_t> merged;  // ordered for deterministic pushes
    for (const auto& [x, c] : na) {
      if (x != best.b) merged[x] += c;
    }
    for (const auto& [x, c] : nb) {
      if (x != best.a) merged[x] += c;
    }
    auto& phi_nbrs = cross[phi];
    for (const auto& [x, c] : merged) {
      auto& xn = cross[x];
      xn.erase(best.a);
      xn.erase(best.b);
      xn[phi] = c;
      phi_nbrs[x] = c;
      queue.push({t.delta_combine(std::min(phi, x), std::max(phi, x)),
                  std::min(phi, x), std::max(phi, x)});
    }
  }

  // --- Lift phase: argmax-delta lifts until the height bound holds. ---
  // Deltas are cached per node and recomputed only where the lift touched
  // the tree; the audit-log replay test cross-checks this bookkeeping.
  std::unordered_map<int, double> delta_cache;
  auto liftable = [&](int id) {
    const TreeNode& nd = t.node(id);
    return nd.alive && nd.parent >= 0 && t.node(nd.parent).parent >= 0;
  };

  while (t.height() > static_cast<std::size_t>(K)) {
    int best_id = -1;
    double best_delta = 0.0;
    for (int id : t.alive_ids()) {
      if (!liftable(id)) continue;
      auto it = delta_cache.find(id);
      if (it == delta_cache.end()) {
        it = delta_cache.emplace(id, t.delta_lift(id)).first;
      }
      if (best_id < 0 || it->second > best_delta) {
        best_id = id;
        best_delta = it->second;
      }
    }
    if (best_id < 0) break;  // no liftable node (height <= 2 already)

    const int b = t.node(best_id).parent;
    const int gp = t.node(b).parent;
    std::vector<int> dirty{best_id, b};
    for (int c : t.node(best_id).children) dirty.push_back(c);
    for (int c : t.node(b).children) {
      dirty.push_back(c);
      for (int cc : t.node(c).children) dirty.push_back(cc);
    }
    for (int c : t.node(gp).children) dirty.push_back(c);

    t.lift(best_id);
    for (int id : dirty) delta_cache.erase(id);
  }

  return t;
}

}  // namespace llata
