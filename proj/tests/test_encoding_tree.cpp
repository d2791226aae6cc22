#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "llata/encoding_tree.hpp"
#include "llata/error.hpp"
#include "llata/graph.hpp"
#include "llata/rng.hpp"
#include "llata/sbm.hpp"

using namespace llata;

namespace {

Graph triangle() {
  Graph g(3);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(2, 0);
  return g;
}

Graph path3() {  // a - b - c
  Graph g(3);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  return g;
}

Graph complete(std::size_t n) {
  Graph g(n);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) g.add_edge(u, v);
  }
  return g;
}

Graph random_graph(Rng& rng, std::size_t n, double p) {
  Graph g(n);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (rng.uniform01() < p) g.add_edge(u, v);
    }
  }
  return g;
}

// Random combine targets: any internal node with >= 2 children.
std::vector<int> multi_child_parents(const EncodingTree& t) {
  std::vector<int> out;
  for (int id : t.alive_ids()) {
    if (!t.node(id).is_leaf() && t.node(id).children.size() >= 2) out.push_back(id);
  }
  return out;
}

std::vector<int> liftable_nodes(const EncodingTree& t) {
  std::vector<int> out;
  for (int id : t.alive_ids()) {
    const TreeNode& nd = t.node(id);
    if (nd.parent >= 0 && t.node(nd.parent).parent >= 0) out.push_back(id);
  }
  return out;
}

}  // namespace

TEST_CASE("flat tree structure") {
  Graph tri = triangle();
  EncodingTree t = EncodingTree::flat(tri);
  CHECK(t.node(t.root()).children.size() == 3);
  CHECK(t.height() == 1);
  t.validate();

  Graph one(1);
  one.texts = {};  // structure only
  EncodingTree single = EncodingTree::flat(one);
  CHECK(single.node(single.root()).children.size() == 1);

  // leaf_of is a bijection
  std::vector<int> seen;
  for (NodeId v = 0; v < 3; ++v) seen.push_back(t.leaf_of(v));
  std::sort(seen.begin(), seen.end());
  CHECK(std::unique(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("node entropy hand values") {
  Graph tri = triangle();
  EncodingTree t = EncodingTree::flat(tri);
  // (2/6) * log2(6/2)
  CHECK(t.node_entropy(t.leaf_of(0)) == doctest::Approx(0.5283).epsilon(1e-3));
  CHECK_THROWS_AS(t.node_entropy(t.root()), std::domain_error);

  Graph p = path3();
  EncodingTree tp = EncodingTree::flat(p);
  CHECK(tp.node_entropy(tp.leaf_of(1)) == doctest::Approx(0.5));  // (2/4) log2(4/2)

  // single-child chain: vol(child) == vol(parent) -> 0
  const int a = tp.leaf_of(0);
  const int b = tp.leaf_of(1);
  const int phi = tp.combine(a, b);
  const int chain = tp.combine(phi, tp.leaf_of(2));
  CHECK(tp.node(chain).vol == tp.node(tp.root()).vol);
  CHECK(tp.node_entropy(chain) == 0.0);
}

TEST_CASE("flat-tree entropy of regular graphs is log2 n") {
  for (std::size_t n = 3; n <= 10; ++n) {
    Graph cyc(n);
    for (NodeId v = 0; v < n; ++v) cyc.add_edge(v, (v + 1) % static_cast<NodeId>(n));
    EncodingTree t = EncodingTree::flat(cyc);
    CHECK(t.tree_entropy() == doctest::Approx(std::log2(double(n))).epsilon(1e-12));

    Graph kn = complete(n);
    EncodingTree tk = EncodingTree::flat(kn);
    CHECK(tk.tree_entropy() == doctest::Approx(std::log2(double(n))).epsilon(1e-12));
  }
  Graph trig = triangle();
  EncodingTree tri = EncodingTree::flat(trig);
  CHECK(tri.tree_entropy() == doctest::Approx(1.5850).epsilon(1e-4));
}

TEST_CASE("path entropy term by term after one combine") {
  Graph p = path3();
  EncodingTree t = EncodingTree::flat(p);
  CHECK(t.tree_entropy() == doctest::Approx(1.5));

  const int phi = t.combine(t.leaf_of(0), t.leaf_of(1));
  CHECK(t.tree_entropy() == doctest::Approx(1.2925).epsilon(1e-4));
  CHECK(t.node_entropy(t.leaf_of(0)) == doctest::Approx(0.3962).epsilon(1e-3));
  CHECK(t.node_entropy(t.leaf_of(1)) == doctest::Approx(0.2925).epsilon(1e-3));
  CHECK(t.node_entropy(t.leaf_of(2)) == doctest::Approx(0.5));
  CHECK(t.node_entropy(phi) == doctest::Approx(0.1038).epsilon(1e-3));
  t.validate();
}

TEST_CASE("delta_combine") {
  Graph p = path3();
  EncodingTree t = EncodingTree::flat(p);
  CHECK(t.delta_combine(t.leaf_of(0), t.leaf_of(1)) == doctest::Approx(0.2075).epsilon(1e-3));

  // K4: all pairs equal by symmetry
  Graph k4g = complete(4);
  EncodingTree k4 = EncodingTree::flat(k4g);
  const double d01 = k4.delta_combine(k4.leaf_of(0), k4.leaf_of(1));
  for (NodeId u = 0; u < 4; ++u) {
    for (NodeId v = u + 1; v < 4; ++v) {
      CHECK(k4.delta_combine(k4.leaf_of(u), k4.leaf_of(v)) == doctest::Approx(d01).epsilon(1e-12));
    }
  }

  CHECK_THROWS_AS(t.delta_combine(t.leaf_of(0), t.leaf_of(0)), std::domain_error);
}

TEST_CASE("combine bookkeeping") {
  Graph p = path3();
  EncodingTree t = EncodingTree::flat(p);
  const std::size_t before = t.node(t.root()).children.size();
  t.combine(t.leaf_of(0), t.leaf_of(1));
  CHECK(t.node(t.root()).children.size() == before - 1);
  t.validate();

  // combine the two children of a 2-child root, then lift both back
  Graph pair(2);
  pair.add_edge(0, 1);
  EncodingTree t2 = EncodingTree::flat(pair);
  const double flat_entropy = t2.entropy();
  const int phi = t2.combine(t2.leaf_of(0), t2.leaf_of(1));
  t2.lift(t2.leaf_of(0));
  t2.lift(t2.leaf_of(1));
  CHECK_FALSE(t2.node(phi).alive);  // emptied and deleted
  CHECK(t2.height() == 1);
  CHECK(t2.entropy() == doctest::Approx(flat_entropy).epsilon(1e-12));
  t2.validate();
}

TEST_CASE("lift deletes a childless parent chain node") {
  Graph p = path3();
  EncodingTree t = EncodingTree::flat(p);
  const int phi = t.combine(t.leaf_of(0), t.leaf_of(1));
  // lift both leaves out of phi; second lift leaves phi childless
  t.lift(t.leaf_of(0));
  CHECK(t.node(phi).alive);
  t.lift(t.leaf_of(1));
  CHECK_FALSE(t.node(phi).alive);
  CHECK(t.height() == 1);
  t.validate();

  CHECK_THROWS_AS(t.lift(t.leaf_of(0)), std::domain_error);  // parent is the root
}

TEST_CASE("incremental entropy equals recomputation over random op sequences") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng.uniform_below(28);
    Graph g = random_graph(rng, n, 0.3);
    if (g.edge_count() == 0) g.add_edge(0, 1);
    EncodingTree t = EncodingTree::flat(g);

    for (int step = 0; step < 40; ++step) {
      const bool do_combine = rng.uniform01() < 0.6;
      if (do_combine) {
        auto parents = multi_child_parents(t);
        if (parents.empty()) break;
        const int parent = parents[rng.uniform_below(parents.size())];
        const auto& kids = t.node(parent).children;
        const std::size_t i = rng.uniform_below(kids.size());
        std::size_t j = rng.uniform_below(kids.size() - 1);
        if (j >= i) ++j;

        // delta matches an independent full recompute on a copy
        const double delta = t.delta_combine(kids[i], kids[j]);
        EncodingTree probe = t;
        const double before = probe.tree_entropy();
        probe.combine(kids[i], kids[j]);
        CHECK(delta == doctest::Approx(before - probe.tree_entropy()).epsilon(1e-9));

        t.combine(kids[i], kids[j]);
      } else {
        auto cands = liftable_nodes(t);
        if (cands.empty()) continue;
        t.lift(cands[rng.uniform_below(cands.size())]);
      }
      CHECK(t.entropy() == doctest::Approx(t.tree_entropy()).epsilon(1e-9));
    }
    t.validate();  // exact cache equality against the graph
  }
}

TEST_CASE("entropy stays non-negative across ops") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Graph g = random_graph(rng, 4 + rng.uniform_below(10), 0.4);
    if (g.edge_count() == 0) g.add_edge(0, 1);
    EncodingTree t = minimize_entropy(g, 2);
    CHECK(t.entropy() >= -1e-12);
    for (int id : t.alive_ids()) {
      if (id != t.root()) CHECK(t.node_entropy(id) >= -1e-12);
    }
  }
}

TEST_CASE("minimize: SBM entropy drops below the flat tree") {
  Graph g = generate_sbm({2, 10, 0.8, 0.05, 7});
  const double flat = EncodingTree::flat(g).tree_entropy();
  EncodingTree t = minimize_entropy(g, 2);
  CHECK(t.entropy() < flat);
  CHECK(t.height() <= 2);
  t.validate(2);
}

TEST_CASE("minimize: two nodes, one edge") {
  Graph g(2);
  g.add_edge(0, 1);
  EncodingTree t = minimize_entropy(g, 2);
  CHECK(t.audit_log().empty());  // root already has 2 children
  CHECK(t.entropy() == doctest::Approx(1.0));
}

TEST_CASE("minimize rejects bad height and empty graphs") {
  Graph g(2);
  g.add_edge(0, 1);
  CHECK_THROWS_AS(minimize_entropy(g, 1), ConfigError);
  Graph empty(4);
  CHECK_THROWS_AS(minimize_entropy(empty, 2), std::domain_error);
}

TEST_CASE("minimize is deterministic") {
  Rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    Graph g = random_graph(rng, 12, 0.35);
    if (g.edge_count() == 0) continue;
    EncodingTree a = minimize_entropy(g, 3);
    EncodingTree b = minimize_entropy(g, 3);
    CHECK(a.to_json() == b.to_json());
  }
}

TEST_CASE("minimize obeys the height bound and invariants on random graphs") {
  Rng rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 3 + rng.uniform_below(20);
    Graph g = random_graph(rng, n, 0.3);
    if (g.edge_count() == 0) g.add_edge(0, 1);
    const int K = 2 + static_cast<int>(rng.uniform_below(3));
    EncodingTree t = minimize_entropy(g, K);
    t.validate(static_cast<std::size_t>(K));
  }
}

// Replays the audit log with public ops, checking (a) the recorded deltas,
// and (b) that every lift applied the maximal delta among the candidates of
// that step, with ties to the smallest id. This cross-checks the cached
// delta bookkeeping inside minimize_entropy.
TEST_CASE("lift phase audit: every accepted lift was an argmax") {
  Rng rng(404);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t n = 5 + rng.uniform_below(10);
    Graph g = random_graph(rng, n, 0.35);
    if (g.edge_count() == 0) g.add_edge(0, 1);
    EncodingTree minimized = minimize_entropy(g, 2);

    EncodingTree replay = EncodingTree::flat(g);
    for (const TreeAuditEntry& entry : minimized.audit_log()) {
      if (entry.op == TreeAuditEntry::Op::combine) {
        CHECK(replay.delta_combine(entry.a, entry.b) == doctest::Approx(entry.delta).epsilon(1e-12));
        replay.combine(entry.a, entry.b);
        continue;
      }
      double best = 0.0;
      int best_id = -1;
      for (int id : liftable_nodes(replay)) {  // ascending ids
        const double d = replay.delta_lift(id);
        if (best_id < 0 || d > best) {
          best = d;
          best_id = id;
        }
      }
      REQUIRE(best_id >= 0);
      CHECK(entry.a == best_id);
      CHECK(entry.delta == doctest::Approx(best).epsilon(1e-12));
      replay.lift(entry.a);
    }
    CHECK(replay.entropy() == doctest::Approx(minimized.entropy()).epsilon(1e-9));
  }
}

TEST_CASE("low level communities partition the leaves") {
  Graph p = path3();
  EncodingTree flat = EncodingTree::flat(p);
  auto comms = flat.low_level_communities();
  REQUIRE(comms.size() == 1);
  CHECK(comms[0].second.size() == 3);

  EncodingTree t = EncodingTree::flat(p);
  t.combine(t.leaf_of(0), t.leaf_of(1));
  comms = t.low_level_communities();
  REQUIRE(comms.size() == 2);

  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    Graph g = random_graph(rng, 14, 0.3);
    if (g.edge_count() == 0) continue;
    EncodingTree m = minimize_entropy(g, 3);
    std::vector<NodeId> all;
    for (const auto& [id, members] : m.low_level_communities()) {
      for (NodeId v : members) all.push_back(v);
    }
    std::sort(all.begin(), all.end());
    CHECK(all.size() == g.node_count());  // every leaf exactly once
    CHECK(std::unique(all.begin(), all.end()) == all.end());
  }
}

TEST_CASE("isolated nodes ride along as zero-entropy root children") {
  Graph g(4);
  g.add_edge(0, 1);  // nodes 2, 3 isolated
  EncodingTree t = minimize_entropy(g, 2);
  t.validate(2);
  CHECK(t.node_entropy(t.leaf_of(2)) == 0.0);
  CHECK(t.node(t.leaf_of(3)).parent == t.root());
}
