#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>

#include "llata/graph.hpp"
#include "llata/rng.hpp"
#include "llata/text_context.hpp"

using namespace llata;

namespace {

Graph with_features(std::vector<std::vector<float>> rows) {
  Graph g(rows.size());
  g.features.rows = rows.size();
  g.features.dim = rows[0].size();
  for (const auto& row : rows) {
    g.features.data.insert(g.features.data.end(), row.begin(), row.end());
  }
  g.texts.resize(rows.size());
  return g;
}

double weight_of(const std::vector<std::pair<NodeId, double>>& w, NodeId v) {
  for (const auto& [node, weight] : w) {
    if (node == v) return weight;
  }
  return -1.0;
}

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + 1)) {
    ++count;
  }
  return count;
}

}  // namespace

TEST_CASE("similarity weights: sole candidate gets weight 1") {
  Graph g = with_features({{1.f, 0.f}, {0.f, 1.f}});
  const auto w = similarity_weights(g, NodeSet::from_unsorted({0, 1}), 0);
  REQUIRE(w.size() == 1);
  CHECK(w[0].first == 1);
  CHECK(w[0].second == doctest::Approx(1.0));
}

TEST_CASE("similarity weights: equal cosines split evenly") {
  Graph g = with_features({{1.f, 0.f}, {0.f, 1.f}, {0.f, 1.f}});
  const auto w = similarity_weights(g, NodeSet::from_unsorted({0, 1, 2}), 0);
  REQUIRE(w.size() == 2);
  CHECK(w[0].second == doctest::Approx(0.5));
  CHECK(w[1].second == doctest::Approx(0.5));
}

TEST_CASE("similarity weights: softmax of cosines 1 and 0") {
  Graph g = with_features({{1.f, 0.f}, {1.f, 0.f}, {0.f, 1.f}});
  const auto w = similarity_weights(g, NodeSet::from_unsorted({0, 1, 2}), 0);
  const double e = std::exp(1.0);
  CHECK(weight_of(w, 1) == doctest::Approx(e / (e + 1.0)).epsilon(1e-6));
  CHECK(weight_of(w, 2) == doctest::Approx(1.0 / (e + 1.0)).epsilon(1e-6));
}

TEST_CASE("similarity weights sum to one and ignore positive rescaling") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng.uniform_below(8);
    std::vector<std::vector<float>> rows(n, std::vector<float>(4));
    for (auto& row : rows) {
      for (float& x : row) x = static_cast<float>(rng.uniform01() * 2.0 - 1.0);
    }
    Graph g = with_features(rows);
    std::vector<NodeId> ids(n);
    for (NodeId v = 0; v < n; ++v) ids[v] = v;
    const auto w = similarity_weights(g, NodeSet::from_unsorted(ids), 0);
    double total = 0.0;
    for (const auto& [v, weight] : w) total += weight;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

    // rescale every row by a positive factor: same weights
    Graph scaled = g;
    for (NodeId v = 0; v < n; ++v) {
      const float factor = static_cast<float>(0.5 + rng.uniform01() * 3.0);
      for (std::size_t d = 0; d < 4; ++d) scaled.features.data[v * 4 + d] *= factor;
    }
    const auto w2 = similarity_weights(scaled, NodeSet::from_unsorted(ids), 0);
    for (std::size_t i = 0; i < w.size(); ++i) {
      CHECK(w2[i].second == doctest::Approx(w[i].second).epsilon(1e-4));
    }
  }
}

TEST_CASE("similarity weights: singleton community is empty") {
  Graph g = with_features({{1.f, 0.f}});
  CHECK(similarity_weights(g, NodeSet::singleton(0), 0).empty());
}

TEST_CASE("augment_text appends the sole identical neighbor at epsilon 0.45") {
  Graph g = with_features({{1.f, 0.f}, {1.f, 0.f}});
  g.texts = {"target", "neighbor abstract"};
  const auto out = augment_text(g, NodeSet::from_unsorted({0, 1}), 0, 0.45, 3);
  REQUIRE(out.appended.size() == 1);
  CHECK(out.appended[0].first == 1);
  CHECK(out.concatenated() ==
        "target\nThe abstract of other papers related to its content: neighbor abstract");
}

TEST_CASE("augment_text: all weights below the threshold append nothing") {
  // three orthogonal neighbors: weights 1/3 < 0.45
  Graph g = with_features({{1.f, 0.f, 0.f, 0.f}, {0.f, 1.f, 0.f, 0.f}, {0.f, 0.f, 1.f, 0.f},
                           {0.f, 0.f, 0.f, 1.f}});
  g.texts = {"t0", "t1", "t2", "t3"};
  const auto out = augment_text(g, NodeSet::from_unsorted({0, 1, 2, 3}), 0, 0.45, 3);
  CHECK(out.appended.empty());
  CHECK(out.concatenated() == "t0");
}

TEST_CASE("augment_text: community-of-thought case from the case study") {
  // red pair with near-identical features, blue pair dissimilar: the target
  // red node picks up exactly the other red node's abstract at eps 0.45
  Graph g = with_features({{1.f, 0.f}, {0.99f, 0.01f}, {0.f, 1.f}, {0.05f, 1.f}});
  g.texts = {"red 1 abstract", "red 2 abstract", "blue 1 abstract", "blue 2 abstract"};
  const auto out = augment_text(g, NodeSet::from_unsorted({0, 1, 2, 3}), 0, 0.45, 3);
  REQUIRE(out.appended.size() == 1);
  CHECK(out.appended[0].first == 1);
  CHECK(out.appended[0].second == "red 2 abstract");
}

TEST_CASE("augment_text caps at k_top and skips empty texts") {
  Graph g = with_features({{1.f, 0.f}, {1.f, 0.f}, {1.f, 0.f}, {1.f, 0.f}, {1.f, 0.f}});
  g.texts = {"target", "", "b", "c", "d"};  // node 1 has nothing to share
  const auto out = augment_text(g, NodeSet::from_unsorted({0, 1, 2, 3, 4}), 0, 0.0, 2);
  REQUIRE(out.appended.size() == 2);
  CHECK(out.appended[0].first == 2);  // equal weights: ties fall to smaller ids
  CHECK(out.appended[1].first == 3);
}

TEST_CASE("build_prompt renders the documented parts in order") {
  PromptBundle bundle;
  bundle.classes = {{"Agents", "All about agents."},
                    {"Machine Learning", "Learning from data."},
                    {"Information Retrieval", ""},
                    {"Database", ""},
                    {"Human-Computer Interaction", ""},
                    {"Artificial Intelligence", ""}};
  bundle.payload.base_text = "The Computational Theory of Neural Networks ...";
  bundle.payload.appended = {{7, "A Computational Taxonomy and Survey ..."}};
  bundle.topology_description = "Graph context: community of 4.";

  const std::string prompt = build_prompt(bundle);
  CHECK(count_occurrences(prompt, "[8, 4, 1, 2, 5, 3]") == 1);

  const auto part1 = prompt.find("which belongs to one of the following categories");
  const auto part2 = prompt.find("The abstract of paper 1:");
  const auto part3 = prompt.find("The abstract of other papers related to its content:");
  const auto instruction = prompt.find("Use integers from 0 to 9");
  REQUIRE(part1 != std::string::npos);
  REQUIRE(part2 != std::string::npos);
  REQUIRE(part3 != std::string::npos);
  REQUIRE(instruction != std::string::npos);
  CHECK(part1 < part2);
  CHECK(part2 < part3);
  CHECK(part3 < instruction);

  // deterministic rendering
  CHECK(build_prompt(bundle) == prompt);
}

TEST_CASE("build_prompt omits the related part when nothing was appended") {
  PromptBundle bundle;
  bundle.classes = {{"A", ""}, {"B", ""}};
  bundle.payload.base_text = "lonely";
  const std::string prompt = build_prompt(bundle);
  CHECK(prompt.find("related to its content") == std::string::npos);
  CHECK(count_occurrences(prompt, "[8, 4]") == 1);
}

TEST_CASE("build_prompt applies the per-text character cap") {
  PromptBundle bundle;
  bundle.classes = {{"A", ""}, {"B", ""}};
  bundle.payload.base_text = std::string(5000, 'x');
  const std::string prompt = build_prompt(bundle, {}, 100);
  CHECK(prompt.find(std::string(101, 'x')) == std::string::npos);
  CHECK(prompt.find(std::string(100, 'x')) != std::string::npos);
}

TEST_CASE("template override substitutes the named placeholders") {
  PromptBundle bundle;
  bundle.classes = {{"A", ""}, {"B", ""}};
  bundle.payload.base_text = "TARGET";
  bundle.payload.appended = {{3, "RELATED"}};
  const std::string prompt =
      build_prompt(bundle, "C=({classes}) T=({target_text}) R=({related_texts}) F={format_line}");
  CHECK(prompt.find("T=(TARGET)") != std::string::npos);
  CHECK(prompt.find("R=(RELATED)") != std::string::npos);
  CHECK(prompt.find("F=[8, 4]") != std::string::npos);
}

TEST_CASE("prompt requires at least two classes") {
  PromptBundle bundle;
  bundle.classes = {{"only", ""}};
  CHECK_THROWS_AS(build_prompt(bundle), std::domain_error);
}
