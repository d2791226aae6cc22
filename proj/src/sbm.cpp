#include "llata/sbm.hpp"

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "llata/error.hpp"
#include "llata/rng.hpp"

namespace llata {

void SbmParams::validate() const {
  if (blocks < 1 || block_size < 1) throw ConfigError("SBM needs at least one block and node");
  if (p_intra < 0.0 || p_intra > 1.0 || p_inter < 0.0 || p_inter > 1.0) {
    throw ConfigError("SBM probabilities must be in [0, 1]");
  }
}

Graph generate_sbm(const SbmParams& params) {
  params.validate();
  const std::size_t n = params.blocks * params.block_size;
  Graph g(n);
  Rng rng(params.seed);

  auto block_of = [&](NodeId v) { return v / params.block_size; };

  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      const double p = block_of(u) == block_of(v) ? params.p_intra : params.p_inter;
      if (rng.uniform01() < p) g.add_edge(u, v);
    }
  }

  g.labels.resize(n);
  for (NodeId v = 0; v < n; ++v) g.labels[v] = static_cast<int>(block_of(v));

  // noisy one-hot block features keep same-block cosines near 1
  g.features.rows = n;
  g.features.dim = params.blocks;
  g.features.data.assign(n * params.blocks, 0.0f);
  for (NodeId v = 0; v < n; ++v) {
    for (std::size_t d = 0; d < params.blocks; ++d) {
      const float noise = static_cast<float>(0.2 * rng.uniform01() - 0.1);
      g.features.data[v * params.blocks + d] = (d == block_of(v) ? 1.0f : 0.0f) + noise;
    }
  }

  g.texts.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    g.texts[v] = "Synthetic node " + std::to_string(v) + " drawn from block " +
                 std::to_string(block_of(v)) + " of a stochastic block model.";
  }
  return g;
}

void write_sbm_dataset(const Graph& g, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create directory " + dir);

  save_edge_list(g, (fs::path(dir) / "edges.txt").string());

  std::ofstream texts((fs::path(dir) / "texts.jsonl").string());
  for (NodeId v = 0; v < g.node_count(); ++v) {
    nlohmann::json j;
    j["id"] = v;
    j["text"] = g.texts[v];
    texts << j.dump() << '\n';
  }

  std::ofstream features((fs::path(dir) / "features.csv").string());
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const auto row = g.features.row(v);
    for (std::size_t d = 0; d < row.size(); ++d) {
      if (d) features << ',';
      features << row[d];
    }
    features << '\n';
  }

  std::ofstream labels((fs::path(dir) / "labels.txt").string());
  for (int y : g.labels) labels << y << '\n';
}

}  // namespace llata
