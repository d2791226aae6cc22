#pragma once

#include <cstdint>
#include <string>

#include "llata/graph.hpp"

namespace llata {

/// Stochastic block model parameters. blocks * block_size nodes; each
/// within-block pair is an edge with probability p_intra, each cross-block
/// pair with p_inter. Labels are block ids; features are a noisy one-hot of
/// the block; texts describe the node. Fully determined by the seed.
struct SbmParams {
  std::size_t blocks = 2;
  std::size_t block_size = 10;
  double p_intra = 0.5;
  double p_inter = 0.05;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

Graph generate_sbm(const SbmParams& params);

/// Write edges.txt, texts.jsonl, features.csv and labels.txt under `dir`.
void write_sbm_dataset(const Graph& g, const std::string& dir);

}  // namespace llata
