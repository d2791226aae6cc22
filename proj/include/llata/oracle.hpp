#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "llata/graph.hpp"

namespace llata {

/// Per-class integer logits in [0, 9], as elicited from the model answer.
struct LogitVector {
  std::vector<int> values;

  std::size_t size() const { return values.size(); }
  static LogitVector uniform(std::size_t class_count) {
    return {std::vector<int>(class_count, 0)};
  }
  bool operator==(const LogitVector&) const = default;
};

/// Probability vector on the class simplex.
struct SoftLabel {
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
  std::span<const double> view() const { return probs; }
  std::size_t argmax() const;
  static SoftLabel uniform(std::size_t class_count);
  static SoftLabel one_hot(std::size_t class_count, std::size_t cls);
};

/// First bracketed comma-separated integer list of length `class_count` in
/// the answer, entries clamped to [0, 9]. Throws ParseError when absent.
LogitVector extract_logits(const std::string& answer, std::size_t class_count);

/// Softmax over the integer logits.
SoftLabel to_soft_label(const LogitVector& z);

/// Deterministic test double: (1-p) * onehot(true label) + p * uniform.
SoftLabel mock_infer(NodeId node, std::optional<int> true_label, double noise,
                     std::size_t class_count);

enum class OracleBackend { mock, remote };

struct OracleConfig {
  OracleBackend backend = OracleBackend::mock;
  std::string endpoint;         // remote: full chat-completion URL
  std::string model = "mock";
  std::string api_key_env;      // name of the env var holding the bearer token
  double timeout_seconds = 30.0;
  int max_retries = 3;
  int retry_backoff_ms = 250;   // doubled per attempt
  std::string cache_path;       // empty: in-memory cache only
  double mock_noise = 0.0;      // p in [0, 1]
  int max_in_flight = 4;

  void validate() const;  // throws ConfigError
};

/// Append-only logit cache keyed by (node, prompt sha256). The file is
/// JSON-lines {node, prompt_sha256, logits, model}; loading replays it, so a
/// crashed run resumes from what was written.
class LogitCache {
 public:
  LogitCache() = default;
  explicit LogitCache(std::string path);  // loads existing records

  std::optional<LogitVector> get(NodeId node, const std::string& prompt_hash) const;
  void put(NodeId node, const std::string& prompt_hash, const LogitVector& z,
           const std::string& model);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::string path_;
  std::unordered_map<std::string, LogitVector> entries_;
};

struct OracleStats {
  std::size_t calls = 0;            // backend invocations (cache misses)
  std::size_t cache_hits = 0;
  std::size_t parse_fallbacks = 0;  // answers degraded to uniform logits
};

/// Pluggable inference front-end: prompt in, logit vector out, cache in the
/// middle. The mock backend synthesizes an answer from the node's true label
/// so the full answer-parsing path runs in tests and offline pipelines.
class Oracle {
 public:
  Oracle(OracleConfig cfg, std::span<const int> true_labels = {});

  /// Cached inference for one node. Transport failures throw OracleError
  /// after retries; unparseable answers degrade to uniform logits (counted,
  /// cached) per the pipeline contract.
  LogitVector infer(const std::string& prompt, std::size_t class_count, NodeId node);

  /// Fan out over nodes with at most cfg.max_in_flight concurrent requests.
  /// Results are positionally keyed; completion order does not matter.
  std::vector<LogitVector> infer_many(std::span<const NodeId> nodes,
                                      std::span<const std::string> prompts,
                                      std::size_t class_count);

  const OracleStats& stats() const { return stats_; }
  const OracleConfig& config() const { return cfg_; }

 private:
  std::string query_backend(const std::string& prompt, std::size_t class_count, NodeId node);
  std::string mock_answer(NodeId node, std::size_t class_count) const;

  OracleConfig cfg_;
  std::vector<int> labels_;
  LogitCache cache_;
  std::mutex stats_mu_;
  OracleStats stats_;
};

}  // namespace llata
