#include "llata/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <semaphore>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "llata/error.hpp"
#include "llata/kernels.hpp"
#include "llata/sha256.hpp"

namespace llata {

std::size_t SoftLabel::argmax() const {
  return static_cast<std::size_t>(
      std::max_element(probs.begin(), probs.end()) - probs.begin());
}

SoftLabel SoftLabel::uniform(std::size_t class_count) {
  return {std::vector<double>(class_count, 1.0 / static_cast<double>(class_count))};
}

SoftLabel SoftLabel::one_hot(std::size_t class_count, std::size_t cls) {
  SoftLabel y{std::vector<double>(class_count, 0.0)};
  y.probs[cls] = 1.0;
  return y;
}

LogitVector extract_logits(const std::string& answer, std::size_t class_count) {
  if (class_count < 2) throw std::domain_error("need at least two classes");

  for (std::size_t open = answer.find('['); open != std::string::npos;
       open = answer.find('[', open + 1)) {
    std::vector<int> values;
    std::size_t i = open + 1;
    bool ok = true;
    while (true) {
      while (i < answer.size() && std::isspace(static_cast<unsigned char>(answer[i]))) ++i;
      if (i >= answer.size()) {
        ok = false;
        break;
      }
      bool negative = false;
      if (answer[i] == '-' || answer[i] == '+') {
        negative = answer[i] == '-';
        ++i;
      }
      if (i >= answer.size() || !std::isdigit(static_cast<unsigned char>(answer[i]))) {
        ok = false;
        break;
      }
      long v = 0;
      while (i < answer.size() && std::isdigit(static_cast<unsigned char>(answer[i]))) {
        v = std::min<long>(v * 10 + (answer[i] - '0'), 1000);
        ++i;
      }
      if (negative) v = -v;
      values.push_back(static_cast<int>(std::clamp<long>(v, 0, 9)));
      while (i < answer.size() && std::isspace(static_cast<unsigned char>(answer[i]))) ++i;
      if (i < answer.size() && answer[i] == ',') {
        ++i;
        continue;
      }
      if (i < answer.size() && answer[i] == ']') break;
      ok = false;
      break;
    }
    if (ok && values.size() == class_count) return {std::move(values)};
  }
  throw ParseError("no bracketed integer list of length " + std::to_string(class_count) +
                   " in answer");
}

SoftLabel to_soft_label(const LogitVector& z) {
  SoftLabel y;
  y.probs.assign(z.values.begin(), z.values.end());
  kernels::softmax_inplace(y.probs);
  return y;
}

SoftLabel mock_infer(NodeId node, std::optional<int> true_label, double noise,
                     std::size_t class_count) {
  if (noise < 0.0 || noise > 1.0) throw std::domain_error("mock noise must be in [0, 1]");
  if (!true_label || *true_label < 0 || static_cast<std::size_t>(*true_label) >= class_count) {
    throw OracleError("mock oracle needs a true label for node " + std::to_string(node));
  }
  SoftLabel y = SoftLabel::uniform(class_count);
  for (double& p : y.probs) p *= noise;
  y.probs[static_cast<std::size_t>(*true_label)] += 1.0 - noise;
  return y;
}

void OracleConfig::validate() const {
  if (mock_noise < 0.0 || mock_noise > 1.0) throw ConfigError("mock noise must be in [0, 1]");
  if (max_retries < 0) throw ConfigError("max retries must be >= 0");
  if (timeout_seconds <= 0.0) throw ConfigError("timeout must be positive");
  if (max_in_flight < 1) throw ConfigError("max in-flight requests must be >= 1");
  if (backend == OracleBackend::remote) {
    if (endpoint.empty()) throw ConfigError("remote oracle needs an endpoint URL");
    if (api_key_env.empty() || std::getenv(api_key_env.c_str()) == nullptr) {
      throw ConfigError("remote oracle needs the API key env var set (" + api_key_env + ")");
    }
  }
}

namespace {

std::string cache_key(NodeId node, const std::string& prompt_hash) {
  return std::to_string(node) + ":" + prompt_hash;
}

}  // namespace

LogitCache::LogitCache(std::string path) : path_(std::move(path)) {
  if (path_.empty()) return;
  std::ifstream in(path_);
  if (!in) return;  // nothing cached yet
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      const auto node = j.at("node").get<NodeId>();
      const auto hash = j.at("prompt_sha256").get<std::string>();
      LogitVector z{j.at("logits").get<std::vector<int>>()};
      entries_[cache_key(node, hash)] = std::move(z);
    } catch (const nlohmann::json::exception&) {
      // torn line from an interrupted run; everything before it still counts
      continue;
    }
  }
}

std::optional<LogitVector> LogitCache::get(NodeId node, const std::string& prompt_hash) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(cache_key(node, prompt_hash));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void LogitCache::put(NodeId node, const std::string& prompt_hash, const LogitVector& z,
                     const std::string& model) {
  std::lock_guard lock(mu_);
  entries_[cache_key(node, prompt_hash)] = z;
  if (path_.empty()) return;
  nlohmann::json j;
  j["node"] = node;
  j["prompt_sha256"] = prompt_hash;
  j["logits"] = z.values;
  j["model"] = model;
  std::ofstream out(path_, std::ios::app);
  if (!out) throw InputError("cannot append to cache " + path_);
  out << j.dump() << '\n';
  out.flush();
}

std::size_t LogitCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

Oracle::Oracle(OracleConfig cfg, std::span<const int> true_labels)
    : cfg_(std::move(cfg)),
      labels_(true_labels.begin(), true_labels.end()),
      cache_(cfg_.cache_path) {
  cfg_.validate();
}

std::string Oracle::mock_answer(NodeId node, std::size_t class_count) const {
  if (node >= labels_.size()) {
    throw OracleError("mock backend has no true label for node " + std::to_string(node));
  }
  const int y = labels_[node];
  const double p = cfg_.mock_noise;
  std::ostringstream os;
  os << "The probabilities of the target belonging to each category are: [";
  for (std::size_t c = 0; c < class_count; ++c) {
    const double prob =
        (1.0 - p) * (static_cast<int>(c) == y ? 1.0 : 0.0) + p / static_cast<double>(class_count);
    if (c) os << ", ";
    os << static_cast<int>(std::lround(9.0 * prob));
  }
  os << "].";
  return os.str();
}

namespace {

struct TransportFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string Oracle::query_backend(const std::string& prompt, std::size_t class_count,
                                  NodeId node) {
  {
    std::lock_guard lock(stats_mu_);
    ++stats_.calls;
  }
  if (cfg_.backend == OracleBackend::mock) {
    return mock_answer(node, class_count);
  }

  const ParsedUrl url = split_url(cfg_.endpoint);
  httplib::Client client(url.origin);
  const auto timeout = std::chrono::milliseconds(
      static_cast<long>(cfg_.timeout_seconds * 1000.0));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  nlohmann::json request;
  request["model"] = cfg_.model;
  request["messages"] = nlohmann::json::array({
      nlohmann::json{{"role", "user"}, {"content", prompt}},
  });
  request["temperature"] = 0;

  httplib::Headers headers;
  if (const char* token = std::getenv(cfg_.api_key_env.c_str())) {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  auto res = client.Post(url.path, headers, request.dump(), "application/json");
  if (!res) {
    throw TransportFailure("no response from " + cfg_.endpoint + ": " +
                           httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw TransportFailure("HTTP " + std::to_string(res->status) + " from " + cfg_.endpoint);
  }
  try {
    auto j = nlohmann::json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed completion response: ") + e.what());
  }
}

LogitVector Oracle::infer(const std::string& prompt, std::size_t class_count, NodeId node) {
  if (prompt.empty()) throw std::domain_error("prompt must be non-empty");
  const std::string hash = sha256_hex(prompt);
  if (auto cached = cache_.get(node, hash)) {
    std::lock_guard lock(stats_mu_);
    ++stats_.cache_hits;
    return *cached;
  }

  std::string transport_error;
  bool parse_failed = false;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0 && cfg_.retry_backoff_ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.retry_backoff_ms << (attempt - 1)));
    }
    try {
      const std::string answer = query_backend(prompt, class_count, node);
      LogitVector z = extract_logits(answer, class_count);
      cache_.put(node, hash, z, cfg_.model);
      return z;
    } catch (const TransportFailure& e) {
      transport_error = e.what();
      parse_failed = false;
    } catch (const ParseError&) {
      parse_failed = true;
    }
  }
  if (!parse_failed) {
    throw OracleError("oracle transport failed after " + std::to_string(cfg_.max_retries + 1) +
                      " attempts: " + transport_error);
  }
  // Unparseable after retries: degrade this node to uniform logits and cache
  // the fallback so a warm rerun stays deterministic with zero calls.
  {
    std::lock_guard lock(stats_mu_);
    ++stats_.parse_fallbacks;
  }
  LogitVector z = LogitVector::uniform(class_count);
  cache_.put(node, hash, z, cfg_.model);
  return z;
}

std::vector<LogitVector> Oracle::infer_many(std::span<const NodeId> nodes,
                                            std::span<const std::string> prompts,
                                            std::size_t class_count) {
  if (nodes.size() != prompts.size()) {
    throw std::invalid_argument("infer_many: nodes/prompts size mismatch");
  }
  std::counting_semaphore<> slots(cfg_.max_in_flight);
  std::vector<std::future<LogitVector>> pending;
  pending.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    pending.push_back(std::async(std::launch::async, [this, &slots, &prompts, &nodes,
                                                      class_count, i] {
      slots.acquire();
      struct Release {
        std::counting_semaphore<>* s;
        ~Release() { s->release(); }
      } release{&slots};
      return infer(prompts[i], class_count, nodes[i]);
    }));
  }
  std::vector<LogitVector> out;
  out.reserve(nodes.size());
  for (auto& f : pending) out.push_back(f.get());
  return out;
}

}  // namespace llata
