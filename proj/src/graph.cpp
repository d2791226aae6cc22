#include "llata/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "llata/error.hpp"

namespace llata {

NodeSet NodeSet::from_unsorted(std::vector<NodeId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  NodeSet s;
  s.ids_ = std::move(ids);
  return s;
}

NodeSet NodeSet::singleton(NodeId v) {
  NodeSet s;
  s.ids_ = {v};
  return s;
}

bool NodeSet::contains(NodeId v) const {
  return std::binary_search(ids_.begin(), ids_.end(), v);
}

NodeSet NodeSet::complement(std::size_t n) const {
  NodeSet out;
  out.ids_.reserve(n - ids_.size());
  std::size_t k = 0;
  for (NodeId v = 0; v < n; ++v) {
    if (k < ids_.size() && ids_[k] == v) {
      ++k;
    } else {
      out.ids_.push_back(v);
    }
  }
  return out;
}

void Graph::check_endpoints(NodeId u, NodeId v) const {
  if (u == v) throw InputError("self-loop edge (" + std::to_string(u) + ")");
  if (u >= node_count() || v >= node_count()) {
    throw InputError("edge endpoint out of range: " + std::to_string(u) + " " +
                     std::to_string(v));
  }
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  const auto& a = adj_[u].size() <= adj_[v].size() ? adj_[u] : adj_[v];
  const NodeId other = adj_[u].size() <= adj_[v].size() ? v : u;
  return std::binary_search(a.begin(), a.end(), other);
}

bool Graph::add_edge(NodeId u, NodeId v) {
  check_endpoints(u, v);
  auto& au = adj_[u];
  auto it = std::lower_bound(au.begin(), au.end(), v);
  if (it != au.end() && *it == v) return false;
  au.insert(it, v);
  auto& av = adj_[v];
  av.insert(std::lower_bound(av.begin(), av.end(), u), u);
  ++m_;
  return true;
}

bool Graph::remove_edge(NodeId u, NodeId v) {
  check_endpoints(u, v);
  auto& au = adj_[u];
  auto it = std::lower_bound(au.begin(), au.end(), v);
  if (it == au.end() || *it != v) return false;
  au.erase(it);
  auto& av = adj_[v];
  av.erase(std::lower_bound(av.begin(), av.end(), u));
  --m_;
  return true;
}

std::uint64_t Graph::volume(const NodeSet& s) const {
  std::uint64_t total = 0;
  for (NodeId v : s) total += degree(v);
  return total;
}

std::uint64_t Graph::cut_size(const NodeSet& s) const {
  std::uint64_t crossing = 0;
  for (NodeId v : s) {
    for (NodeId w : neighbors(v)) {
      if (!s.contains(w)) ++crossing;
    }
  }
  return crossing;
}

std::vector<std::pair<NodeId, NodeId>> Graph::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(m_);
  for (NodeId u = 0; u < node_count(); ++u) {
    for (NodeId v : adj_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;  // already sorted: u ascending, then sorted adjacency
}

double edge_homophily(const Graph& g, std::span<const int> labels) {
  if (g.edge_count() == 0) throw MetricError("edge homophily undefined for m = 0");
  if (labels.size() != g.node_count()) {
    throw InputError("homophily needs a label for every node");
  }
  std::uint64_t same = 0;
  for (auto [u, v] : g.edges()) {
    if (labels[u] == labels[v]) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(g.edge_count());
}

namespace {

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

struct RawEdges {
  std::vector<std::pair<long long, long long>> pairs;
  long long max_id = -1;
};

RawEdges read_edge_file(const std::string& path) {
  auto in = open_or_throw(path);
  RawEdges out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    long long u, v;
    if (!(ls >> u >> v) || u < 0 || v < 0) {
      throw InputError(path + ":" + std::to_string(lineno) + ": expected two node ids");
    }
    out.pairs.emplace_back(u, v);
    out.max_id = std::max({out.max_id, u, v});
  }
  return out;
}

struct RawTexts {
  std::vector<std::pair<long long, std::string>> records;
  long long max_id = -1;
};

RawTexts read_texts_file(const std::string& path) {
  auto in = open_or_throw(path);
  RawTexts out;
  std::string line;
  std::size_t lineno = 0;
  std::vector<long long> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.contains("id") || !j["id"].is_number_integer()) {
      throw InputError(path + ":" + std::to_string(lineno) + ": missing integer \"id\"");
    }
    long long id = j["id"].get<long long>();
    if (id < 0) throw InputError(path + ":" + std::to_string(lineno) + ": negative id");
    std::string text = j.value("text", std::string{});
    seen.push_back(id);
    out.records.emplace_back(id, std::move(text));
    out.max_id = std::max(out.max_id, id);
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw InputError(path + ": duplicate node id in texts");
  }
  return out;
}

FeatureMatrix read_features_file(const std::string& path) {
  auto in = open_or_throw(path);
  FeatureMatrix f;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;
    std::size_t cols = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      float value = 0.0f;
      auto [next, ec] = std::from_chars(p, end, value);
      if (ec != std::errc{}) {
        throw InputError(path + ":" + std::to_string(lineno) + ": bad float");
      }
      f.data.push_back(value);
      ++cols;
      p = next;
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      if (p < end) {
        if (*p != ',') throw InputError(path + ":" + std::to_string(lineno) + ": expected ','");
        ++p;
      }
    }
    if (f.rows == 0) {
      f.dim = cols;
      if (f.dim == 0) throw InputError(path + ": empty feature row");
    } else if (cols != f.dim) {
      throw InputError(path + ":" + std::to_string(lineno) + ": ragged feature row");
    }
    ++f.rows;
  }
  return f;
}

std::vector<int> read_labels_file(const std::string& path) {
  auto in = open_or_throw(path);
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    long long y;
    if (!(ls >> y) || y < 0) {
      throw InputError(path + ":" + std::to_string(lineno) + ": expected a class id");
    }
    labels.push_back(static_cast<int>(y));
  }
  return labels;
}

}  // namespace

Graph load_graph(const LoadPaths& paths) {
  RawEdges raw = read_edge_file(paths.edges);

  RawTexts texts;
  if (!paths.texts.empty()) texts = read_texts_file(paths.texts);
  FeatureMatrix features;
  if (!paths.features.empty()) features = read_features_file(paths.features);
  std::vector<int> labels;
  if (!paths.labels.empty()) labels = read_labels_file(paths.labels);

  // Census from node-declaring files; edges range-checked against it.
  long long census = -1;
  census = std::max(census, texts.max_id);
  if (features.rows > 0) census = std::max(census, static_cast<long long>(features.rows) - 1);
  if (!labels.empty()) census = std::max(census, static_cast<long long>(labels.size()) - 1);

  std::size_t n;
  if (census >= 0) {
    n = static_cast<std::size_t>(census) + 1;
    if (raw.max_id >= static_cast<long long>(n)) {
      throw InputError("edge endpoint out of range: id " + std::to_string(raw.max_id) +
                       " with n = " + std::to_string(n));
    }
  } else {
    if (raw.max_id < 0) throw InputError("no nodes declared by any input file");
    n = static_cast<std::size_t>(raw.max_id) + 1;
  }

  Graph g(n);
  for (auto [u, v] : raw.pairs) {
    g.add_edge(static_cast<NodeId>(u), static_cast<NodeId>(v));  // dedup via no-op add
  }

  g.texts.assign(n, std::string{});
  for (auto& [id, text] : texts.records) {
    g.texts[static_cast<std::size_t>(id)] = std::move(text);
  }

  if (features.rows > 0) {
    if (features.rows != n) {
      throw InputError("feature row count " + std::to_string(features.rows) +
                       " != node count " + std::to_string(n));
    }
    g.features = std::move(features);
  }
  if (!labels.empty()) {
    if (labels.size() != n) {
      throw InputError("label count " + std::to_string(labels.size()) + " != node count " +
                       std::to_string(n));
    }
    g.labels = std::move(labels);
  }
  return g;
}

Graph load_edge_list(const std::string& path) {
  RawEdges raw = read_edge_file(path);
  if (raw.max_id < 0) throw InputError(path + ": no edges");
  Graph g(static_cast<std::size_t>(raw.max_id) + 1);
  for (auto [u, v] : raw.pairs) {
    g.add_edge(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  return g;
}

void save_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  for (auto [u, v] : g.edges()) {
    out << u << ' ' << v << '\n';
  }
  if (!out) throw InputError("write failed for " + path);
}

}  // namespace llata
