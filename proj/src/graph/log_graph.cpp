#include "loggraph/graph/log_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "loggraph/common/error.hpp"

namespace loggraph::graph {

std::string to_string(WeightTransform t) {
  switch (t) {
    case WeightTransform::kRaw: return "raw";
    case WeightTransform::kLog1p: return "log1p";
    case WeightTransform::kMeanNorm: return "mean_norm";
  }
  return "unknown";
}

WeightTransform weight_transform_from_string(const std::string& s) {
  if (s == "raw") return WeightTransform::kRaw;
  if (s == "log1p") return WeightTransform::kLog1p;
  if (s == "mean_norm") return WeightTransform::kMeanNorm;
  throw ConfigError("unknown edge weight transform '" + s + "' (expected raw, log1p or mean_norm)");
}

DistanceMatrix shortest_path_matrix(std::size_t num_nodes, const EdgeMap& edges, int max_distance) {
  if (max_distance < 1) throw ContractViolation("shortest_path_matrix: L must be >= 1");
  std::vector<std::vector<std::size_t>> adj(num_nodes);
  for (const auto& [e, weight] : edges) {
    if (e.first != e.second) adj[e.first].push_back(e.second);
  }

  DistanceMatrix dist{num_nodes, std::vector<int>(num_nodes * num_nodes, kUnreachable)};
  std::deque<std::size_t> queue;
  for (std::size_t src = 0; src < num_nodes; ++src) {
    dist(src, src) = 0;
    queue.assign(1, src);
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t v : adj[u]) {
        if (dist(src, v) == kUnreachable) {
          dist(src, v) = dist(src, u) + 1;
          queue.push_back(v);
        }
      }
    }
    for (std::size_t j = 0; j < num_nodes; ++j) {
      if (dist(src, j) > max_distance) dist(src, j) = max_distance;
    }
  }
  return dist;
}

std::pair<std::vector<int>, std::vector<int>> degree_vectors(std::size_t num_nodes, const EdgeMap& edges,
                                                             std::size_t initial_node) {
  std::vector<int> in(num_nodes, 0), out(num_nodes, 0);
  for (const auto& [e, weight] : edges) {
    if (e.first == e.second) continue;
    ++out[e.first];
    ++in[e.second];
  }
  if (num_nodes > 0) {
    ++in[initial_node];
    ++out[initial_node];
  }
  return {std::move(in), std::move(out)};
}

std::vector<double> raw_row_sums(std::size_t num_nodes, const EdgeMap& edges) {
  std::vector<double> w(num_nodes, 0.0);
  for (const auto& [e, weight] : edges) w[e.first] += weight;
  return w;
}

std::vector<double> apply_weight_transform(std::vector<double> w, WeightTransform transform) {
  switch (transform) {
    case WeightTransform::kRaw:
      break;
    case WeightTransform::kLog1p:
      for (double& x : w) x = 1.0 + std::log1p(x);
      break;
    case WeightTransform::kMeanNorm: {
      if (w.empty()) break;
      const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
      if (mean > 0.0) {
        for (double& x : w) x /= mean;
      }
      break;
    }
  }
  return w;
}

std::vector<double> edge_weight_vector(const LogGraph& g, WeightTransform transform) {
  return apply_weight_transform(g.w, transform);
}

void derive_structure(LogGraph& g, const embed::EmbeddingTable& table) {
  const std::size_t n = g.node_ids.size();
  for (const auto& [e, weight] : g.edges) {
    if (e.first >= n || e.second >= n) throw DataError("graph edge references a node outside the node list");
    if (weight < 1) throw DataError("graph edge weights must be positive integers");
  }
  std::tie(g.in_deg, g.out_deg) = degree_vectors(n, g.edges, g.initial_node);
  g.dist = shortest_path_matrix(n, g.edges, g.max_distance);
  g.w = raw_row_sums(n, g.edges);
  g.feature_dim = table.dim();
  g.features.assign(n * table.dim(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = table.at(g.node_ids[i]);
    std::copy(row.begin(), row.end(), g.features.begin() + static_cast<std::ptrdiff_t>(i * table.dim()));
  }
}

LogGraph build_graph(const window::LogSequence& seq, const embed::EmbeddingTable& table,
                     const GraphOptions& opts) {
  if (seq.events.empty()) throw ContractViolation("build_graph: empty sequence");
  LogGraph g;
  g.label = seq.label;
  g.max_distance = opts.max_distance;

  std::unordered_map<EventId, std::size_t> index;
  std::vector<std::size_t> local;
  local.reserve(seq.events.size());
  for (EventId id : seq.events) {
    auto [it, inserted] = index.try_emplace(id, g.node_ids.size());
    if (inserted) g.node_ids.push_back(id);
    local.push_back(it->second);
  }
  g.initial_node = 0;
  g.edges[{local.front(), local.front()}] += 1;
  for (std::size_t t = 0; t + 1 < local.size(); ++t) g.edges[{local[t], local[t + 1]}] += 1;

  derive_structure(g, table);
  return g;
}

LogGraph permute_nodes(const LogGraph& g, std::span<const std::size_t> perm) {
  const std::size_t n = g.num_nodes();
  if (perm.size() != n) throw ContractViolation("permute_nodes: permutation has wrong length");
  std::vector<std::size_t> inverse(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    if (perm[k] >= n || inverse[perm[k]] != n) throw ContractViolation("permute_nodes: not a permutation");
    inverse[perm[k]] = k;
  }
  LogGraph out;
  out.label = g.label;
  out.max_distance = g.max_distance;
  out.feature_dim = g.feature_dim;
  out.initial_node = inverse[g.initial_node];
  out.node_ids.resize(n);
  out.in_deg.resize(n);
  out.out_deg.resize(n);
  out.w.resize(n);
  out.features.resize(g.features.size());
  out.dist = DistanceMatrix{n, std::vector<int>(n * n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t old = perm[k];
    out.node_ids[k] = g.node_ids[old];
    out.in_deg[k] = g.in_deg[old];
    out.out_deg[k] = g.out_deg[old];
    out.w[k] = g.w[old];
    auto row = g.feature_row(old);
    std::copy(row.begin(), row.end(), out.features.begin() + static_cast<std::ptrdiff_t>(k * g.feature_dim));
    for (std::size_t m = 0; m < n; ++m) out.dist(k, m) = g.dist(old, perm[m]);
  }
  for (const auto& [e, weight] : g.edges) out.edges[{inverse[e.first], inverse[e.second]}] = weight;
  return out;
}

std::map<std::pair<EventId, EventId>, int> recover_bigrams(const LogGraph& g) {
  std::map<std::pair<EventId, EventId>, int> out;
  for (const auto& [e, weight] : g.edges) {
    int count = weight;
    if (e.first == g.initial_node && e.second == g.initial_node) --count;
    if (count > 0) out[{g.node_ids[e.first], g.node_ids[e.second]}] = count;
  }
  return out;
}

std::string graph_to_json(const LogGraph& g) {
  if (g.initial_node != 0) throw ContractViolation("graph_to_json: the initial event must be node 0");
  nlohmann::ordered_json j;
  j["node_ids"] = g.node_ids;
  auto edges = nlohmann::ordered_json::array();
  for (const auto& [e, weight] : g.edges) edges.push_back({e.first, e.second, weight});
  j["edges"] = std::move(edges);
  j["label"] = static_cast<int>(g.label);
  return j.dump();
}

namespace {

LogGraph graph_skeleton_from_json(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("graph record: ") + e.what(), e.byte);
  }
  try {
    LogGraph g;
    g.node_ids = j.at("node_ids").get<std::vector<EventId>>();
    if (g.node_ids.empty()) throw DataError("graph record has no nodes");
    if (std::set<EventId>(g.node_ids.begin(), g.node_ids.end()).size() != g.node_ids.size()) {
      throw DataError("graph record has duplicate node ids");
    }
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 3) throw DataError("graph edge must be a [i, j, w] triple");
      g.edges[{e[0].get<std::size_t>(), e[1].get<std::size_t>()}] = e[2].get<int>();
    }
    const int label = j.at("label").get<int>();
    if (label != 0 && label != 1) throw DataError("graph label must be 0 or 1");
    g.label = static_cast<Label>(label);
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("graph record: ") + e.what());
  }
}

}  // namespace

LogGraph graph_from_json(const std::string& line, const embed::EmbeddingTable& table, int max_distance) {
  LogGraph g = graph_skeleton_from_json(line);
  g.max_distance = max_distance;
  derive_structure(g, table);
  return g;
}

void save_graphs(const std::vector<LogGraph>& graphs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& g : graphs) out << graph_to_json(g) << '\n';
}

std::vector<LogGraph> load_graphs(const std::filesystem::path& path, const embed::EmbeddingTable& table,
                                  int max_distance) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read graph file " + path.string());
  std::vector<LogGraph> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(graph_from_json(line, table, max_distance));
  }
  return out;
}

std::vector<EventId> graph_file_event_ids(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read graph file " + path.string());
  std::set<EventId> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto g = graph_skeleton_from_json(line);
    ids.insert(g.node_ids.begin(), g.node_ids.end());
  }
  return {ids.begin(), ids.end()};
}

}  // namespace loggraph::graph
