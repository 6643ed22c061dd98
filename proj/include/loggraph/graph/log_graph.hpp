#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "loggraph/embed/embedding_table.hpp"
#include "loggraph/window/windowing.hpp"

namespace loggraph::graph {

using EventId = std::int64_t;
using window::Label;

/// Marks a pair of nodes with no directed path between them.
inline constexpr int kUnreachable = -1;
inline constexpr int kDefaultMaxDistance = 5;

enum class WeightTransform { kRaw, kLog1p, kMeanNorm };

std::string to_string(WeightTransform t);
WeightTransform weight_transform_from_string(const std::string& s);  // throws ConfigError

// Square row-major integer matrix.
struct DistanceMatrix {
  std::size_t n = 0;
  std::vector<int> values;

  int operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
  int& operator()(std::size_t i, std::size_t j) { return values[i * n + j]; }
  bool operator==(const DistanceMatrix&) const = default;
};

using EdgeMap = std::map<std::pair<std::size_t, std::size_t>, int>;

// Directed graph of one log sequence. Nodes are the distinct events in order of
// first occurrence; edge (i, j) counts how often event i is immediately
// followed by event j, plus one structural self-loop on the initial event.
struct LogGraph {
  std::vector<EventId> node_ids;
  std::size_t initial_node = 0;
  std::size_t feature_dim = 0;
  std::vector<double> features;  // |V| x feature_dim, row-major
  EdgeMap edges;
  std::vector<int> in_deg;
  std::vector<int> out_deg;
  DistanceMatrix dist;
  int max_distance = kDefaultMaxDistance;
  std::vector<double> w;  // raw outgoing weight sums
  Label label = Label::kNormal;

  std::size_t num_nodes() const { return node_ids.size(); }
  std::span<const double> feature_row(std::size_t i) const {
    return std::span<const double>(features).subspan(i * feature_dim, feature_dim);
  }
};

struct GraphOptions {
  int max_distance = kDefaultMaxDistance;  // L
};

LogGraph build_graph(const window::LogSequence& seq, const embed::EmbeddingTable& table,
                     const GraphOptions& opts = {});

// Directed BFS hop counts; entries beyond L are clipped to L, unreachable
// pairs hold kUnreachable.
DistanceMatrix shortest_path_matrix(std::size_t num_nodes, const EdgeMap& edges, int max_distance);

// Self-loops are structural only on the initial event: that loop counts once
// towards both degrees; loops from repeated events do not change degrees.
std::pair<std::vector<int>, std::vector<int>> degree_vectors(std::size_t num_nodes, const EdgeMap& edges,
                                                             std::size_t initial_node);

std::vector<double> raw_row_sums(std::size_t num_nodes, const EdgeMap& edges);
std::vector<double> edge_weight_vector(const LogGraph& g, WeightTransform transform);
std::vector<double> apply_weight_transform(std::vector<double> w, WeightTransform transform);

/// Bucket index for the distance embedding table: d in [0, L], unreachable -> L + 1.
inline std::size_t distance_bucket(int d, int max_distance) {
  return d == kUnreachable ? static_cast<std::size_t>(max_distance) + 1 : static_cast<std::size_t>(d);
}

// Recomputes degrees, distances, weight sums and features from node_ids and edges.
void derive_structure(LogGraph& g, const embed::EmbeddingTable& table);

/// Relabels nodes: new node k is old node perm[k].
LogGraph permute_nodes(const LogGraph& g, std::span<const std::size_t> perm);

// Consecutive-pair counts recovered from the edge set (drops the structural loop).
std::map<std::pair<EventId, EventId>, int> recover_bigrams(const LogGraph& g);

// JSON-lines graph record: {"node_ids":[...],"edges":[[i,j,w],...],"label":0|1}.
// Node 0 is the initial event; matrices and features are recomputed on load.
std::string graph_to_json(const LogGraph& g);
LogGraph graph_from_json(const std::string& line, const embed::EmbeddingTable& table, int max_distance);
void save_graphs(const std::vector<LogGraph>& graphs, const std::filesystem::path& path);
std::vector<LogGraph> load_graphs(const std::filesystem::path& path, const embed::EmbeddingTable& table,
                                  int max_distance);
/// Event ids referenced by a graph file, without building features.
std::vector<EventId> graph_file_event_ids(const std::filesystem::path& path);

}  // namespace loggraph::graph
