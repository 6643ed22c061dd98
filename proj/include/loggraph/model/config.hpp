#pragma once

#include <cstddef>

#include <json.hpp>

#include "loggraph/graph/log_graph.hpp"

namespace loggraph::model {

struct ModelConfig {
  std::size_t d_v = 64;                // node feature width
  std::size_t d_z = 64;                // attention width, split across heads
  std::size_t heads = 4;
  int max_distance = graph::kDefaultMaxDistance;  // L
  int max_degree = 64;                 // Dmax; larger degrees clamp
  std::size_t encoder_layers = 1;
  std::size_t ffn_hidden = 1024;       // classifier head width
  std::size_t encoder_ffn_hidden = 128;
  double dropout = 0.3;

  bool use_degree = true;
  bool use_distance = true;
  bool use_edge_weight = true;
  bool use_feature_structure_interaction = true;
  graph::WeightTransform edge_weight_transform = graph::WeightTransform::kLog1p;

  std::size_t head_dim() const { return d_z / heads; }
  std::size_t distance_buckets() const { return static_cast<std::size_t>(max_distance) + 2; }

  void validate() const;  // throws ConfigError

  nlohmann::ordered_json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);  // throws DataError

  bool operator==(const ModelConfig&) const = default;
};

}  // namespace loggraph::model
