#include "loggraph/model/config.hpp"

#include "loggraph/common/error.hpp"

namespace loggraph::model {

void ModelConfig::validate() const {
  if (d_v == 0 || d_z == 0) throw ConfigError("model widths d_v and d_z must be positive");
  if (heads == 0 || d_z % heads != 0) throw ConfigError("d_z must be divisible by the number of heads");
  if (encoder_layers < 1) throw ConfigError("encoder_layers must be >= 1");
  if (max_distance < 1) throw ConfigError("max distance L must be >= 1");
  if (max_degree < 1) throw ConfigError("max degree must be >= 1");
  if (ffn_hidden == 0 || encoder_ffn_hidden == 0) throw ConfigError("feed-forward widths must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
}

nlohmann::ordered_json ModelConfig::to_json() const {
  return {
      {"d_v", d_v},
      {"d_z", d_z},
      {"heads", heads},
      {"max_distance", max_distance},
      {"max_degree", max_degree},
      {"encoder_layers", encoder_layers},
      {"ffn_hidden", ffn_hidden},
      {"encoder_ffn_hidden", encoder_ffn_hidden},
      {"dropout", dropout},
      {"use_degree", use_degree},
      {"use_distance", use_distance},
      {"use_edge_weight", use_edge_weight},
      {"use_feature_structure_interaction", use_feature_structure_interaction},
      {"edge_weight_transform", graph::to_string(edge_weight_transform)},
      {"norm_order", "post"},
  };
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  try {
    ModelConfig c;
    c.d_v = j.at("d_v").get<std::size_t>();
    c.d_z = j.at("d_z").get<std::size_t>();
    c.heads = j.at("heads").get<std::size_t>();
    c.max_distance = j.at("max_distance").get<int>();
    c.max_degree = j.at("max_degree").get<int>();
    c.encoder_layers = j.at("encoder_layers").get<std::size_t>();
    c.ffn_hidden = j.at("ffn_hidden").get<std::size_t>();
    c.encoder_ffn_hidden = j.at("encoder_ffn_hidden").get<std::size_t>();
    c.dropout = j.at("dropout").get<double>();
    c.use_degree = j.at("use_degree").get<bool>();
    c.use_distance = j.at("use_distance").get<bool>();
    c.use_edge_weight = j.at("use_edge_weight").get<bool>();
    c.use_feature_structure_interaction = j.at("use_feature_structure_interaction").get<bool>();
    c.edge_weight_transform = graph::weight_transform_from_string(j.at("edge_weight_transform").get<std::string>());
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model config: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("invalid model config: ") + e.what());
  }
}

}  // namespace loggraph::model
