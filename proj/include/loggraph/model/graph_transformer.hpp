#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "loggraph/graph/log_graph.hpp"
#include "loggraph/model/config.hpp"
#include "loggraph/model/layers.hpp"
#include "loggraph/tensor/param_store.hpp"

namespace loggraph::model {

/// Model-ready view of a LogGraph: constant tensors plus clamped indices.
struct PreparedGraph {
  Tensor features;                    // n x d_v
  std::vector<std::size_t> in_degree;  // clamped to max_degree
  std::vector<std::size_t> out_degree;
  IndexMatrix buckets;    // psi_ij
  IndexMatrix buckets_t;  // psi_ji
  Tensor w;               // n x 1, transformed outgoing weight sums
  int label = 0;
  std::size_t clamped = 0;  // degrees that exceeded max_degree
};

struct ForwardContext {
  bool training = false;
  tensor::DropoutStream* dropout = nullptr;
};

// Structure-aware graph transformer classifier: degree-enriched inputs,
// weight-gated queries/values, distance-embedding bias and value terms,
// post-norm residual blocks, sum/max readout and a three-layer head.
class GraphTransformer {
 public:
  explicit GraphTransformer(ModelConfig cfg, std::uint64_t seed = 0);

  const ModelConfig& config() const { return cfg_; }
  tensor::ParamStore& params() { return params_; }
  const tensor::ParamStore& params() const { return params_; }

  PreparedGraph prepare(const graph::LogGraph& g) const;

  /// One encoder layer; `x` has d_v columns for layer 0 and d_z afterwards.
  Tensor encoder_block(const Tensor& x, const PreparedGraph& g, std::size_t layer, ForwardContext& ctx) const;
  Tensor encode(const PreparedGraph& g, ForwardContext& ctx) const;           // n x d_z
  Tensor graph_representation(const PreparedGraph& g, ForwardContext& ctx) const;  // 1 x 2 d_z
  Tensor classify(const Tensor& h, ForwardContext& ctx) const;                 // B x 2 logits
  Tensor logits(std::span<const PreparedGraph* const> batch, ForwardContext& ctx) const;
  Tensor logits(const PreparedGraph& g, ForwardContext& ctx) const;

  /// Class probabilities (normal, anomalous) in inference mode.
  std::vector<double> predict_proba(const PreparedGraph& g) const;

  nlohmann::ordered_json checkpoint_json() const;
  void save_checkpoint(const std::filesystem::path& path) const;
  static GraphTransformer load_checkpoint(const std::filesystem::path& path);
  static GraphTransformer from_checkpoint_json(const nlohmann::json& j);

 private:
  struct LayerParams {
    Tensor w_query, w_key, w_value;
    Tensor w_out, b_out, w_residual;
    Tensor ln1_gamma, ln1_beta;
    Tensor ffn_w1, ffn_b1, ffn_w2, ffn_b2;
    Tensor ln2_gamma, ln2_beta;
  };

  void build_params(std::uint64_t seed);

  ModelConfig cfg_;
  tensor::ParamStore params_;
  Tensor degree_in_, degree_out_, distance_table_, distance_scalars_;
  std::vector<LayerParams> layers_;
  Tensor head_w1_, head_b1_, head_ln1_gamma_, head_ln1_beta_;
  Tensor head_w2_, head_b2_, head_ln2_gamma_, head_ln2_beta_;
  Tensor head_w3_, head_b3_;
};

}  // namespace loggraph::model
