#include "loggraph/model/graph_transformer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "loggraph/common/error.hpp"

namespace loggraph::model {

using namespace loggraph::tensor;

namespace {

std::uint64_t name_seed(std::uint64_t seed, const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Each parameter draws from its own stream, so its initial value depends only
// on (seed, name, shape) and not on which other parameters exist.
std::vector<double> uniform_values(std::uint64_t seed, const std::string& name, std::size_t count, double bound) {
  std::mt19937_64 rng(name_seed(seed, name));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> v(count);
  for (double& x : v) x = dist(rng);
  return v;
}

constexpr const char* kCheckpointFormat = "loggraph-checkpoint";

}  // namespace

GraphTransformer::GraphTransformer(ModelConfig cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  build_params(seed);
}

void GraphTransformer::build_params(std::uint64_t seed) {
  auto xavier = [&](const std::string& name, std::size_t rows, std::size_t cols) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    return params_.add(name, rows, cols, uniform_values(seed, name, rows * cols, bound));
  };
  auto small = [&](const std::string& name, std::size_t rows, std::size_t cols) {
    return params_.add(name, rows, cols, uniform_values(seed, name, rows * cols, 0.05));
  };
  auto ones = [&](const std::string& name, std::size_t cols) {
    return params_.add(name, 1, cols, std::vector<double>(cols, 1.0));
  };
  auto zeros = [&](const std::string& name, std::size_t rows, std::size_t cols) {
    return params_.add_zeros(name, rows, cols);
  };

  const auto degree_rows = static_cast<std::size_t>(cfg_.max_degree) + 1;
  degree_in_ = small("degree.in", degree_rows, cfg_.d_v);
  degree_out_ = small("degree.out", degree_rows, cfg_.d_v);
  distance_table_ = small("distance.table", cfg_.distance_buckets(), cfg_.d_z);
  distance_scalars_ = zeros("distance.scalar", cfg_.heads, cfg_.distance_buckets());

  for (std::size_t l = 0; l < cfg_.encoder_layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    const std::size_t in_dim = l == 0 ? cfg_.d_v : cfg_.d_z;
    LayerParams lp;
    lp.w_query = xavier(p + "w_query", in_dim, cfg_.d_z);
    lp.w_key = xavier(p + "w_key", in_dim, cfg_.d_z);
    lp.w_value = xavier(p + "w_value", in_dim, cfg_.d_z);
    lp.w_out = xavier(p + "w_out", cfg_.d_z, cfg_.d_z);
    lp.b_out = zeros(p + "b_out", 1, cfg_.d_z);
    if (in_dim != cfg_.d_z) lp.w_residual = xavier(p + "w_residual", in_dim, cfg_.d_z);
    lp.ln1_gamma = ones(p + "ln1.gamma", cfg_.d_z);
    lp.ln1_beta = zeros(p + "ln1.beta", 1, cfg_.d_z);
    lp.ffn_w1 = xavier(p + "ffn.w1", cfg_.d_z, cfg_.encoder_ffn_hidden);
    lp.ffn_b1 = zeros(p + "ffn.b1", 1, cfg_.encoder_ffn_hidden);
    lp.ffn_w2 = xavier(p + "ffn.w2", cfg_.encoder_ffn_hidden, cfg_.d_z);
    lp.ffn_b2 = zeros(p + "ffn.b2", 1, cfg_.d_z);
    lp.ln2_gamma = ones(p + "ln2.gamma", cfg_.d_z);
    lp.ln2_beta = zeros(p + "ln2.beta", 1, cfg_.d_z);
    layers_.push_back(std::move(lp));
  }

  const std::size_t h = cfg_.ffn_hidden;
  head_w1_ = xavier("head.fc1.w", 2 * cfg_.d_z, h);
  head_b1_ = zeros("head.fc1.b", 1, h);
  head_ln1_gamma_ = ones("head.ln1.gamma", h);
  head_ln1_beta_ = zeros("head.ln1.beta", 1, h);
  head_w2_ = xavier("head.fc2.w", h, h);
  head_b2_ = zeros("head.fc2.b", 1, h);
  head_ln2_gamma_ = ones("head.ln2.gamma", h);
  head_ln2_beta_ = zeros("head.ln2.beta", 1, h);
  head_w3_ = xavier("head.fc3.w", h, 2);
  head_b3_ = zeros("head.fc3.b", 1, 2);
}

PreparedGraph GraphTransformer::prepare(const graph::LogGraph& g) const {
  const std::size_t n = g.num_nodes();
  if (n == 0) throw ContractViolation("prepare: graph has no nodes");
  if (g.feature_dim != cfg_.d_v) {
    throw DataError("graph features have width " + std::to_string(g.feature_dim) + " but the model expects d_v = " +
                    std::to_string(cfg_.d_v));
  }
  if (g.max_distance != cfg_.max_distance) {
    throw DataError("graph distances were clipped at L = " + std::to_string(g.max_distance) +
                    " but the model uses L = " + std::to_string(cfg_.max_distance));
  }
  PreparedGraph p;
  p.features = Tensor::from(n, cfg_.d_v, g.features);
  auto clamp = [&](int d) {
    if (d > cfg_.max_degree) {
      ++p.clamped;
      return static_cast<std::size_t>(cfg_.max_degree);
    }
    return static_cast<std::size_t>(d);
  };
  for (std::size_t i = 0; i < n; ++i) {
    p.in_degree.push_back(clamp(g.in_deg[i]));
    p.out_degree.push_back(clamp(g.out_deg[i]));
  }
  p.buckets = IndexMatrix{n, n, std::vector<std::size_t>(n * n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) p.buckets.values[i * n + j] = graph::distance_bucket(g.dist(i, j), g.max_distance);
  }
  p.buckets_t = p.buckets.transposed();
  p.w = Tensor::from(n, 1, graph::edge_weight_vector(g, cfg_.edge_weight_transform));
  p.label = static_cast<int>(g.label);
  return p;
}

Tensor GraphTransformer::encoder_block(const Tensor& x, const PreparedGraph& g, std::size_t layer,
                                       ForwardContext& ctx) const {
  const LayerParams& lp = layers_.at(layer);
  const std::size_t dh = cfg_.head_dim();
  const bool drop = ctx.training && cfg_.dropout > 0.0;
  if (drop && ctx.dropout == nullptr) throw ContractViolation("training forward pass needs a dropout stream");
  DropoutStream unused;
  DropoutStream& stream = ctx.dropout ? *ctx.dropout : unused;

  const Projections proj = edge_weight_gating(qkv_project(x, lp.w_query, lp.w_key, lp.w_value), g.w,
                                              cfg_.use_edge_weight);

  std::vector<Tensor> heads;
  heads.reserve(cfg_.heads);
  for (std::size_t h = 0; h < cfg_.heads; ++h) {
    const Tensor q = slice_cols(proj.q, h * dh, dh);
    const Tensor k = slice_cols(proj.k, h * dh, dh);
    const Tensor v = slice_cols(proj.v, h * dh, dh);
    Tensor table;
    Tensor bias;
    if (cfg_.use_distance) {
      table = slice_cols(distance_table_, h * dh, dh);
      if (cfg_.use_feature_structure_interaction) {
        bias = spatial_bias(q, k, g.buckets, g.buckets_t, table);
      } else {
        const std::array<std::size_t, 1> row{h};
        bias = scalar_distance_bias(g.buckets, lookup(distance_scalars_, row));
      }
    }
    const Tensor attn = dropout(attention(q, k, bias, dh), cfg_.dropout, stream, drop);
    heads.push_back(aggregate(attn, v, g.buckets, table));
  }

  const Tensor z = concat_cols(heads);
  const Tensor out = add_row(matmul(z, lp.w_out), lp.b_out);
  const Tensor residual = lp.w_residual.defined() ? matmul(x, lp.w_residual) : x;
  const Tensor h1 = layer_norm(add(out, residual), lp.ln1_gamma, lp.ln1_beta);
  Tensor ffn = gelu(add_row(matmul(h1, lp.ffn_w1), lp.ffn_b1));
  ffn = dropout(ffn, cfg_.dropout, stream, drop);
  ffn = add_row(matmul(ffn, lp.ffn_w2), lp.ffn_b2);
  return layer_norm(add(h1, ffn), lp.ln2_gamma, lp.ln2_beta);
}

Tensor GraphTransformer::encode(const PreparedGraph& g, ForwardContext& ctx) const {
  Tensor x = node_input_encoding(g.features, g.in_degree, g.out_degree, degree_in_, degree_out_, cfg_.use_degree);
  for (std::size_t l = 0; l < cfg_.encoder_layers; ++l) x = encoder_block(x, g, l, ctx);
  return x;
}

Tensor GraphTransformer::graph_representation(const PreparedGraph& g, ForwardContext& ctx) const {
  return readout(encode(g, ctx));
}

Tensor GraphTransformer::classify(const Tensor& h, ForwardContext& ctx) const {
  if (h.cols() != 2 * cfg_.d_z) {
    throw ContractViolation("classify: expected width " + std::to_string(2 * cfg_.d_z) + ", got " + h.shape_str());
  }
  const bool drop = ctx.training && cfg_.dropout > 0.0;
  DropoutStream unused;
  DropoutStream& stream = ctx.dropout ? *ctx.dropout : unused;

  Tensor x = add_row(matmul(h, head_w1_), head_b1_);
  x = dropout(gelu(layer_norm(x, head_ln1_gamma_, head_ln1_beta_)), cfg_.dropout, stream, drop);
  x = add_row(matmul(x, head_w2_), head_b2_);
  x = dropout(gelu(layer_norm(x, head_ln2_gamma_, head_ln2_beta_)), cfg_.dropout, stream, drop);
  return add_row(matmul(x, head_w3_), head_b3_);
}

Tensor GraphTransformer::logits(std::span<const PreparedGraph* const> batch, ForwardContext& ctx) const {
  if (batch.empty()) throw ContractViolation("logits: empty batch");
  std::vector<Tensor> reps;
  reps.reserve(batch.size());
  for (const PreparedGraph* g : batch) reps.push_back(graph_representation(*g, ctx));
  return classify(concat_rows(reps), ctx);
}

Tensor GraphTransformer::logits(const PreparedGraph& g, ForwardContext& ctx) const {
  const std::array<const PreparedGraph*, 1> batch{&g};
  return logits(batch, ctx);
}

std::vector<double> GraphTransformer::predict_proba(const PreparedGraph& g) const {
  NoGradGuard guard;
  ForwardContext ctx;
  return softmax_values(logits(g, ctx));
}

nlohmann::ordered_json GraphTransformer::checkpoint_json() const {
  nlohmann::ordered_json j;
  j["format"] = kCheckpointFormat;
  j["model_config"] = cfg_.to_json();
  j["weights"] = params_.to_json();
  return j;
}

void GraphTransformer::save_checkpoint(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out << checkpoint_json().dump() << '\n';
}

GraphTransformer GraphTransformer::from_checkpoint_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", std::string{}) != kCheckpointFormat) {
    throw DataError("not a loggraph checkpoint");
  }
  if (!j.contains("model_config") || !j.contains("weights")) throw DataError("checkpoint is incomplete");
  GraphTransformer model(ModelConfig::from_json(j["model_config"]));
  model.params_.load_json(j["weights"]);
  return model;
}

GraphTransformer GraphTransformer::load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("checkpoint: ") + e.what(), e.byte);
  }
  return from_checkpoint_json(j);
}

}  // namespace loggraph::model
