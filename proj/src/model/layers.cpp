#include "loggraph/model/layers.hpp"

#include <array>
#include <cmath>

#include "loggraph/common/error.hpp"

namespace loggraph::model {

using namespace loggraph::tensor;

Tensor node_input_encoding(const Tensor& features, std::span<const std::size_t> in_degree,
                           std::span<const std::size_t> out_degree, const Tensor& z_in, const Tensor& z_out,
                           bool use_degree) {
  if (!use_degree) return features;
  if (in_degree.size() != features.rows() || out_degree.size() != features.rows()) {
    throw ContractViolation("node_input_encoding: degree vectors do not match " + features.shape_str());
  }
  return add(add(features, lookup(z_in, in_degree)), lookup(z_out, out_degree));
}

Projections qkv_project(const Tensor& x, const Tensor& w_query, const Tensor& w_key, const Tensor& w_value) {
  return {matmul(x, w_query), matmul(x, w_key), matmul(x, w_value)};
}

Projections edge_weight_gating(const Projections& p, const Tensor& w, bool enabled) {
  if (!enabled) return p;
  return {mul_rows(p.q, w), p.k, mul_rows(p.v, w)};
}

Tensor spatial_bias(const Tensor& q, const Tensor& k, const IndexMatrix& buckets, const IndexMatrix& buckets_t,
                    const Tensor& distance_table) {
  const Tensor table_t = transpose(distance_table);
  const Tensor q_term = gather_cols(matmul(q, table_t), buckets);
  // (k_j . D[psi_ij]) indexed [j][i] first, then flipped.
  const Tensor k_term = transpose(gather_cols(matmul(k, table_t), buckets_t));
  return add(q_term, k_term);
}

Tensor scalar_distance_bias(const IndexMatrix& buckets, const Tensor& scalars) {
  if (scalars.rows() != 1) throw ContractViolation("scalar_distance_bias: scalars must be a row, got " + scalars.shape_str());
  const Tensor ones = Tensor::full(buckets.rows, 1, 1.0);
  return gather_cols(matmul(ones, scalars), buckets);
}

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& bias, std::size_t scale_dim) {
  Tensor scores = matmul(q, transpose(k));
  if (bias.defined()) scores = add(scores, bias);
  return softmax_rows(scale(scores, 1.0 / std::sqrt(static_cast<double>(scale_dim))));
}

Tensor aggregate(const Tensor& attn, const Tensor& v, const IndexMatrix& buckets, const Tensor& distance_table) {
  Tensor z = matmul(attn, v);
  if (distance_table.defined()) {
    z = add(z, matmul(bucket_sum(attn, buckets, distance_table.rows()), distance_table));
  }
  return z;
}

Tensor readout(const Tensor& x) {
  const std::array<Tensor, 2> parts{sum_rows(x), max_rows(x)};
  return concat_cols(parts);
}

}  // namespace loggraph::model
