#pragma once

#include <cstddef>
#include <span>

#include "loggraph/tensor/ops.hpp"
#include "loggraph/tensor/tensor.hpp"

namespace loggraph::model {

using tensor::IndexMatrix;
using tensor::Tensor;

// Building blocks of the structure-aware graph transformer. Each takes and
// returns differentiable tensors; `n` below is the node count.

/// x0_i = x_i + z_in[indeg_i] + z_out[outdeg_i]; plain features when disabled.
Tensor node_input_encoding(const Tensor& features, std::span<const std::size_t> in_degree,
                           std::span<const std::size_t> out_degree, const Tensor& z_in, const Tensor& z_out,
                           bool use_degree);

struct Projections {
  Tensor q;
  Tensor k;
  Tensor v;
};

Projections qkv_project(const Tensor& x, const Tensor& w_query, const Tensor& w_key, const Tensor& w_value);

/// Scales rows of Q and V by the per-node weight w (n x 1). K is left as is.
Projections edge_weight_gating(const Projections& p, const Tensor& w, bool enabled);

/// b_ij = q_i . D[psi_ij] + k_j . D[psi_ij]. `buckets` is psi, `buckets_t` its transpose.
Tensor spatial_bias(const Tensor& q, const Tensor& k, const IndexMatrix& buckets, const IndexMatrix& buckets_t,
                    const Tensor& distance_table);

/// b_ij = s[psi_ij] for a learnable 1 x buckets row of scalars.
Tensor scalar_distance_bias(const IndexMatrix& buckets, const Tensor& scalars);

/// Row-softmax of (q_i . k_j + b_ij) / sqrt(scale_dim). An undefined bias means none.
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& bias, std::size_t scale_dim);

/// z_i = sum_j a_ij (v_j + D[psi_ij]); the distance term is skipped when the table is undefined.
Tensor aggregate(const Tensor& attn, const Tensor& v, const IndexMatrix& buckets, const Tensor& distance_table);

/// concat(sum over nodes, max over nodes) -> 1 x 2c.
Tensor readout(const Tensor& x);

}  // namespace loggraph::model
