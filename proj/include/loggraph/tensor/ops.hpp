#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "loggraph/tensor/tensor.hpp"

namespace loggraph::tensor {

/// Integer matrix used by the gather/scatter ops (row-major).
struct IndexMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> values;

  std::size_t operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  IndexMatrix transposed() const;
};

// All ops throw ContractViolation on incompatible shapes, naming both shapes.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
/// a (r x c) plus a 1 x c row broadcast over rows.
Tensor add_row(const Tensor& a, const Tensor& row);
/// Scales row i of a (r x c) by w[i], w being r x 1.
Tensor mul_rows(const Tensor& a, const Tensor& w);
Tensor scale(const Tensor& a, double s);
Tensor transpose(const Tensor& a);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);

Tensor sum_rows(const Tensor& a);  // column-wise sum over rows -> 1 x c
Tensor max_rows(const Tensor& a);  // column-wise max over rows -> 1 x c
Tensor sum_all(const Tensor& a);   // -> 1 x 1

Tensor softmax_rows(const Tensor& a);
/// Row-wise normalisation to zero mean / unit variance, then gamma * x + beta
/// with gamma, beta of shape 1 x c.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);
/// Exact GELU, x * Phi(x).
Tensor gelu(const Tensor& a);
/// Inverted dropout; identity when !training or p == 0.
Tensor dropout(const Tensor& a, double p, DropoutStream& stream, bool training);

/// Rows of `table` selected by `indices` -> |indices| x table.cols.
Tensor lookup(const Tensor& table, std::span<const std::size_t> indices);
/// out(i, j) = m(i, idx(i, j)).
Tensor gather_cols(const Tensor& m, const IndexMatrix& idx);
/// out(i, b) = sum over j with idx(i, j) == b of a(i, j); out has `buckets` columns.
Tensor bucket_sum(const Tensor& a, const IndexMatrix& idx, std::size_t buckets);

/// Mean cross-entropy of row-wise softmax(logits) against class labels (log-sum-exp form).
Tensor cross_entropy(const Tensor& logits, std::span<const int> labels);

/// Row-wise softmax of plain values without recording history.
std::vector<double> softmax_values(const Tensor& logits);

}  // namespace loggraph::tensor
