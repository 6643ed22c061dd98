#include "loggraph/tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Core>

#include "loggraph/common/error.hpp"

namespace loggraph::tensor {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<RowMatrix>;

Map view(std::vector<double>& v, std::size_t r, std::size_t c) {
  return Map(v.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw ContractViolation(std::string(op) + ": incompatible shapes " + a.shape_str() + " and " + b.shape_str());
}

void require_defined(const char* op, const Tensor& t) {
  if (!t.defined()) throw ContractViolation(std::string(op) + ": undefined tensor");
}

#ifndef NDEBUG
void check_finite(const char* op, const Node& out, std::initializer_list<const Node*> inputs) {
  for (const Node* in : inputs) {
    for (double x : in->value) {
      if (!std::isfinite(x)) return;
    }
  }
  for (double x : out.value) {
    if (!std::isfinite(x)) throw NumericError(std::string(op) + " produced a non-finite value");
  }
}
#else
void check_finite(const char*, const Node&, std::initializer_list<const Node*>) {}
#endif

// Builds the result node; history is attached only when some input needs it.
Tensor make_result(std::size_t rows, std::size_t cols, std::vector<double> value,
                   std::vector<std::shared_ptr<Node>> parents, std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->rows = rows;
  node->cols = cols;
  node->value = std::move(value);
  if (grad_enabled()) {
    const bool needs = std::any_of(parents.begin(), parents.end(),
                                   [](const std::shared_ptr<Node>& p) { return p->requires_grad; });
    if (needs) {
      node->requires_grad = true;
      node->parents = std::move(parents);
      node->backward_fn = std::move(backward);
    }
  }
  return Tensor(std::move(node));
}

// Parent grad buffer, or nullptr when that parent does not need one.
std::vector<double>* grad_of(Node& self, std::size_t i) {
  Node& p = *self.parents[i];
  if (!p.requires_grad) return nullptr;
  p.ensure_grad();
  return &p.grad;
}

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

}  // namespace

IndexMatrix IndexMatrix::transposed() const {
  IndexMatrix t{cols, rows, std::vector<std::size_t>(values.size())};
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) t.values[j * rows + i] = values[i * cols + j];
  }
  return t;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined("matmul", a);
  require_defined("matmul", b);
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  std::vector<double> out(n * m);
  view(out, n, m).noalias() = view(a.node()->value, n, k) * view(b.node()->value, k, m);
  auto result = make_result(n, m, std::move(out), {a.node_ptr(), b.node_ptr()}, [n, k, m](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    auto dc = view(self.grad, n, m);
    if (auto* ga = grad_of(self, 0)) view(*ga, n, k).noalias() += dc * view(pb.value, k, m).transpose();
    if (auto* gb = grad_of(self, 1)) view(*gb, k, m).noalias() += view(pa.value, n, k).transpose() * dc;
  });
  check_finite("matmul", *result.node(), {a.node(), b.node()});
  return result;
}

namespace {

template <typename Fwd, typename BwdA, typename BwdB>
Tensor elementwise(const char* op, const Tensor& a, const Tensor& b, Fwd fwd, BwdA da, BwdB db) {
  require_defined(op, a);
  require_defined(op, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error(op, a, b);
  std::vector<double> out(a.size());
  const auto& av = a.node()->value;
  const auto& bv = b.node()->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i], bv[i]);
  auto result = make_result(a.rows(), a.cols(), std::move(out), {a.node_ptr(), b.node_ptr()}, [da, db](Node& self) {
    const auto& x = self.parents[0]->value;
    const auto& y = self.parents[1]->value;
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += self.grad[i] * da(x[i], y[i]);
    }
    if (auto* gb = grad_of(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*gb)[i] += self.grad[i] * db(x[i], y[i]);
    }
  });
  check_finite(op, *result.node(), {a.node(), b.node()});
  return result;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return elementwise(
      "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return elementwise(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return elementwise(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
  require_defined("add_row", a);
  require_defined("add_row", row);
  if (row.rows() != 1 || row.cols() != a.cols()) shape_error("add_row", a, row);
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(a.node()->value);
  const auto& rv = row.node()->value;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += rv[j];
  }
  return make_result(r, c, std::move(out), {a.node_ptr(), row.node_ptr()}, [r, c](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += self.grad[i];
    }
    if (auto* gr = grad_of(self, 1)) {
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) (*gr)[j] += self.grad[i * c + j];
      }
    }
  });
}

Tensor mul_rows(const Tensor& a, const Tensor& w) {
  require_defined("mul_rows", a);
  require_defined("mul_rows", w);
  if (w.cols() != 1 || w.rows() != a.rows()) shape_error("mul_rows", a, w);
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(a.node()->value);
  const auto& wv = w.node()->value;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] *= wv[i];
  }
  return make_result(r, c, std::move(out), {a.node_ptr(), w.node_ptr()}, [r, c](Node& self) {
    const auto& av = self.parents[0]->value;
    const auto& wv = self.parents[1]->value;
    auto* ga = grad_of(self, 0);
    auto* gw = grad_of(self, 1);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        const double g = self.grad[i * c + j];
        if (ga) (*ga)[i * c + j] += g * wv[i];
        if (gw) (*gw)[i] += g * av[i * c + j];
      }
    }
  });
}

Tensor scale(const Tensor& a, double s) {
  require_defined("scale", a);
  std::vector<double> out(a.node()->value);
  for (double& x : out) x *= s;
  return make_result(a.rows(), a.cols(), std::move(out), {a.node_ptr()}, [s](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += s * self.grad[i];
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_defined("transpose", a);
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r * c);
  view(out, c, r) = view(a.node()->value, r, c).transpose();
  return make_result(c, r, std::move(out), {a.node_ptr()}, [r, c](Node& self) {
    if (auto* ga = grad_of(self, 0)) view(*ga, r, c) += view(self.grad, c, r).transpose();
  });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count) {
  require_defined("slice_cols", a);
  if (begin + count > a.cols() || count == 0) {
    throw ContractViolation("slice_cols: columns [" + std::to_string(begin) + ", " +
                            std::to_string(begin + count) + ") out of range for shape " + a.shape_str());
  }
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r * count);
  const auto& av = a.node()->value;
  for (std::size_t i = 0; i < r; ++i) {
    std::copy_n(av.begin() + static_cast<std::ptrdiff_t>(i * c + begin), count,
                out.begin() + static_cast<std::ptrdiff_t>(i * count));
  }
  return make_result(r, count, std::move(out), {a.node_ptr()}, [r, c, begin, count](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < count; ++j) (*ga)[i * c + begin + j] += self.grad[i * count + j];
      }
    }
  });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractViolation("concat_cols: no inputs");
  const std::size_t r = parts[0].rows();
  std::size_t c = 0;
  std::vector<std::shared_ptr<Node>> parents;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    require_defined("concat_cols", p);
    if (p.rows() != r) shape_error("concat_cols", parts[0], p);
    offsets.push_back(c);
    c += p.cols();
    parents.push_back(p.node_ptr());
  }
  std::vector<double> out(r * c);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& pv = parts[k].node()->value;
    const std::size_t pc = parts[k].cols();
    for (std::size_t i = 0; i < r; ++i) {
      std::copy_n(pv.begin() + static_cast<std::ptrdiff_t>(i * pc), pc,
                  out.begin() + static_cast<std::ptrdiff_t>(i * c + offsets[k]));
    }
  }
  return make_result(r, c, std::move(out), std::move(parents), [r, c, offsets](Node& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      auto* g = grad_of(self, k);
      if (!g) continue;
      const std::size_t pc = self.parents[k]->cols;
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < pc; ++j) (*g)[i * pc + j] += self.grad[i * c + offsets[k] + j];
      }
    }
  });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractViolation("concat_rows: no inputs");
  const std::size_t c = parts[0].cols();
  std::size_t r = 0;
  std::vector<std::shared_ptr<Node>> parents;
  std::vector<double> out;
  for (const auto& p : parts) {
    require_defined("concat_rows", p);
    if (p.cols() != c) shape_error("concat_rows", parts[0], p);
    r += p.rows();
    out.insert(out.end(), p.node()->value.begin(), p.node()->value.end());
    parents.push_back(p.node_ptr());
  }
  return make_result(r, c, std::move(out), std::move(parents), [](Node& self) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      const std::size_t len = self.parents[k]->value.size();
      if (auto* g = grad_of(self, k)) {
        for (std::size_t i = 0; i < len; ++i) (*g)[i] += self.grad[offset + i];
      }
      offset += len;
    }
  });
}

Tensor sum_rows(const Tensor& a) {
  require_defined("sum_rows", a);
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(c, 0.0);
  const auto& av = a.node()->value;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[j] += av[i * c + j];
  }
  return make_result(1, c, std::move(out), {a.node_ptr()}, [r, c](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) (*ga)[i * c + j] += self.grad[j];
      }
    }
  });
}

Tensor max_rows(const Tensor& a) {
  require_defined("max_rows", a);
  const std::size_t r = a.rows(), c = a.cols();
  if (r == 0) throw ContractViolation("max_rows: tensor has no rows");
  std::vector<double> out(c, -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> argmax(c, 0);
  const auto& av = a.node()->value;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      if (av[i * c + j] > out[j]) {
        out[j] = av[i * c + j];
        argmax[j] = i;
      }
    }
  }
  return make_result(1, c, std::move(out), {a.node_ptr()}, [c, argmax](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t j = 0; j < c; ++j) (*ga)[argmax[j] * c + j] += self.grad[j];
    }
  });
}

Tensor sum_all(const Tensor& a) {
  require_defined("sum_all", a);
  double s = 0.0;
  for (double x : a.node()->value) s += x;
  return make_result(1, 1, {s}, {a.node_ptr()}, [](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (double& g : *ga) g += self.grad[0];
    }
  });
}

Tensor softmax_rows(const Tensor& a) {
  require_defined("softmax_rows", a);
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(a.node()->value);
  for (std::size_t i = 0; i < r; ++i) {
    double* row = out.data() + i * c;
    const double mx = *std::max_element(row, row + c);
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      row[j] = std::exp(row[j] - mx);
      total += row[j];
    }
    for (std::size_t j = 0; j < c; ++j) row[j] /= total;
  }
  return make_result(r, c, std::move(out), {a.node_ptr()}, [r, c](Node& self) {
    auto* ga = grad_of(self, 0);
    if (!ga) return;
    for (std::size_t i = 0; i < r; ++i) {
      const double* y = self.value.data() + i * c;
      const double* gy = self.grad.data() + i * c;
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += y[j] * gy[j];
      for (std::size_t j = 0; j < c; ++j) (*ga)[i * c + j] += y[j] * (gy[j] - dot);
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  require_defined("layer_norm", x);
  const std::size_t r = x.rows(), c = x.cols();
  if (gamma.rows() != 1 || gamma.cols() != c) shape_error("layer_norm", x, gamma);
  if (beta.rows() != 1 || beta.cols() != c) shape_error("layer_norm", x, beta);

  std::vector<double> xhat(r * c), inv_std(r), out(r * c);
  const auto& xv = x.node()->value;
  const auto& gv = gamma.node()->value;
  const auto& bv = beta.node()->value;
  for (std::size_t i = 0; i < r; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < c; ++j) mean += xv[i * c + j];
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (xv[i * c + j] - mean) * (xv[i * c + j] - mean);
    var /= static_cast<double>(c);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) {
      xhat[i * c + j] = (xv[i * c + j] - mean) * inv_std[i];
      out[i * c + j] = gv[j] * xhat[i * c + j] + bv[j];
    }
  }
  auto result = make_result(
      r, c, std::move(out), {x.node_ptr(), gamma.node_ptr(), beta.node_ptr()},
      [r, c, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
        const auto& gv = self.parents[1]->value;
        auto* gx = grad_of(self, 0);
        auto* gg = grad_of(self, 1);
        auto* gb = grad_of(self, 2);
        const double inv_c = 1.0 / static_cast<double>(c);
        for (std::size_t i = 0; i < r; ++i) {
          const double* dy = self.grad.data() + i * c;
          const double* xh = xhat.data() + i * c;
          double sum_d = 0.0, sum_dx = 0.0;
          for (std::size_t j = 0; j < c; ++j) {
            const double d = dy[j] * gv[j];
            sum_d += d;
            sum_dx += d * xh[j];
            if (gg) (*gg)[j] += dy[j] * xh[j];
            if (gb) (*gb)[j] += dy[j];
          }
          if (gx) {
            for (std::size_t j = 0; j < c; ++j) {
              const double d = dy[j] * gv[j];
              (*gx)[i * c + j] += inv_std[i] * (d - inv_c * sum_d - xh[j] * inv_c * sum_dx);
            }
          }
        }
      });
  check_finite("layer_norm", *result.node(), {x.node(), gamma.node(), beta.node()});
  return result;
}

Tensor gelu(const Tensor& a) {
  require_defined("gelu", a);
  std::vector<double> out(a.node()->value);
  for (double& x : out) x = 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
  return make_result(a.rows(), a.cols(), std::move(out), {a.node_ptr()}, [](Node& self) {
    auto* ga = grad_of(self, 0);
    if (!ga) return;
    const auto& xv = self.parents[0]->value;
    for (std::size_t i = 0; i < xv.size(); ++i) {
      const double x = xv[i];
      const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
      (*ga)[i] += self.grad[i] * (cdf + x * pdf);
    }
  });
}

Tensor dropout(const Tensor& a, double p, DropoutStream& stream, bool training) {
  require_defined("dropout", a);
  if (p < 0.0 || p >= 1.0) throw ContractViolation("dropout: rate must lie in [0, 1)");
  if (!training || p == 0.0) return a;
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(a.size());
  for (double& m : mask) m = stream.uniform() < p ? 0.0 : keep_scale;
  std::vector<double> out(a.node()->value);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return make_result(a.rows(), a.cols(), std::move(out), {a.node_ptr()}, [mask = std::move(mask)](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < mask.size(); ++i) (*ga)[i] += mask[i] * self.grad[i];
    }
  });
}

Tensor lookup(const Tensor& table, std::span<const std::size_t> indices) {
  require_defined("lookup", table);
  const std::size_t c = table.cols();
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  std::vector<double> out(idx.size() * c);
  const auto& tv = table.node()->value;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= table.rows()) {
      throw ContractViolation("lookup: index " + std::to_string(idx[i]) + " out of range for table " +
                              table.shape_str());
    }
    std::copy_n(tv.begin() + static_cast<std::ptrdiff_t>(idx[i] * c), c,
                out.begin() + static_cast<std::ptrdiff_t>(i * c));
  }
  const std::size_t n = idx.size();
  return make_result(n, c, std::move(out), {table.node_ptr()}, [c, idx = std::move(idx)](Node& self) {
    if (auto* gt = grad_of(self, 0)) {
      for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = 0; j < c; ++j) (*gt)[idx[i] * c + j] += self.grad[i * c + j];
      }
    }
  });
}

Tensor gather_cols(const Tensor& m, const IndexMatrix& idx) {
  require_defined("gather_cols", m);
  if (idx.rows != m.rows()) {
    throw ContractViolation("gather_cols: index rows " + std::to_string(idx.rows) + " vs tensor " + m.shape_str());
  }
  const std::size_t r = idx.rows, k = idx.cols, c = m.cols();
  std::vector<double> out(r * k);
  const auto& mv = m.node()->value;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t col = idx(i, j);
      if (col >= c) throw ContractViolation("gather_cols: column index out of range for " + m.shape_str());
      out[i * k + j] = mv[i * c + col];
    }
  }
  return make_result(r, k, std::move(out), {m.node_ptr()}, [r, k, c, idx](Node& self) {
    if (auto* gm = grad_of(self, 0)) {
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < k; ++j) (*gm)[i * c + idx(i, j)] += self.grad[i * k + j];
      }
    }
  });
}

Tensor bucket_sum(const Tensor& a, const IndexMatrix& idx, std::size_t buckets) {
  require_defined("bucket_sum", a);
  if (idx.rows != a.rows() || idx.cols != a.cols()) {
    throw ContractViolation("bucket_sum: index shape [" + std::to_string(idx.rows) + ", " +
                            std::to_string(idx.cols) + "] vs tensor " + a.shape_str());
  }
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r * buckets, 0.0);
  const auto& av = a.node()->value;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const std::size_t b = idx(i, j);
      if (b >= buckets) throw ContractViolation("bucket_sum: bucket index out of range");
      out[i * buckets + b] += av[i * c + j];
    }
  }
  return make_result(r, buckets, std::move(out), {a.node_ptr()}, [r, c, buckets, idx](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) (*ga)[i * c + j] += self.grad[i * buckets + idx(i, j)];
      }
    }
  });
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> labels) {
  require_defined("cross_entropy", logits);
  const std::size_t r = logits.rows(), c = logits.cols();
  if (labels.size() != r || r == 0) {
    throw ContractViolation("cross_entropy: " + std::to_string(labels.size()) + " labels for logits " +
                            logits.shape_str());
  }
  std::vector<double> probs(r * c);
  std::vector<int> lab(labels.begin(), labels.end());
  const auto& lv = logits.node()->value;
  double loss = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    if (lab[i] < 0 || static_cast<std::size_t>(lab[i]) >= c) throw ContractViolation("cross_entropy: label out of range");
    const double* row = lv.data() + i * c;
    const double mx = *std::max_element(row, row + c);
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) total += std::exp(row[j] - mx);
    const double lse = mx + std::log(total);
    loss += lse - row[lab[i]];
    for (std::size_t j = 0; j < c; ++j) probs[i * c + j] = std::exp(row[j] - lse);
  }
  loss /= static_cast<double>(r);
  return make_result(1, 1, {loss}, {logits.node_ptr()},
                     [r, c, probs = std::move(probs), lab = std::move(lab)](Node& self) {
                       auto* gl = grad_of(self, 0);
                       if (!gl) return;
                       const double s = self.grad[0] / static_cast<double>(r);
                       for (std::size_t i = 0; i < r; ++i) {
                         for (std::size_t j = 0; j < c; ++j) {
                           const double target = static_cast<int>(j) == lab[i] ? 1.0 : 0.0;
                           (*gl)[i * c + j] += s * (probs[i * c + j] - target);
                         }
                       }
                     });
}

std::vector<double> softmax_values(const Tensor& logits) {
  NoGradGuard guard;
  auto p = softmax_rows(logits);
  return {p.data().begin(), p.data().end()};
}

}  // namespace loggraph::tensor
