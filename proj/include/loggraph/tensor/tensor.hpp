#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace loggraph::tensor {

// Rank-2 dense tensors (row vectors are 1 x n) with reverse-mode
// differentiation. Every op records its inputs and a backward closure on the
// result node; Tensor::backward() walks that record in reverse topological
// order. Leaves created with requires_grad keep their grad buffers across
// passes until zero_grad().
struct Node {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);
  static Tensor full(std::size_t rows, std::size_t cols, double value, bool requires_grad = false);
  static Tensor from(std::size_t rows, std::size_t cols, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  std::size_t rows() const { return node_->rows; }
  std::size_t cols() const { return node_->cols; }
  std::size_t size() const { return node_->value.size(); }
  std::vector<std::size_t> shape() const { return {node_->rows, node_->cols}; }
  std::string shape_str() const;

  std::span<const double> data() const { return node_->value; }
  std::span<double> data() { return node_->value; }
  double at(std::size_t r, std::size_t c) const { return node_->value[r * node_->cols + c]; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> grad() { return node_->grad; }
  bool has_grad() const { return node_->grad.size() == node_->value.size(); }
  void zero_grad();
  /// Drops the grad buffer entirely, so has_grad() is false until the next backward.
  void clear_grad() { node_->grad.clear(); }

  /// Backpropagates from a 1 x 1 tensor. Throws ContractViolation otherwise.
  void backward() const;

  /// Same values, no recorded history.
  Tensor detach() const;

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Whether ops record backward closures on this thread.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Counter-based random stream: element k of a draw is a pure function of
// (seed, counter + k), so masks are reproducible regardless of call history.
class DropoutStream {
 public:
  explicit DropoutStream(std::uint64_t seed = 0) : seed_(seed) {}

  double uniform();  // in [0, 1)
  std::uint64_t counter() const { return counter_; }
  void reset(std::uint64_t seed) {
    seed_ = seed;
    counter_ = 0;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace loggraph::tensor
