#include "loggraph/tensor/tensor.hpp"

#include <algorithm>
#include <unordered_set>

#include "loggraph/common/error.hpp"

namespace loggraph::tensor {

namespace {

thread_local bool g_grad_enabled = true;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

double DropoutStream::uniform() {
  const std::uint64_t bits = splitmix64(splitmix64(seed_) ^ counter_++);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
  return full(rows, cols, 0.0, requires_grad);
}

Tensor Tensor::full(std::size_t rows, std::size_t cols, double value, bool requires_grad) {
  return from(rows, cols, std::vector<double>(rows * cols, value), requires_grad);
}

Tensor Tensor::from(std::size_t rows, std::size_t cols, std::vector<double> values, bool requires_grad) {
  if (values.size() != rows * cols) {
    throw ContractViolation("Tensor::from: " + std::to_string(values.size()) + " values for shape [" +
                            std::to_string(rows) + ", " + std::to_string(cols) + "]");
  }
  auto node = std::make_shared<Node>();
  node->rows = rows;
  node->cols = cols;
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from(1, 1, {value}, requires_grad); }

std::string Tensor::shape_str() const {
  if (!node_) return "[undefined]";
  return "[" + std::to_string(node_->rows) + ", " + std::to_string(node_->cols) + "]";
}

double Tensor::item() const {
  if (size() != 1) throw ContractViolation("item() on tensor of shape " + shape_str());
  return node_->value[0];
}

void Tensor::zero_grad() { node_->grad.assign(node_->value.size(), 0.0); }

Tensor Tensor::detach() const { return from(rows(), cols(), node_->value, false); }

void Tensor::backward() const {
  if (!node_ || size() != 1) {
    throw ContractViolation("backward() needs a scalar loss, got shape " + shape_str());
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS; reversing it gives a valid backward order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (n->backward_fn) n->grad.assign(n->value.size(), 0.0);
  }
  node_->ensure_grad();
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
}

}  // namespace loggraph::tensor
