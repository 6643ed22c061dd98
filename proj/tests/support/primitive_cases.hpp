#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "loggraph/tensor/ops.hpp"

namespace loggraph::testing {

inline tensor::Tensor random_tensor(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1.0,
                                    double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(r * c);
  for (auto& x : v) x = u(rng);
  return tensor::Tensor::from(r, c, std::move(v), true);
}

// Weighted sum so every output entry gets a distinct upstream gradient.
inline tensor::Tensor probe(const tensor::Tensor& out, const tensor::Tensor& weights) {
  return tensor::sum_all(tensor::mul(out, weights));
}

inline tensor::Tensor probe_weights(const tensor::Tensor& like, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_tensor(like.rows(), like.cols(), rng).detach();
}

struct PrimitiveCase {
  const char* name;
  std::function<tensor::Tensor(const std::vector<tensor::Tensor>&)> fn;
  std::vector<std::pair<std::size_t, std::size_t>> shapes;
};

inline std::vector<PrimitiveCase> primitive_cases() {
  using namespace loggraph::tensor;
  static const IndexMatrix idx{3, 3, {0, 1, 3, 2, 0, 1, 3, 3, 0}};
  return {
      {"matmul", [](auto& a) { return matmul(a[0], a[1]); }, {{3, 4}, {4, 2}}},
      {"add", [](auto& a) { return add(a[0], a[1]); }, {{2, 3}, {2, 3}}},
      {"sub", [](auto& a) { return sub(a[0], a[1]); }, {{2, 3}, {2, 3}}},
      {"mul", [](auto& a) { return mul(a[0], a[1]); }, {{2, 3}, {2, 3}}},
      {"add_row", [](auto& a) { return add_row(a[0], a[1]); }, {{3, 4}, {1, 4}}},
      {"mul_rows", [](auto& a) { return mul_rows(a[0], a[1]); }, {{3, 4}, {3, 1}}},
      {"scale", [](auto& a) { return scale(a[0], -1.7); }, {{2, 3}}},
      {"transpose", [](auto& a) { return transpose(a[0]); }, {{2, 5}}},
      {"slice_cols", [](auto& a) { return slice_cols(a[0], 1, 2); }, {{3, 4}}},
      {"concat_cols", [](auto& a) { return concat_cols(std::span<const Tensor>(a)); }, {{2, 1}, {2, 3}}},
      {"concat_rows", [](auto& a) { return concat_rows(std::span<const Tensor>(a)); }, {{1, 3}, {2, 3}}},
      {"sum_rows", [](auto& a) { return sum_rows(a[0]); }, {{4, 3}}},
      {"max_rows", [](auto& a) { return max_rows(a[0]); }, {{4, 3}}},
      {"sum_all", [](auto& a) { return sum_all(a[0]); }, {{4, 3}}},
      {"softmax_rows", [](auto& a) { return softmax_rows(a[0]); }, {{3, 5}}},
      {"layer_norm", [](auto& a) { return layer_norm(a[0], a[1], a[2]); }, {{3, 5}, {1, 5}, {1, 5}}},
      {"gelu", [](auto& a) { return gelu(a[0]); }, {{3, 4}}},
      {"lookup", [](auto& a) { return lookup(a[0], std::vector<std::size_t>{2, 0, 2, 1}); }, {{3, 4}}},
      {"gather_cols", [](auto& a) { return gather_cols(a[0], idx); }, {{3, 4}}},
      {"bucket_sum", [](auto& a) { return bucket_sum(a[0], idx, 4); }, {{3, 3}}},
      {"cross_entropy",
       [](auto& a) {
         const int labels[] = {1, 0, 1};
         return cross_entropy(a[0], labels);
       },
       {{3, 2}}},
  };
}

// Worst relative error of one primitive on seeded random inputs.
inline GradReport check_primitive(const PrimitiveCase& pc) {
  std::mt19937_64 rng(11);
  std::vector<std::pair<std::string, tensor::Tensor>> inputs;
  std::vector<tensor::Tensor> args;
  for (std::size_t i = 0; i < pc.shapes.size(); ++i) {
    args.push_back(random_tensor(pc.shapes[i].first, pc.shapes[i].second, rng));
    inputs.emplace_back("arg" + std::to_string(i), args.back());
  }
  const tensor::Tensor weights = probe_weights(pc.fn(args), 5);
  return gradient_check([&] { return probe(pc.fn(args), weights); }, inputs);
}

}  // namespace loggraph::testing
