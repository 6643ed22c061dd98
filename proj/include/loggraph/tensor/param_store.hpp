#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "loggraph/tensor/tensor.hpp"

namespace loggraph::tensor {

inline constexpr int kCheckpointVersion = 1;

struct Parameter {
  std::string name;
  Tensor value;
  // AdamW moment estimates, same length as value.
  std::vector<double> first_moment;
  std::vector<double> second_moment;
};

// Named learnable tensors in registration order.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;

  Tensor& add(const std::string& name, std::size_t rows, std::size_t cols, std::vector<double> values);
  Tensor& add_zeros(const std::string& name, std::size_t rows, std::size_t cols);

  bool contains(std::string_view name) const;
  const Tensor& get(std::string_view name) const;  // throws ContractViolation
  Tensor& get(std::string_view name);

  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();
  std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& values);

  // {"version":1,"params":[{"name":..,"shape":[r,c],"values":[...]}]}
  nlohmann::ordered_json to_json() const;
  // Overwrites values of already-registered parameters; every registered name
  // must be present with a matching shape.
  void load_json(const nlohmann::json& j);

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace loggraph::tensor
