#include "loggraph/tensor/param_store.hpp"

#include <algorithm>
#include <cmath>

#include "loggraph/common/error.hpp"

namespace loggraph::tensor {

Tensor& ParamStore::add(const std::string& name, std::size_t rows, std::size_t cols, std::vector<double> values) {
  if (index_.count(name)) throw ContractViolation("parameter '" + name + "' registered twice");
  index_[name] = params_.size();
  Parameter p;
  p.name = name;
  p.value = Tensor::from(rows, cols, std::move(values), true);
  p.first_moment.assign(rows * cols, 0.0);
  p.second_moment.assign(rows * cols, 0.0);
  params_.push_back(std::move(p));
  return params_.back().value;
}

Tensor& ParamStore::add_zeros(const std::string& name, std::size_t rows, std::size_t cols) {
  return add(name, rows, cols, std::vector<double>(rows * cols, 0.0));
}

bool ParamStore::contains(std::string_view name) const { return index_.count(std::string(name)) != 0; }

const Tensor& ParamStore::get(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw ContractViolation("unknown parameter '" + std::string(name) + "'");
  return params_[it->second].value;
}

Tensor& ParamStore::get(std::string_view name) {
  return const_cast<Tensor&>(static_cast<const ParamStore&>(*this).get(name));
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.value.clear_grad();
}

std::vector<std::vector<double>> ParamStore::snapshot() const {
  std::vector<std::vector<double>> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.emplace_back(p.value.data().begin(), p.value.data().end());
  return out;
}

void ParamStore::restore(const std::vector<std::vector<double>>& values) {
  if (values.size() != params_.size()) throw ContractViolation("restore: snapshot has wrong parameter count");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto dst = params_[i].value.data();
    if (values[i].size() != dst.size()) throw ContractViolation("restore: snapshot shape mismatch");
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
}

nlohmann::ordered_json ParamStore::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = kCheckpointVersion;
  j["params"] = nlohmann::ordered_json::array();
  for (const auto& p : params_) {
    nlohmann::ordered_json e;
    e["name"] = p.name;
    e["shape"] = p.value.shape();
    e["values"] = std::vector<double>(p.value.data().begin(), p.value.data().end());
    j["params"].push_back(std::move(e));
  }
  return j;
}

void ParamStore::load_json(const nlohmann::json& j) {
  try {
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw DataError("checkpoint version " + std::to_string(version) + " is not supported");
    }
    std::unordered_map<std::string, const nlohmann::json*> by_name;
    for (const auto& e : j.at("params")) by_name[e.at("name").get<std::string>()] = &e;

    for (auto& p : params_) {
      auto it = by_name.find(p.name);
      if (it == by_name.end()) throw DataError("checkpoint lacks parameter '" + p.name + "'");
      const auto shape = it->second->at("shape").get<std::vector<std::size_t>>();
      if (shape != p.value.shape()) {
        throw DataError("checkpoint parameter '" + p.name + "' has a different shape than the model");
      }
      const auto values = it->second->at("values").get<std::vector<double>>();
      if (values.size() != p.value.size()) throw DataError("checkpoint parameter '" + p.name + "' is truncated");
      if (!std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); })) {
        throw DataError("checkpoint parameter '" + p.name + "' is not finite");
      }
      std::copy(values.begin(), values.end(), p.value.data().begin());
    }
    if (by_name.size() != params_.size()) throw DataError("checkpoint has parameters the model does not know");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace loggraph::tensor
