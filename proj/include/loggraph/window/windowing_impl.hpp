#pragma once

#include <cmath>

#include "loggraph/common/error.hpp"

namespace loggraph::window {

template <typename T>
std::pair<std::vector<T>, std::vector<T>> chronological_split(const std::vector<T>& items,
                                                              double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ContractViolation("chronological_split: fraction must lie in (0, 1)");
  }
  if (items.empty()) throw DataError("chronological_split: no sequences to split");
  // Guard against 0.8 * 10 evaluating to 8.000000000000002.
  const double exact = train_fraction * static_cast<double>(items.size());
  auto n_train = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  n_train = std::min(n_train, items.size());
  std::pair<std::vector<T>, std::vector<T>> out;
  out.first.assign(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.second.assign(items.begin() + static_cast<std::ptrdiff_t>(n_train), items.end());
  return out;
}

}  // namespace loggraph::window
