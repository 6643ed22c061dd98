#include "loggraph/train/metrics.hpp"

#include "loggraph/common/error.hpp"

namespace loggraph::train {

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

Metrics Metrics::from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  if (tp + fp == 0) {
    m.precision_undefined = true;
  } else {
    m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  if (tp + fn == 0) {
    m.recall_undefined = true;
  } else {
    m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

Metrics Metrics::from_predictions(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw ContractViolation("metrics: prediction/label count mismatch");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred = predictions[i] == 1;
    const bool actual = labels[i] == 1;
    if (pred && actual) ++tp;
    else if (pred) ++fp;
    else if (actual) ++fn;
    else ++tn;
  }
  return from_counts(tp, fp, fn, tn);
}

nlohmann::ordered_json Metrics::to_json() const {
  return {{"precision", precision},
          {"recall", recall},
          {"f1", f1},
          {"tp", tp},
          {"fp", fp},
          {"fn", fn},
          {"tn", tn},
          {"precision_undefined", precision_undefined},
          {"recall_undefined", recall_undefined}};
}

}  // namespace loggraph::train
