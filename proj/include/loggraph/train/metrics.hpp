#pragma once

#include <cstddef>
#include <span>

#include <json.hpp>

namespace loggraph::train {

// Confusion counts with anomalous as the positive class. Ratios with a zero
// denominator are reported as 0 and flagged.
struct Metrics {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;

  static Metrics from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);
  /// predictions/labels: 1 = anomalous.
  static Metrics from_predictions(std::span<const int> predictions, std::span<const int> labels);

  nlohmann::ordered_json to_json() const;
};

/// Harmonic mean of precision and recall; 0 when both are 0.
double f1_score(double precision, double recall);

}  // namespace loggraph::train
