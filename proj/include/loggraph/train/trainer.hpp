#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "loggraph/graph/log_graph.hpp"
#include "loggraph/model/graph_transformer.hpp"
#include "loggraph/tensor/param_store.hpp"
#include "loggraph/train/metrics.hpp"

namespace loggraph::train {

struct TrainConfig {
  double lr_start = 3e-4;
  double lr_end = 1e-9;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 100;
  std::size_t patience = 20;  // epochs without validation-loss improvement
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 42;
  double oversample_target = 0.3;  // 0 disables oversampling
  double val_fraction = 0.1;
  bool verbose = false;

  void validate() const;  // throws ConfigError
  nlohmann::ordered_json to_json() const;
};

/// Linear decay from lr_start (step 0) to lr_end (step == total_steps).
double lr_at(std::size_t step, std::size_t total_steps, const TrainConfig& cfg);

// AdamW with decoupled weight decay. Parameters without a gradient buffer
// this step are left untouched.
class AdamW {
 public:
  AdamW(double beta1, double beta2, double eps, double weight_decay)
      : beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {}
  explicit AdamW(const TrainConfig& cfg) : AdamW(cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay) {}

  /// Throws NumericError, naming the parameter, before touching anything if a
  /// gradient is not finite.
  void step(tensor::ParamStore& params, double lr);
  std::size_t steps_taken() const { return t_; }

 private:
  double beta1_, beta2_, eps_, weight_decay_;
  std::size_t t_ = 0;
};

// Counts epochs without strict improvement of the monitored loss.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  /// Returns true when this loss is a new best.
  bool update(double loss);
  bool should_stop() const { return patience_ > 0 && stale_ >= patience_; }
  double best() const { return best_; }
  std::size_t best_epoch() const { return best_epoch_; }

 private:
  std::size_t patience_;
  std::size_t stale_ = 0;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  double best_ = 0.0;
  bool has_best_ = false;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

struct TrainSummary {
  std::size_t train_graphs = 0;     // after oversampling
  std::size_t oversampled = 0;
  std::size_t validation_graphs = 0;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
  bool single_class = false;
  bool oversample_unreachable = false;
  std::size_t clamped_degrees = 0;
  std::string aborted;  // diagnostics when an epoch hit non-finite gradients
};

struct TrainResult {
  model::GraphTransformer model;  // best-validation parameters
  std::vector<EpochRecord> history;
  TrainSummary summary;
};

// Chronological tail of the data is held out for validation, the remainder is
// oversampled, then shuffled mini-batches are trained with cross-entropy until
// max_epochs or early stopping. When the validation split is empty the
// training loss is monitored instead.
TrainResult train(const std::vector<graph::LogGraph>& dataset, const model::ModelConfig& model_cfg,
                  const TrainConfig& cfg);

/// Mean cross-entropy in inference mode.
double mean_loss(const model::GraphTransformer& model, const std::vector<model::PreparedGraph>& graphs,
                 std::size_t batch_size);

struct Evaluation {
  Metrics metrics;
  std::vector<double> anomaly_scores;  // P(anomalous)
  std::vector<int> predictions;
};

/// Dropout off; prediction is the argmax class.
Evaluation evaluate(const model::GraphTransformer& model, const std::vector<graph::LogGraph>& test_set);

std::string history_csv(const std::vector<EpochRecord>& history);

}  // namespace loggraph::train
