#include "loggraph/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <random>

#include "loggraph/common/error.hpp"
#include "loggraph/window/windowing.hpp"

namespace loggraph::train {

using model::ForwardContext;
using model::GraphTransformer;
using model::PreparedGraph;
using tensor::Tensor;

void TrainConfig::validate() const {
  if (!(lr_end > 0.0 && lr_end <= lr_start)) throw ConfigError("learning rates must satisfy 0 < lr_end <= lr_start");
  if (batch_size == 0) throw ConfigError("batch size must be >= 1");
  if (max_epochs == 0) throw ConfigError("max_epochs must be >= 1");
  if (patience > max_epochs) throw ConfigError("early-stopping patience cannot exceed max_epochs");
  if (weight_decay < 0.0) throw ConfigError("weight decay must be non-negative");
  if (oversample_target < 0.0 || oversample_target >= 1.0) throw ConfigError("oversample target must lie in [0, 1)");
  if (val_fraction < 0.0 || val_fraction >= 1.0) throw ConfigError("validation fraction must lie in [0, 1)");
}

nlohmann::ordered_json TrainConfig::to_json() const {
  return {{"lr_start", lr_start},       {"lr_end", lr_end},
          {"batch_size", batch_size},   {"max_epochs", max_epochs},
          {"patience", patience},       {"weight_decay", weight_decay},
          {"beta1", beta1},             {"beta2", beta2},
          {"eps", eps},                 {"seed", seed},
          {"oversample_target", oversample_target}, {"val_fraction", val_fraction}};
}

double lr_at(std::size_t step, std::size_t total_steps, const TrainConfig& cfg) {
  if (total_steps == 0) return cfg.lr_start;
  if (step > total_steps) throw ContractViolation("lr_at: step beyond total_steps");
  const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
  return cfg.lr_start * (1.0 - frac) + cfg.lr_end * frac;
}

void AdamW::step(tensor::ParamStore& params, double lr) {
  for (const auto& p : params.parameters()) {
    if (!p.value.has_grad()) continue;
    for (double g : p.value.grad()) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter '" + p.name + "'");
    }
  }
  ++t_;
  const double bias1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (auto& p : params.parameters()) {
    if (!p.value.has_grad()) continue;
    auto value = p.value.data();
    auto grad = p.value.grad();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      value[i] -= lr * weight_decay_ * value[i];
      p.first_moment[i] = beta1_ * p.first_moment[i] + (1.0 - beta1_) * g;
      p.second_moment[i] = beta2_ * p.second_moment[i] + (1.0 - beta2_) * g * g;
      const double m_hat = p.first_moment[i] / bias1;
      const double v_hat = p.second_moment[i] / bias2;
      value[i] -= lr * m_hat / (std::sqrt(v_hat) + eps_);
    }
  }
}

bool EarlyStopping::update(double loss) {
  ++epoch_;
  if (!has_best_ || loss < best_) {
    has_best_ = true;
    best_ = loss;
    best_epoch_ = epoch_;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

namespace {

std::vector<int> labels_of(std::span<const PreparedGraph* const> batch) {
  std::vector<int> labels;
  labels.reserve(batch.size());
  for (const auto* g : batch) labels.push_back(g->label);
  return labels;
}

}  // namespace

double mean_loss(const GraphTransformer& model, const std::vector<PreparedGraph>& graphs, std::size_t batch_size) {
  if (graphs.empty()) return 0.0;
  tensor::NoGradGuard guard;
  ForwardContext ctx;
  double total = 0.0;
  std::vector<const PreparedGraph*> batch;
  for (std::size_t begin = 0; begin < graphs.size(); begin += batch_size) {
    batch.clear();
    for (std::size_t i = begin; i < std::min(graphs.size(), begin + batch_size); ++i) batch.push_back(&graphs[i]);
    const auto labels = labels_of(batch);
    total += tensor::cross_entropy(model.logits(batch, ctx), labels).item() * static_cast<double>(batch.size());
  }
  return total / static_cast<double>(graphs.size());
}

TrainResult train(const std::vector<graph::LogGraph>& dataset, const model::ModelConfig& model_cfg,
                  const TrainConfig& cfg) {
  cfg.validate();
  model_cfg.validate();
  if (dataset.empty()) throw DataError("training set is empty");

  TrainResult result{GraphTransformer(model_cfg, cfg.seed), {}, {}};
  GraphTransformer& model = result.model;
  TrainSummary& summary = result.summary;

  std::vector<graph::LogGraph> fit_part;
  std::vector<graph::LogGraph> val_part;
  if (cfg.val_fraction > 0.0 && dataset.size() > 1) {
    std::tie(fit_part, val_part) = window::chronological_split(dataset, 1.0 - cfg.val_fraction);
  } else {
    fit_part = dataset;
  }

  std::vector<PreparedGraph> train_set;
  train_set.reserve(fit_part.size());
  for (const auto& g : fit_part) train_set.push_back(model.prepare(g));
  if (cfg.oversample_target > 0.0) {
    std::vector<window::Label> labels;
    for (const auto& g : fit_part) labels.push_back(g.label);
    const auto plan = window::oversample_plan(labels, cfg.oversample_target, cfg.seed ^ 0x5eedULL,
                                              &summary.oversample_unreachable);
    for (std::size_t i : plan) train_set.push_back(train_set[i]);
    summary.oversampled = plan.size();
    if (summary.oversample_unreachable) {
      std::cerr << "warning: training data has no anomalies; oversampling target cannot be met\n";
    }
  }
  std::vector<PreparedGraph> val_set;
  for (const auto& g : val_part) val_set.push_back(model.prepare(g));
  for (const auto& g : train_set) summary.clamped_degrees += g.clamped;

  const bool has_normal = std::any_of(train_set.begin(), train_set.end(), [](const auto& g) { return g.label == 0; });
  const bool has_anomaly = std::any_of(train_set.begin(), train_set.end(), [](const auto& g) { return g.label == 1; });
  if (!has_normal || !has_anomaly) {
    summary.single_class = true;
    std::cerr << "warning: training data contains a single class\n";
  }
  summary.train_graphs = train_set.size();
  summary.validation_graphs = val_set.size();

  const std::size_t steps_per_epoch = (train_set.size() + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total_steps = steps_per_epoch * cfg.max_epochs;

  AdamW optimizer(cfg);
  EarlyStopping stopper(cfg.patience);
  std::mt19937_64 shuffle_rng(cfg.seed);
  tensor::DropoutStream dropout(cfg.seed ^ 0xd209011ULL);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto best = model.params().snapshot();
  std::size_t step = 0;
  std::vector<const PreparedGraph*> batch;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr_at(step, total_steps, cfg);
    double loss_sum = 0.0;
    try {
      for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
        batch.clear();
        for (std::size_t i = begin; i < std::min(order.size(), begin + cfg.batch_size); ++i) {
          batch.push_back(&train_set[order[i]]);
        }
        const auto labels = labels_of(batch);
        ForwardContext ctx{true, &dropout};
        model.params().zero_grad();
        const Tensor loss = tensor::cross_entropy(model.logits(batch, ctx), labels);
        if (!std::isfinite(loss.item())) throw NumericError("non-finite training loss");
        loss.backward();
        optimizer.step(model.params(), lr_at(step, total_steps, cfg));
        ++step;
        loss_sum += loss.item() * static_cast<double>(batch.size());
      }
    } catch (const NumericError& e) {
      summary.aborted = "epoch " + std::to_string(epoch) + ": " + e.what();
      std::cerr << "error: aborting training, " << summary.aborted << '\n';
      break;
    }
    rec.train_loss = loss_sum / static_cast<double>(train_set.size());
    rec.val_loss = val_set.empty() ? rec.train_loss : mean_loss(model, val_set, cfg.batch_size);
    result.history.push_back(rec);
    if (stopper.update(rec.val_loss)) best = model.params().snapshot();
    if (cfg.verbose) {
      std::fprintf(stderr, "epoch %3zu  train_loss %.6f  val_loss %.6f  lr %.3e\n", epoch, rec.train_loss,
                   rec.val_loss, rec.lr);
    }
    if (stopper.should_stop()) {
      summary.stopped_early = epoch < cfg.max_epochs;
      break;
    }
  }

  model.params().restore(best);
  model.params().zero_grad();
  summary.best_epoch = stopper.best_epoch();
  return result;
}

Evaluation evaluate(const GraphTransformer& model, const std::vector<graph::LogGraph>& test_set) {
  Evaluation ev;
  std::vector<int> labels;
  for (const auto& g : test_set) {
    const auto prepared = model.prepare(g);
    const auto proba = model.predict_proba(prepared);
    ev.anomaly_scores.push_back(proba[1]);
    ev.predictions.push_back(proba[1] > proba[0] ? 1 : 0);
    labels.push_back(prepared.label);
  }
  ev.metrics = Metrics::from_predictions(ev.predictions, labels);
  return ev;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,train_loss,val_loss,lr\n";
  char buf[128];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", r.epoch, r.train_loss, r.val_loss, r.lr);
    out += buf;
  }
  return out;
}

}  // namespace loggraph::train
