#include <random>

#include <gtest/gtest.h>

#include "loggraph/common/error.hpp"
#include "loggraph/train/trainer.hpp"

using namespace loggraph;
using namespace loggraph::train;
using tensor::Tensor;

namespace {

embed::EmbeddingTable table_for(std::size_t events, std::size_t dim) {
  embed::EmbeddingTable t(dim, embed::Provider::kFile);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (std::size_t e = 0; e < events; ++e) {
    std::vector<double> v(dim);
    for (auto& x : v) x = nd(rng);
    t.set(static_cast<graph::EventId>(e), v);
  }
  return t;
}

// Normal graphs cycle 0..3; anomalous ones contain event 4.
std::vector<graph::LogGraph> toy_dataset(std::size_t n, const embed::EmbeddingTable& table) {
  std::vector<graph::LogGraph> out;
  std::mt19937_64 rng(3);
  for (std::size_t i = 0; i < n; ++i) {
    window::LogSequence s;
    for (int t = 0; t < 6; ++t) s.events.push_back(t % 4);
    if (i % 5 == 2) {
      s.events[1 + rng() % 4] = 4;
      s.label = window::Label::kAnomalous;
    }
    out.push_back(graph::build_graph(s, table));
  }
  return out;
}

model::ModelConfig tiny_model() {
  model::ModelConfig c;
  c.d_v = 8;
  c.d_z = 8;
  c.heads = 2;
  c.ffn_hidden = 16;
  c.encoder_ffn_hidden = 16;
  c.dropout = 0.1;
  return c;
}

}  // namespace

TEST(LearningRate, LinearDecay) {
  TrainConfig cfg;
  EXPECT_EQ(lr_at(0, 100, cfg), 3e-4);
  EXPECT_EQ(lr_at(100, 100, cfg), 1e-9);
  // (3e-4 + 1e-9) / 2
  EXPECT_NEAR(lr_at(50, 100, cfg), 1.500005e-4, 1e-18);
  EXPECT_EQ(lr_at(0, 0, cfg), 3e-4);
  EXPECT_THROW(lr_at(101, 100, cfg), ContractViolation);
}

TEST(AdamW, ZeroGradientOnlyDecays) {
  tensor::ParamStore store;
  store.add("p", 1, 1, {2.0});
  store.get("p").zero_grad();
  AdamW opt(0.9, 0.999, 1e-8, 0.01);
  opt.step(store, 0.1);
  EXPECT_DOUBLE_EQ(store.get("p").data()[0], 2.0 * (1.0 - 0.1 * 0.01));
  AdamW plain(0.9, 0.999, 1e-8, 0.0);
  plain.step(store, 0.1);
  EXPECT_DOUBLE_EQ(store.get("p").data()[0], 2.0 * (1.0 - 0.1 * 0.01));
}

TEST(AdamW, SingleScalarHandUpdate) {
  tensor::ParamStore store;
  store.add("p", 1, 1, {1.0});
  store.get("p").zero_grad();
  store.get("p").grad()[0] = 0.5;
  AdamW opt(0.9, 0.999, 1e-8, 0.01);
  opt.step(store, 0.1);
  // decay: 1 - 0.1*0.01 = 0.999; m_hat = 0.5, v_hat = 0.25; step = 0.1 * 0.5 / (0.5 + 1e-8)
  EXPECT_NEAR(store.get("p").data()[0], 0.999 - 0.1 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_EQ(opt.steps_taken(), 1u);
}

TEST(AdamW, SkipsParametersWithoutGradient) {
  tensor::ParamStore store;
  store.add("p", 1, 1, {1.0});
  AdamW opt(0.9, 0.999, 1e-8, 0.01);
  opt.step(store, 0.1);
  EXPECT_EQ(store.get("p").data()[0], 1.0);
}

TEST(AdamW, NonFiniteGradientNamesParameterAndChangesNothing) {
  tensor::ParamStore store;
  store.add("ok", 1, 1, {1.0});
  store.add("bad", 1, 1, {1.0});
  store.get("ok").zero_grad();
  store.get("ok").grad()[0] = 1.0;
  store.get("bad").zero_grad();
  store.get("bad").grad()[0] = std::nan("");
  AdamW opt(0.9, 0.999, 1e-8, 0.01);
  try {
    opt.step(store, 0.1);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
  }
  EXPECT_EQ(store.get("ok").data()[0], 1.0);
}

TEST(EarlyStopping, PatienceOneStopsAfterSecondEpoch) {
  EarlyStopping es(1);
  EXPECT_TRUE(es.update(1.0));
  EXPECT_FALSE(es.should_stop());
  EXPECT_FALSE(es.update(2.0));
  EXPECT_TRUE(es.should_stop());
  EXPECT_EQ(es.best_epoch(), 1u);
}

TEST(EarlyStopping, ImprovementResetsCounter) {
  EarlyStopping es(2);
  es.update(1.0);
  es.update(1.5);
  es.update(0.5);
  es.update(0.7);
  EXPECT_FALSE(es.should_stop());
  EXPECT_EQ(es.best_epoch(), 3u);
}

TEST(Config, Validation) {
  TrainConfig c;
  c.lr_end = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.patience = 200;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Metrics, TableTwoArithmetic) { EXPECT_NEAR(f1_score(0.9774, 0.9982), 0.9877, 1e-4); }

TEST(Metrics, PerfectAndDegenerate) {
  const std::vector<int> labels{0, 0, 1, 0};
  const auto perfect = Metrics::from_predictions(labels, labels);
  EXPECT_EQ(perfect.f1, 1.0);
  const std::vector<int> none{0, 0, 0, 0};
  const auto empty = Metrics::from_predictions(none, labels);
  EXPECT_TRUE(empty.precision_undefined);
  EXPECT_EQ(empty.precision, 0.0);
  EXPECT_EQ(empty.f1, 0.0);
  EXPECT_EQ(empty.fn, 1u);
}

TEST(Metrics, OrderInvariant) {
  const std::vector<int> p{1, 0, 1, 1, 0}, l{1, 1, 0, 1, 0};
  const std::vector<int> pr{0, 1, 1, 0, 1}, lr{0, 1, 0, 1, 1};
  EXPECT_EQ(Metrics::from_predictions(p, l).to_json(), Metrics::from_predictions(pr, lr).to_json());
}

TEST(Training, EmptyDatasetIsError) {
  EXPECT_THROW(train::train({}, tiny_model(), TrainConfig{}), DataError);
}

TEST(Training, DeterministicAndKeepsBestValidationParameters) {
  const auto table = table_for(5, 8);
  const auto data = toy_dataset(60, table);
  TrainConfig cfg;
  cfg.max_epochs = 8;
  cfg.patience = 8;
  cfg.batch_size = 16;
  cfg.lr_start = 3e-3;
  cfg.lr_end = 1e-6;
  const auto a = train::train(data, tiny_model(), cfg);
  const auto b = train::train(data, tiny_model(), cfg);
  EXPECT_EQ(history_csv(a.history), history_csv(b.history));
  EXPECT_EQ(a.model.checkpoint_json().dump(), b.model.checkpoint_json().dump());
  EXPECT_EQ(a.summary.validation_graphs, 6u);

  const auto [fit, val] = window::chronological_split(data, 0.9);
  std::vector<model::PreparedGraph> prepared;
  for (const auto& g : val) prepared.push_back(a.model.prepare(g));
  double best = a.history.front().val_loss;
  for (const auto& r : a.history) best = std::min(best, r.val_loss);
  EXPECT_DOUBLE_EQ(mean_loss(a.model, prepared, cfg.batch_size), best);
  EXPECT_EQ(a.history[a.summary.best_epoch - 1].val_loss, best);
}

TEST(Training, LearnsToyRule) {
  const auto table = table_for(5, 8);
  const auto data = toy_dataset(100, table);
  TrainConfig cfg;
  cfg.max_epochs = 30;
  cfg.patience = 30;
  cfg.batch_size = 16;
  cfg.lr_start = 3e-3;
  cfg.lr_end = 1e-6;
  const auto r = train::train(data, tiny_model(), cfg);
  const auto ev = evaluate(r.model, data);
  EXPECT_GE(ev.metrics.f1, 0.99);
}

TEST(Training, SingleClassStillTrains) {
  const auto table = table_for(5, 8);
  auto data = toy_dataset(10, table);
  for (auto& g : data) g.label = window::Label::kNormal;
  TrainConfig cfg;
  cfg.max_epochs = 2;
  cfg.patience = 2;
  const auto r = train::train(data, tiny_model(), cfg);
  EXPECT_TRUE(r.summary.single_class);
  EXPECT_TRUE(r.summary.oversample_unreachable);
  EXPECT_EQ(r.history.size(), 2u);
}

TEST(History, CsvHeader) {
  const auto csv = history_csv({{1, 0.5, 0.25, 3e-4}});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,train_loss,val_loss,lr");
}
