#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "primitive_cases.hpp"
#include "loggraph/common/error.hpp"
#include "loggraph/tensor/ops.hpp"
#include "loggraph/tensor/param_store.hpp"

using namespace loggraph;
using namespace loggraph::tensor;
using loggraph::testing::gradient_check;
using loggraph::testing::PrimitiveCase;
using loggraph::testing::random_tensor;

namespace {

constexpr double kPrimitiveTol = 1e-6;

}  // namespace

TEST(TensorOps, MatmulMatchesHandValues) {
  auto a = Tensor::from(2, 2, {1, 2, 3, 4});
  auto b = Tensor::from(2, 1, {5, 6});
  auto c = matmul(a, b);
  EXPECT_DOUBLE_EQ(c.at(0, 0), 17.0);
  EXPECT_DOUBLE_EQ(c.at(1, 0), 39.0);
}

TEST(TensorOps, ShapeMismatchNamesShapes) {
  auto a = Tensor::zeros(2, 3);
  auto b = Tensor::zeros(2, 3);
  try {
    matmul(a, b);
    FAIL() << "expected ContractViolation";
  } catch (const ContractViolation& e) {
    EXPECT_NE(std::string(e.what()).find("[2, 3]"), std::string::npos) << e.what();
  }
}

TEST(TensorOps, SoftmaxOfEqualLogitsIsUniform) {
  auto p = softmax_rows(Tensor::from(1, 4, {3, 3, 3, 3}));
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(p.at(0, j), 0.25, 1e-15);
}

TEST(TensorOps, SoftmaxIsStableForLargeLogits) {
  auto p = softmax_rows(Tensor::from(1, 2, {1000.0, 0.0}));
  EXPECT_NEAR(p.at(0, 0), 1.0, 1e-15);
  EXPECT_TRUE(std::isfinite(p.at(0, 1)));
}

TEST(TensorOps, CrossEntropyOfZeroLogitsIsLn2) {
  const int labels[] = {1};
  EXPECT_NEAR(cross_entropy(Tensor::zeros(1, 2), labels).item(), std::log(2.0), 1e-15);
}

TEST(TensorOps, GeluAtZeroIsZero) {
  EXPECT_EQ(gelu(Tensor::scalar(0.0)).item(), 0.0);
  EXPECT_NEAR(gelu(Tensor::scalar(1.0)).item(), 0.8413447460685429, 1e-15);
}

TEST(TensorOps, SquareGradient) {
  auto x = Tensor::scalar(3.0, true);
  mul(x, x).backward();
  EXPECT_DOUBLE_EQ(x.grad()[0], 6.0);
}

TEST(TensorOps, BackwardOfNonScalarThrows) {
  auto x = Tensor::zeros(2, 2, true);
  EXPECT_THROW(scale(x, 2.0).backward(), ContractViolation);
}

TEST(TensorOps, GradientsAccumulateAcrossPasses) {
  auto x = Tensor::scalar(2.0, true);
  scale(x, 3.0).backward();
  scale(x, 3.0).backward();
  EXPECT_DOUBLE_EQ(x.grad()[0], 6.0);
  x.zero_grad();
  EXPECT_DOUBLE_EQ(x.grad()[0], 0.0);
}

TEST(TensorOps, NoGradGuardRecordsNothing) {
  auto x = Tensor::scalar(2.0, true);
  Tensor y;
  {
    NoGradGuard guard;
    y = scale(x, 3.0);
  }
  EXPECT_TRUE(y.node()->parents.empty());
  EXPECT_FALSE(y.requires_grad());
}

TEST(TensorOps, DropoutIsIdentityInInference) {
  DropoutStream stream(1);
  auto x = Tensor::from(1, 3, {1, 2, 3});
  auto y = dropout(x, 0.5, stream, false);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(y.at(0, j), x.at(0, j));
  EXPECT_EQ(stream.counter(), 0u);
}

TEST(TensorOps, DropoutIsReproducibleFromSeed) {
  auto x = Tensor::full(4, 8, 1.0);
  DropoutStream s1(9), s2(9);
  auto a = dropout(x, 0.3, s1, true);
  auto b = dropout(x, 0.3, s2, true);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.data()[i], b.data()[i]);
    EXPECT_TRUE(a.data()[i] == 0.0 || std::abs(a.data()[i] - 1.0 / 0.7) < 1e-15);
  }
}

TEST(TensorOps, LayerNormRowsHaveZeroMeanUnitVariance) {
  std::mt19937_64 rng(3);
  auto x = random_tensor(3, 6, rng, -4, 4);
  auto y = layer_norm(x, Tensor::full(1, 6, 1.0), Tensor::zeros(1, 6), 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    double mean = 0, var = 0;
    for (std::size_t j = 0; j < 6; ++j) mean += y.at(i, j) / 6;
    for (std::size_t j = 0; j < 6; ++j) var += (y.at(i, j) - mean) * (y.at(i, j) - mean) / 6;
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var, 1.0, 1e-12);
  }
}

TEST(TensorOps, ReadoutPoolsSumAndMax) {
  auto x = Tensor::from(2, 2, {1, 2, 3, 4});
  auto s = sum_rows(x);
  auto m = max_rows(x);
  EXPECT_EQ(s.at(0, 0), 4);
  EXPECT_EQ(s.at(0, 1), 6);
  EXPECT_EQ(m.at(0, 0), 3);
  EXPECT_EQ(m.at(0, 1), 4);
}

TEST(TensorOps, BucketSumAndGatherAreAdjoint) {
  IndexMatrix idx{2, 3, {0, 2, 2, 1, 1, 0}};
  auto a = Tensor::from(2, 3, {1, 2, 3, 4, 5, 6});
  auto s = bucket_sum(a, idx, 3);
  EXPECT_EQ(s.at(0, 0), 1);
  EXPECT_EQ(s.at(0, 1), 0);
  EXPECT_EQ(s.at(0, 2), 5);
  EXPECT_EQ(s.at(1, 0), 6);
  EXPECT_EQ(s.at(1, 1), 9);
  auto m = Tensor::from(2, 3, {10, 20, 30, 40, 50, 60});
  auto g = gather_cols(m, idx);
  EXPECT_EQ(g.at(0, 1), 30);
  EXPECT_EQ(g.at(1, 2), 40);
}

class PrimitiveGradient : public ::testing::TestWithParam<PrimitiveCase> {};

TEST_P(PrimitiveGradient, MatchesCentralDifferences) {
  const auto report = loggraph::testing::check_primitive(GetParam());
  EXPECT_LE(report.worst_error, kPrimitiveTol) << GetParam().name << " worst input " << report.worst_name;
}

INSTANTIATE_TEST_SUITE_P(AllOps, PrimitiveGradient, ::testing::ValuesIn(loggraph::testing::primitive_cases()),
                         [](const auto& info) { return std::string(info.param.name); });

TEST(ParamStore, JsonRoundTripIsExact) {
  ParamStore store;
  store.add("a", 1, 3, {0.1, -2.5e-300, 1.0 / 3.0});
  store.add_zeros("b", 2, 1);
  ParamStore other;
  other.add_zeros("a", 1, 3);
  other.add_zeros("b", 2, 1);
  other.load_json(nlohmann::json::parse(store.to_json().dump()));
  EXPECT_EQ(other.get("a").data()[2], 1.0 / 3.0);
  EXPECT_EQ(other.get("a").data()[1], -2.5e-300);
}

TEST(ParamStore, LoadRejectsShapeMismatch) {
  ParamStore store;
  store.add_zeros("a", 1, 3);
  ParamStore other;
  other.add_zeros("a", 3, 1);
  EXPECT_THROW(other.load_json(nlohmann::json::parse(store.to_json().dump())), DataError);
}

TEST(ParamStore, SnapshotRestore) {
  ParamStore store;
  auto& a = store.add("a", 1, 2, {1, 2});
  const auto snap = store.snapshot();
  a.data()[0] = 5;
  store.restore(snap);
  EXPECT_EQ(store.get("a").data()[0], 1);
}
