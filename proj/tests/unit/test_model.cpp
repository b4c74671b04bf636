/* Copyright 2026 The binorm Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <map>
#include <random>

#include "binorm/errors.hpp"
#include "binorm/model.hpp"

namespace binorm {
namespace {

std::vector<Matrix> random_batch(std::size_t n, Eigen::Index d, Eigen::Index h, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < n; ++i) {
    Matrix m(d, h);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = g(rng);
    out.push_back(m);
  }
  return out;
}

// Frozen from tests/oracles/param_count.py.
TEST(ParameterCount, MatchesShapeWalkOracle) {
  EXPECT_EQ(parameter_count(ModelSpec::c_shape(NormalizerKind::kNone, HeadKind::kSoftmax3)), 12844);
  EXPECT_EQ(parameter_count(ModelSpec::b_shape(NormalizerKind::kNone, HeadKind::kSoftmax3)), 7344);
  EXPECT_EQ(parameter_count(ModelSpec::c_shape(NormalizerKind::kBin, HeadKind::kSoftmax3)), 12946);
  EXPECT_EQ(parameter_count(ModelSpec::b_shape(NormalizerKind::kBin, HeadKind::kSoftmax3)), 7446);
  EXPECT_EQ(parameter_count(ModelSpec::c_shape(NormalizerKind::kDain, HeadKind::kSoftmax3)), 17684);
  EXPECT_EQ(parameter_count(ModelSpec::c_shape(NormalizerKind::kBatchNorm, HeadKind::kSoftmax3)), 13644);
  EXPECT_EQ(parameter_count(ModelSpec::c_shape(NormalizerKind::kNone, HeadKind::kSoftmax2Regression)), 12844);
  EXPECT_EQ(parameter_count(ModelSpec::b_shape(NormalizerKind::kBin, HeadKind::kSoftmax2Regression)), 7446);
}

TEST(ModelSpec, DefaultShapes) {
  const ModelSpec c = ModelSpec::c_shape(NormalizerKind::kBin, HeadKind::kSoftmax3);
  ASSERT_EQ(c.layers.size(), 2u);
  EXPECT_EQ(c.layers[0].type, LayerType::kBilinear);
  EXPECT_EQ(c.layers[0].out_rows, 60);
  EXPECT_EQ(c.layers[0].out_cols, 10);
  EXPECT_EQ(c.layers[1].type, LayerType::kTabl);
  EXPECT_EQ(c.layers[1].out_rows, 120);
  EXPECT_EQ(c.layers[1].out_cols, 5);
  EXPECT_EQ(c.trunk_rows(), 120);
  EXPECT_EQ(c.trunk_cols(), 5);
  EXPECT_EQ(ModelSpec::b_shape(NormalizerKind::kBin, HeadKind::kSoftmax3).layers.size(), 1u);
}

TEST(ModelSpec, ValidationErrors) {
  ModelSpec s = ModelSpec::b_shape(NormalizerKind::kBin, HeadKind::kSoftmax3);
  s.layers.clear();
  EXPECT_NO_THROW(s.validate());  // a head directly on the normalized input
  s = ModelSpec::b_shape(NormalizerKind::kBin, HeadKind::kSoftmax3);
  s.layers[0].out_rows = 0;
  EXPECT_THROW(s.validate(), ShapeError);
  s = ModelSpec::b_shape(NormalizerKind::kBatchNorm, HeadKind::kSoftmax3);
  s.bn_momentum = 1.0;
  EXPECT_THROW(s.validate(), ValidationError);
  EXPECT_THROW(parse_normalizer("layernorm"), ValidationError);
  EXPECT_EQ(parse_normalizer("dain"), NormalizerKind::kDain);
  EXPECT_EQ(parse_head("softmax2_regression"), HeadKind::kSoftmax2Regression);
}

class ModelForwardTest : public ::testing::TestWithParam<std::tuple<NormalizerKind, HeadKind>> {};

TEST_P(ModelForwardTest, ProbabilitiesSumToOneAndCallsArePure) {
  const auto [norm, head] = GetParam();
  std::mt19937_64 rng(1);
  const ModelSpec spec = ModelSpec::c_shape(norm, head, 8, 6);
  ModelParams params = ModelParams::initial(spec, 17);
  const auto batch = random_batch(4, 8, 6, rng);
  std::vector<TimeSeriesSample> train;
  for (const auto& m : batch) train.emplace_back(m);
  fit_normalizer(spec, params, train);

  const auto a = model_forward(spec, params, batch, BnMode::kEval);
  const auto b = model_forward(spec, params, batch, BnMode::kEval);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    EXPECT_EQ(a.predictions[i].probs.size(), spec.classes());
    EXPECT_NEAR(a.predictions[i].probs.sum(), 1.0, 1e-12);
    EXPECT_EQ(a.predictions[i].logits, b.predictions[i].logits);
    if (head == HeadKind::kSoftmax2Regression) EXPECT_GE(a.predictions[i].horizon, 0.0);
    const Prediction single = predict(spec, params, batch[i]);
    EXPECT_EQ(single.logits, a.predictions[i].logits);
  }
}

INSTANTIATE_TEST_SUITE_P(
    AllNormalizersAndHeads, ModelForwardTest,
    ::testing::Combine(::testing::Values(NormalizerKind::kNone, NormalizerKind::kZScore,
                                         NormalizerKind::kMinMax, NormalizerKind::kBatchNorm,
                                         NormalizerKind::kDain, NormalizerKind::kBin),
                       ::testing::Values(HeadKind::kSoftmax3, HeadKind::kSoftmax2Regression)));

TEST(ModelForward, Errors) {
  std::mt19937_64 rng(2);
  const ModelSpec spec = ModelSpec::b_shape(NormalizerKind::kZScore, HeadKind::kSoftmax3, 4, 5);
  const ModelParams params = ModelParams::initial(spec, 1);
  EXPECT_THROW(model_forward(spec, params, random_batch(2, 4, 5, rng), BnMode::kEval), ValidationError);
  const ModelSpec bin = ModelSpec::b_shape(NormalizerKind::kBin, HeadKind::kSoftmax3, 4, 5);
  EXPECT_THROW(model_forward(bin, ModelParams::initial(bin, 1), random_batch(2, 3, 5, rng), BnMode::kEval),
               ShapeError);
}

TEST(ModelParams, InitializationIsSeeded) {
  const ModelSpec spec = ModelSpec::c_shape(NormalizerKind::kBin, HeadKind::kSoftmax3);
  const ModelParams p1 = ModelParams::initial(spec, 5);
  const ModelParams p2 = ModelParams::initial(spec, 5);
  const ModelParams p3 = ModelParams::initial(spec, 6);
  const auto t1 = tensors(p1);
  const auto t2 = tensors(p2);
  const auto t3 = tensors(p3);
  ASSERT_EQ(t1.size(), t2.size());
  bool any_diff = false;
  for (std::size_t i = 0; i < t1.size(); ++i) {
    EXPECT_EQ(t1[i].name, t2[i].name);
    EXPECT_TRUE(t1[i].value == t2[i].value);
    if (t1[i].value != t3[i].value) any_diff = true;
  }
  EXPECT_TRUE(any_diff);
}

TEST(ModelParams, TensorRolesCoverConstraints) {
  const ModelSpec spec = ModelSpec::c_shape(NormalizerKind::kBin, HeadKind::kSoftmax2Regression);
  const ModelParams p = ModelParams::initial(spec, 0);
  std::map<std::string, TensorRole> roles;
  for (const auto& t : tensors(p)) roles[t.name] = t.role;
  EXPECT_EQ(roles.at("bin.weight_temporal"), TensorRole::kNonNegative);
  EXPECT_EQ(roles.at("layer0.left"), TensorRole::kWeightRows);
  EXPECT_EQ(roles.at("layer0.right"), TensorRole::kWeightCols);
  EXPECT_EQ(roles.at("layer1.attention"), TensorRole::kAttention);
  EXPECT_EQ(roles.at("layer1.mix"), TensorRole::kUnitInterval);
  EXPECT_EQ(roles.at("head.reg.weight"), TensorRole::kWeightRows);
  EXPECT_EQ(roles.at("head.class.bias"), TensorRole::kBias);
}

TEST(ModelBackward, ThreadedAccumulationMatchesSingleThread) {
  std::mt19937_64 rng(3);
  const ModelSpec spec = ModelSpec::c_shape(NormalizerKind::kBin, HeadKind::kSoftmax3, 6, 5);
  const ModelParams params = ModelParams::initial(spec, 9);
  const auto batch = random_batch(7, 6, 5, rng);
  std::vector<HeadUpstream> up(7);
  for (auto& u : up) u.logits = Vector::Random(3);
  const auto f1 = model_forward(spec, params, batch, BnMode::kTrain, 1);
  const auto f3 = model_forward(spec, params, batch, BnMode::kTrain, 3);
  ModelParams g1 = zeros_like(params);
  ModelParams g3 = zeros_like(params);
  model_backward(spec, params, f1, up, g1, 1);
  model_backward(spec, params, f3, up, g3, 3);
  const auto a = tensors(std::as_const(g1));
  const auto b = tensors(std::as_const(g3));
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_LT((a[i].value - b[i].value).cwiseAbs().maxCoeff(), 1e-12) << a[i].name;
  }
}

}  // namespace
}  // namespace binorm
