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

#include <benchmark/benchmark.h>

#include <random>

#include "binorm/backbone.hpp"
#include "binorm/bin_layer.hpp"
#include "binorm/dain_layer.hpp"
#include "binorm/model.hpp"
#include "binorm/optimizer.hpp"
#include "binorm/trainer.hpp"

namespace {

using binorm::Matrix;

Matrix random_window(std::mt19937_64& rng, Eigen::Index rows = 40, Eigen::Index cols = 10) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(rows, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 100.0 + g(rng);
  return x;
}

void BM_BinForward(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const Matrix x = random_window(rng);
  const auto p = binorm::BinParams::initial(40, 10);
  for (auto _ : state) benchmark::DoNotOptimize(binorm::bin_forward(x, p));
}
BENCHMARK(BM_BinForward);

void BM_BinBackward(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const Matrix x = random_window(rng);
  const auto p = binorm::BinParams::initial(40, 10);
  const auto f = binorm::bin_forward(x, p);
  const Matrix up = random_window(rng);
  for (auto _ : state) benchmark::DoNotOptimize(binorm::bin_backward(f.cache, p, up));
}
BENCHMARK(BM_BinBackward);

void BM_DainForward(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const Matrix x = random_window(rng);
  const auto p = binorm::DainParams::initial(40);
  for (auto _ : state) benchmark::DoNotOptimize(binorm::dain_forward(x, p));
}
BENCHMARK(BM_DainForward);

void BM_DainBackward(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const Matrix x = random_window(rng);
  const auto p = binorm::DainParams::initial(40);
  const auto f = binorm::dain_forward(x, p);
  const Matrix up = random_window(rng);
  for (auto _ : state) benchmark::DoNotOptimize(binorm::dain_backward(f.cache, p, up));
}
BENCHMARK(BM_DainBackward);

void BM_TablForward(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const Matrix x = random_window(rng, 120, 5);
  const auto p = binorm::TablParams::initial(120, 5, 3, 1, binorm::Activation::kIdentity, rng);
  for (auto _ : state) benchmark::DoNotOptimize(binorm::tabl_forward(x, p));
}
BENCHMARK(BM_TablForward);

void BM_TablBackward(benchmark::State& state) {
  std::mt19937_64 rng(6);
  const Matrix x = random_window(rng, 120, 5);
  const auto p = binorm::TablParams::initial(120, 5, 3, 1, binorm::Activation::kIdentity, rng);
  const auto f = binorm::tabl_forward(x, p);
  const Matrix up = Matrix::Ones(3, 1);
  for (auto _ : state) benchmark::DoNotOptimize(binorm::tabl_backward(f.cache, p, up));
}
BENCHMARK(BM_TablBackward);

// One optimizer step of the C-shape model on a batch of the given size.
void BM_TrainStep(benchmark::State& state) {
  const auto norm = static_cast<binorm::NormalizerKind>(state.range(1));
  const auto spec = binorm::ModelSpec::c_shape(norm, binorm::HeadKind::kSoftmax3);
  std::mt19937_64 rng(7);
  std::vector<Matrix> batch;
  for (int i = 0; i < state.range(0); ++i) batch.push_back(random_window(rng));
  binorm::ModelParams params = binorm::ModelParams::initial(spec, 7);
  if (norm == binorm::NormalizerKind::kZScore) {
    std::vector<binorm::TimeSeriesSample> fit;
    for (const auto& m : batch) fit.emplace_back(m);
    binorm::fit_normalizer(spec, params, fit);
  }
  binorm::AdamState adam = binorm::adam_init(params);
  const binorm::TrainConfig cfg;
  std::vector<binorm::HeadUpstream> up(batch.size());
  for (auto& u : up) u.logits = binorm::Vector::Constant(3, 1.0 / static_cast<double>(batch.size()));
  for (auto _ : state) {
    const auto fwd = binorm::model_forward(spec, params, batch, binorm::BnMode::kTrain);
    binorm::ModelParams grads = binorm::zeros_like(params);
    binorm::model_backward(spec, params, fwd, up, grads);
    binorm::adam_step(params, grads, adam, 1e-3, cfg);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.SetLabel(binorm::to_string(norm));
}
BENCHMARK(BM_TrainStep)
    ->ArgsProduct({{32, 256},
                   {static_cast<long>(binorm::NormalizerKind::kNone),
                    static_cast<long>(binorm::NormalizerKind::kBatchNorm),
                    static_cast<long>(binorm::NormalizerKind::kDain),
                    static_cast<long>(binorm::NormalizerKind::kBin)}})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
