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

#include "binorm/bn_input.hpp"

#include <string>

#include "binorm/errors.hpp"

namespace binorm {

BnInputParams BnInputParams::initial(Eigen::Index features, Eigen::Index steps, double momentum) {
  if (!(momentum > 0.0 && momentum < 1.0)) {
    throw ValidationError("batch-norm momentum must lie in (0, 1)");
  }
  BnInputParams p;
  p.scale = Matrix::Ones(features, steps);
  p.shift = Matrix::Zero(features, steps);
  p.running_mean = Matrix::Zero(features, steps);
  p.running_var = Matrix::Ones(features, steps);
  p.momentum = momentum;
  return p;
}

BnInputForward bn_input_forward(std::span<const Matrix> batch, const BnInputParams& p,
                                BnMode mode) {
  if (batch.empty()) {
    throw ValidationError("batch-norm input batch is empty");
  }
  if (mode == BnMode::kTrain && batch.size() < 2) {
    throw ValidationError("batch-norm in train mode needs a batch of at least 2, got " +
                          std::to_string(batch.size()));
  }
  for (const auto& x : batch) {
    if (x.rows() != p.scale.rows() || x.cols() != p.scale.cols()) {
      throw ShapeError("batch-norm input shape does not match its parameters");
    }
  }

  BnInputForward out;
  BnInputCache& c = out.cache;
  c.mode = mode;
  if (mode == BnMode::kTrain) {
    const double n = static_cast<double>(batch.size());
    c.mean = Matrix::Zero(p.scale.rows(), p.scale.cols());
    for (const auto& x : batch) c.mean += x;
    c.mean /= n;
    c.var = Matrix::Zero(p.scale.rows(), p.scale.cols());
    for (const auto& x : batch) c.var += (x - c.mean).array().square().matrix();
    c.var /= n;
  } else {
    c.mean = p.running_mean;
    c.var = p.running_var;
  }
  c.inv_std = (c.var.array() + kBatchNormEpsilon).rsqrt();

  c.normalized.reserve(batch.size());
  out.outputs.reserve(batch.size());
  for (const auto& x : batch) {
    Matrix xn = (x - c.mean).cwiseProduct(c.inv_std);
    out.outputs.push_back(xn.cwiseProduct(p.scale) + p.shift);
    c.normalized.push_back(std::move(xn));
  }
  return out;
}

void bn_commit_running(BnInputParams& p, const BnInputCache& cache) {
  if (cache.mode != BnMode::kTrain) {
    return;
  }
  p.running_mean = p.momentum * p.running_mean + (1.0 - p.momentum) * cache.mean;
  p.running_var = p.momentum * p.running_var + (1.0 - p.momentum) * cache.var;
}

BnInputGrads bn_input_backward(const BnInputCache& cache, const BnInputParams& p,
                               std::span<const Matrix> upstream) {
  if (upstream.size() != cache.normalized.size()) {
    throw ShapeError("batch-norm upstream batch size does not match the cache");
  }
  const auto rows = p.scale.rows();
  const auto cols = p.scale.cols();
  for (const auto& d : upstream) {
    if (d.rows() != rows || d.cols() != cols) {
      throw ShapeError("batch-norm upstream gradient shape mismatch");
    }
  }

  BnInputGrads g;
  g.scale = Matrix::Zero(rows, cols);
  g.shift = Matrix::Zero(rows, cols);
  for (std::size_t i = 0; i < upstream.size(); ++i) {
    g.scale += upstream[i].cwiseProduct(cache.normalized[i]);
    g.shift += upstream[i];
  }

  g.inputs.reserve(upstream.size());
  if (cache.mode == BnMode::kEval) {
    for (const auto& d : upstream) {
      g.inputs.push_back(d.cwiseProduct(p.scale).cwiseProduct(cache.inv_std));
    }
    return g;
  }

  // d x_hat summed over the batch, and its projection on x_hat.
  const double n = static_cast<double>(upstream.size());
  Matrix sum_dhat = Matrix::Zero(rows, cols);
  Matrix sum_dhat_xhat = Matrix::Zero(rows, cols);
  for (std::size_t i = 0; i < upstream.size(); ++i) {
    const Matrix dhat = upstream[i].cwiseProduct(p.scale);
    sum_dhat += dhat;
    sum_dhat_xhat += dhat.cwiseProduct(cache.normalized[i]);
  }
  for (std::size_t i = 0; i < upstream.size(); ++i) {
    const Matrix dhat = upstream[i].cwiseProduct(p.scale);
    g.inputs.push_back(
        ((n * dhat - sum_dhat - cache.normalized[i].cwiseProduct(sum_dhat_xhat)) / n)
            .cwiseProduct(cache.inv_std));
  }
  return g;
}

}  // namespace binorm
