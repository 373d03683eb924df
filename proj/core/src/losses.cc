/*
 * Copyright 2026 The MAFS Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mafs/losses.h"

#include <algorithm>
#include <cmath>

#include "mafs/errors.h"

namespace mafs {

LossAndGrad mse_loss(const Matrix& pred, std::span<const double> y) {
  if (pred.cols() != 1 || pred.rows() != y.size()) {
    throw DimensionError("mse_loss: prediction/target shape mismatch");
  }
  const double n = static_cast<double>(y.size());
  LossAndGrad out{0.0, Matrix(pred.rows(), 1)};
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double diff = pred(i, 0) - y[i];
    out.value += diff * diff;
    out.grad(i, 0) = 2.0 * diff / n;
  }
  out.value /= n;
  return out;
}

Matrix softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto row = logits.row(r);
    const double top = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      out(r, c) = std::exp(row[c] - top);
      total += out(r, c);
    }
    for (std::size_t c = 0; c < row.size(); ++c) out(r, c) /= total;
  }
  return out;
}

LossAndGrad cross_entropy_loss(const Matrix& logits,
                               std::span<const double> labels) {
  if (logits.rows() != labels.size() || logits.cols() < 2) {
    throw DimensionError("cross_entropy_loss: logits/labels shape mismatch");
  }
  const double n = static_cast<double>(labels.size());
  LossAndGrad out{0.0, softmax(logits)};
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto row = logits.row(r);
    const auto label = static_cast<std::size_t>(labels[r]);
    if (label >= logits.cols()) {
      throw ArgumentError("cross_entropy_loss: label out of range");
    }
    const double top = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double v : row) total += std::exp(v - top);
    out.value += top + std::log(total) - row[label];
    for (std::size_t c = 0; c < row.size(); ++c) {
      out.grad(r, c) = (out.grad(r, c) - (c == label ? 1.0 : 0.0)) / n;
    }
  }
  out.value /= n;
  return out;
}

}  // namespace mafs
