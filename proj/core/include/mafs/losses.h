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

#ifndef MAFS_LOSSES_H_
#define MAFS_LOSSES_H_

#include <span>

#include "mafs/matrix.h"

namespace mafs {

struct LossAndGrad {
  double value = 0.0;
  Matrix grad;  // d value / d prediction, same shape as the prediction
};

// Mean squared error over the batch. `pred` is n x 1.
LossAndGrad mse_loss(const Matrix& pred, std::span<const double> y);

// Mean softmax cross-entropy over the batch. `logits` is n x C and `labels`
// hold class ids in [0, C). Uses log-sum-exp, so extreme logits are safe.
LossAndGrad cross_entropy_loss(const Matrix& logits,
                               std::span<const double> labels);

// Row-wise softmax.
Matrix softmax(const Matrix& logits);

}  // namespace mafs

#endif  // MAFS_LOSSES_H_
