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

#ifndef MAFS_ADAM_H_
#define MAFS_ADAM_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mafs/network.h"

namespace mafs {

// A named parameter tensor paired with its gradient.
struct ParamRef {
  std::string name;
  std::span<double> values;
  std::span<const double> grads;
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  std::uint64_t step = 0;
  // One accumulator per tensor, in the order tensors are presented.
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

// One Adam update with decoupled weight decay:
//   p <- p - lr * weight_decay * p
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
// Gradients are validated before anything is mutated; a non-finite entry
// throws NumericError naming the tensor.
void adam_step(std::span<const ParamRef> tensors, AdamState& state, double lr);

// Applies adam_step to every tensor of `net` and bumps its version.
void adam_step(Network& net, const NetworkGrads& grads, AdamState& state,
               double lr);

}  // namespace mafs

#endif  // MAFS_ADAM_H_
