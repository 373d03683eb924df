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

#include "mafs/adam.h"

#include <cmath>

#include "mafs/errors.h"

namespace mafs {

void adam_step(std::span<const ParamRef> tensors, AdamState& state,
               double lr) {
  if (!(lr > 0.0)) throw ArgumentError("adam_step: lr must be > 0");
  if (state.first_moment.empty()) {
    for (const ParamRef& t : tensors) {
      state.first_moment.emplace_back(t.values.size(), 0.0);
      state.second_moment.emplace_back(t.values.size(), 0.0);
    }
  }
  if (state.first_moment.size() != tensors.size()) {
    throw DimensionError("adam_step: tensor count changed between steps");
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const ParamRef& t = tensors[i];
    if (t.values.size() != t.grads.size() ||
        t.values.size() != state.first_moment[i].size()) {
      throw DimensionError("adam_step: shape mismatch for " + t.name);
    }
    for (double g : t.grads) {
      if (!std::isfinite(g)) {
        throw NumericError("adam_step: non-finite gradient in " + t.name);
      }
    }
  }

  ++state.step;
  const double step = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, step);
  const double correction2 = 1.0 - std::pow(state.beta2, step);
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const ParamRef& t = tensors[i];
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t k = 0; k < t.values.size(); ++k) {
      const double g = t.grads[k];
      if (state.weight_decay != 0.0) {
        t.values[k] -= lr * state.weight_decay * t.values[k];
      }
      m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g;
      v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      t.values[k] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

void adam_step(Network& net, const NetworkGrads& grads, AdamState& state,
               double lr) {
  if (grads.size() != net.layers.size()) {
    throw DimensionError("adam_step: gradient layer count mismatch");
  }
  std::vector<ParamRef> tensors;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    LayerParams& p = net.layers[l];
    const LayerGrads& g = grads[l];
    const std::string prefix = "layer" + std::to_string(l) + ".";
    tensors.push_back({prefix + "weight", p.weight.values(), g.weight.values()});
    tensors.push_back({prefix + "bias", p.bias, g.bias});
    if (p.batchnorm) {
      tensors.push_back({prefix + "gamma", p.gamma, g.gamma});
      tensors.push_back({prefix + "beta", p.beta, g.beta});
    }
  }
  adam_step(tensors, state, lr);
  ++net.version;
}

}  // namespace mafs
