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

// Finite-difference harnesses for the two trainable losses: the attention
// head objective and the gated baselines.

#ifndef MAFS_TESTS_GRADCHECK_H_
#define MAFS_TESTS_GRADCHECK_H_

#include <cstdint>
#include <vector>

#include "mafs/attention.h"
#include "mafs/baselines.h"
#include "mafs/random.h"
#include "oracles.h"

namespace mafs::oracle {

struct Instance {
  Matrix x;
  std::vector<double> y;
  Task task = Task::kRegression;
  std::size_t n_outputs = 1;
};

// d <= 20, n <= 16.
inline Instance random_instance(Rng& rng, Task task) {
  Instance inst;
  const std::size_t d = 2 + rng.uniform_index(19);
  const std::size_t n = 4 + rng.uniform_index(13);
  inst.task = task;
  inst.x = Matrix(n, d);
  for (double& v : inst.x.values()) v = rng.normal();
  inst.y.resize(n);
  if (task == Task::kRegression) {
    for (double& v : inst.y) v = rng.normal();
  } else {
    inst.n_outputs = 2;
    for (std::size_t i = 0; i < n; ++i) inst.y[i] = static_cast<double>(i % 2);
  }
  return inst;
}

inline std::vector<bool> sign_pattern(std::span<const double> v) {
  std::vector<bool> out;
  for (double a : v) out.push_back(a > 0.0);
  return out;
}

inline GradCheck check_head_gradients(std::uint64_t seed, Task task) {
  Rng rng(seed);
  const Instance inst = random_instance(rng, task);
  const std::size_t d = inst.x.cols();
  std::vector<double> raw(d);
  for (double& r : raw) r = rng.uniform();
  const FilterPrior prior = normalize_prior(raw, "sis");
  MAFSConfig config;
  config.attention_hidden = {1 + rng.uniform_index(8), 1 + rng.uniform_index(8)};
  config.predictor_hidden = {1 + rng.uniform_index(8), 1 + rng.uniform_index(8)};
  config.dropout_rate = 0.0;
  config.lambda = 0.05;
  config.attention_init = rng.bernoulli(0.5) ? AttentionInit::kPrior : AttentionInit::kRandom;
  config.seed = seed;
  HeadState head = init_head(0, prior, d, inst.n_outputs, config);
  const std::vector<double> tau = head.tau;
  const AlphaActivation act =
      rng.bernoulli(0.5) ? AlphaActivation::kNone : AlphaActivation::kSigmoid;
  const Matrix prior_row(1, d, prior.normalized);

  const auto eval = [&] {
    return head_loss_and_grads(head.attention_net, head.predictor_net, prior.normalized,
                               inst.x, inst.y, tau, config.lambda, task, act, nullptr);
  };
  const auto loss = [&] { return eval().loss.total; };
  const auto kinks = [&] {
    const HeadGradients g = eval();
    std::vector<bool> k = relu_pattern(head.attention_net, prior_row);
    const std::vector<bool> p =
        relu_pattern(head.predictor_net, soft_select(inst.x, g.alpha));
    const std::vector<bool> s = sign_pattern(g.alpha);
    k.insert(k.end(), p.begin(), p.end());
    k.insert(k.end(), s.begin(), s.end());
    return k;
  };

  const HeadGradients g = eval();
  GradCheck check;
  auto att = parameter_views(head.attention_net);
  auto att_g = gradient_views(g.attention, head.attention_net);
  for (std::size_t t = 0; t < att.size(); ++t) {
    check_gradient(att[t], att_g[t], loss, kinks, check);
  }
  auto pred = parameter_views(head.predictor_net);
  auto pred_g = gradient_views(g.predictor, head.predictor_net);
  for (std::size_t t = 0; t < pred.size(); ++t) {
    check_gradient(pred[t], pred_g[t], loss, kinks, check);
  }
  return check;
}

inline GradCheck check_gate_gradients(std::uint64_t seed, GateMethod method, Task task) {
  Rng rng(seed);
  const Instance inst = random_instance(rng, task);
  const std::size_t d = inst.x.cols();
  BaselineConfig config;
  config.method = method;
  config.predictor_hidden = {1 + rng.uniform_index(8), 1 + rng.uniform_index(8)};
  config.dropout_rate = 0.0;
  config.lambda1 = 0.5;
  config.lambda2 = 0.3;
  config.lambda = 0.01;
  config.seed = seed;
  GateState state = init_gate(d, inst.n_outputs, config, nullptr);
  for (double& g : state.gate) g = 1.5 * rng.normal();

  const auto eval = [&] {
    return gate_loss_and_grads(state.gate, state.predictor_net, inst.x, inst.y, config, task,
                               nullptr);
  };
  const auto loss = [&] { return eval().loss; };
  const auto kinks = [&] {
    Matrix gated = inst.x;
    const std::vector<double> a = state.importance();
    for (std::size_t r = 0; r < gated.rows(); ++r) {
      for (std::size_t k = 0; k < d; ++k) gated(r, k) *= a[k];
    }
    std::vector<bool> k = relu_pattern(state.predictor_net, gated);
    const std::vector<bool> s = sign_pattern(state.gate);
    k.insert(k.end(), s.begin(), s.end());
    return k;
  };

  const GateGradients g = eval();
  GradCheck check;
  check_gradient(state.gate, g.gate_grad, loss, kinks, check);
  auto pred = parameter_views(state.predictor_net);
  auto pred_g = gradient_views(g.predictor, state.predictor_net);
  for (std::size_t t = 0; t < pred.size(); ++t) {
    check_gradient(pred[t], pred_g[t], loss, kinks, check);
  }
  return check;
}

}  // namespace mafs::oracle

#endif  // MAFS_TESTS_GRADCHECK_H_
