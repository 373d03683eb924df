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

#ifndef MAFS_BASELINES_H_
#define MAFS_BASELINES_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mafs/adam.h"
#include "mafs/attention.h"
#include "mafs/data.h"
#include "mafs/filters.h"
#include "mafs/network.h"

namespace mafs {

enum class GateMethod { kCancelOut, kEarFs };
enum class GateInit { kUniform, kFilterPrior };

std::string to_string(GateMethod method);

struct BaselineConfig {
  GateMethod method = GateMethod::kCancelOut;
  GateInit init = GateInit::kUniform;
  // CancelOut: - lambda1 * var(W/d) + lambda2 * ||W/d||_1.
  double lambda1 = 1e-3;
  double lambda2 = 1e-3;
  // EAR-FS: lambda / sum_k (a*_k - 0.5)^2.
  double lambda = 1e-5;

  std::vector<std::size_t> predictor_hidden = {200, 200};
  double width_divisor = 0.0;
  double dropout_rate = 0.4;
  double learning_rate = 1e-3;
  double weight_decay = 1e-5;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  double validation_fraction = 0.2;
  bool standardize_target = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GateState {
  GateMethod method = GateMethod::kCancelOut;
  std::vector<double> gate;  // W_CO or a (pre-sigmoid)
  Network predictor_net;
  AdamState gate_opt;
  AdamState predictor_opt;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;

  // sigmoid(gate), elementwise.
  std::vector<double> importance() const;
};

struct RegularizerGrad {
  double value = 0.0;
  std::vector<double> grad;  // d value / d gate
};

// -lambda1 * var(W/d) + lambda2 * ||W/d||_1 with the population variance.
// The |.| subgradient at 0 is 0.
RegularizerGrad cancelout_regularizer(std::span<const double> gate, double lambda1,
                                      double lambda2);
// lambda / max(sum_k (a*_k - 0.5)^2, 1e-8), differentiated through
// a* = sigmoid(a). The gradient is zero while the floor is active.
RegularizerGrad earfs_regularizer(std::span<const double> gate, double lambda);
// Value only, taking a* directly.
double earfs_penalty(std::span<const double> a_star, double lambda);

inline constexpr double kEarFsFloor = 1e-8;

// Batch-mean prediction loss plus the method's regularizer.
double cancelout_loss(const Matrix& pred, std::span<const double> y,
                      std::span<const double> gate, double lambda1, double lambda2,
                      Task task);
double earfs_loss(const Matrix& pred, std::span<const double> y,
                  std::span<const double> a_star, double lambda, Task task);

struct GateGradients {
  double loss = 0.0;
  std::vector<double> gate_grad;
  NetworkGrads predictor;
  ForwardCache predictor_cache;
};

// Loss and exact gradients of one batch for a gated network.
GateGradients gate_loss_and_grads(std::span<const double> gate,
                                  const Network& predictor_net, const Matrix& x,
                                  std::span<const double> y,
                                  const BaselineConfig& config, Task task,
                                  Rng* dropout_rng);

struct BaselineResult {
  GateState state;
  // Descending sigmoid(gate), ties by ascending index; every feature.
  std::vector<std::size_t> ranking;
};

// Untrained gate: zeros (sigmoid 0.5) for uniform init, the normalized
// prior for filter init.
GateState init_gate(std::size_t d, std::size_t n_outputs, const BaselineConfig& config,
                    const FilterPrior* prior);

// Trains gate and predictor jointly with Adam and early stopping. The
// filter-prior init requires `prior`. Throws TrainingError on divergence.
BaselineResult train_baseline(const DataMatrix& x, const TargetVector& y,
                              const BaselineConfig& config,
                              const FilterPrior* prior = nullptr);

// Ranking helper shared with the CLI.
std::vector<std::size_t> rank_descending(std::span<const double> scores);

}  // namespace mafs

#endif  // MAFS_BASELINES_H_
