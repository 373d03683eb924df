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

#ifndef MAFS_NETWORK_H_
#define MAFS_NETWORK_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "mafs/matrix.h"
#include "mafs/random.h"

namespace mafs {

enum class Mode { kTrain, kEval };

// Fixed-topology feedforward net. Every hidden layer is
// linear -> [batchnorm] -> ReLU -> dropout; the output layer is affine.
struct NetworkSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_dims;
  std::size_t output_dim = 1;
  double dropout_rate = 0.0;
  // One flag per hidden layer. Empty means no batchnorm anywhere.
  std::vector<bool> use_batchnorm;
  double batchnorm_eps = 1e-10;
  double batchnorm_momentum = 0.9;

  std::size_t num_layers() const { return hidden_dims.size() + 1; }
  bool batchnorm_at(std::size_t hidden_layer) const {
    return hidden_layer < use_batchnorm.size() && use_batchnorm[hidden_layer];
  }
  // Throws ArgumentError on zero dims, dropout outside [0,1), or a
  // batchnorm flag list longer than the hidden layer list.
  void validate() const;
};

struct LayerParams {
  Matrix weight;  // fan_in x fan_out
  std::vector<double> bias;
  bool batchnorm = false;
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
};

struct Network {
  NetworkSpec spec;
  std::vector<LayerParams> layers;
  // Incremented on every parameter update; caches remember the version
  // they were taken at.
  std::uint64_t version = 0;
};

// Fan-in/fan-out scaled uniform init, U(-sqrt(6/(in+out)), +sqrt(...)).
// Biases and beta start at 0, gamma at 1, running variance at 1.
Network init_network(const NetworkSpec& spec, Rng& rng);

struct LayerCache {
  Matrix input;
  Matrix normalized;  // batchnorm x-hat; empty without batchnorm
  Matrix activated;   // value fed to ReLU (post-batchnorm)
  Matrix dropout_scale;  // 0 or 1/keep per entry; empty when not applied
  std::vector<double> inv_std;
  std::vector<double> batch_mean;
  std::vector<double> batch_var;
};

struct ForwardCache {
  std::uint64_t version = 0;
  Mode mode = Mode::kEval;
  std::vector<LayerCache> layers;
};

struct ForwardResult {
  Matrix output;
  ForwardCache cache;
};

// Train mode uses batch statistics and draws dropout masks from `rng`
// (which may be null only when dropout_rate == 0). Eval mode uses running
// statistics and never touches `rng`.
ForwardResult forward(const Network& net, const Matrix& input, Mode mode,
                      Rng* rng = nullptr);

// Eval-mode forward without a cache.
Matrix predict(const Network& net, const Matrix& input);

struct LayerGrads {
  Matrix weight;
  std::vector<double> bias;
  std::vector<double> gamma;
  std::vector<double> beta;
};

using NetworkGrads = std::vector<LayerGrads>;

struct BackwardResult {
  NetworkGrads params;
  Matrix input_grad;
};

// Throws ContractError when the cache was produced at a different
// parameter version, DimensionError on a mis-shaped output_grad.
BackwardResult backward(const Network& net, const ForwardCache& cache,
                        const Matrix& output_grad);

// Folds the batch statistics recorded in a train-mode cache into the running
// estimates. Batches of one sample carry no variance and are skipped.
void update_running_stats(Network& net, const ForwardCache& cache);

// Early stopping bookkeeping.
struct TrainControl {
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  std::size_t batch_size = 32;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t epochs_since_improve = 0;
  std::size_t epochs_run = 0;
};

enum class StopDecision { kContinue, kStop };

// Records one epoch's validation loss. Improvement means strictly lower
// than the best so far. Stops when `patience` epochs in a row failed to
// improve or when max_epochs have run.
StopDecision early_stop(TrainControl& control, double val_loss);

// Shuffled mini-batches over [0, n); the last partial batch is kept.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n,
                                                   std::size_t batch_size,
                                                   Rng& rng);

}  // namespace mafs

#endif  // MAFS_NETWORK_H_
