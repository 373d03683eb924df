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

#ifndef MAFS_ATTENTION_H_
#define MAFS_ATTENTION_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mafs/adam.h"
#include "mafs/data.h"
#include "mafs/filters.h"
#include "mafs/network.h"

namespace mafs {

enum class AlphaActivation { kNone, kSigmoid };
enum class StopMonitor { kTotalLoss, kPredictionLoss };
// kPrior sets the output bias of the attention net to the normalized prior
// and shrinks the output weights, so alpha starts near w_norm.
enum class AttentionInit { kRandom, kPrior };

struct MAFSConfig {
  // Sparsity strength on sum_k tau_k |alpha_k|.
  double lambda = 1e-4;
  // Adaptive penalty tau_k = min((|w_norm,k| + epsilon)^-gamma, tau_max).
  double gamma = 0.3;
  double epsilon = 1e-6;
  double tau_max = 100.0;

  std::vector<std::size_t> attention_hidden = {200, 200};
  std::vector<std::size_t> predictor_hidden = {200, 200};
  // When > 0, every hidden width becomes max(1, ceil(d / width_divisor)),
  // overriding the explicit lists.
  double width_divisor = 0.0;
  double dropout_rate = 0.4;
  double learning_rate = 1e-3;
  double weight_decay = 1e-5;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  double validation_fraction = 0.2;
  AlphaActivation alpha_activation = AlphaActivation::kNone;
  StopMonitor monitor = StopMonitor::kTotalLoss;
  AttentionInit attention_init = AttentionInit::kPrior;
  // Multiplier on the output-layer weights under AttentionInit::kPrior.
  double attention_init_scale = 0.1;
  // Regression targets are z-scored on the training split before training.
  bool standardize_target = true;

  // Per-head top-K; 0 means K = ell.
  std::size_t top_k = 0;
  // Final selection size.
  std::size_t ell = 40;
  std::size_t n_trees = 500;

  std::uint64_t seed = 0;

  std::size_t effective_k() const { return top_k == 0 ? ell : top_k; }
  // Throws ArgumentError naming the offending field.
  void validate() const;
};

struct EpochRecord {
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct HeadState {
  std::size_t index = 0;
  FilterPrior prior;
  std::vector<double> tau;
  Network attention_net;  // d -> ... -> d
  Network predictor_net;  // d -> ... -> outputs
  std::vector<double> alpha;
  AdamState attention_opt;
  AdamState predictor_opt;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
};

struct MAFSModel {
  std::vector<HeadState> heads;
  Task task = Task::kRegression;
  std::size_t d = 0;
  std::size_t n_outputs = 1;
  MAFSConfig config;
  // Regression target scaling applied during training (identity otherwise).
  double target_mean = 0.0;
  double target_scale = 1.0;

  std::size_t num_heads() const { return heads.size(); }
};

// Attention network output for a normalized prior (one row in, one row
// out). The last layer is affine; kSigmoid squashes it into (0, 1).
std::vector<double> compute_attention(
    const Network& attention_net, std::span<const double> prior_normalized,
    AlphaActivation activation = AlphaActivation::kNone);
// Recomputes head.alpha from head.prior and stores it. Throws NumericError
// naming the head if any entry is non-finite.
const std::vector<double>& compute_attention(
    HeadState& head, AlphaActivation activation = AlphaActivation::kNone);

// out[i][k] = x[i][k] * alpha[k].
Matrix soft_select(const Matrix& x, std::span<const double> alpha);

std::vector<double> adaptive_penalty(const FilterPrior& prior, double gamma,
                                     double epsilon, double tau_max);

struct HeadLoss {
  double prediction = 0.0;
  double penalty = 0.0;
  double total = 0.0;
};

// Batch-mean prediction loss (MSE for regression, softmax cross-entropy for
// classification) plus lambda * sum_k tau_k |alpha_k|.
HeadLoss head_loss(const Matrix& pred, std::span<const double> y,
                   std::span<const double> alpha, std::span<const double> tau,
                   double lambda, Task task);

// Loss of one head on one batch together with exact gradients for both
// sub-networks. The |alpha| subgradient at 0 is 0.
struct HeadGradients {
  HeadLoss loss;
  std::vector<double> alpha;
  std::vector<double> alpha_grad;
  NetworkGrads attention;
  NetworkGrads predictor;
  ForwardCache predictor_cache;
};

HeadGradients head_loss_and_grads(const Network& attention_net,
                                  const Network& predictor_net,
                                  std::span<const double> prior_normalized,
                                  const Matrix& x, std::span<const double> y,
                                  std::span<const double> tau, double lambda,
                                  Task task, AlphaActivation activation,
                                  Rng* dropout_rng);

// Deterministic train/validation split. Stratified by class for
// classification. Returns {train indices, validation indices}, each sorted.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    const TargetVector& y, double validation_fraction, Rng& rng);

// Builds the untrained head `index` (networks initialized from the head's
// own stream).
HeadState init_head(std::size_t index, FilterPrior prior, std::size_t d,
                    std::size_t n_outputs, const MAFSConfig& config);

// Trains one head to early stopping and restores its best-validation
// parameters. `train`/`val` index rows of x/y; y must already be scaled.
// Throws TrainingError naming head and epoch on divergence.
void train_head(HeadState& head, const DataMatrix& x, const TargetVector& y,
                std::span<const std::size_t> train,
                std::span<const std::size_t> val, const MAFSConfig& config);

// Trains all heads (concurrently when workers allow); one head per prior.
MAFSModel train_mafs(const DataMatrix& x, const TargetVector& y,
                     std::vector<FilterPrior> priors, const MAFSConfig& config);

// Indices of the K largest |alpha_k|, descending, ties by ascending index.
// Throws ArgumentError if K > alpha.size().
std::vector<std::size_t> head_ranking(std::span<const double> alpha,
                                      std::size_t k);

}  // namespace mafs

#endif  // MAFS_ATTENTION_H_
