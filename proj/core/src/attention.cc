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

#include "mafs/attention.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mafs/errors.h"
#include "mafs/losses.h"
#include "mafs/parallel.h"

namespace mafs {

void MAFSConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ArgumentError("MAFSConfig." + field + ": " + why);
  };
  if (!(lambda >= 0.0)) fail("lambda", "must be >= 0");
  if (!(gamma > 0.0)) fail("gamma", "must be > 0");
  if (!(epsilon > 0.0 && epsilon <= 1e-3)) fail("epsilon", "must lie in (0, 1e-3]");
  if (!(tau_max > 0.0)) fail("tau_max", "must be > 0");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate", "must lie in [0, 1)");
  if (!(learning_rate > 0.0)) fail("learning_rate", "must be > 0");
  if (!(weight_decay >= 0.0)) fail("weight_decay", "must be >= 0");
  if (batch_size == 0) fail("batch_size", "must be >= 1");
  if (max_epochs == 0) fail("max_epochs", "must be >= 1");
  if (patience == 0) fail("patience", "must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    fail("validation_fraction", "must lie in (0, 1)");
  }
  if (ell == 0) fail("ell", "must be >= 1");
  if (n_trees == 0) fail("n_trees", "must be >= 1");
  if (!(attention_init_scale >= 0.0)) fail("attention_init_scale", "must be >= 0");
  if (!(width_divisor >= 0.0)) fail("width_divisor", "must be >= 0");
  for (std::size_t h : attention_hidden) {
    if (h == 0) fail("attention_hidden", "widths must be >= 1");
  }
  for (std::size_t h : predictor_hidden) {
    if (h == 0) fail("predictor_hidden", "widths must be >= 1");
  }
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double sign_or_zero(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Matrix row_matrix(std::span<const double> v) {
  return Matrix(1, v.size(), std::vector<double>(v.begin(), v.end()));
}

std::vector<std::size_t> hidden_widths(const std::vector<std::size_t>& explicit_widths,
                                       std::size_t d, double divisor) {
  if (divisor <= 0.0) return explicit_widths;
  const auto width = static_cast<std::size_t>(
      std::max(1.0, std::ceil(static_cast<double>(d) / divisor)));
  return std::vector<std::size_t>(std::max<std::size_t>(explicit_widths.size(), 1), width);
}

LossAndGrad prediction_loss(const Matrix& pred, std::span<const double> y, Task task) {
  return task == Task::kRegression ? mse_loss(pred, y) : cross_entropy_loss(pred, y);
}

HeadLoss evaluate_head(const HeadState& head, const Matrix& x,
                       std::span<const double> y, double lambda, Task task,
                       AlphaActivation activation) {
  const std::vector<double> alpha =
      compute_attention(head.attention_net, head.prior.normalized, activation);
  const Matrix pred = predict(head.predictor_net, soft_select(x, alpha));
  return head_loss(pred, y, alpha, head.tau, lambda, task);
}

}  // namespace

std::vector<double> compute_attention(const Network& attention_net,
                                      std::span<const double> prior_normalized,
                                      AlphaActivation activation) {
  Matrix out = forward(attention_net, row_matrix(prior_normalized), Mode::kEval).output;
  std::vector<double> alpha(out.values().begin(), out.values().end());
  if (activation == AlphaActivation::kSigmoid) {
    for (double& a : alpha) a = sigmoid(a);
  }
  return alpha;
}

const std::vector<double>& compute_attention(HeadState& head,
                                             AlphaActivation activation) {
  std::vector<double> alpha;
  try {
    alpha = compute_attention(head.attention_net, head.prior.normalized, activation);
  } catch (const NumericError& e) {
    throw NumericError("head " + std::to_string(head.index) + ": " + e.what());
  }
  for (double a : alpha) {
    if (!std::isfinite(a)) {
      throw NumericError("head " + std::to_string(head.index) +
                         ": non-finite attention weight");
    }
  }
  head.alpha = std::move(alpha);
  return head.alpha;
}

Matrix soft_select(const Matrix& x, std::span<const double> alpha) {
  if (alpha.size() != x.cols()) {
    throw DimensionError("soft_select: alpha has " + std::to_string(alpha.size()) +
                         " entries for " + std::to_string(x.cols()) + " features");
  }
  Matrix out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] *= alpha[k];
  }
  return out;
}

std::vector<double> adaptive_penalty(const FilterPrior& prior, double gamma,
                                     double epsilon, double tau_max) {
  if (!(gamma > 0.0) || !(epsilon > 0.0) || !(tau_max > 0.0)) {
    throw ArgumentError("adaptive_penalty: gamma, epsilon and tau_max must be > 0");
  }
  std::vector<double> tau(prior.normalized.size());
  for (std::size_t k = 0; k < tau.size(); ++k) {
    const double base = std::abs(prior.normalized[k]) + epsilon;
    tau[k] = std::min(std::pow(base, -gamma), tau_max);
  }
  return tau;
}

HeadLoss head_loss(const Matrix& pred, std::span<const double> y,
                   std::span<const double> alpha, std::span<const double> tau,
                   double lambda, Task task) {
  if (alpha.size() != tau.size()) throw DimensionError("head_loss: alpha/tau length mismatch");
  if (!(lambda >= 0.0)) throw ArgumentError("head_loss: lambda must be >= 0");
  HeadLoss loss;
  loss.prediction = prediction_loss(pred, y, task).value;
  double weighted = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) weighted += tau[k] * std::abs(alpha[k]);
  loss.penalty = lambda * weighted;
  loss.total = loss.prediction + loss.penalty;
  return loss;
}

HeadGradients head_loss_and_grads(const Network& attention_net,
                                  const Network& predictor_net,
                                  std::span<const double> prior_normalized,
                                  const Matrix& x, std::span<const double> y,
                                  std::span<const double> tau, double lambda,
                                  Task task, AlphaActivation activation,
                                  Rng* dropout_rng) {
  const std::size_t d = x.cols();
  ForwardResult att = forward(attention_net, row_matrix(prior_normalized), Mode::kTrain);
  HeadGradients out;
  out.alpha.assign(att.output.values().begin(), att.output.values().end());
  if (activation == AlphaActivation::kSigmoid) {
    for (double& a : out.alpha) a = sigmoid(a);
  }
  const Matrix weighted = soft_select(x, out.alpha);
  ForwardResult pred = forward(predictor_net, weighted, Mode::kTrain, dropout_rng);

  LossAndGrad pl = prediction_loss(pred.output, y, task);
  out.loss.prediction = pl.value;
  double penalty = 0.0;
  for (std::size_t k = 0; k < d; ++k) penalty += tau[k] * std::abs(out.alpha[k]);
  out.loss.penalty = lambda * penalty;
  out.loss.total = out.loss.prediction + out.loss.penalty;

  BackwardResult pb = backward(predictor_net, pred.cache, pl.grad);
  out.predictor = std::move(pb.params);
  out.predictor_cache = std::move(pred.cache);

  out.alpha_grad.assign(d, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto gi = pb.input_grad.row(i);
    const auto xi = x.row(i);
    for (std::size_t k = 0; k < d; ++k) out.alpha_grad[k] += gi[k] * xi[k];
  }
  Matrix att_grad(1, d);
  for (std::size_t k = 0; k < d; ++k) {
    out.alpha_grad[k] += lambda * tau[k] * sign_or_zero(out.alpha[k]);
    double g = out.alpha_grad[k];
    if (activation == AlphaActivation::kSigmoid) {
      g *= out.alpha[k] * (1.0 - out.alpha[k]);
    }
    att_grad(0, k) = g;
  }
  out.attention = backward(attention_net, att.cache, att_grad).params;
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    const TargetVector& y, double validation_fraction, Rng& rng) {
  const std::size_t n = y.size();
  std::vector<std::vector<std::size_t>> strata;
  if (y.task == Task::kClassification) {
    strata.resize(y.n_classes);
    for (std::size_t i = 0; i < n; ++i) {
      strata[static_cast<std::size_t>(y.values[i])].push_back(i);
    }
  } else {
    strata.emplace_back(n);
    std::iota(strata[0].begin(), strata[0].end(), std::size_t{0});
  }
  std::vector<std::size_t> train, val;
  for (auto& stratum : strata) {
    rng.shuffle(stratum);
    auto n_val = static_cast<std::size_t>(
        std::llround(validation_fraction * static_cast<double>(stratum.size())));
    if (stratum.size() >= 2) n_val = std::clamp<std::size_t>(n_val, 1, stratum.size() - 1);
    val.insert(val.end(), stratum.begin(), stratum.begin() + static_cast<std::ptrdiff_t>(n_val));
    train.insert(train.end(), stratum.begin() + static_cast<std::ptrdiff_t>(n_val), stratum.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  if (train.empty() || val.empty()) {
    throw ArgumentError("split_indices: too few samples for a train/validation split");
  }
  return {std::move(train), std::move(val)};
}

HeadState init_head(std::size_t index, FilterPrior prior, std::size_t d,
                    std::size_t n_outputs, const MAFSConfig& config) {
  if (prior.normalized.size() != d) {
    throw DimensionError("init_head: prior length " +
                         std::to_string(prior.normalized.size()) + " != d = " +
                         std::to_string(d));
  }
  Rng init_rng = Rng(config.seed).split(100 + index).split(0);
  HeadState head;
  head.index = index;

  NetworkSpec att_spec;
  att_spec.input_dim = d;
  att_spec.hidden_dims = hidden_widths(config.attention_hidden, d, config.width_divisor);
  att_spec.output_dim = d;
  head.attention_net = init_network(att_spec, init_rng);
  if (config.attention_init == AttentionInit::kPrior) {
    LayerParams& out = head.attention_net.layers.back();
    for (double& w : out.weight.values()) w *= config.attention_init_scale;
    out.bias = prior.normalized;
  }

  NetworkSpec pred_spec;
  pred_spec.input_dim = d;
  pred_spec.hidden_dims = hidden_widths(config.predictor_hidden, d, config.width_divisor);
  pred_spec.output_dim = n_outputs;
  pred_spec.dropout_rate = config.dropout_rate;
  pred_spec.use_batchnorm.assign(pred_spec.hidden_dims.size(), true);
  head.predictor_net = init_network(pred_spec, init_rng);

  head.tau = adaptive_penalty(prior, config.gamma, config.epsilon, config.tau_max);
  head.prior = std::move(prior);
  head.attention_opt.weight_decay = config.weight_decay;
  head.predictor_opt.weight_decay = config.weight_decay;
  compute_attention(head, config.alpha_activation);
  return head;
}

void train_head(HeadState& head, const DataMatrix& x, const TargetVector& y,
                std::span<const std::size_t> train,
                std::span<const std::size_t> val, const MAFSConfig& config) {
  const Rng head_rng = Rng(config.seed).split(100 + head.index);
  Rng shuffle_rng = head_rng.split(1);
  Rng dropout_rng = head_rng.split(2);

  const Matrix x_val = x.values.select_rows(val);
  std::vector<double> y_val;
  for (std::size_t i : val) y_val.push_back(y.values[i]);

  TrainControl control;
  control.max_epochs = config.max_epochs;
  control.patience = config.patience;
  control.batch_size = config.batch_size;

  Network best_attention = head.attention_net;
  Network best_predictor = head.predictor_net;
  head.history.clear();

  for (std::size_t epoch = 1;; ++epoch) {
    double train_total = 0.0;
    std::size_t seen = 0;
    for (const auto& batch : make_batches(train.size(), config.batch_size, shuffle_rng)) {
      std::vector<std::size_t> rows;
      rows.reserve(batch.size());
      for (std::size_t b : batch) rows.push_back(train[b]);
      const Matrix xb = x.values.select_rows(rows);
      std::vector<double> yb;
      yb.reserve(rows.size());
      for (std::size_t r : rows) yb.push_back(y.values[r]);

      HeadGradients step;
      try {
        step = head_loss_and_grads(head.attention_net, head.predictor_net,
                                   head.prior.normalized, xb, yb, head.tau,
                                   config.lambda, y.task, config.alpha_activation,
                                   &dropout_rng);
        if (!std::isfinite(step.loss.total)) throw NumericError("non-finite loss");
        adam_step(head.predictor_net, step.predictor, head.predictor_opt,
                  config.learning_rate);
        adam_step(head.attention_net, step.attention, head.attention_opt,
                  config.learning_rate);
      } catch (const NumericError& e) {
        throw TrainingError("head " + std::to_string(head.index) +
                            " diverged at epoch " + std::to_string(epoch) +
                            ": " + e.what());
      }
      update_running_stats(head.predictor_net, step.predictor_cache);
      train_total += step.loss.total * static_cast<double>(rows.size());
      seen += rows.size();
    }

    HeadLoss val_loss;
    try {
      val_loss = evaluate_head(head, x_val, y_val, config.lambda, y.task,
                               config.alpha_activation);
    } catch (const NumericError& e) {
      throw TrainingError("head " + std::to_string(head.index) +
                          " diverged at epoch " + std::to_string(epoch) + ": " +
                          e.what());
    }
    const double monitored = config.monitor == StopMonitor::kTotalLoss
                                 ? val_loss.total
                                 : val_loss.prediction;
    if (!std::isfinite(monitored)) {
      throw TrainingError("head " + std::to_string(head.index) +
                          " diverged at epoch " + std::to_string(epoch) +
                          ": non-finite validation loss");
    }
    head.history.push_back({train_total / static_cast<double>(seen), monitored});
    const StopDecision decision = early_stop(control, monitored);
    if (control.epochs_since_improve == 0) {
      best_attention = head.attention_net;
      best_predictor = head.predictor_net;
      head.best_epoch = epoch;
      head.best_val_loss = monitored;
    }
    if (decision == StopDecision::kStop) break;
  }
  head.attention_net = std::move(best_attention);
  head.predictor_net = std::move(best_predictor);
  compute_attention(head, config.alpha_activation);
}

MAFSModel train_mafs(const DataMatrix& x, const TargetVector& y,
                     std::vector<FilterPrior> priors, const MAFSConfig& config) {
  config.validate();
  x.validate();
  y.validate();
  if (priors.empty()) throw ArgumentError("train_mafs: at least one filter prior is required");
  if (x.n() != y.size()) throw DimensionError("train_mafs: X and y row counts differ");

  MAFSModel model;
  model.task = y.task;
  model.d = x.d();
  model.n_outputs = y.task == Task::kRegression ? 1 : y.n_classes;
  model.config = config;

  Rng split_rng = Rng(config.seed).split(0);
  const auto [train, val] = split_indices(y, config.validation_fraction, split_rng);

  TargetVector scaled = y;
  if (config.standardize_target) {
    const TargetScaling scaling = standardize_target(scaled, train);
    model.target_mean = scaling.mean;
    model.target_scale = scaling.scale;
  }

  for (std::size_t h = 0; h < priors.size(); ++h) {
    model.heads.push_back(init_head(h, std::move(priors[h]), x.d(), model.n_outputs, config));
  }
  parallel_for(model.heads.size(), [&](std::size_t h) {
    train_head(model.heads[h], x, scaled, train, val, config);
  });
  return model;
}

std::vector<std::size_t> head_ranking(std::span<const double> alpha, std::size_t k) {
  if (k > alpha.size()) {
    throw ArgumentError("head_ranking: K = " + std::to_string(k) + " exceeds d = " +
                        std::to_string(alpha.size()));
  }
  std::vector<std::size_t> order(alpha.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto by_magnitude = [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(alpha[a]);
    const double mb = std::abs(alpha[b]);
    return ma > mb || (ma == mb && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                    order.end(), by_magnitude);
  order.resize(k);
  return order;
}

}  // namespace mafs
