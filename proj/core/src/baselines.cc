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

#include "mafs/baselines.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mafs/errors.h"
#include "mafs/losses.h"

namespace mafs {

std::string to_string(GateMethod method) {
  return method == GateMethod::kCancelOut ? "cancelout" : "earfs";
}

void BaselineConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ArgumentError("BaselineConfig." + field + ": " + why);
  };
  if (!(lambda1 >= 0.0)) fail("lambda1", "must be >= 0");
  if (!(lambda2 >= 0.0)) fail("lambda2", "must be >= 0");
  if (!(lambda >= 0.0)) fail("lambda", "must be >= 0");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate", "must lie in [0, 1)");
  if (!(learning_rate > 0.0)) fail("learning_rate", "must be > 0");
  if (!(weight_decay >= 0.0)) fail("weight_decay", "must be >= 0");
  if (batch_size == 0) fail("batch_size", "must be >= 1");
  if (max_epochs == 0) fail("max_epochs", "must be >= 1");
  if (patience == 0) fail("patience", "must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    fail("validation_fraction", "must lie in (0, 1)");
  }
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LossAndGrad prediction_loss(const Matrix& pred, std::span<const double> y, Task task) {
  return task == Task::kRegression ? mse_loss(pred, y) : cross_entropy_loss(pred, y);
}

RegularizerGrad regularizer(std::span<const double> gate, const BaselineConfig& config) {
  return config.method == GateMethod::kCancelOut
             ? cancelout_regularizer(gate, config.lambda1, config.lambda2)
             : earfs_regularizer(gate, config.lambda);
}

}  // namespace

std::vector<double> GateState::importance() const {
  std::vector<double> out(gate.size());
  for (std::size_t k = 0; k < gate.size(); ++k) out[k] = sigmoid(gate[k]);
  return out;
}

RegularizerGrad cancelout_regularizer(std::span<const double> gate, double lambda1,
                                      double lambda2) {
  const std::size_t d = gate.size();
  RegularizerGrad out;
  out.grad.assign(d, 0.0);
  if (d == 0) return out;
  const double p = static_cast<double>(d);
  double mean = 0.0;
  for (double w : gate) mean += w / p;
  mean /= p;
  double var = 0.0, l1 = 0.0;
  for (double w : gate) {
    const double u = w / p;
    var += (u - mean) * (u - mean);
    l1 += std::abs(u);
  }
  var /= p;
  out.value = -lambda1 * var + lambda2 * l1;
  for (std::size_t k = 0; k < d; ++k) {
    const double u = gate[k] / p;
    const double dvar = 2.0 * (u - mean) / p / p;
    const double dl1 = (gate[k] > 0.0 ? 1.0 : (gate[k] < 0.0 ? -1.0 : 0.0)) / p;
    out.grad[k] = -lambda1 * dvar + lambda2 * dl1;
  }
  return out;
}

double earfs_penalty(std::span<const double> a_star, double lambda) {
  double spread = 0.0;
  for (double a : a_star) spread += (a - 0.5) * (a - 0.5);
  return lambda / std::max(spread, kEarFsFloor);
}

RegularizerGrad earfs_regularizer(std::span<const double> gate, double lambda) {
  RegularizerGrad out;
  out.grad.assign(gate.size(), 0.0);
  std::vector<double> a_star(gate.size());
  double spread = 0.0;
  for (std::size_t k = 0; k < gate.size(); ++k) {
    a_star[k] = sigmoid(gate[k]);
    spread += (a_star[k] - 0.5) * (a_star[k] - 0.5);
  }
  if (spread <= kEarFsFloor) {
    out.value = lambda / kEarFsFloor;
    return out;
  }
  out.value = lambda / spread;
  const double scale = -lambda / (spread * spread);
  for (std::size_t k = 0; k < gate.size(); ++k) {
    out.grad[k] = scale * 2.0 * (a_star[k] - 0.5) * a_star[k] * (1.0 - a_star[k]);
  }
  return out;
}

double cancelout_loss(const Matrix& pred, std::span<const double> y,
                      std::span<const double> gate, double lambda1, double lambda2,
                      Task task) {
  return prediction_loss(pred, y, task).value +
         cancelout_regularizer(gate, lambda1, lambda2).value;
}

double earfs_loss(const Matrix& pred, std::span<const double> y,
                  std::span<const double> a_star, double lambda, Task task) {
  return prediction_loss(pred, y, task).value + earfs_penalty(a_star, lambda);
}

GateGradients gate_loss_and_grads(std::span<const double> gate,
                                  const Network& predictor_net, const Matrix& x,
                                  std::span<const double> y,
                                  const BaselineConfig& config, Task task,
                                  Rng* dropout_rng) {
  const std::size_t d = gate.size();
  if (x.cols() != d) throw DimensionError("gate_loss_and_grads: gate/X width mismatch");
  std::vector<double> a_star(d);
  for (std::size_t k = 0; k < d; ++k) a_star[k] = sigmoid(gate[k]);
  Matrix gated = x;
  for (std::size_t r = 0; r < gated.rows(); ++r) {
    auto row = gated.row(r);
    for (std::size_t k = 0; k < d; ++k) row[k] *= a_star[k];
  }
  ForwardResult pred = forward(predictor_net, gated, Mode::kTrain, dropout_rng);
  const LossAndGrad pl = prediction_loss(pred.output, y, task);
  const RegularizerGrad reg = regularizer(gate, config);
  BackwardResult pb = backward(predictor_net, pred.cache, pl.grad);

  GateGradients out;
  out.loss = pl.value + reg.value;
  out.gate_grad.assign(d, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto gi = pb.input_grad.row(i);
    const auto xi = x.row(i);
    for (std::size_t k = 0; k < d; ++k) out.gate_grad[k] += gi[k] * xi[k];
  }
  for (std::size_t k = 0; k < d; ++k) {
    out.gate_grad[k] = out.gate_grad[k] * a_star[k] * (1.0 - a_star[k]) + reg.grad[k];
  }
  out.predictor = std::move(pb.params);
  out.predictor_cache = std::move(pred.cache);
  return out;
}

std::vector<std::size_t> rank_descending(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return order;
}

GateState init_gate(std::size_t d, std::size_t n_outputs, const BaselineConfig& config,
                    const FilterPrior* prior) {
  GateState state;
  state.method = config.method;
  if (config.init == GateInit::kFilterPrior) {
    if (prior == nullptr) {
      throw ArgumentError("filter-prior initialization requires a filter prior");
    }
    if (prior->normalized.size() != d) {
      throw DimensionError("filter prior length does not match the feature count");
    }
    state.gate = prior->normalized;
  } else {
    state.gate.assign(d, 0.0);
  }
  NetworkSpec spec;
  spec.input_dim = d;
  spec.hidden_dims = config.predictor_hidden;
  if (config.width_divisor > 0.0) {
    const auto width = static_cast<std::size_t>(
        std::max(1.0, std::ceil(static_cast<double>(d) / config.width_divisor)));
    spec.hidden_dims.assign(std::max<std::size_t>(spec.hidden_dims.size(), 1), width);
  }
  spec.output_dim = n_outputs;
  spec.dropout_rate = config.dropout_rate;
  spec.use_batchnorm.assign(spec.hidden_dims.size(), true);
  Rng init_rng = Rng(config.seed).split(200).split(0);
  state.predictor_net = init_network(spec, init_rng);
  state.gate_opt.weight_decay = config.weight_decay;
  state.predictor_opt.weight_decay = config.weight_decay;
  return state;
}

BaselineResult train_baseline(const DataMatrix& x, const TargetVector& y,
                              const BaselineConfig& config, const FilterPrior* prior) {
  config.validate();
  x.validate();
  y.validate();
  if (x.n() != y.size()) throw DimensionError("train_baseline: X and y row counts differ");
  const std::size_t n_outputs = y.task == Task::kRegression ? 1 : y.n_classes;
  GateState state = init_gate(x.d(), n_outputs, config, prior);

  Rng split_rng = Rng(config.seed).split(0);
  const auto [train, val] = split_indices(y, config.validation_fraction, split_rng);
  TargetVector scaled = y;
  if (config.standardize_target) standardize_target(scaled, train);

  const Rng run_rng = Rng(config.seed).split(200);
  Rng shuffle_rng = run_rng.split(1);
  Rng dropout_rng = run_rng.split(2);

  const Matrix x_val = x.values.select_rows(val);
  std::vector<double> y_val;
  for (std::size_t i : val) y_val.push_back(scaled.values[i]);

  TrainControl control;
  control.max_epochs = config.max_epochs;
  control.patience = config.patience;
  control.batch_size = config.batch_size;
  std::vector<double> best_gate = state.gate;
  Network best_predictor = state.predictor_net;
  const std::string label = to_string(config.method);

  for (std::size_t epoch = 1;; ++epoch) {
    double train_total = 0.0;
    std::size_t seen = 0;
    for (const auto& batch : make_batches(train.size(), config.batch_size, shuffle_rng)) {
      std::vector<std::size_t> rows;
      for (std::size_t b : batch) rows.push_back(train[b]);
      const Matrix xb = x.values.select_rows(rows);
      std::vector<double> yb;
      for (std::size_t r : rows) yb.push_back(scaled.values[r]);
      GateGradients step;
      try {
        step = gate_loss_and_grads(state.gate, state.predictor_net, xb, yb, config,
                                   y.task, &dropout_rng);
        if (!std::isfinite(step.loss)) throw NumericError("non-finite loss");
        adam_step(state.predictor_net, step.predictor, state.predictor_opt,
                  config.learning_rate);
        const ParamRef gate_ref{"gate", state.gate, step.gate_grad};
        adam_step(std::span<const ParamRef>(&gate_ref, 1), state.gate_opt,
                  config.learning_rate);
      } catch (const NumericError& e) {
        throw TrainingError(label + " diverged at epoch " + std::to_string(epoch) +
                            ": " + e.what());
      }
      update_running_stats(state.predictor_net, step.predictor_cache);
      train_total += step.loss * static_cast<double>(rows.size());
      seen += rows.size();
    }

    const std::vector<double> a_star = state.importance();
    Matrix gated = x_val;
    for (std::size_t r = 0; r < gated.rows(); ++r) {
      auto row = gated.row(r);
      for (std::size_t k = 0; k < row.size(); ++k) row[k] *= a_star[k];
    }
    double val_loss;
    try {
      const Matrix pred = predict(state.predictor_net, gated);
      val_loss = prediction_loss(pred, y_val, y.task).value +
                 regularizer(state.gate, config).value;
    } catch (const NumericError& e) {
      throw TrainingError(label + " diverged at epoch " + std::to_string(epoch) + ": " +
                          e.what());
    }
    if (!std::isfinite(val_loss)) {
      throw TrainingError(label + " diverged at epoch " + std::to_string(epoch) +
                          ": non-finite validation loss");
    }
    state.history.push_back({train_total / static_cast<double>(seen), val_loss});
    const StopDecision decision = early_stop(control, val_loss);
    if (control.epochs_since_improve == 0) {
      best_gate = state.gate;
      best_predictor = state.predictor_net;
      state.best_epoch = epoch;
    }
    if (decision == StopDecision::kStop) break;
  }
  state.gate = std::move(best_gate);
  state.predictor_net = std::move(best_predictor);

  BaselineResult result;
  result.ranking = rank_descending(state.importance());
  result.state = std::move(state);
  return result;
}

}  // namespace mafs
