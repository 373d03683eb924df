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

#include "mafs/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "mafs/adam.h"
#include "mafs/errors.h"
#include "mafs/losses.h"
#include "mafs/network.h"
#include "mafs/random.h"

namespace mafs {

namespace {

void check_binary(std::span<const double> scores, std::span<const double> labels,
                  std::size_t* n_pos, std::size_t* n_neg) {
  if (scores.size() != labels.size()) {
    throw DimensionError("auroc: scores and labels differ in length");
  }
  require_finite(scores, "auroc scores");
  *n_pos = 0;
  *n_neg = 0;
  for (double l : labels) {
    if (l == 1.0) {
      ++*n_pos;
    } else if (l == 0.0) {
      ++*n_neg;
    } else {
      throw MetricError("auroc: labels must be 0 or 1");
    }
  }
  if (*n_pos == 0 || *n_neg == 0) {
    throw MetricError("auroc: both classes must be present");
  }
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const double> labels) {
  std::size_t n_pos = 0, n_neg = 0;
  check_binary(scores, labels, &n_pos, &n_neg);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the positive rank sum keeps midranks integral.
  std::uint64_t twice_rank_sum = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const std::uint64_t twice_mid = static_cast<std::uint64_t>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1.0) twice_rank_sum += twice_mid;
    }
    i = j;
  }
  const std::uint64_t twice_u =
      twice_rank_sum - static_cast<std::uint64_t>(n_pos) * (n_pos + 1);
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auroc_pairwise(std::span<const double> scores,
                      std::span<const double> labels) {
  std::size_t n_pos = 0, n_neg = 0;
  check_binary(scores, labels, &n_pos, &n_neg);
  std::uint64_t twice_wins = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1.0) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0.0) continue;
      if (scores[i] > scores[j]) {
        twice_wins += 2;
      } else if (scores[i] == scores[j]) {
        twice_wins += 1;
      }
    }
  }
  return static_cast<double>(twice_wins) /
         (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double pearson_r(std::span<const double> pred, std::span<const double> y) {
  if (pred.size() != y.size()) {
    throw DimensionError("pearson_r: inputs differ in length");
  }
  if (pred.size() < 2) throw MetricError("pearson_r: need at least 2 points");
  require_finite(pred, "pearson_r pred");
  require_finite(y, "pearson_r y");
  const double n = static_cast<double>(pred.size());
  double mp = 0.0, my = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    mp += pred[i];
    my += y[i];
  }
  mp /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double a = pred[i] - mp;
    const double b = y[i] - my;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (sxx == 0.0 || syy == 0.0) throw MetricError("pearson_r: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> knn_predict(const Matrix& train_x,
                                std::span<const double> train_y,
                                const Matrix& test_x, std::size_t k,
                                Task task) {
  if (train_x.rows() == 0) throw ArgumentError("knn: empty training set");
  if (train_y.size() != train_x.rows()) {
    throw DimensionError("knn: training X and y differ in rows");
  }
  if (test_x.cols() != train_x.cols()) {
    throw DimensionError("knn: train and test column counts differ");
  }
  if (k == 0 || k > train_x.rows()) {
    throw ArgumentError("knn: k must lie in [1, training size]");
  }
  std::vector<double> out(test_x.rows());
  std::vector<std::pair<double, std::size_t>> dist(train_x.rows());
  for (std::size_t t = 0; t < test_x.rows(); ++t) {
    const auto q = test_x.row(t);
    for (std::size_t i = 0; i < train_x.rows(); ++i) {
      const auto r = train_x.row(i);
      double s = 0.0;
      for (std::size_t c = 0; c < q.size(); ++c) s += (q[c] - r[c]) * (q[c] - r[c]);
      dist[i] = {s, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                      dist.end());
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double v = train_y[dist[j].second];
      acc += task == Task::kClassification ? (v == 1.0 ? 1.0 : 0.0) : v;
    }
    out[t] = acc / static_cast<double>(k);
  }
  return out;
}

double knn_evaluate(const Matrix& train_x, std::span<const double> train_y,
                    const Matrix& test_x, std::span<const double> test_y,
                    std::size_t k, Task task) {
  const std::vector<double> pred = knn_predict(train_x, train_y, test_x, k, task);
  return task == Task::kClassification ? auroc(pred, test_y) : pearson_r(pred, test_y);
}

double mlp_evaluate(const Matrix& train_x, std::span<const double> train_y,
                    const Matrix& test_x, std::span<const double> test_y,
                    Task task, const MlpEvalOptions& options) {
  if (train_x.rows() == 0) throw ArgumentError("mlp: empty training set");
  if (train_y.size() != train_x.rows() || test_y.size() != test_x.rows()) {
    throw DimensionError("mlp: X and y differ in rows");
  }
  NetworkSpec spec;
  spec.input_dim = train_x.cols();
  spec.hidden_dims = options.hidden;
  spec.output_dim = task == Task::kClassification ? 2 : 1;
  spec.dropout_rate = 0.0;
  spec.use_batchnorm.assign(spec.hidden_dims.size(), true);
  const Rng root(options.seed);
  Rng init_rng = root.split(0);
  Rng shuffle_rng = root.split(1);
  Network net = init_network(spec, init_rng);
  AdamState opt;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    for (const auto& batch : make_batches(train_x.rows(), options.batch_size, shuffle_rng)) {
      if (batch.size() < 2) continue;
      const Matrix xb = train_x.select_rows(batch);
      std::vector<double> yb;
      for (std::size_t i : batch) yb.push_back(train_y[i]);
      ForwardResult fwd = forward(net, xb, Mode::kTrain, nullptr);
      const LossAndGrad loss = task == Task::kClassification
                                   ? cross_entropy_loss(fwd.output, yb)
                                   : mse_loss(fwd.output, yb);
      BackwardResult bwd = backward(net, fwd.cache, loss.grad);
      adam_step(net, bwd.params, opt, options.learning_rate);
      update_running_stats(net, fwd.cache);
    }
  }
  const Matrix out = predict(net, test_x);
  std::vector<double> scores(test_x.rows());
  if (task == Task::kClassification) {
    const Matrix prob = softmax(out);
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = prob.row(i)[1];
    return auroc(scores, test_y);
  }
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = out.row(i)[0];
  return pearson_r(scores, test_y);
}

}  // namespace mafs
