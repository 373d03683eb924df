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

#include "mafs/network.h"

#include <cmath>
#include <limits>
#include <set>

#include <gtest/gtest.h>

#include "mafs/adam.h"
#include "mafs/errors.h"
#include "oracles.h"

namespace mafs {
namespace {

Network linear_net(std::size_t in, std::size_t out) {
  NetworkSpec spec;
  spec.input_dim = in;
  spec.output_dim = out;
  Rng rng(0);
  return init_network(spec, rng);
}

Matrix random_input(std::size_t n, std::size_t d, Rng& rng) {
  Matrix m(n, d);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

TEST(NetworkTest, IdentityLayerPassesInputThrough) {
  Network net = linear_net(3, 3);
  net.layers[0].weight = Matrix::identity(3);
  net.layers[0].bias.assign(3, 0.0);
  const Matrix in = Matrix::from_rows({{1, 2, 3}});
  EXPECT_EQ(forward(net, in, Mode::kTrain).output, in);
  EXPECT_EQ(predict(net, in), in);
}

TEST(NetworkTest, EvalWithoutDropoutIgnoresRng) {
  NetworkSpec spec;
  spec.input_dim = 4;
  spec.hidden_dims = {5};
  spec.output_dim = 2;
  spec.use_batchnorm = {true};
  Rng init(1);
  const Network net = init_network(spec, init);
  Rng a(10), b(99);
  Rng data(2);
  const Matrix x = random_input(6, 4, data);
  EXPECT_EQ(forward(net, x, Mode::kEval, &a).output, forward(net, x, Mode::kEval, &b).output);
}

TEST(NetworkTest, HandEvaluatedTwoLayerNet) {
  NetworkSpec spec;
  spec.input_dim = 2;
  spec.hidden_dims = {2};
  spec.output_dim = 1;
  Rng rng(0);
  Network net = init_network(spec, rng);
  for (auto& layer : net.layers) {
    for (double& w : layer.weight.values()) w = 0.5;
    for (double& b : layer.bias) b = 0.0;
  }
  const Matrix out = predict(net, Matrix::from_rows({{1, 1}}));
  EXPECT_DOUBLE_EQ(out(0, 0), 1.0);
}

TEST(NetworkTest, ZeroOutputGradGivesZeroGradients) {
  NetworkSpec spec;
  spec.input_dim = 3;
  spec.hidden_dims = {4};
  spec.output_dim = 2;
  spec.use_batchnorm = {true};
  Rng rng(3);
  const Network net = init_network(spec, rng);
  const Matrix x = random_input(5, 3, rng);
  const ForwardResult f = forward(net, x, Mode::kTrain);
  const BackwardResult b = backward(net, f.cache, Matrix(5, 2, 0.0));
  for (const auto& g : b.params) {
    for (double v : g.weight.values()) EXPECT_EQ(v, 0.0);
    for (double v : g.bias) EXPECT_EQ(v, 0.0);
    for (double v : g.gamma) EXPECT_EQ(v, 0.0);
    for (double v : g.beta) EXPECT_EQ(v, 0.0);
  }
  for (double v : b.input_grad.values()) EXPECT_EQ(v, 0.0);
}

TEST(NetworkTest, LinearWeightGradientIsInputTranspose) {
  const Network net = linear_net(3, 1);
  const Matrix x = Matrix::from_rows({{0.5, -1.0, 2.0}});
  const ForwardResult f = forward(net, x, Mode::kTrain);
  const BackwardResult b = backward(net, f.cache, Matrix(1, 1, 1.0));
  EXPECT_EQ(b.params[0].weight, Matrix::from_rows({{0.5}, {-1.0}, {2.0}}));
}

void expect_gradients_match(bool batchnorm, std::uint64_t seed, double tol) {
  NetworkSpec spec;
  spec.input_dim = 5;
  spec.hidden_dims = {3};
  spec.output_dim = 1;
  if (batchnorm) spec.use_batchnorm = {true};
  Rng rng(seed);
  Network net = init_network(spec, rng);
  const Matrix x = random_input(8, 5, rng);
  const auto sum_outputs = [&] {
    double s = 0.0;
    const Matrix out = forward(net, x, Mode::kTrain).output;
    for (double v : out.values()) s += v;
    return s;
  };
  const ForwardResult f = forward(net, x, Mode::kTrain);
  const BackwardResult b = backward(net, f.cache, Matrix(8, 1, 1.0));
  oracle::GradCheck check;
  const auto params = oracle::parameter_views(net);
  const auto grads = oracle::gradient_views(b.params, net);
  for (std::size_t t = 0; t < params.size(); ++t) {
    oracle::check_gradient(params[t], grads[t], sum_outputs,
                           [&] { return oracle::relu_pattern(net, x); }, check);
  }
  EXPECT_GT(check.checked, 0u);
  EXPECT_LT(check.max_relative_error, tol);
}

TEST(NetworkTest, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    expect_gradients_match(false, seed, 1e-6);
    expect_gradients_match(true, seed, 1e-4);
  }
}

TEST(NetworkTest, InputGradientMatchesFiniteDifferences) {
  NetworkSpec spec;
  spec.input_dim = 4;
  spec.hidden_dims = {6, 5};
  spec.output_dim = 2;
  spec.use_batchnorm = {true, false};
  Rng rng(11);
  const Network net = init_network(spec, rng);
  Matrix x = random_input(7, 4, rng);
  const Matrix w = random_input(7, 2, rng);
  const auto loss = [&] {
    const Matrix out = forward(net, x, Mode::kTrain).output;
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += out.values()[i] * w.values()[i];
    return s;
  };
  const ForwardResult f = forward(net, x, Mode::kTrain);
  const BackwardResult b = backward(net, f.cache, w);
  oracle::GradCheck check;
  oracle::check_gradient(x.values(), b.input_grad.values(), loss,
                         [&] { return oracle::relu_pattern(net, x); }, check);
  EXPECT_LT(check.max_relative_error, 1e-6);
}

TEST(NetworkTest, StaleCacheIsRejected) {
  NetworkSpec spec;
  spec.input_dim = 2;
  spec.output_dim = 1;
  Rng rng(0);
  Network net = init_network(spec, rng);
  const ForwardResult f = forward(net, Matrix(3, 2, 1.0), Mode::kTrain);
  const BackwardResult b = backward(net, f.cache, Matrix(3, 1, 1.0));
  AdamState state;
  adam_step(net, b.params, state, 0.1);
  EXPECT_THROW(backward(net, f.cache, Matrix(3, 1, 1.0)), ContractError);
}

TEST(NetworkTest, ShapeAndFiniteErrors) {
  const Network net = linear_net(3, 1);
  EXPECT_THROW(forward(net, Matrix(2, 4), Mode::kTrain), DimensionError);
  Matrix bad(2, 3, 0.0);
  bad(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(forward(net, bad, Mode::kTrain), NumericError);
}

TEST(NetworkTest, SpecValidation) {
  NetworkSpec spec;
  spec.input_dim = 0;
  EXPECT_THROW(spec.validate(), ArgumentError);
  spec.input_dim = 2;
  spec.dropout_rate = 1.0;
  EXPECT_THROW(spec.validate(), ArgumentError);
  spec.dropout_rate = 0.5;
  spec.hidden_dims = {0};
  EXPECT_THROW(spec.validate(), ArgumentError);
}

TEST(NetworkTest, BatchnormNormalizesEachColumn) {
  NetworkSpec spec;
  spec.input_dim = 6;
  spec.hidden_dims = {8};
  spec.output_dim = 1;
  spec.use_batchnorm = {true};
  Rng rng(5);
  const Network net = init_network(spec, rng);
  Matrix x = random_input(16, 6, rng);
  for (double& v : x.values()) v = 3.0 * v + 10.0;
  const ForwardResult f = forward(net, x, Mode::kTrain);
  const Matrix& xhat = f.cache.layers[0].normalized;
  for (std::size_t c = 0; c < xhat.cols(); ++c) {
    double m = 0.0, s = 0.0;
    for (std::size_t r = 0; r < xhat.rows(); ++r) m += xhat(r, c);
    m /= xhat.rows();
    for (std::size_t r = 0; r < xhat.rows(); ++r) s += (xhat(r, c) - m) * (xhat(r, c) - m);
    EXPECT_LT(std::fabs(m), 1e-10);
    EXPECT_NEAR(s / xhat.rows(), 1.0, 1e-8);
  }
}

TEST(NetworkTest, EvalForwardIsPure) {
  NetworkSpec spec;
  spec.input_dim = 3;
  spec.hidden_dims = {4, 4};
  spec.output_dim = 2;
  spec.dropout_rate = 0.4;
  spec.use_batchnorm = {true, true};
  Rng rng(6);
  const Network net = init_network(spec, rng);
  const Matrix x = random_input(5, 3, rng);
  EXPECT_EQ(predict(net, x), predict(net, x));
}

TEST(NetworkTest, TrainDropoutNeedsRngAndZeroesUnits) {
  NetworkSpec spec;
  spec.input_dim = 3;
  spec.hidden_dims = {50};
  spec.output_dim = 1;
  spec.dropout_rate = 0.5;
  Rng rng(7);
  const Network net = init_network(spec, rng);
  const Matrix x = random_input(4, 3, rng);
  EXPECT_THROW(forward(net, x, Mode::kTrain, nullptr), ContractError);
  Rng drop(1);
  const ForwardResult f = forward(net, x, Mode::kTrain, &drop);
  std::set<double> scales(f.cache.layers[0].dropout_scale.values().begin(),
                          f.cache.layers[0].dropout_scale.values().end());
  EXPECT_EQ(scales, (std::set<double>{0.0, 2.0}));
}

TEST(EarlyStopTest, ImprovingLossesContinue) {
  TrainControl c;
  for (double l : {1.0, 0.9, 0.8}) EXPECT_EQ(early_stop(c, l), StopDecision::kContinue);
}

TEST(EarlyStopTest, ConstantLossStopsAtEpochEleven) {
  TrainControl c;
  int epoch = 0;
  StopDecision d = StopDecision::kContinue;
  while (d == StopDecision::kContinue) {
    ++epoch;
    d = early_stop(c, 1.0);
  }
  EXPECT_EQ(epoch, 11);
}

TEST(EarlyStopTest, StopsTenEpochsAfterLastImprovement) {
  TrainControl c;
  EXPECT_EQ(early_stop(c, 1.0), StopDecision::kContinue);
  EXPECT_EQ(early_stop(c, 1.1), StopDecision::kContinue);
  EXPECT_EQ(early_stop(c, 0.5), StopDecision::kContinue);
  for (int i = 1; i <= 9; ++i) EXPECT_EQ(early_stop(c, 0.6), StopDecision::kContinue);
  EXPECT_EQ(early_stop(c, 0.6), StopDecision::kStop);
  EXPECT_EQ(c.best_val_loss, 0.5);
}

TEST(EarlyStopTest, NeverExceedsMaxEpochs) {
  TrainControl c;
  c.max_epochs = 5;
  int epoch = 0;
  double loss = 10.0;
  while (true) {
    ++epoch;
    loss -= 1.0;
    if (early_stop(c, loss) == StopDecision::kStop) break;
  }
  EXPECT_EQ(epoch, 5);
}

TEST(BatchTest, ShuffledBatchesCoverEveryIndexOnce) {
  Rng rng(1);
  const auto batches = make_batches(70, 32, rng);
  ASSERT_EQ(batches.size(), 3u);
  EXPECT_EQ(batches.back().size(), 6u);
  std::set<std::size_t> seen;
  for (const auto& b : batches) seen.insert(b.begin(), b.end());
  EXPECT_EQ(seen.size(), 70u);
}

TEST(RunningStatsTest, MomentumUpdateUsesBatchStatistics) {
  NetworkSpec spec;
  spec.input_dim = 1;
  spec.hidden_dims = {1};
  spec.output_dim = 1;
  spec.use_batchnorm = {true};
  Rng rng(0);
  Network net = init_network(spec, rng);
  net.layers[0].weight(0, 0) = 1.0;
  const Matrix x = Matrix::from_rows({{1}, {3}});
  const ForwardResult f = forward(net, x, Mode::kTrain);
  update_running_stats(net, f.cache);
  EXPECT_NEAR(net.layers[0].running_mean[0], 0.1 * 2.0, 1e-15);
  EXPECT_NEAR(net.layers[0].running_var[0], 0.9 * 1.0 + 0.1 * 2.0, 1e-15);
}

}  // namespace
}  // namespace mafs
