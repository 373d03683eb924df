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

#include <gtest/gtest.h>

#include "gradcheck.h"
#include "mafs/errors.h"
#include "mafs/random.h"
#include "oracles.h"

namespace mafs {
namespace {

Network affine_net(std::size_t d) {
  NetworkSpec spec;
  spec.input_dim = d;
  spec.output_dim = d;
  Rng rng(0);
  return init_network(spec, rng);
}

FilterPrior prior_of(std::vector<double> normalized) {
  FilterPrior p;
  p.method = "test";
  p.raw = normalized;
  p.normalized = std::move(normalized);
  return p;
}

TEST(ComputeAttentionTest, ZeroNetworkGivesZeroAlpha) {
  Network net = affine_net(3);
  for (double& w : net.layers[0].weight.values()) w = 0.0;
  std::fill(net.layers[0].bias.begin(), net.layers[0].bias.end(), 0.0);
  const std::vector<double> alpha = compute_attention(net, std::vector<double>{1.0, -2.0, 0.5});
  EXPECT_EQ(alpha, std::vector<double>(3, 0.0));
}

TEST(ComputeAttentionTest, IdentityLayerReturnsPrior) {
  Network net = affine_net(3);
  net.layers[0].weight = Matrix::identity(3);
  std::fill(net.layers[0].bias.begin(), net.layers[0].bias.end(), 0.0);
  const std::vector<double> prior = {0.3, -1.2, 2.5};
  EXPECT_EQ(compute_attention(net, prior), prior);
}

TEST(ComputeAttentionTest, HandChainThreeTwoThree) {
  NetworkSpec spec;
  spec.input_dim = 3;
  spec.hidden_dims = {2};
  spec.output_dim = 3;
  Rng rng(1);
  Network net = init_network(spec, rng);
  net.layers[0].weight = Matrix(3, 2, {0.1, -0.2, 0.3, 0.4, -0.5, 0.6});
  net.layers[0].bias = {0.05, -0.1};
  net.layers[1].weight = Matrix(2, 3, {0.7, -0.8, 0.9, -0.1, 0.2, 0.3});
  net.layers[1].bias = {0.01, 0.02, -0.03};
  const std::vector<double> w = {1.0, -0.5, 2.0};
  // h = relu(w W0 + b0)
  const double h0 = std::max(0.0, 1.0 * 0.1 - 0.5 * 0.3 + 2.0 * -0.5 + 0.05);
  const double h1 = std::max(0.0, 1.0 * -0.2 - 0.5 * 0.4 + 2.0 * 0.6 - 0.1);
  const std::vector<double> expected = {h0 * 0.7 + h1 * -0.1 + 0.01,
                                        h0 * -0.8 + h1 * 0.2 + 0.02,
                                        h0 * 0.9 + h1 * 0.3 - 0.03};
  const std::vector<double> alpha = compute_attention(net, w);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(alpha[k], expected[k], 1e-12);
}

TEST(ComputeAttentionTest, SigmoidSquashesIntoUnitInterval) {
  Network net = affine_net(2);
  net.layers[0].weight = Matrix::identity(2);
  std::fill(net.layers[0].bias.begin(), net.layers[0].bias.end(), 0.0);
  const std::vector<double> alpha =
      compute_attention(net, std::vector<double>{0.0, 40.0}, AlphaActivation::kSigmoid);
  EXPECT_DOUBLE_EQ(alpha[0], 0.5);
  EXPECT_GT(alpha[1], 0.5);
  EXPECT_LE(alpha[1], 1.0);
}

TEST(ComputeAttentionTest, NonFiniteAlphaNamesHead) {
  MAFSConfig config;
  config.attention_hidden = {4};
  config.predictor_hidden = {4};
  HeadState head = init_head(2, prior_of({0.1, 0.2}), 2, 1, config);
  head.attention_net.layers.back().bias[0] = std::nan("");
  try {
    compute_attention(head);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("head 2"), std::string::npos) << e.what();
  }
}

TEST(ComputeAttentionTest, PriorInitStartsAtPriorWhenScaleIsZero) {
  MAFSConfig config;
  config.attention_hidden = {5, 5};
  config.predictor_hidden = {4};
  config.attention_init_scale = 0.0;
  const std::vector<double> w = {0.4, -1.1, 1.9};
  const HeadState head = init_head(0, prior_of(w), 3, 1, config);
  EXPECT_EQ(head.alpha, w);
}

TEST(SoftSelectTest, HadamardExamples) {
  const Matrix x(1, 2, {2.0, -3.0});
  const Matrix out = soft_select(x, std::vector<double>{0.5, 2.0});
  EXPECT_EQ(out(0, 0), 1.0);
  EXPECT_EQ(out(0, 1), -6.0);
  EXPECT_TRUE(std::ranges::equal(soft_select(x, std::vector<double>{1.0, 1.0}).values(), x.values()));
  EXPECT_TRUE(std::ranges::equal(soft_select(x, std::vector<double>{0.0, 0.0}).values(), std::vector<double>(2, 0.0)));
}

TEST(SoftSelectTest, LengthMismatchThrows) {
  EXPECT_THROW(soft_select(Matrix(2, 3), std::vector<double>{1.0}), DimensionError);
}

TEST(AdaptivePenaltyTest, Examples) {
  const std::vector<double> tau =
      adaptive_penalty(prior_of({0.0, 1.0, -3.0}), 0.5, 1e-6, 100.0);
  EXPECT_EQ(tau[0], 100.0);
  EXPECT_NEAR(tau[1], 1.0, 1e-5);
  EXPECT_NEAR(tau[2], 0.57735, 1e-5);
  for (double g : {0.1, 0.3, 1.0, 2.0}) {
    EXPECT_NEAR(adaptive_penalty(prior_of({1.0}), g, 1e-6, 100.0)[0], 1.0, 1e-5);
  }
}

TEST(AdaptivePenaltyTest, MonotoneAndCappedProperty) {
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(30);
    std::vector<double> w(d);
    for (double& v : w) v = rng.normal() * 3.0;
    if (trial % 5 == 0) w[0] = 0.0;
    const double gamma = rng.uniform(0.05, 2.0);
    const double tau_max = rng.uniform(1.0, 200.0);
    const std::vector<double> tau = adaptive_penalty(prior_of(w), gamma, 1e-6, tau_max);
    for (std::size_t a = 0; a < d; ++a) {
      ASSERT_GT(tau[a], 0.0);
      ASSERT_LE(tau[a], tau_max);
      for (std::size_t b = 0; b < d; ++b) {
        if (std::abs(w[a]) <= std::abs(w[b])) ASSERT_GE(tau[a], tau[b]);
      }
    }
  }
}

TEST(AdaptivePenaltyTest, RejectsNonPositiveParameters) {
  EXPECT_THROW(adaptive_penalty(prior_of({1.0}), 0.0, 1e-6, 100.0), ArgumentError);
  EXPECT_THROW(adaptive_penalty(prior_of({1.0}), 0.5, 0.0, 100.0), ArgumentError);
  EXPECT_THROW(adaptive_penalty(prior_of({1.0}), 0.5, 1e-6, 0.0), ArgumentError);
}

TEST(HeadLossTest, RegressionExample) {
  const Matrix pred(2, 1, {1.0, 2.0});
  const HeadLoss loss = head_loss(pred, std::vector<double>{1.0, 4.0}, std::vector<double>{0.5},
                                  std::vector<double>{2.0}, 0.1, Task::kRegression);
  EXPECT_NEAR(loss.prediction, 2.0, 1e-15);
  EXPECT_NEAR(loss.penalty, 0.1, 1e-15);
  EXPECT_NEAR(loss.total, 2.1, 1e-15);
}

TEST(HeadLossTest, ZeroLambdaAndZeroAlphaDropPenalty) {
  const Matrix pred(2, 1, {1.0, 2.0});
  const std::vector<double> y = {0.0, 0.0};
  EXPECT_EQ(head_loss(pred, y, std::vector<double>{3.0}, std::vector<double>{5.0}, 0.0,
                      Task::kRegression)
                .penalty,
            0.0);
  EXPECT_EQ(head_loss(pred, y, std::vector<double>{0.0}, std::vector<double>{5.0}, 9.0,
                      Task::kRegression)
                .penalty,
            0.0);
}

TEST(HeadLossTest, ClassificationIsMeanCrossEntropy) {
  const Matrix logits(2, 2, {0.0, 0.0, 2.0, -1.0});
  const HeadLoss loss = head_loss(logits, std::vector<double>{1.0, 0.0}, std::vector<double>{0.0},
                                  std::vector<double>{1.0}, 0.5, Task::kClassification);
  const double ce0 = std::log(2.0);
  const double ce1 = -std::log(std::exp(2.0) / (std::exp(2.0) + std::exp(-1.0)));
  EXPECT_NEAR(loss.prediction, 0.5 * (ce0 + ce1), 1e-14);
}

TEST(HeadLossTest, ExtremeLogitsStayFinite) {
  const Matrix logits(1, 2, {1000.0, -1000.0});
  const HeadLoss loss = head_loss(logits, std::vector<double>{1.0}, std::vector<double>{0.0},
                                  std::vector<double>{1.0}, 0.0, Task::kClassification);
  EXPECT_TRUE(std::isfinite(loss.total));
  EXPECT_NEAR(loss.total, 2000.0, 1e-9);
}

TEST(HeadGradientTest, RegressionMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const oracle::GradCheck c = oracle::check_head_gradients(seed, Task::kRegression);
    EXPECT_GT(c.checked, 0u);
    EXPECT_LT(c.max_relative_error, 1e-4) << "seed " << seed;
  }
}

TEST(HeadGradientTest, ClassificationMatchesFiniteDifferences) {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const oracle::GradCheck c = oracle::check_head_gradients(seed, Task::kClassification);
    EXPECT_GT(c.checked, 0u);
    EXPECT_LT(c.max_relative_error, 1e-4) << "seed " << seed;
  }
}

TEST(HeadGradientTest, PenaltyScalesWithLambda) {
  MAFSConfig config;
  config.attention_hidden = {4};
  config.predictor_hidden = {4};
  config.dropout_rate = 0.0;
  const HeadState head = init_head(0, prior_of({0.5, -1.0, 1.5}), 3, 1, config);
  Rng rng(3);
  Matrix x(5, 3);
  for (double& v : x.values()) v = rng.normal();
  const std::vector<double> y = {1, 2, 3, 4, 5};
  const auto run = [&](double lambda) {
    return head_loss_and_grads(head.attention_net, head.predictor_net, head.prior.normalized, x,
                               y, head.tau, lambda, Task::kRegression, AlphaActivation::kNone,
                               nullptr)
        .loss;
  };
  const HeadLoss a = run(0.1);
  const HeadLoss b = run(0.3);
  EXPECT_NEAR(b.penalty, 3.0 * a.penalty, 1e-12);
  EXPECT_DOUBLE_EQ(a.prediction, b.prediction);
}

DataMatrix random_x(std::size_t n, std::size_t d, Rng& rng) {
  Matrix m(n, d);
  for (double& v : m.values()) v = rng.normal();
  return DataMatrix::continuous(std::move(m));
}

MAFSConfig small_config(std::uint64_t seed) {
  MAFSConfig config;
  config.attention_hidden = {16, 16};
  config.predictor_hidden = {16, 16};
  config.max_epochs = 60;
  config.seed = seed;
  return config;
}

TEST(TrainMafsTest, StrongFeatureGetsLargestAttention) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const DataMatrix x = random_x(64, 10, rng);
    std::vector<double> y(64);
    for (std::size_t i = 0; i < 64; ++i) y[i] = 3.0 * x.values(i, 0) + 0.1 * rng.normal();
    const TargetVector target = TargetVector::regression(y);
    const std::vector<FilterPrior> priors = compute_priors(x, target);
    const MAFSModel model = train_mafs(x, target, priors, small_config(seed));
    const std::vector<double>& alpha = model.heads[0].alpha;
    if (head_ranking(alpha, 1)[0] == 0) ++hits;
  }
  EXPECT_GE(hits, 4);
}

TEST(TrainMafsTest, LargeLambdaShrinksAttention) {
  Rng rng(11);
  const DataMatrix x = random_x(64, 10, rng);
  std::vector<double> y(64);
  for (std::size_t i = 0; i < 64; ++i) y[i] = x.values(i, 0) - x.values(i, 1);
  const TargetVector target = TargetVector::regression(y);
  const std::vector<FilterPrior> priors = compute_priors(x, target);
  const auto mean_abs = [&](double lambda) {
    MAFSConfig config = small_config(5);
    config.lambda = lambda;
    const MAFSModel model = train_mafs(x, target, {priors[0]}, config);
    double s = 0.0;
    for (double a : model.heads[0].alpha) s += std::abs(a);
    return s / 10.0;
  };
  EXPECT_LT(mean_abs(1e3), mean_abs(0.0));
}

TEST(TrainMafsTest, OneHeadPerPriorAndDeterministic) {
  Rng rng(2);
  const DataMatrix x = random_x(40, 6, rng);
  std::vector<double> y(40);
  for (std::size_t i = 0; i < 40; ++i) y[i] = x.values(i, 2) + 0.5 * rng.normal();
  const TargetVector target = TargetVector::regression(y);
  const std::vector<FilterPrior> priors = compute_priors(x, target);
  MAFSConfig config = small_config(9);
  config.max_epochs = 10;
  EXPECT_EQ(train_mafs(x, target, {priors[1]}, config).num_heads(), 1u);
  const MAFSModel a = train_mafs(x, target, priors, config);
  const MAFSModel b = train_mafs(x, target, priors, config);
  ASSERT_EQ(a.num_heads(), 3u);
  for (std::size_t h = 0; h < 3; ++h) {
    EXPECT_EQ(a.heads[h].alpha, b.heads[h].alpha);
    EXPECT_EQ(a.heads[h].index, h);
  }
}

TEST(TrainMafsTest, HeadsAreIndependent) {
  Rng rng(4);
  const DataMatrix x = random_x(40, 6, rng);
  std::vector<double> y(40);
  for (std::size_t i = 0; i < 40; ++i) y[i] = x.values(i, 1) + 0.5 * rng.normal();
  const TargetVector target = TargetVector::regression(y);
  const std::vector<FilterPrior> priors = compute_priors(x, target);
  MAFSConfig config = small_config(21);
  config.max_epochs = 10;
  const MAFSModel all = train_mafs(x, target, priors, config);
  const MAFSModel two = train_mafs(x, target, {priors[0], priors[1]}, config);
  EXPECT_EQ(all.heads[0].alpha, two.heads[0].alpha);
  EXPECT_EQ(all.heads[1].alpha, two.heads[1].alpha);
}

TEST(TrainMafsTest, EmptyPriorsRejected) {
  Rng rng(1);
  const DataMatrix x = random_x(20, 3, rng);
  const TargetVector y = TargetVector::regression(std::vector<double>(20, 1.0));
  EXPECT_THROW(train_mafs(x, y, {}, small_config(0)), ArgumentError);
}

TEST(HeadRankingTest, Examples) {
  EXPECT_EQ(head_ranking(std::vector<double>{0.1, -0.9, 0.5}, 2),
            (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(head_ranking(std::vector<double>{0.7, 0.7, 0.7}, 3),
            (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_THROW(head_ranking(std::vector<double>{1.0, 2.0}, 3), ArgumentError);
}

TEST(HeadRankingTest, MatchesSortOracle) {
  Rng rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(40);
    std::vector<double> alpha(d);
    for (double& a : alpha) a = static_cast<double>(static_cast<int>(rng.uniform_index(7)) - 3);
    const std::size_t k = rng.uniform_index(d + 1);
    std::vector<std::size_t> oracle(d);
    std::iota(oracle.begin(), oracle.end(), std::size_t{0});
    std::sort(oracle.begin(), oracle.end(), [&](std::size_t a, std::size_t b) {
      const double ma = std::abs(alpha[a]);
      const double mb = std::abs(alpha[b]);
      return ma != mb ? ma > mb : a < b;
    });
    oracle.resize(k);
    ASSERT_EQ(head_ranking(alpha, k), oracle);
  }
}

TEST(SplitIndicesTest, PartitionIsSortedAndStratified) {
  Rng rng(0);
  std::vector<double> labels(50);
  for (std::size_t i = 0; i < 50; ++i) labels[i] = i < 40 ? 0.0 : 1.0;
  const auto [train, val] = split_indices(TargetVector::classification(labels), 0.2, rng);
  EXPECT_EQ(train.size() + val.size(), 50u);
  EXPECT_TRUE(std::is_sorted(train.begin(), train.end()));
  EXPECT_TRUE(std::is_sorted(val.begin(), val.end()));
  const auto ones = std::count_if(val.begin(), val.end(), [](std::size_t i) { return i >= 40; });
  EXPECT_EQ(ones, 2);
}

}  // namespace
}  // namespace mafs
