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
#include <limits>
#include <string>

#include <gtest/gtest.h>

#include "mafs/errors.h"

namespace mafs {
namespace {

void step(std::vector<double>& p, const std::vector<double>& g, AdamState& s, double lr,
          const std::string& name = "p") {
  const ParamRef ref{name, p, g};
  adam_step(std::span<const ParamRef>(&ref, 1), s, lr);
}

TEST(AdamTest, FirstStepIsSignedLearningRate) {
  for (double g : {3.0, -0.25}) {
    std::vector<double> p = {1.0};
    AdamState s;
    step(p, {g}, s, 0.01);
    const double expected = 1.0 - 0.01 * g / (std::fabs(g) + 1e-8);
    EXPECT_DOUBLE_EQ(p[0], expected);
    EXPECT_NEAR(p[0], 1.0 - 0.01 * (g > 0 ? 1 : -1), 1e-9);
  }
}

TEST(AdamTest, ZeroGradientLeavesParametersAndMoments) {
  std::vector<double> p = {0.3, -2.0};
  AdamState s;
  step(p, {0.0, 0.0}, s, 0.1);
  EXPECT_EQ(p, (std::vector<double>{0.3, -2.0}));
  EXPECT_EQ(s.step, 1u);
  EXPECT_EQ(s.first_moment[0], (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(s.second_moment[0], (std::vector<double>{0.0, 0.0}));
}

TEST(AdamTest, TwoStepTraceMatchesHandRecurrence) {
  const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double p = 0.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 2; ++t) {
    m = b1 * m + (1 - b1) * 1.0;
    v = b2 * v + (1 - b2) * 1.0;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    p -= lr * mh / (std::sqrt(vh) + eps);
  }
  std::vector<double> param = {0.0};
  AdamState s;
  step(param, {1.0}, s, lr);
  step(param, {1.0}, s, lr);
  EXPECT_NEAR(param[0], p, 1e-12);
  EXPECT_NEAR(param[0], -0.2, 1e-6);
  EXPECT_EQ(s.step, 2u);
}

TEST(AdamTest, DecoupledWeightDecayAppliesBeforeMomentStep) {
  std::vector<double> p = {2.0};
  AdamState s;
  s.weight_decay = 0.5;
  step(p, {0.0}, s, 0.1);
  EXPECT_DOUBLE_EQ(p[0], 2.0 - 0.1 * 0.5 * 2.0);
}

TEST(AdamTest, NonFiniteGradientNamesTensorAndMutatesNothing) {
  std::vector<double> a = {1.0}, b = {2.0};
  const std::vector<double> ga = {0.5};
  const std::vector<double> gb = {std::numeric_limits<double>::quiet_NaN()};
  const ParamRef refs[] = {{"layer0.weight", a, ga}, {"layer0.bias", b, gb}};
  AdamState s;
  try {
    adam_step(refs, s, 0.1);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("layer0.bias"), std::string::npos);
  }
  EXPECT_EQ(a[0], 1.0);
  EXPECT_EQ(s.step, 0u);
}

TEST(AdamTest, RejectsNonPositiveLearningRate) {
  std::vector<double> p = {1.0};
  AdamState s;
  EXPECT_THROW(step(p, {1.0}, s, 0.0), ArgumentError);
}

TEST(AdamTest, SecondMomentsStayNonNegative) {
  std::vector<double> p = {0.0, 0.0, 0.0};
  AdamState s;
  for (int t = 0; t < 20; ++t) {
    step(p, {std::sin(t), -3.0 * t, 1e-3}, s, 0.01);
    for (double v : s.second_moment[0]) EXPECT_GE(v, 0.0);
  }
  EXPECT_EQ(s.step, 20u);
}

}  // namespace
}  // namespace mafs
