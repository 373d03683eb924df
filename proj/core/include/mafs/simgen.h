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

#ifndef MAFS_SIMGEN_H_
#define MAFS_SIMGEN_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mafs/data.h"

namespace mafs {

enum class FeatureType { kContinuous, kCategorical, kCombined };
enum class OutcomeType { kContinuous, kBinary };

std::string to_string(FeatureType type);
std::string to_string(OutcomeType type);
FeatureType parse_feature_type(const std::string& name);
OutcomeType parse_outcome_type(const std::string& name);

// The seven functional forms, in effect-size table column order.
enum class Form { kLinear, kCosine, kLog, kCubic, kExp, kCombined, kInteraction };
inline constexpr std::size_t kNumForms = 7;
inline constexpr std::array<Form, kNumForms> kAllForms = {
    Form::kLinear, Form::kCosine,   Form::kLog,        Form::kCubic,
    Form::kExp,    Form::kCombined, Form::kInteraction};
std::string to_string(Form form);

// Effect sizes keyed by functional form. The array is in table column order
// (linear, cosine, log, cubic, exp, combined, interaction).
struct Beta {
  std::array<double, kNumForms> values{};

  double operator[](Form f) const { return values[static_cast<std::size_t>(f)]; }
  double& operator[](Form f) { return values[static_cast<std::size_t>(f)]; }
  friend bool operator==(const Beta&, const Beta&) = default;
};

// Combined designs carry separate effects for continuous and categorical
// causal features; otherwise both components are equal.
struct EffectSizes {
  Beta continuous;
  Beta categorical;

  static EffectSizes uniform(const Beta& beta) { return {beta, beta}; }
  const Beta& for_kind(FeatureKind kind) const {
    return kind == FeatureKind::kContinuous ? continuous : categorical;
  }
  friend bool operator==(const EffectSizes&, const EffectSizes&) = default;
};

// Effect-size table lookup for n in {500, 2000}. Throws LookupError on any
// other cell.
EffectSizes default_effect_sizes(std::size_t n, FeatureType features,
                                  OutcomeType outcome);

// Disjoint causal index sets. Sets A..F hold the linear, cosine, log,
// cubic, exponential and combined-composite features; `pairs` holds the
// cosine-exponential interaction pairs (g, h).
struct CausalAssignment {
  std::vector<std::size_t> linear;     // A
  std::vector<std::size_t> cosine;     // B
  std::vector<std::size_t> log;        // C
  std::vector<std::size_t> cubic;      // D
  std::vector<std::size_t> exp;        // E
  std::vector<std::size_t> combined;   // F
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  const std::vector<std::size_t>& set(Form form) const;
  std::vector<std::size_t>& set(Form form);
  // Features of one form; interaction pairs are flattened member by member.
  std::vector<std::size_t> members(Form form) const;
  // Every causal index, sorted.
  std::vector<std::size_t> all() const;
  std::size_t causal_count() const;
  // Throws ArgumentError on overlap or an index >= d.
  void validate(std::size_t d) const;
  friend bool operator==(const CausalAssignment&, const CausalAssignment&) = default;
};

struct SimulationSpec {
  std::size_t n = 500;
  std::size_t d = 2000;
  FeatureType feature_type = FeatureType::kContinuous;
  OutcomeType outcome_type = OutcomeType::kContinuous;
  EffectSizes beta;
  std::uint64_t seed = 0;

  // SimulationSpec with effect sizes taken from the default table.
  static SimulationSpec with_defaults(std::size_t n, std::size_t d,
                                      FeatureType features, OutcomeType outcome,
                                      std::uint64_t seed);
  // Causal features needed: 40 for single-type designs, 48 for combined.
  std::size_t causal_count() const;
  void validate() const;
};

// Column kind layout: all continuous, all categorical, or alternating
// continuous/categorical for combined designs (even columns continuous).
std::vector<FeatureKind> column_kinds(std::size_t d, FeatureType type);

// Draws causal indices uniformly without replacement and partitions them in
// the order A, B, C, D, E, F, pairs (pairs formed from consecutive draws).
// Single-type designs use 5 per set and 10 interaction members; combined
// designs draw 3 per set and 6 interaction members from each kind.
CausalAssignment make_assignment(const SimulationSpec& spec);

// Continuous columns ~ N(0, 1); categorical columns ~ Binomial(2, maf) with
// a per-column maf ~ U(0.05, 0.5).
DataMatrix gen_features(const SimulationSpec& spec);

std::vector<double> compute_mu(const Matrix& x, const CausalAssignment& assignment,
                               const Beta& beta);
// Uses each feature's kind to pick the effect component. Pairs use the kind
// of their first member.
std::vector<double> compute_mu(const DataMatrix& x, const CausalAssignment& assignment,
                               const EffectSizes& beta);

// p_i = 1 / (1 + exp(-(mu_i - mean(mu)))).
std::vector<double> outcome_probabilities(std::span<const double> mu);

// Continuous: mu + noise_sd * N(0,1). Binary: Bernoulli(p_i) with the
// centered logistic link. noise_sd = 0 is a test hook.
TargetVector gen_outcome(std::span<const double> mu, OutcomeType type,
                         std::uint64_t seed, double noise_sd = 1.0);

struct SimulatedData {
  DataMatrix x;
  TargetVector y;
  CausalAssignment truth;
};

// Full draw: features, assignment, mu, outcome. Every component uses its
// own stream split from spec.seed.
SimulatedData simulate(const SimulationSpec& spec);

struct CoverageReport {
  double overall = 0.0;
  std::array<double, kNumForms> per_form{};
  std::size_t selected_count = 0;
  std::size_t causal_count = 0;
  std::size_t hits = 0;
};

// |selected ∩ causal| / |causal| overall and per form. Forms with no causal
// features report 0.
CoverageReport coverage(std::span<const std::size_t> selected,
                        const CausalAssignment& assignment);

}  // namespace mafs

#endif  // MAFS_SIMGEN_H_
