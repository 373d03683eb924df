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

#include "mafs/simgen.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mafs/errors.h"
#include "mafs/parallel.h"
#include "mafs/random.h"

namespace mafs {

std::string to_string(FeatureType type) {
  switch (type) {
    case FeatureType::kContinuous: return "continuous";
    case FeatureType::kCategorical: return "categorical";
    case FeatureType::kCombined: return "combined";
  }
  return "?";
}

std::string to_string(OutcomeType type) {
  return type == OutcomeType::kContinuous ? "continuous" : "binary";
}

FeatureType parse_feature_type(const std::string& name) {
  if (name == "continuous") return FeatureType::kContinuous;
  if (name == "categorical") return FeatureType::kCategorical;
  if (name == "combined") return FeatureType::kCombined;
  throw UsageError("unknown feature type '" + name +
                   "' (expected continuous|categorical|combined)");
}

OutcomeType parse_outcome_type(const std::string& name) {
  if (name == "continuous") return OutcomeType::kContinuous;
  if (name == "binary" || name == "categorical") return OutcomeType::kBinary;
  throw UsageError("unknown outcome type '" + name + "' (expected continuous|binary)");
}

std::string to_string(Form form) {
  switch (form) {
    case Form::kLinear: return "linear";
    case Form::kCosine: return "cosine";
    case Form::kLog: return "log";
    case Form::kCubic: return "cubic";
    case Form::kExp: return "exp";
    case Form::kCombined: return "combined";
    case Form::kInteraction: return "interaction";
  }
  return "?";
}

EffectSizes default_effect_sizes(std::size_t n, FeatureType features,
                                  OutcomeType outcome) {
  using B = Beta;
  const bool binary = outcome == OutcomeType::kBinary;
  if (n == 500) {
    switch (features) {
      case FeatureType::kContinuous:
        return EffectSizes::uniform(binary ? B{{1.5, 3.0, 2.0, 0.5, 1.0, 0.4, 1.0}}
                                           : B{{1.5, 4.0, 3.0, 0.7, 1.2, 0.4, 1.2}});
      case FeatureType::kCategorical:
        return EffectSizes::uniform(binary ? B{{1.5, 3.0, 0.15, 1.5, 1.0, 0.4, 1.2}}
                                           : B{{1.5, 3.0, 0.15, 1.5, 1.2, 0.4, 1.0}});
      case FeatureType::kCombined:
        return binary ? EffectSizes{B{{1.5, 4.0, 2.0, 0.5, 0.8, 0.3, 1.0}},
                                    B{{1.5, 4.0, 0.4, 1.5, 0.8, 0.3, 1.0}}}
                      : EffectSizes{B{{3.0, 4.0, 3.0, 0.5, 0.8, 0.4, 1.5}},
                                    B{{3.0, 4.0, 0.3, 0.8, 1.2, 0.5, 1.5}}};
    }
  }
  if (n == 2000) {
    switch (features) {
      case FeatureType::kContinuous:
        return EffectSizes::uniform(binary ? B{{0.4, 1.5, 0.7, 0.15, 0.2, 0.08, 0.25}}
                                           : B{{0.3, 1.0, 1.0, 0.12, 0.15, 0.05, 0.25}});
      case FeatureType::kCategorical:
        return EffectSizes::uniform(binary ? B{{0.4, 1.0, 0.1, 0.6, 0.6, 0.15, 0.3}}
                                           : B{{1.0, 1.0, 0.05, 0.5, 0.3, 0.1, 0.15}});
      case FeatureType::kCombined:
        return binary ? EffectSizes{B{{0.2, 1.0, 0.5, 0.1, 0.08, 0.04, 0.15}},
                                    B{{0.3, 1.0, 0.05, 0.4, 0.15, 0.04, 0.2}}}
                      : EffectSizes{B{{0.2, 1.0, 0.5, 0.05, 0.08, 0.04, 0.15}},
                                    B{{0.3, 1.0, 0.05, 0.3, 0.15, 0.02, 0.2}}};
    }
  }
  throw LookupError("no default effect sizes for n = " + std::to_string(n) + ", " +
                    to_string(features) + " X, " + to_string(outcome) +
                    " Y (tabulated n: 500, 2000)");
}

const std::vector<std::size_t>& CausalAssignment::set(Form form) const {
  switch (form) {
    case Form::kLinear: return linear;
    case Form::kCosine: return cosine;
    case Form::kLog: return log;
    case Form::kCubic: return cubic;
    case Form::kExp: return exp;
    case Form::kCombined: return combined;
    case Form::kInteraction: break;
  }
  throw ArgumentError("CausalAssignment::set: interaction terms are stored as pairs");
}

std::vector<std::size_t>& CausalAssignment::set(Form form) {
  return const_cast<std::vector<std::size_t>&>(
      static_cast<const CausalAssignment&>(*this).set(form));
}

std::vector<std::size_t> CausalAssignment::members(Form form) const {
  if (form != Form::kInteraction) return set(form);
  std::vector<std::size_t> out;
  for (const auto& [g, h] : pairs) {
    out.push_back(g);
    out.push_back(h);
  }
  return out;
}

std::vector<std::size_t> CausalAssignment::all() const {
  std::vector<std::size_t> out;
  for (Form f : kAllForms) {
    const auto m = members(f);
    out.insert(out.end(), m.begin(), m.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t CausalAssignment::causal_count() const { return all().size(); }

void CausalAssignment::validate(std::size_t d) const {
  std::set<std::size_t> seen;
  for (std::size_t idx : all()) {
    if (idx >= d) {
      throw ArgumentError("causal index " + std::to_string(idx) + " out of range");
    }
    if (!seen.insert(idx).second) {
      throw ArgumentError("causal index " + std::to_string(idx) +
                          " appears in more than one functional form");
    }
  }
}

SimulationSpec SimulationSpec::with_defaults(std::size_t n, std::size_t d,
                                             FeatureType features,
                                             OutcomeType outcome,
                                             std::uint64_t seed) {
  SimulationSpec spec;
  spec.n = n;
  spec.d = d;
  spec.feature_type = features;
  spec.outcome_type = outcome;
  spec.beta = default_effect_sizes(n, features, outcome);
  spec.seed = seed;
  return spec;
}

std::size_t SimulationSpec::causal_count() const {
  return feature_type == FeatureType::kCombined ? 48 : 40;
}

void SimulationSpec::validate() const {
  if (n < 4) throw ArgumentError("SimulationSpec.n must be >= 4");
  if (d < causal_count()) {
    throw ArgumentError("SimulationSpec.d = " + std::to_string(d) +
                        " is below the causal feature count " +
                        std::to_string(causal_count()));
  }
  if (feature_type == FeatureType::kCombined && d / 2 < 24) {
    throw ArgumentError("SimulationSpec.d too small for 24 causal features per kind");
  }
  for (const Beta* b : {&beta.continuous, &beta.categorical}) {
    for (double v : b->values) {
      if (!std::isfinite(v)) throw ArgumentError("SimulationSpec.beta must be finite");
    }
  }
}

std::vector<FeatureKind> column_kinds(std::size_t d, FeatureType type) {
  std::vector<FeatureKind> kinds(d);
  for (std::size_t c = 0; c < d; ++c) {
    switch (type) {
      case FeatureType::kContinuous: kinds[c] = FeatureKind::kContinuous; break;
      case FeatureType::kCategorical: kinds[c] = FeatureKind::kCategorical; break;
      case FeatureType::kCombined:
        kinds[c] = c % 2 == 0 ? FeatureKind::kContinuous : FeatureKind::kCategorical;
        break;
    }
  }
  return kinds;
}

namespace {

void partition_draws(std::span<const std::size_t> draws, std::size_t per_set,
                     std::size_t interaction_members, CausalAssignment& out) {
  std::size_t pos = 0;
  for (Form f : {Form::kLinear, Form::kCosine, Form::kLog, Form::kCubic, Form::kExp,
                 Form::kCombined}) {
    auto& target = out.set(f);
    for (std::size_t i = 0; i < per_set; ++i) target.push_back(draws[pos++]);
  }
  for (std::size_t i = 0; i < interaction_members; i += 2) {
    out.pairs.emplace_back(draws[pos], draws[pos + 1]);
    pos += 2;
  }
}

}  // namespace

CausalAssignment make_assignment(const SimulationSpec& spec) {
  spec.validate();
  Rng rng = Rng(spec.seed).split(2);
  CausalAssignment out;
  if (spec.feature_type != FeatureType::kCombined) {
    const auto draws = rng.sample_without_replacement(spec.d, 40);
    partition_draws(draws, 5, 10, out);
    return out;
  }
  const auto kinds = column_kinds(spec.d, spec.feature_type);
  for (FeatureKind kind : {FeatureKind::kContinuous, FeatureKind::kCategorical}) {
    std::vector<std::size_t> pool;
    for (std::size_t c = 0; c < spec.d; ++c) {
      if (kinds[c] == kind) pool.push_back(c);
    }
    const auto picks = rng.sample_without_replacement(pool.size(), 24);
    std::vector<std::size_t> draws;
    for (std::size_t p : picks) draws.push_back(pool[p]);
    partition_draws(draws, 3, 6, out);
  }
  return out;
}

DataMatrix gen_features(const SimulationSpec& spec) {
  spec.validate();
  DataMatrix out;
  out.kinds = column_kinds(spec.d, spec.feature_type);
  out.values = Matrix(spec.n, spec.d);
  const Rng root = Rng(spec.seed).split(1);
  parallel_for(spec.d, [&](std::size_t c) {
    Rng rng = root.split(c);
    if (out.kinds[c] == FeatureKind::kContinuous) {
      for (std::size_t r = 0; r < spec.n; ++r) out.values(r, c) = rng.normal();
    } else {
      const double maf = rng.uniform(0.05, 0.5);
      for (std::size_t r = 0; r < spec.n; ++r) {
        out.values(r, c) = static_cast<double>(rng.bernoulli(maf)) +
                           static_cast<double>(rng.bernoulli(maf));
      }
    }
  });
  return out;
}

namespace {

double log_term(double v) { return std::log(std::abs(v) + 1e-6); }

double row_mu(std::span<const double> row, const CausalAssignment& a,
              const std::vector<FeatureKind>* kinds, const EffectSizes& beta) {
  auto b = [&](std::size_t idx, Form form) {
    const FeatureKind kind = kinds ? (*kinds)[idx] : FeatureKind::kContinuous;
    return beta.for_kind(kind)[form];
  };
  double mu = 0.0;
  for (std::size_t i : a.linear) mu += b(i, Form::kLinear) * row[i];
  for (std::size_t i : a.cosine) mu += b(i, Form::kCosine) * std::cos(row[i]);
  for (std::size_t i : a.log) mu += b(i, Form::kLog) * log_term(row[i]);
  for (std::size_t i : a.cubic) mu += b(i, Form::kCubic) * row[i] * row[i] * row[i];
  for (std::size_t i : a.exp) mu += b(i, Form::kExp) * std::exp(row[i]);
  for (const auto& [g, h] : a.pairs) {
    mu += b(g, Form::kInteraction) * std::cos(row[g]) * std::exp(row[h]);
  }
  for (std::size_t i : a.combined) {
    const double v = row[i];
    mu += b(i, Form::kCombined) *
          (std::cos(v) + log_term(v) + v * v * v + std::exp(v));
  }
  return mu;
}

}  // namespace

std::vector<double> compute_mu(const Matrix& x, const CausalAssignment& assignment,
                               const Beta& beta) {
  assignment.validate(x.cols());
  const EffectSizes effects = EffectSizes::uniform(beta);
  std::vector<double> mu(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    mu[r] = row_mu(x.row(r), assignment, nullptr, effects);
  }
  return mu;
}

std::vector<double> compute_mu(const DataMatrix& x, const CausalAssignment& assignment,
                               const EffectSizes& beta) {
  assignment.validate(x.d());
  std::vector<double> mu(x.n());
  for (std::size_t r = 0; r < x.n(); ++r) {
    mu[r] = row_mu(x.values.row(r), assignment, &x.kinds, beta);
  }
  return mu;
}

std::vector<double> outcome_probabilities(std::span<const double> mu) {
  const double mean =
      mu.empty() ? 0.0
                 : std::accumulate(mu.begin(), mu.end(), 0.0) / static_cast<double>(mu.size());
  std::vector<double> p(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    p[i] = 1.0 / (1.0 + std::exp(-(mu[i] - mean)));
  }
  return p;
}

TargetVector gen_outcome(std::span<const double> mu, OutcomeType type,
                         std::uint64_t seed, double noise_sd) {
  require_finite(mu, "gen_outcome mu");
  Rng rng(seed);
  if (type == OutcomeType::kContinuous) {
    std::vector<double> y(mu.begin(), mu.end());
    for (double& v : y) v += noise_sd * rng.normal();
    return TargetVector::regression(std::move(y));
  }
  const std::vector<double> p = outcome_probabilities(mu);
  TargetVector y;
  y.task = Task::kClassification;
  y.n_classes = 2;
  y.values.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) y.values[i] = rng.bernoulli(p[i]) ? 1.0 : 0.0;
  return y;
}

SimulatedData simulate(const SimulationSpec& spec) {
  SimulatedData out;
  out.x = gen_features(spec);
  out.truth = make_assignment(spec);
  const std::vector<double> mu = compute_mu(out.x, out.truth, spec.beta);
  out.y = gen_outcome(mu, spec.outcome_type, Rng(spec.seed).split(3).next_u64());
  return out;
}

CoverageReport coverage(std::span<const std::size_t> selected,
                        const CausalAssignment& assignment) {
  const std::set<std::size_t> chosen(selected.begin(), selected.end());
  CoverageReport report;
  report.selected_count = chosen.size();
  for (std::size_t f = 0; f < kNumForms; ++f) {
    const auto members = assignment.members(kAllForms[f]);
    std::size_t hits = 0;
    for (std::size_t idx : members) hits += chosen.count(idx);
    report.per_form[f] =
        members.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(members.size());
    report.hits += hits;
    report.causal_count += members.size();
  }
  report.overall = report.causal_count == 0
                       ? 0.0
                       : static_cast<double>(report.hits) /
                             static_cast<double>(report.causal_count);
  return report;
}

}  // namespace mafs
