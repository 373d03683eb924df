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

#include "mafs/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mafs/errors.h"
#include "mafs/filters.h"
#include "mafs/parallel.h"
#include "mafs/random.h"
#include "mafs/reorder.h"

namespace mafs {

std::string to_string(Method method) {
  switch (method) {
    case Method::kMafs:
      return "mafs";
    case Method::kCancelOut:
      return "cancelout";
    case Method::kEarFs:
      return "earfs";
    case Method::kEarFsFilterInit:
      return "earfs_filter_init";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "mafs") return Method::kMafs;
  if (name == "cancelout") return Method::kCancelOut;
  if (name == "earfs") return Method::kEarFs;
  if (name == "earfs_filter_init") return Method::kEarFsFilterInit;
  throw UsageError("unknown method '" + name +
                   "' (expected mafs, cancelout, earfs, earfs_filter_init)");
}

std::size_t selection_count(double ratio, std::size_t d) {
  const double exact = ratio * static_cast<double>(d);
  return static_cast<std::size_t>(std::floor(exact + 1e-9 * std::max(1.0, exact)));
}

SelectionRule SelectionRule::from_ratio(double ratio) {
  SelectionRule rule;
  rule.kind = Kind::kRatio;
  rule.ratio = ratio;
  return rule;
}

SelectionRule SelectionRule::from_count(std::size_t count) {
  SelectionRule rule;
  rule.kind = Kind::kCount;
  rule.count = count;
  return rule;
}

void SelectionRule::validate() const {
  if (kind == Kind::kRatio && !(ratio > 0.0 && ratio <= 1.0)) {
    throw ArgumentError("selection ratio must lie in (0, 1]");
  }
  if (kind == Kind::kCount && count == 0) {
    throw ArgumentError("selection count must be >= 1");
  }
}

std::size_t SelectionRule::resolve(std::size_t d) const {
  validate();
  const std::size_t n = kind == Kind::kRatio ? selection_count(ratio, d) : count;
  if (n == 0) throw ArgumentError("selection rule selects no features");
  if (n > d) {
    throw ArgumentError("selection of " + std::to_string(n) + " exceeds d = " +
                        std::to_string(d));
  }
  return n;
}

void RunConfig::validate() const {
  mafs.validate();
  baseline.validate();
  rule.validate();
  if (replications == 0) throw ArgumentError("replications must be >= 1");
  if (filters.empty()) throw ArgumentError("at least one filter is required");
  for (const std::string& f : filters) {
    if (!FilterRegistry::builtin().contains(f)) {
      throw ArgumentError("unknown filter '" + f + "'");
    }
  }
  if (!FilterRegistry::builtin().contains(init_filter)) {
    throw ArgumentError("unknown init_filter '" + init_filter + "'");
  }
}

MethodRanking run_method(const DataMatrix& x, const TargetVector& y,
                         const RunConfig& config, std::size_t ell,
                         std::uint64_t seed, MAFSModel* model_out) {
  if (ell == 0 || ell > x.d()) {
    throw ArgumentError("selection size must lie in [1, d]");
  }
  MethodRanking out;
  out.method = config.method;
  if (config.method == Method::kMafs) {
    MAFSConfig mc = config.mafs;
    mc.ell = ell;
    mc.seed = seed;
    std::vector<FilterPrior> priors = compute_priors(x, y, config.filters);
    const MAFSModel model = train_mafs(x, y, std::move(priors), mc);
    const CandidateSet s = build_candidate_set(model, mc.effective_k());
    ForestOptions fo;
    fo.n_trees = mc.n_trees;
    fo.seed = Rng(seed).split(300).next_u64();
    const RankedFeatures ranked = rerank(x, y, s, ell, ForestReranker(fo));
    for (const RankedFeature& f : ranked.items) {
      out.features.push_back(f.feature);
      out.scores.push_back(f.importance);
      out.heads.push_back(f.heads);
    }
    if (model_out != nullptr) *model_out = model;
    return out;
  }

  BaselineConfig bc = config.baseline;
  bc.seed = seed;
  bc.method = config.method == Method::kCancelOut ? GateMethod::kCancelOut
                                                  : GateMethod::kEarFs;
  bc.init = config.method == Method::kEarFsFilterInit ? GateInit::kFilterPrior
                                                      : GateInit::kUniform;
  BaselineResult result;
  if (bc.init == GateInit::kFilterPrior) {
    const std::vector<std::string> one = {config.init_filter};
    const std::vector<FilterPrior> priors = compute_priors(x, y, one);
    result = train_baseline(x, y, bc, &priors.front());
  } else {
    result = train_baseline(x, y, bc);
  }
  const std::vector<double> importance = result.state.importance();
  for (std::size_t i = 0; i < ell; ++i) {
    const std::size_t j = result.ranking[i];
    out.features.push_back(j);
    out.scores.push_back(importance[j]);
    out.heads.emplace_back();
  }
  return out;
}

std::uint64_t replication_seed(std::uint64_t seed, std::size_t r) {
  return Rng(seed).split(1000 + r).next_u64();
}

std::vector<BenchRecord> run_bench(const BenchOptions& options) {
  if (options.replications == 0) throw ArgumentError("replications must be >= 1");
  if (options.methods.empty()) throw ArgumentError("bench needs at least one method");
  if (options.ratios.empty()) throw ArgumentError("bench needs at least one ratio");
  std::vector<double> ratios = options.ratios;
  for (double r : ratios) SelectionRule::from_ratio(r).validate();
  const std::size_t d = options.simulation.d;
  std::size_t max_ell = 0;
  for (double r : ratios) max_ell = std::max(max_ell, selection_count(r, d));
  if (max_ell == 0) throw ArgumentError("largest ratio selects no features");

  const std::size_t per_rep = options.methods.size() * ratios.size();
  std::vector<BenchRecord> records(options.replications * per_rep);
  parallel_for(options.replications, [&](std::size_t rep) {
    const std::uint64_t seed = replication_seed(options.seed, rep);
    SimulationSpec spec = options.simulation;
    spec.seed = seed;
    const SimulatedData data = simulate(spec);
    for (std::size_t m = 0; m < options.methods.size(); ++m) {
      RunConfig cfg = options.config;
      cfg.method = options.methods[m];
      const auto start = std::chrono::steady_clock::now();
      const MethodRanking ranking = run_method(data.x, data.y, cfg, max_ell, seed);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      for (std::size_t q = 0; q < ratios.size(); ++q) {
        const std::size_t count = selection_count(ratios[q], d);
        BenchRecord& rec = records[rep * per_rep + m * ratios.size() + q];
        rec.replication = rep;
        rec.seed = seed;
        rec.method = cfg.method;
        rec.ratio = ratios[q];
        rec.selected = count;
        rec.coverage = coverage(
            std::span<const std::size_t>(ranking.features.data(), count), data.truth);
        rec.seconds = seconds;
      }
    }
  });
  return records;
}

std::vector<BenchSummary> summarize(const std::vector<BenchRecord>& records) {
  std::vector<BenchSummary> out;
  std::vector<std::vector<const BenchRecord*>> groups;
  for (const BenchRecord& rec : records) {
    auto it = std::find_if(out.begin(), out.end(), [&](const BenchSummary& s) {
      return s.method == rec.method && s.ratio == rec.ratio;
    });
    if (it == out.end()) {
      BenchSummary s;
      s.method = rec.method;
      s.ratio = rec.ratio;
      out.push_back(s);
      groups.emplace_back();
      it = out.end() - 1;
    }
    groups[static_cast<std::size_t>(it - out.begin())].push_back(&rec);
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    BenchSummary& s = out[g];
    const auto& members = groups[g];
    const double r = static_cast<double>(members.size());
    s.replications = members.size();
    for (const BenchRecord* rec : members) {
      s.mean += rec->coverage.overall;
      for (std::size_t f = 0; f < kNumForms; ++f) {
        s.per_form_mean[f] += rec->coverage.per_form[f];
      }
    }
    s.mean /= r;
    for (double& v : s.per_form_mean) v /= r;
    double ss = 0.0;
    for (const BenchRecord* rec : members) {
      ss += (rec->coverage.overall - s.mean) * (rec->coverage.overall - s.mean);
    }
    s.sd = members.size() > 1 ? std::sqrt(ss / (r - 1.0)) : 0.0;
    s.ci_half_width = 1.96 * s.sd / std::sqrt(r);
  }
  return out;
}

}  // namespace mafs
