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

#ifndef MAFS_PIPELINE_H_
#define MAFS_PIPELINE_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mafs/attention.h"
#include "mafs/baselines.h"
#include "mafs/data.h"
#include "mafs/simgen.h"

namespace mafs {

enum class Method { kMafs, kCancelOut, kEarFs, kEarFsFilterInit };

std::string to_string(Method method);
// Accepts mafs, cancelout, earfs, earfs_filter_init. Throws UsageError.
Method parse_method(const std::string& name);

// Either a fraction of d (floored) or a fixed count.
struct SelectionRule {
  enum class Kind { kRatio, kCount };
  Kind kind = Kind::kRatio;
  double ratio = 0.02;
  std::size_t count = 0;

  static SelectionRule from_ratio(double ratio);
  static SelectionRule from_count(std::size_t count);
  std::size_t resolve(std::size_t d) const;
  void validate() const;
};

// floor(ratio * d), guarded against binary rounding just below an integer.
std::size_t selection_count(double ratio, std::size_t d);

inline constexpr std::array<double, 4> kSelectionRatios = {0.005, 0.01, 0.015,
                                                           0.02};

struct RunConfig {
  Method method = Method::kMafs;
  MAFSConfig mafs;
  BaselineConfig baseline;
  std::vector<std::string> filters = {"sis", "kendall", "dcor"};
  // Filter whose prior seeds the gate for earfs_filter_init.
  std::string init_filter = "sis";
  SelectionRule rule;
  std::size_t replications = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct MethodRanking {
  Method method = Method::kMafs;
  std::vector<std::size_t> features;
  std::vector<double> scores;
  // Nominating heads per feature (MAFS only).
  std::vector<std::vector<std::size_t>> heads;
};

// Runs one method end to end and returns its top-`ell` features. Baseline
// rankings cover every feature when ell == d. All randomness derives from
// `seed`, which overrides the seeds inside `config`. For MAFS the trained
// model is copied to `model_out` when given.
MethodRanking run_method(const DataMatrix& x, const TargetVector& y,
                         const RunConfig& config, std::size_t ell,
                         std::uint64_t seed, MAFSModel* model_out = nullptr);

struct BenchRecord {
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  Method method = Method::kMafs;
  double ratio = 0.0;
  std::size_t selected = 0;
  CoverageReport coverage;
  double seconds = 0.0;
};

struct BenchSummary {
  Method method = Method::kMafs;
  double ratio = 0.0;
  std::size_t replications = 0;
  double mean = 0.0;
  double sd = 0.0;
  // 1.96 * sd / sqrt(R).
  double ci_half_width = 0.0;
  std::array<double, kNumForms> per_form_mean{};
};

struct BenchOptions {
  SimulationSpec simulation;
  std::vector<Method> methods = {Method::kMafs, Method::kCancelOut,
                                 Method::kEarFs, Method::kEarFsFilterInit};
  std::vector<double> ratios = {kSelectionRatios.begin(), kSelectionRatios.end()};
  std::size_t replications = 5;
  std::uint64_t seed = 0;
  RunConfig config;
};

// Seed of replication r: independent of the replication count.
std::uint64_t replication_seed(std::uint64_t seed, std::size_t r);

// Each method ranks once at the largest ratio; smaller ratios are prefixes.
std::vector<BenchRecord> run_bench(const BenchOptions& options);

// Deterministic fold over records, grouped by (method, ratio) in first-seen
// order.
std::vector<BenchSummary> summarize(const std::vector<BenchRecord>& records);

}  // namespace mafs

#endif  // MAFS_PIPELINE_H_
