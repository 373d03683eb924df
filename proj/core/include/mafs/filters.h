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

#ifndef MAFS_FILTERS_H_
#define MAFS_FILTERS_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mafs/data.h"

namespace mafs {

// Raw per-feature dependence magnitudes, each in [0, 1]. Degenerate
// features (constant column, all-tied ranks) score 0 and are listed in
// `flagged` so indices stay aligned with the matrix columns.
struct FilterScores {
  std::vector<double> raw;
  std::vector<std::size_t> flagged;
};

// A filter's z-normalized importance vector: the prior fed to one head.
struct FilterPrior {
  std::string method;
  std::vector<double> raw;
  std::vector<double> normalized;
  double raw_mean = 0.0;
  double raw_sd = 0.0;
  std::vector<std::size_t> flagged;
};

// |Pearson r| of every column against y (point-biserial for binary
// labels). Requires n >= 3; a constant y throws DegenerateError.
FilterScores pearson_sis(const DataMatrix& x, const TargetVector& y);

// |Kendall tau-b| of every column against y via the O(n log n)
// merge-count algorithm. An all-tied target flags every feature.
FilterScores kendall_tau(const DataMatrix& x, const TargetVector& y);

// Sample distance correlation (V-statistic, double-centered distance
// matrices) of every column against y. Requires n >= 4.
FilterScores distance_corr(const DataMatrix& x, const TargetVector& y);

// Signed tau-b; nullopt when either side is entirely tied.
std::optional<double> kendall_tau_b(std::span<const double> x,
                                    std::span<const double> y);
// Same statistic by direct O(n^2) enumeration of concordant, discordant
// and tied pairs. Kept as the reference path for kendall_tau_b.
std::optional<double> kendall_tau_b_pairwise(std::span<const double> x,
                                             std::span<const double> y);

// Distance correlation of two samples; nullopt when either side has zero
// distance variance.
std::optional<double> distance_correlation(std::span<const double> x,
                                           std::span<const double> y);

// (raw - mean) / sd with the population sd. Requires raw.size() >= 2;
// sd < 1e-12 throws DegenerateError.
FilterPrior normalize_prior(std::vector<double> raw, std::string method);

using FilterFn =
    std::function<FilterScores(const DataMatrix&, const TargetVector&)>;

// Name -> filter function. Heads are created one per registered filter
// that a run asks for, in the order asked.
class FilterRegistry {
 public:
  void add(const std::string& name, FilterFn fn);
  bool contains(const std::string& name) const;
  // Throws UsageError on an unknown name.
  const FilterFn& get(const std::string& name) const;
  std::vector<std::string> names() const;

  // sis, kendall, dcor.
  static const FilterRegistry& builtin();

 private:
  std::map<std::string, FilterFn> filters_;
};

// Default head order.
inline const std::vector<std::string>& default_filter_methods() {
  static const std::vector<std::string> kMethods = {"sis", "kendall", "dcor"};
  return kMethods;
}

// Runs each named filter and normalizes its output.
std::vector<FilterPrior> compute_priors(
    const DataMatrix& x, const TargetVector& y,
    std::span<const std::string> methods = default_filter_methods(),
    const FilterRegistry& registry = FilterRegistry::builtin());

}  // namespace mafs

#endif  // MAFS_FILTERS_H_
