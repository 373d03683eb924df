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

#include "mafs/filters.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mafs/errors.h"
#include "mafs/parallel.h"

namespace mafs {
namespace {

std::vector<double> column_of(const DataMatrix& x, std::size_t c) {
  return x.values.column(c);
}

void check_rows(const DataMatrix& x, const TargetVector& y,
                std::size_t min_n, const char* who) {
  if (x.n() != y.size()) {
    throw DimensionError(std::string(who) + ": X has " +
                         std::to_string(x.n()) + " rows but y has " +
                         std::to_string(y.size()));
  }
  if (x.n() < min_n) {
    throw ArgumentError(std::string(who) + ": needs at least " +
                        std::to_string(min_n) + " samples");
  }
}

// Collects per-feature optional results into scores + flags.
FilterScores collect(std::vector<std::optional<double>> values) {
  FilterScores out;
  out.raw.resize(values.size(), 0.0);
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k]) {
      out.raw[k] = std::min(1.0, std::abs(*values[k]));
    } else {
      out.flagged.push_back(k);
    }
  }
  return out;
}

std::int64_t tied_pairs_in_sorted(std::span<const double> sorted) {
  std::int64_t ties = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      ties += static_cast<std::int64_t>(run) * (static_cast<std::int64_t>(run) - 1) / 2;
      run = 1;
    }
  }
  return ties;
}

// Stable merge sort of `v` returning the number of strictly inverted pairs.
std::int64_t merge_count(std::vector<double>& v, std::vector<double>& buf,
                         std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
            buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

std::optional<double> tau_b_from_counts(std::int64_t total_pairs,
                                        std::int64_t x_ties,
                                        std::int64_t y_ties,
                                        std::int64_t score) {
  if (total_pairs == x_ties || total_pairs == y_ties) return std::nullopt;
  const double denom = std::sqrt(static_cast<double>(total_pairs - x_ties) *
                                 static_cast<double>(total_pairs - y_ties));
  return static_cast<double>(score) / denom;
}

}  // namespace

FilterScores pearson_sis(const DataMatrix& x, const TargetVector& y) {
  check_rows(x, y, 3, "pearson_sis");
  const std::size_t n = x.n();
  const double y_mean =
      std::accumulate(y.values.begin(), y.values.end(), 0.0) / static_cast<double>(n);
  std::vector<double> yc(n);
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    yc[i] = y.values[i] - y_mean;
    syy += yc[i] * yc[i];
  }
  if (!(syy > 0.0)) throw DegenerateError("pearson_sis: target has zero variance");
  const double y_norm = std::sqrt(syy);

  std::vector<std::optional<double>> values(x.d());
  parallel_for(x.d(), [&](std::size_t k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x.values(i, k);
    mean /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = x.values(i, k) - mean;
      sxx += dx * dx;
      sxy += dx * yc[i];
    }
    if (sxx > 0.0) values[k] = sxy / (std::sqrt(sxx) * y_norm);
  });
  return collect(std::move(values));
}

std::optional<double> kendall_tau_b(std::span<const double> x,
                                    std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("kendall_tau_b: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  std::int64_t x_ties = 0, joint_ties = 0;
  std::size_t run_x = 1, run_xy = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    const bool same_x = i < n && x[order[i]] == x[order[i - 1]];
    const bool same_xy = same_x && y[order[i]] == y[order[i - 1]];
    if (same_x) {
      ++run_x;
    } else {
      x_ties += static_cast<std::int64_t>(run_x) * (static_cast<std::int64_t>(run_x) - 1) / 2;
      run_x = 1;
    }
    if (same_xy) {
      ++run_xy;
    } else {
      joint_ties += static_cast<std::int64_t>(run_xy) * (static_cast<std::int64_t>(run_xy) - 1) / 2;
      run_xy = 1;
    }
  }

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  std::vector<double> buf(n);
  const std::int64_t swaps = merge_count(ys, buf, 0, n);
  const std::int64_t y_ties = tied_pairs_in_sorted(ys);

  const std::int64_t total = static_cast<std::int64_t>(n) * (static_cast<std::int64_t>(n) - 1) / 2;
  const std::int64_t score = total - x_ties - y_ties + joint_ties - 2 * swaps;
  return tau_b_from_counts(total, x_ties, y_ties, score);
}

std::optional<double> kendall_tau_b_pairwise(std::span<const double> x,
                                             std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DimensionError("kendall_tau_b_pairwise: length mismatch");
  }
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  std::int64_t concordant = 0, discordant = 0, x_ties = 0, y_ties = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0) ++x_ties;
      if (dy == 0.0) ++y_ties;
      if (dx == 0.0 || dy == 0.0) continue;
      if ((dx > 0.0) == (dy > 0.0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const std::int64_t total = static_cast<std::int64_t>(n) * (static_cast<std::int64_t>(n) - 1) / 2;
  return tau_b_from_counts(total, x_ties, y_ties, concordant - discordant);
}

FilterScores kendall_tau(const DataMatrix& x, const TargetVector& y) {
  check_rows(x, y, 2, "kendall_tau");
  std::vector<std::optional<double>> values(x.d());
  parallel_for(x.d(), [&](std::size_t k) {
    const std::vector<double> col = column_of(x, k);
    values[k] = kendall_tau_b(col, y.values);
  });
  return collect(std::move(values));
}

namespace {

// Fills `centered` (n*n, row-major) with the double-centered distance
// matrix of v and returns its mean square, i.e. the squared distance
// variance.
double double_centered(std::span<const double> v, std::vector<double>& centered) {
  const std::size_t n = v.size();
  centered.resize(n * n);
  std::vector<double> row_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double* row = centered.data() + i * n;
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row[j] = std::abs(v[i] - v[j]);
      sum += row[j];
    }
    row_mean[i] = sum / static_cast<double>(n);
    grand += sum;
  }
  grand /= static_cast<double>(n * n);
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double* row = centered.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      // The distance matrix is symmetric, so column means equal row means.
      row[j] = row[j] - row_mean[i] - row_mean[j] + grand;
      sq += row[j] * row[j];
    }
  }
  return sq / static_cast<double>(n * n);
}

std::optional<double> dcor_with_centered_y(std::span<const double> x,
                                           std::span<const double> y_centered,
                                           double y_var,
                                           std::vector<double>& scratch) {
  const std::size_t n = x.size();
  const double x_var = double_centered(x, scratch);
  constexpr double kTiny = 1e-300;
  if (!(x_var > kTiny) || !(y_var > kTiny)) return std::nullopt;
  double cov = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) cov += scratch[i] * y_centered[i];
  cov /= static_cast<double>(n * n);
  cov = std::max(cov, 0.0);
  return std::min(1.0, std::sqrt(cov / std::sqrt(x_var * y_var)));
}

}  // namespace

std::optional<double> distance_correlation(std::span<const double> x,
                                           std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DimensionError("distance_correlation: length mismatch");
  }
  std::vector<double> y_centered, scratch;
  const double y_var = double_centered(y, y_centered);
  return dcor_with_centered_y(x, y_centered, y_var, scratch);
}

FilterScores distance_corr(const DataMatrix& x, const TargetVector& y) {
  check_rows(x, y, 4, "distance_corr");
  std::vector<double> y_centered;
  const double y_var = double_centered(y.values, y_centered);
  std::vector<std::optional<double>> values(x.d());
  parallel_for(x.d(), [&](std::size_t k) {
    thread_local std::vector<double> scratch;
    const std::vector<double> col = column_of(x, k);
    values[k] = dcor_with_centered_y(col, y_centered, y_var, scratch);
  });
  return collect(std::move(values));
}

FilterPrior normalize_prior(std::vector<double> raw, std::string method) {
  if (raw.size() < 2) {
    throw ArgumentError("normalize_prior: need at least 2 features");
  }
  const double d = static_cast<double>(raw.size());
  const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / d;
  double ss = 0.0;
  for (double v : raw) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / d);
  if (!(sd >= 1e-12)) {
    throw DegenerateError("normalize_prior: filter '" + method +
                          "' produced a constant score vector");
  }
  FilterPrior prior;
  prior.method = std::move(method);
  prior.raw_mean = mean;
  prior.raw_sd = sd;
  prior.normalized.resize(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    prior.normalized[k] = (raw[k] - mean) / sd;
  }
  prior.raw = std::move(raw);
  return prior;
}

void FilterRegistry::add(const std::string& name, FilterFn fn) {
  filters_[name] = std::move(fn);
}

bool FilterRegistry::contains(const std::string& name) const {
  return filters_.count(name) != 0;
}

const FilterFn& FilterRegistry::get(const std::string& name) const {
  const auto it = filters_.find(name);
  if (it == filters_.end()) throw UsageError("unknown filter method '" + name + "'");
  return it->second;
}

std::vector<std::string> FilterRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, fn] : filters_) out.push_back(name);
  return out;
}

const FilterRegistry& FilterRegistry::builtin() {
  static const FilterRegistry registry = [] {
    FilterRegistry r;
    r.add("sis", pearson_sis);
    r.add("kendall", kendall_tau);
    r.add("dcor", distance_corr);
    return r;
  }();
  return registry;
}

std::vector<FilterPrior> compute_priors(const DataMatrix& x,
                                        const TargetVector& y,
                                        std::span<const std::string> methods,
                                        const FilterRegistry& registry) {
  std::vector<FilterPrior> priors;
  for (const std::string& name : methods) {
    FilterScores scores = registry.get(name)(x, y);
    FilterPrior prior = normalize_prior(std::move(scores.raw), name);
    prior.flagged = std::move(scores.flagged);
    priors.push_back(std::move(prior));
  }
  return priors;
}

}  // namespace mafs
