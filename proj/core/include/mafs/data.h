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

#ifndef MAFS_DATA_H_
#define MAFS_DATA_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mafs/matrix.h"

namespace mafs {

enum class FeatureKind { kContinuous, kCategorical };

enum class Task { kRegression, kClassification };

std::string to_string(Task task);
// Accepts "regression" and "classification"; throws UsageError otherwise.
Task parse_task(const std::string& name);

// n x d feature matrix with per-column kind tags. Categorical columns hold
// genotype codes {0, 1, 2}.
struct DataMatrix {
  Matrix values;
  std::vector<FeatureKind> kinds;

  std::size_t n() const { return values.rows(); }
  std::size_t d() const { return values.cols(); }

  // All columns tagged continuous.
  static DataMatrix continuous(Matrix values);
  // Throws DimensionError if kinds.size() != cols, NumericError on
  // non-finite entries, ArgumentError on a categorical value outside
  // {0,1,2}.
  void validate() const;
};

struct TargetVector {
  std::vector<double> values;
  Task task = Task::kRegression;
  // Number of classes for classification; 0 for regression.
  std::size_t n_classes = 0;

  std::size_t size() const { return values.size(); }

  static TargetVector regression(std::vector<double> values);
  // Infers C = max label + 1. Labels must be integers >= 0.
  static TargetVector classification(std::vector<double> labels);
  // Throws ArgumentError unless classification labels are integers in
  // [0, C) with C >= 2.
  void validate() const;
};

// Affine target scaling used during training.
struct TargetScaling {
  double mean = 0.0;
  double scale = 1.0;
};

// Z-scores a regression target in place using the mean and population sd
// of the rows in `fit_rows`. Classification targets are left untouched.
TargetScaling standardize_target(TargetVector& y, std::span<const std::size_t> fit_rows);

}  // namespace mafs

#endif  // MAFS_DATA_H_
