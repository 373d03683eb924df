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

#include "mafs/data.h"

#include <algorithm>
#include <cmath>

#include "mafs/errors.h"

namespace mafs {

std::string to_string(Task task) {
  return task == Task::kRegression ? "regression" : "classification";
}

Task parse_task(const std::string& name) {
  if (name == "regression") return Task::kRegression;
  if (name == "classification") return Task::kClassification;
  throw UsageError("unknown task '" + name +
                   "' (expected regression|classification)");
}

DataMatrix DataMatrix::continuous(Matrix values) {
  DataMatrix out;
  out.kinds.assign(values.cols(), FeatureKind::kContinuous);
  out.values = std::move(values);
  return out;
}

void DataMatrix::validate() const {
  if (kinds.size() != values.cols()) {
    throw DimensionError("DataMatrix: kind tags do not match column count");
  }
  if (!values.all_finite()) {
    throw NumericError("DataMatrix: non-finite entry (inputs must be complete)");
  }
  for (std::size_t c = 0; c < kinds.size(); ++c) {
    if (kinds[c] != FeatureKind::kCategorical) continue;
    for (std::size_t r = 0; r < values.rows(); ++r) {
      const double v = values(r, c);
      if (v != 0.0 && v != 1.0 && v != 2.0) {
        throw ArgumentError("DataMatrix: categorical column " +
                            std::to_string(c) + " holds a value outside {0,1,2}");
      }
    }
  }
}

TargetVector TargetVector::regression(std::vector<double> values) {
  TargetVector t;
  t.values = std::move(values);
  t.task = Task::kRegression;
  return t;
}

TargetVector TargetVector::classification(std::vector<double> labels) {
  TargetVector t;
  double top = 0.0;
  for (double v : labels) top = std::max(top, v);
  t.values = std::move(labels);
  t.task = Task::kClassification;
  t.n_classes = static_cast<std::size_t>(top) + 1;
  t.validate();
  return t;
}

void TargetVector::validate() const {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError("TargetVector: non-finite value");
  }
  if (task == Task::kRegression) return;
  if (n_classes < 2) {
    throw ArgumentError("TargetVector: classification needs at least 2 classes");
  }
  for (double v : values) {
    if (v < 0.0 || v != std::floor(v) ||
        v >= static_cast<double>(n_classes)) {
      throw ArgumentError("TargetVector: class label out of range");
    }
  }
}

TargetScaling standardize_target(TargetVector& y,
                                 std::span<const std::size_t> fit_rows) {
  TargetScaling scaling;
  if (y.task != Task::kRegression || fit_rows.empty()) return scaling;
  for (std::size_t i : fit_rows) scaling.mean += y.values[i];
  scaling.mean /= static_cast<double>(fit_rows.size());
  double ss = 0.0;
  for (std::size_t i : fit_rows) {
    ss += (y.values[i] - scaling.mean) * (y.values[i] - scaling.mean);
  }
  const double sd = std::sqrt(ss / static_cast<double>(fit_rows.size()));
  scaling.scale = sd > 0.0 ? sd : 1.0;
  for (double& v : y.values) v = (v - scaling.mean) / scaling.scale;
  return scaling;
}

}  // namespace mafs
