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

#ifndef MAFS_METRICS_H_
#define MAFS_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mafs/data.h"
#include "mafs/matrix.h"

namespace mafs {

// Mann-Whitney AUROC with midranks for ties. `labels` are 0/1.
// Throws MetricError unless both classes are present.
double auroc(std::span<const double> scores, std::span<const double> labels);

// O(n^2) reference: fraction of positive/negative pairs ranked correctly,
// ties counted as one half.
double auroc_pairwise(std::span<const double> scores,
                      std::span<const double> labels);

// Sample Pearson correlation. Throws MetricError on constant input.
double pearson_r(std::span<const double> pred, std::span<const double> y);

// Euclidean k-nearest-neighbour predictions. Classification returns the
// positive-class vote fraction; regression returns the neighbour mean.
// Neighbour ties are broken by ascending training index.
std::vector<double> knn_predict(const Matrix& train_x,
                                std::span<const double> train_y,
                                const Matrix& test_x, std::size_t k,
                                Task task);

// AUROC (classification) or Pearson r (regression) of knn_predict.
double knn_evaluate(const Matrix& train_x, std::span<const double> train_y,
                    const Matrix& test_x, std::span<const double> test_y,
                    std::size_t k, Task task);

struct MlpEvalOptions {
  std::vector<std::size_t> hidden = {64, 32};
  double learning_rate = 1e-3;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

// Small fully connected evaluator trained on the selected columns.
double mlp_evaluate(const Matrix& train_x, std::span<const double> train_y,
                    const Matrix& test_x, std::span<const double> test_y,
                    Task task, const MlpEvalOptions& options = {});

}  // namespace mafs

#endif  // MAFS_METRICS_H_
