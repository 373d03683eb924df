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

#ifndef MAFS_REORDER_H_
#define MAFS_REORDER_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mafs/attention.h"
#include "mafs/data.h"

namespace mafs {

// Union of the per-head top-K sets. `indices` is sorted ascending and
// `heads[i]` lists (ascending) the heads that nominated indices[i].
struct CandidateSet {
  std::vector<std::size_t> indices;
  std::vector<std::vector<std::size_t>> heads;
  std::size_t k = 0;

  std::size_t size() const { return indices.size(); }
};

CandidateSet build_candidate_set(const MAFSModel& model, std::size_t k);
// Same merge over precomputed per-head rankings (each of length K).
CandidateSet build_candidate_set(std::span<const std::vector<std::size_t>> rankings,
                                 std::size_t k);

struct TreeNode {
  static constexpr std::size_t kLeaf = static_cast<std::size_t>(-1);
  std::size_t feature = kLeaf;  // column of the restricted matrix
  double threshold = 0.0;       // x <= threshold goes left
  std::size_t left = 0;
  std::size_t right = 0;
  std::size_t n_samples = 0;
  double impurity = 0.0;
  // (n_node * impurity - n_left * impurity_left - n_right * impurity_right)
  // / n_root; zero for leaves.
  double weighted_decrease = 0.0;

  bool is_leaf() const { return feature == kLeaf; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct ForestOptions {
  std::size_t n_trees = 500;
  bool bootstrap = true;
  // Features tried per split; 0 selects ceil(sqrt(p)) for classification
  // and ceil(p/3) for regression.
  std::size_t max_features = 0;
  std::size_t min_samples_leaf = 1;
  std::size_t min_samples_split = 2;
  std::uint64_t seed = 0;
};

struct TreeEnsemble {
  Task task = Task::kRegression;
  std::size_t n_features = 0;
  std::vector<Tree> trees;
};

// Gini impurity (classification) or variance (regression) of labels.
double node_impurity(std::span<const double> y, Task task, std::size_t n_classes);

// Grows one unpruned CART tree on the rows listed in `samples` (repeats
// allowed, as in a bootstrap draw).
Tree fit_tree(const Matrix& x, const TargetVector& y,
              std::span<const std::size_t> samples, const ForestOptions& options,
              Rng& rng);

// Random forest on a restricted matrix. Tree t draws from the stream
// split(t) of the seed, so results are independent of parallelism. A
// single-class classification target throws DegenerateError.
TreeEnsemble fit_tree_ensemble(const Matrix& x, const TargetVector& y,
                               const ForestOptions& options);

// Per-feature sum of weighted impurity decreases in one tree.
std::vector<double> tree_importance(const Tree& tree, std::size_t n_features);

// Mean over trees of tree_importance.
std::vector<double> impurity_importance(const TreeEnsemble& ensemble);

struct RankedFeature {
  std::size_t feature = 0;
  double importance = 0.0;
  std::vector<std::size_t> heads;
};

struct RankedFeatures {
  std::vector<RankedFeature> items;
  std::size_t ell = 0;
};

// Orders the candidates by descending beta (beta[i] belongs to
// s.indices[i]), ties by ascending feature index, and keeps the first ell.
RankedFeatures final_rank(const CandidateSet& s, std::span<const double> beta,
                          std::size_t ell);

// Scores candidate columns from (X_S, y) alone.
class Reranker {
 public:
  virtual ~Reranker() = default;
  virtual std::vector<double> importance(const Matrix& x_s,
                                         const TargetVector& y) const = 0;
};

class ForestReranker : public Reranker {
 public:
  explicit ForestReranker(ForestOptions options) : options_(options) {}
  std::vector<double> importance(const Matrix& x_s,
                                 const TargetVector& y) const override;

 private:
  ForestOptions options_;
};

// Restricts x to s, scores it with `reranker`, and returns the top ell.
RankedFeatures rerank(const DataMatrix& x, const TargetVector& y,
                      const CandidateSet& s, std::size_t ell,
                      const Reranker& reranker);

}  // namespace mafs

#endif  // MAFS_REORDER_H_
