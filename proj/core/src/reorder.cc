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

#include "mafs/reorder.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "mafs/errors.h"
#include "mafs/parallel.h"

namespace mafs {

CandidateSet build_candidate_set(std::span<const std::vector<std::size_t>> rankings,
                                 std::size_t k) {
  std::map<std::size_t, std::vector<std::size_t>> nominated;
  for (std::size_t h = 0; h < rankings.size(); ++h) {
    for (std::size_t feature : rankings[h]) {
      auto& heads = nominated[feature];
      if (heads.empty() || heads.back() != h) heads.push_back(h);
    }
  }
  CandidateSet s;
  s.k = k;
  for (auto& [feature, heads] : nominated) {
    s.indices.push_back(feature);
    s.heads.push_back(std::move(heads));
  }
  return s;
}

CandidateSet build_candidate_set(const MAFSModel& model, std::size_t k) {
  std::vector<std::vector<std::size_t>> rankings;
  for (const HeadState& head : model.heads) {
    rankings.push_back(head_ranking(head.alpha, k));
  }
  return build_candidate_set(rankings, k);
}

double node_impurity(std::span<const double> y, Task task, std::size_t n_classes) {
  if (y.empty()) return 0.0;
  const double n = static_cast<double>(y.size());
  if (task == Task::kClassification) {
    std::vector<double> counts(n_classes, 0.0);
    for (double v : y) counts[static_cast<std::size_t>(v)] += 1.0;
    double sum_sq = 0.0;
    for (double c : counts) sum_sq += (c / n) * (c / n);
    return 1.0 - sum_sq;
  }
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  return ss / n;
}

namespace {

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = 0.0;  // larger is better; comparable within a node only
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const TargetVector& y, const ForestOptions& options,
              Rng& rng)
      : x_(x), y_(y), options_(options), rng_(rng) {
    const std::size_t p = x.cols();
    if (options.max_features != 0) {
      mtry_ = std::min(options.max_features, p);
    } else if (y.task == Task::kClassification) {
      mtry_ = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p))));
    } else {
      mtry_ = static_cast<std::size_t>(std::ceil(static_cast<double>(p) / 3.0));
    }
    mtry_ = std::clamp<std::size_t>(mtry_, 1, p);
  }

  Tree build(std::vector<std::size_t> samples) {
    samples_ = std::move(samples);
    n_root_ = static_cast<double>(samples_.size());
    Tree tree;
    struct Pending {
      std::size_t node, begin, end;
    };
    tree.nodes.push_back(make_node(0, samples_.size()));
    std::vector<Pending> stack{{0, 0, samples_.size()}};
    while (!stack.empty()) {
      const Pending job = stack.back();
      stack.pop_back();
      const std::size_t m = job.end - job.begin;
      if (m < options_.min_samples_split || m < 2 * options_.min_samples_leaf ||
          tree.nodes[job.node].impurity <= 1e-15) {
        continue;
      }
      const SplitChoice choice = best_split(job.begin, job.end);
      if (!choice.found) continue;
      const auto mid_it = std::partition(
          samples_.begin() + static_cast<std::ptrdiff_t>(job.begin),
          samples_.begin() + static_cast<std::ptrdiff_t>(job.end),
          [&](std::size_t s) { return x_(s, choice.feature) <= choice.threshold; });
      const auto mid = static_cast<std::size_t>(mid_it - samples_.begin());
      // Order inside each child does not matter for growth, but a stable
      // layout keeps trees reproducible.
      std::sort(samples_.begin() + static_cast<std::ptrdiff_t>(job.begin), mid_it);
      std::sort(mid_it, samples_.begin() + static_cast<std::ptrdiff_t>(job.end));

      const std::size_t left = tree.nodes.size();
      tree.nodes.push_back(make_node(job.begin, mid));
      const std::size_t right = tree.nodes.size();
      tree.nodes.push_back(make_node(mid, job.end));
      TreeNode& node = tree.nodes[job.node];
      node.feature = choice.feature;
      node.threshold = choice.threshold;
      node.left = left;
      node.right = right;
      const TreeNode& l = tree.nodes[left];
      const TreeNode& r = tree.nodes[right];
      const double decrease =
          (static_cast<double>(node.n_samples) * node.impurity -
           static_cast<double>(l.n_samples) * l.impurity -
           static_cast<double>(r.n_samples) * r.impurity) /
          n_root_;
      node.weighted_decrease = std::max(0.0, decrease);
      stack.push_back({right, mid, job.end});
      stack.push_back({left, job.begin, mid});
    }
    return tree;
  }

 private:
  TreeNode make_node(std::size_t begin, std::size_t end) {
    TreeNode node;
    node.n_samples = end - begin;
    labels_.clear();
    for (std::size_t i = begin; i < end; ++i) labels_.push_back(y_.values[samples_[i]]);
    node.impurity = node_impurity(labels_, y_.task, y_.n_classes);
    return node;
  }

  SplitChoice best_split(std::size_t begin, std::size_t end) {
    // Walk a random feature order until mtry features that vary inside the
    // node have been drawn, then evaluate them in ascending index order so
    // that ties resolve to the lowest feature index.
    std::vector<std::size_t> order(x_.cols());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng_.shuffle(order);
    std::vector<std::size_t> chosen;
    for (std::size_t f : order) {
      if (chosen.size() == mtry_) break;
      double lo = x_(samples_[begin], f), hi = lo;
      for (std::size_t i = begin + 1; i < end; ++i) {
        const double v = x_(samples_[i], f);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi > lo) chosen.push_back(f);
    }
    std::sort(chosen.begin(), chosen.end());
    SplitChoice best;
    for (std::size_t f : chosen) evaluate_feature(f, begin, end, best);
    return best;
  }

  void evaluate_feature(std::size_t f, std::size_t begin, std::size_t end,
                        SplitChoice& best) {
    const std::size_t m = end - begin;
    pairs_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t s = samples_[begin + i];
      pairs_[i] = {x_(s, f), y_.values[s]};
    }
    std::sort(pairs_.begin(), pairs_.end());
    const std::size_t min_leaf = std::max<std::size_t>(1, options_.min_samples_leaf);
    const double md = static_cast<double>(m);

    if (y_.task == Task::kClassification) {
      std::vector<double> total(y_.n_classes, 0.0), left(y_.n_classes, 0.0);
      for (const auto& [xv, yv] : pairs_) total[static_cast<std::size_t>(yv)] += 1.0;
      for (std::size_t i = 1; i < m; ++i) {
        left[static_cast<std::size_t>(pairs_[i - 1].second)] += 1.0;
        if (!(pairs_[i - 1].first < pairs_[i].first)) continue;
        if (i < min_leaf || m - i < min_leaf) continue;
        // Maximizing sum_k nl_k^2/nl + sum_k nr_k^2/nr is equivalent to
        // minimizing the size-weighted child Gini.
        const double nl = static_cast<double>(i), nr = md - nl;
        double sl = 0.0, sr = 0.0;
        for (std::size_t c = 0; c < total.size(); ++c) {
          sl += left[c] * left[c];
          const double rc = total[c] - left[c];
          sr += rc * rc;
        }
        consider(f, i, sl / nl + sr / nr, best);
      }
    } else {
      double total = 0.0;
      for (const auto& [xv, yv] : pairs_) total += yv;
      double left = 0.0;
      for (std::size_t i = 1; i < m; ++i) {
        left += pairs_[i - 1].second;
        if (!(pairs_[i - 1].first < pairs_[i].first)) continue;
        if (i < min_leaf || m - i < min_leaf) continue;
        const double nl = static_cast<double>(i), nr = md - nl;
        const double right = total - left;
        consider(f, i, left * left / nl + right * right / nr, best);
      }
    }
  }

  void consider(std::size_t f, std::size_t i, double score, SplitChoice& best) {
    if (best.found && !(score > best.score + 1e-12 * (1.0 + std::abs(best.score)))) {
      return;
    }
    const double lo = pairs_[i - 1].first, hi = pairs_[i].first;
    double threshold = lo + (hi - lo) / 2.0;
    if (!(threshold < hi)) threshold = lo;
    best = {true, f, threshold, score};
  }

  const Matrix& x_;
  const TargetVector& y_;
  const ForestOptions& options_;
  Rng& rng_;
  std::size_t mtry_ = 1;
  double n_root_ = 1.0;
  std::vector<std::size_t> samples_;
  std::vector<double> labels_;
  std::vector<std::pair<double, double>> pairs_;
};

void check_forest_inputs(const Matrix& x, const TargetVector& y) {
  if (x.rows() != y.size()) throw DimensionError("fit_tree_ensemble: X/y row mismatch");
  if (x.cols() == 0) throw ArgumentError("fit_tree_ensemble: candidate set is empty");
  if (x.rows() < 4) throw ArgumentError("fit_tree_ensemble: needs at least 4 samples");
  if (y.task == Task::kClassification) {
    const double first = y.values.front();
    if (std::all_of(y.values.begin(), y.values.end(),
                    [&](double v) { return v == first; })) {
      throw DegenerateError("fit_tree_ensemble: classification target has a single class");
    }
  }
}

}  // namespace

Tree fit_tree(const Matrix& x, const TargetVector& y,
              std::span<const std::size_t> samples, const ForestOptions& options,
              Rng& rng) {
  TreeBuilder builder(x, y, options, rng);
  return builder.build(std::vector<std::size_t>(samples.begin(), samples.end()));
}

TreeEnsemble fit_tree_ensemble(const Matrix& x, const TargetVector& y,
                               const ForestOptions& options) {
  check_forest_inputs(x, y);
  if (options.n_trees == 0) throw ArgumentError("fit_tree_ensemble: n_trees must be >= 1");
  TreeEnsemble ensemble;
  ensemble.task = y.task;
  ensemble.n_features = x.cols();
  ensemble.trees.resize(options.n_trees);
  const Rng root(options.seed);
  const std::size_t n = x.rows();
  parallel_for(options.n_trees, [&](std::size_t t) {
    Rng rng = root.split(t);
    std::vector<std::size_t> samples(n);
    if (options.bootstrap) {
      for (std::size_t& s : samples) s = rng.uniform_index(n);
      std::sort(samples.begin(), samples.end());
    } else {
      std::iota(samples.begin(), samples.end(), std::size_t{0});
    }
    ensemble.trees[t] = fit_tree(x, y, samples, options, rng);
  });
  return ensemble;
}

std::vector<double> tree_importance(const Tree& tree, std::size_t n_features) {
  std::vector<double> out(n_features, 0.0);
  for (const TreeNode& node : tree.nodes) {
    if (!node.is_leaf()) out[node.feature] += node.weighted_decrease;
  }
  return out;
}

std::vector<double> impurity_importance(const TreeEnsemble& ensemble) {
  std::vector<double> beta(ensemble.n_features, 0.0);
  for (const Tree& tree : ensemble.trees) {
    const std::vector<double> t = tree_importance(tree, ensemble.n_features);
    for (std::size_t j = 0; j < beta.size(); ++j) beta[j] += t[j];
  }
  if (!ensemble.trees.empty()) {
    for (double& b : beta) b /= static_cast<double>(ensemble.trees.size());
  }
  return beta;
}

RankedFeatures final_rank(const CandidateSet& s, std::span<const double> beta,
                          std::size_t ell) {
  if (ell == 0) throw ArgumentError("final_rank: ell must be >= 1");
  if (beta.size() != s.indices.size()) {
    throw DimensionError("final_rank: beta must cover the candidate set");
  }
  std::vector<std::size_t> order(s.indices.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return beta[a] > beta[b] || (beta[a] == beta[b] && s.indices[a] < s.indices[b]);
  });
  RankedFeatures out;
  out.ell = ell;
  for (std::size_t i = 0; i < std::min(ell, order.size()); ++i) {
    const std::size_t j = order[i];
    out.items.push_back({s.indices[j], beta[j],
                         j < s.heads.size() ? s.heads[j] : std::vector<std::size_t>{}});
  }
  return out;
}

std::vector<double> ForestReranker::importance(const Matrix& x_s,
                                               const TargetVector& y) const {
  return impurity_importance(fit_tree_ensemble(x_s, y, options_));
}

RankedFeatures rerank(const DataMatrix& x, const TargetVector& y,
                      const CandidateSet& s, std::size_t ell,
                      const Reranker& reranker) {
  const Matrix x_s = x.values.select_cols(s.indices);
  const std::vector<double> beta = reranker.importance(x_s, y);
  return final_rank(s, beta, ell);
}

}  // namespace mafs
