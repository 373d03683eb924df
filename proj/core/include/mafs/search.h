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

#ifndef MAFS_SEARCH_H_
#define MAFS_SEARCH_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace mafs {

enum class Scale { kLinear, kLog };

struct RealRange {
  double lo = 0.0;
  double hi = 0.0;
  Scale scale = Scale::kLinear;
};

// Ranges are sampled in name order so trial draws do not depend on insertion
// order.
struct SearchSpace {
  std::map<std::string, RealRange> reals;
  std::map<std::string, std::vector<double>> choices;
  std::size_t budget = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

using Params = std::map<std::string, double>;

// Hyperparameter ranges for each method, with the batch size fixed at 32.
SearchSpace mafs_search_space();
SearchSpace cancelout_search_space();
SearchSpace earfs_search_space();

struct Trial {
  std::size_t index = 0;
  Params params;
  double score = 0.0;
  bool failed = false;
  std::string error;
};

struct SearchResult {
  std::size_t best_index = 0;
  Params best;
  double best_score = 0.0;
  std::vector<Trial> trials;
};

// Draws every trial's parameters up front from `space.seed`.
std::vector<Params> sample_trials(const SearchSpace& space);

// Maximizes `objective` over `space.budget` sampled configurations. Exceptions
// and non-finite scores mark a trial failed; ties go to the earliest trial.
// Throws SearchError if every trial fails.
SearchResult random_search(const SearchSpace& space,
                           const std::function<double(const Params&)>& objective);

}  // namespace mafs

#endif  // MAFS_SEARCH_H_
