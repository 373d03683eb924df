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

#include "mafs/search.h"

#include <cmath>
#include <exception>

#include "mafs/errors.h"
#include "mafs/random.h"

namespace mafs {

void SearchSpace::validate() const {
  if (budget == 0) throw ArgumentError("search budget must be >= 1");
  if (reals.empty() && choices.empty()) {
    throw ArgumentError("search space has no parameters");
  }
  for (const auto& [name, r] : reals) {
    if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
      throw ArgumentError("search range '" + name + "' is empty");
    }
    if (r.scale == Scale::kLog && !(r.lo > 0.0)) {
      throw ArgumentError("log range '" + name + "' must be positive");
    }
  }
  for (const auto& [name, c] : choices) {
    if (c.empty()) throw ArgumentError("search choice '" + name + "' is empty");
  }
}

SearchSpace mafs_search_space() {
  SearchSpace s;
  s.reals["learning_rate"] = {1e-6, 1e-4, Scale::kLog};
  s.reals["weight_decay"] = {1e-6, 1e-4, Scale::kLog};
  s.reals["lambda"] = {1e-6, 1e-4, Scale::kLog};
  s.reals["gamma"] = {0.1, 0.5, Scale::kLinear};
  s.choices["batch_size"] = {32};
  return s;
}

SearchSpace cancelout_search_space() {
  SearchSpace s;
  s.reals["learning_rate"] = {1e-6, 1e-4, Scale::kLog};
  s.reals["weight_decay"] = {1e-6, 1e-4, Scale::kLog};
  s.reals["lambda1"] = {1e-5, 1e-1, Scale::kLog};
  s.reals["lambda2"] = {1e-5, 1e-1, Scale::kLog};
  s.choices["batch_size"] = {32};
  return s;
}

SearchSpace earfs_search_space() {
  SearchSpace s;
  s.reals["learning_rate"] = {1e-6, 1e-4, Scale::kLog};
  s.reals["weight_decay"] = {1e-6, 1e-4, Scale::kLog};
  s.reals["lambda"] = {1e-6, 1e-4, Scale::kLog};
  s.choices["batch_size"] = {32};
  return s;
}

std::vector<Params> sample_trials(const SearchSpace& space) {
  space.validate();
  Rng rng(space.seed);
  std::vector<Params> out(space.budget);
  for (Params& p : out) {
    for (const auto& [name, r] : space.reals) {
      const double u = rng.uniform();
      p[name] = r.scale == Scale::kLog
                    ? std::exp(std::log(r.lo) + u * (std::log(r.hi) - std::log(r.lo)))
                    : r.lo + u * (r.hi - r.lo);
    }
    for (const auto& [name, c] : space.choices) {
      p[name] = c[rng.uniform_index(c.size())];
    }
  }
  return out;
}

SearchResult random_search(const SearchSpace& space,
                           const std::function<double(const Params&)>& objective) {
  const std::vector<Params> draws = sample_trials(space);
  SearchResult result;
  bool found = false;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    Trial t;
    t.index = i;
    t.params = draws[i];
    try {
      t.score = objective(t.params);
      if (!std::isfinite(t.score)) {
        t.failed = true;
        t.error = "non-finite objective";
      }
    } catch (const std::exception& e) {
      t.failed = true;
      t.error = e.what();
    }
    if (!t.failed && (!found || t.score > result.best_score)) {
      found = true;
      result.best_index = i;
      result.best_score = t.score;
      result.best = t.params;
    }
    result.trials.push_back(std::move(t));
  }
  if (!found) throw SearchError("random search: all trials failed");
  return result;
}

}  // namespace mafs
