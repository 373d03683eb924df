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

#include <benchmark/benchmark.h>

#include "mafs/filters.h"
#include "mafs/random.h"

namespace {

std::vector<double> normals(std::size_t n, mafs::Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

void BM_KendallTauB(benchmark::State& state) {
  mafs::Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::vector<double> x = normals(n, rng), y = normals(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(mafs::kendall_tau_b(x, y));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KendallTauB)->RangeMultiplier(4)->Range(128, 8192)->Complexity();

void BM_DistanceCorrelation(benchmark::State& state) {
  mafs::Rng rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::vector<double> x = normals(n, rng), y = normals(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(mafs::distance_correlation(x, y));
}
BENCHMARK(BM_DistanceCorrelation)->Arg(250)->Arg(500)->Arg(1000);

void BM_ComputePriors(benchmark::State& state) {
  mafs::Rng rng(3);
  const std::size_t n = 500;
  const auto d = static_cast<std::size_t>(state.range(0));
  mafs::Matrix m(n, d);
  for (double& v : m.values()) v = rng.normal();
  const mafs::DataMatrix x = mafs::DataMatrix::continuous(std::move(m));
  const mafs::TargetVector y = mafs::TargetVector::regression(normals(n, rng));
  for (auto _ : state) benchmark::DoNotOptimize(mafs::compute_priors(x, y));
}
BENCHMARK(BM_ComputePriors)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
