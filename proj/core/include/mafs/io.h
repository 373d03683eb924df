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

#ifndef MAFS_IO_H_
#define MAFS_IO_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mafs/attention.h"
#include "mafs/filters.h"
#include "mafs/matrix.h"
#include "mafs/pipeline.h"
#include "mafs/simgen.h"

namespace mafs {

inline constexpr const char kConfigSchema[] = "mafs-config/1";
inline constexpr const char kModelSchema[] = "mafs-model/1";
inline constexpr const char kPriorsSchema[] = "mafs-priors/1";
inline constexpr const char kTruthSchema[] = "mafs-truth/1";

// Whole-file helpers. write_file_atomic writes a sibling temp file and
// renames it over `path`.
std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& content);

// Shortest text that parses back to the same double.
std::string format_double(double v);
// C99 hex-float text ("%a").
std::string format_hex(double v);
// Parses decimal or hex-float text; throws UsageError naming `what`.
double parse_double(const std::string& text, const std::string& what);

// Feature matrix CSV: header f0,f1,..., one row per sample.
std::string features_to_csv(const Matrix& x);
Matrix features_from_csv(const std::string& text);

// Single-column target CSV with header y.
std::string target_to_csv(const std::vector<double>& y);
std::vector<double> target_from_csv(const std::string& text);

// {"schema", "sets": {"A": [...], ..., "F": [...]}, "pairs": [[g, h], ...]}
std::string truth_to_json(const CausalAssignment& truth);
CausalAssignment truth_from_json(const std::string& text);

struct RankingRecord {
  std::size_t rank = 0;
  std::size_t feature = 0;
  double score = 0.0;
  std::string method;
  std::vector<std::size_t> heads;
  std::uint64_t seed = 0;
  std::string config_digest;

  friend bool operator==(const RankingRecord&, const RankingRecord&) = default;
};

std::vector<RankingRecord> make_records(const MethodRanking& ranking,
                                        std::uint64_t seed,
                                        const std::string& config_digest);

// TSV with header `rank feature score method heads seed config_digest`.
// Empty head lists are written as "-".
std::string ranking_to_tsv(const std::vector<RankingRecord>& records);
// Validates ranks 1..l without gaps and non-increasing scores.
std::vector<RankingRecord> ranking_from_tsv(const std::string& text);

// Canonical JSON for a run configuration, including the schema key.
std::string config_to_json(const RunConfig& config);
// Keys absent from `text` keep their defaults. Unknown keys, wrong types,
// and schema mismatches throw UsageError naming the key.
RunConfig config_from_json(const std::string& text);
// 16 hex digits of FNV-1a 64 over the canonical JSON.
std::string config_digest(const RunConfig& config);
std::uint64_t fnv1a64(const std::string& bytes);

// Per-head alpha, tau, and prior identifiers with exact hex-float encoding.
struct HeadAudit {
  std::size_t index = 0;
  std::string prior_method;
  std::vector<double> alpha;
  std::vector<double> tau;
  std::size_t best_epoch = 0;

  friend bool operator==(const HeadAudit&, const HeadAudit&) = default;
};

std::string model_to_json(const MAFSModel& model, const RunConfig& config);
std::vector<HeadAudit> model_heads_from_json(const std::string& text);

std::string priors_to_json(const std::vector<FilterPrior>& priors);
std::vector<FilterPrior> priors_from_json(const std::string& text);

std::string coverage_to_json(const CoverageReport& report);

}  // namespace mafs

#endif  // MAFS_IO_H_
