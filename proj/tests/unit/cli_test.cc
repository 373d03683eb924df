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

#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "mafs/io.h"
#include "mafs/simgen.h"
#include "process.h"

namespace mafs {
namespace {

namespace fs = std::filesystem;
using testing::run_command;
using testing::scratch_dir;
using testing::slurp;
using testing::spit;

const std::string kCli = MAFS_CLI_PATH;

const char kTinyConfig[] = R"({
  "schema": "mafs-config/1",
  "attention_hidden": [8, 8],
  "predictor_hidden": [8, 8],
  "max_epochs": 5,
  "n_trees": 20
})";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = scratch_dir(std::string("cli_") +
                       ::testing::UnitTest::GetInstance()->current_test_info()->name());
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void simulate() {
    const auto r = run_command(kCli + " simulate --n 500 --d 60 --seed 3 --out-dir " +
                               dir_.string());
    ASSERT_EQ(r.exit_code, 0) << r.output;
    spit(dir_ / "config.json", kTinyConfig);
  }

  std::string data_args() const {
    return " --x " + path("X.csv") + " --y " + path("y.csv");
  }

  fs::path dir_;
};

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run_command(kCli).exit_code, 2);
  EXPECT_EQ(run_command(kCli + " frobnicate").exit_code, 2);
  EXPECT_EQ(run_command(kCli + " simulate --n 500").exit_code, 2);
  EXPECT_EQ(run_command(kCli + " --help").exit_code, 0);
}

TEST_F(CliTest, MalformedConfigNamesKey) {
  simulate();
  spit(dir_ / "bad.json", R"({"schema": "mafs-config/1", "lamda": 0.1})");
  const auto r = run_command(kCli + " select" + data_args() + " --config " + path("bad.json") +
                             " --seed 1 --count 5");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("lamda"), std::string::npos) << r.output;
}

TEST_F(CliTest, RuntimeErrorsExitOne) {
  const auto r = run_command(kCli + " score --ranking " + path("missing.tsv") + " --truth " +
                             path("missing.json"));
  EXPECT_EQ(r.exit_code, 1) << r.output;
}

TEST_F(CliTest, SimulateWritesDataAndTruth) {
  simulate();
  const Matrix x = features_from_csv(slurp(dir_ / "X.csv"));
  EXPECT_EQ(x.rows(), 500u);
  EXPECT_EQ(x.cols(), 60u);
  EXPECT_EQ(target_from_csv(slurp(dir_ / "y.csv")).size(), 500u);
  EXPECT_EQ(truth_from_json(slurp(dir_ / "truth.json")).causal_count(), 40u);
}

TEST_F(CliTest, ScoreOfGroundTruthIsOne) {
  simulate();
  const CausalAssignment truth = truth_from_json(slurp(dir_ / "truth.json"));
  MethodRanking ranking;
  ranking.features = truth.all();
  ranking.scores.assign(ranking.features.size(), 1.0);
  ranking.heads.assign(ranking.features.size(), {});
  spit(dir_ / "perfect.tsv", ranking_to_tsv(make_records(ranking, 0, "0")));
  const auto r = run_command(kCli + " score --ranking " + path("perfect.tsv") + " --truth " +
                             path("truth.json"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("\"overall\": 1.0"), std::string::npos) << r.output;
}

TEST_F(CliTest, SelectIsByteIdenticalAcrossThreadCounts) {
  simulate();
  const std::string cmd = " " + kCli + " select" + data_args() + " --config " +
                          path("config.json") + " --seed 9 --ratio 10 --out ";
  ASSERT_EQ(run_command("MAFS_THREADS=1" + cmd + path("a.tsv")).exit_code, 0);
  ASSERT_EQ(run_command("MAFS_THREADS=4" + cmd + path("b.tsv")).exit_code, 0);
  const std::string a = slurp(dir_ / "a.tsv");
  EXPECT_EQ(a, slurp(dir_ / "b.tsv"));
  EXPECT_EQ(ranking_from_tsv(a).size(), 6u);
  EXPECT_EQ(ranking_from_tsv(a).front().method, "mafs");
}

TEST_F(CliTest, SelectWritesModelAudit) {
  simulate();
  const auto r = run_command(kCli + " select" + data_args() + " --config " +
                             path("config.json") + " --seed 2 --count 4 --out " +
                             path("r.tsv") + " --model-out " + path("model.json"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto heads = model_heads_from_json(slurp(dir_ / "model.json"));
  ASSERT_EQ(heads.size(), 3u);
  EXPECT_EQ(heads[0].alpha.size(), 60u);
}

TEST_F(CliTest, BaselineAndEvaluate) {
  simulate();
  const auto b = run_command(kCli + " baseline --method earfs_filter_init" + data_args() +
                             " --config " + path("config.json") +
                             " --seed 4 --count 8 --out " + path("e.tsv"));
  ASSERT_EQ(b.exit_code, 0) << b.output;
  EXPECT_EQ(ranking_from_tsv(slurp(dir_ / "e.tsv")).back().method, "earfs_filter_init");
  const auto e = run_command(kCli + " evaluate" + data_args() + " --ranking " + path("e.tsv") +
                             " --evaluator knn --k 5 --seed 1");
  ASSERT_EQ(e.exit_code, 0) << e.output;
  EXPECT_EQ(e.output.rfind("knn pearson_r ", 0), 0u) << e.output;
  EXPECT_EQ(run_command(kCli + " baseline --method graces" + data_args() + " --seed 1")
                .exit_code,
            2);
}

TEST_F(CliTest, FilterEmitsPriors) {
  simulate();
  const auto r = run_command(kCli + " filter" + data_args() + " --methods sis,kendall --out " +
                             path("priors.json"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto priors = priors_from_json(slurp(dir_ / "priors.json"));
  ASSERT_EQ(priors.size(), 2u);
  EXPECT_EQ(priors[1].method, "kendall");
  EXPECT_EQ(run_command(kCli + " filter" + data_args() + " --methods ballcor").exit_code, 2);
}

TEST_F(CliTest, TuneWritesLoadableConfig) {
  simulate();
  const auto r = run_command(kCli + " tune --method cancelout" + data_args() + " --config " +
                             path("config.json") + " --budget 2 --count 6 --seed 1 --out " +
                             path("best.json"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("best trial"), std::string::npos);
  EXPECT_NO_THROW(config_from_json(slurp(dir_ / "best.json")));
}

TEST_F(CliTest, BenchWritesRecordsAndSummary) {
  spit(dir_ / "config.json", kTinyConfig);
  const auto r = run_command(kCli + " bench --n 500 --d 60 --replications 2 --methods "
                             "mafs,cancelout --ratios 10,20 --seed 5 --config " +
                             path("config.json") + " --out-dir " + dir_.string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const std::string summary = slurp(dir_ / "summary.tsv");
  EXPECT_EQ(summary.rfind("method\tratio\treplications\tmean", 0), 0u);
  EXPECT_NE(summary.find("cancelout\t0.2\t2\t"), std::string::npos) << summary;
  const std::string records = slurp(dir_ / "records.tsv");
  EXPECT_EQ(std::count(records.begin(), records.end(), '\n'), 9);
}

}  // namespace
}  // namespace mafs
