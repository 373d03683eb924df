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

// Command-line front end: simulate, filter, select, baseline, score,
// evaluate, tune, bench.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mafs/attention.h"
#include "mafs/errors.h"
#include "mafs/filters.h"
#include "mafs/io.h"
#include "mafs/metrics.h"
#include "mafs/pipeline.h"
#include "mafs/random.h"
#include "mafs/reorder.h"
#include "mafs/search.h"
#include "mafs/simgen.h"

namespace {

using namespace mafs;

struct DataArgs {
  std::string x_path;
  std::string y_path;
  std::string task = "regression";
};

void add_data_options(CLI::App* cmd, DataArgs& args) {
  cmd->add_option("--x", args.x_path, "Feature matrix CSV (header f0,f1,...)")->required();
  cmd->add_option("--y", args.y_path, "Target CSV (header y)")->required();
  cmd->add_option("--task", args.task, "regression or classification")
      ->check(CLI::IsMember({"regression", "classification"}));
}

DataMatrix load_x(const DataArgs& args) {
  DataMatrix x = DataMatrix::continuous(features_from_csv(read_file(args.x_path)));
  x.validate();
  return x;
}

TargetVector load_y(const DataArgs& args) {
  std::vector<double> v = target_from_csv(read_file(args.y_path));
  TargetVector y = parse_task(args.task) == Task::kRegression
                       ? TargetVector::regression(std::move(v))
                       : TargetVector::classification(std::move(v));
  y.validate();
  return y;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    write_file_atomic(path, content);
  }
}

struct SelectionArgs {
  std::optional<double> ratio_percent;
  std::optional<std::size_t> count;
};

void add_selection_options(CLI::App* cmd, SelectionArgs& args) {
  auto* ratio = cmd->add_option("--ratio", args.ratio_percent,
                                "Selection ratio in percent of d (e.g. 2)");
  auto* count = cmd->add_option("--count", args.count, "Fixed number of features");
  ratio->excludes(count);
}

void apply_selection(const SelectionArgs& args, RunConfig& config) {
  if (args.ratio_percent) config.rule = SelectionRule::from_ratio(*args.ratio_percent / 100.0);
  if (args.count) config.rule = SelectionRule::from_count(*args.count);
  config.rule.validate();
}

RunConfig load_config(const std::string& path) {
  return path.empty() ? RunConfig{} : config_from_json(read_file(path));
}

int run_simulate(std::size_t n, std::size_t d, const std::string& features,
                 const std::string& outcome, std::uint64_t seed,
                 const std::string& out_dir) {
  SimulationSpec spec = SimulationSpec::with_defaults(
      n, d, parse_feature_type(features), parse_outcome_type(outcome), seed);
  const SimulatedData data = simulate(spec);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  write_file_atomic((dir / "X.csv").string(), features_to_csv(data.x.values));
  write_file_atomic((dir / "y.csv").string(), target_to_csv(data.y.values));
  write_file_atomic((dir / "truth.json").string(), truth_to_json(data.truth));
  std::cout << "wrote " << n << " x " << d << " data and " << data.truth.causal_count()
            << " causal features to " << out_dir << "\n";
  return 0;
}

int run_select(const DataArgs& data_args, const std::string& config_path,
               const SelectionArgs& sel, const std::optional<std::string>& method,
               std::uint64_t seed, const std::string& out, const std::string& model_out) {
  RunConfig config = load_config(config_path);
  if (method) config.method = parse_method(*method);
  config.seed = seed;
  apply_selection(sel, config);
  config.validate();
  const DataMatrix x = load_x(data_args);
  const TargetVector y = load_y(data_args);
  if (x.n() != y.size()) throw UsageError("X and y have different row counts");
  const std::size_t ell = config.rule.resolve(x.d());
  const std::string digest = config_digest(config);

  MAFSModel model;
  const bool want_model = config.method == Method::kMafs && !model_out.empty();
  const MethodRanking ranking =
      run_method(x, y, config, ell, seed, want_model ? &model : nullptr);
  if (want_model) write_file_atomic(model_out, model_to_json(model, config));
  emit(out, ranking_to_tsv(make_records(ranking, seed, digest)));
  return 0;
}

int run_filter(const DataArgs& data_args, const std::vector<std::string>& methods,
               const std::string& out) {
  const DataMatrix x = load_x(data_args);
  const TargetVector y = load_y(data_args);
  for (const std::string& m : methods) {
    if (!FilterRegistry::builtin().contains(m)) {
      throw UsageError("unknown filter '" + m + "'");
    }
  }
  emit(out, priors_to_json(compute_priors(x, y, methods)));
  return 0;
}

int run_score(const std::string& ranking_path, const std::string& truth_path,
              std::optional<std::size_t> top, const std::string& out) {
  const std::vector<RankingRecord> records = ranking_from_tsv(read_file(ranking_path));
  const CausalAssignment truth = truth_from_json(read_file(truth_path));
  std::size_t take = records.size();
  if (top) {
    if (*top > records.size()) throw UsageError("--top exceeds the ranking length");
    take = *top;
  }
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < take; ++i) selected.push_back(records[i].feature);
  emit(out, coverage_to_json(coverage(selected, truth)));
  return 0;
}

// Holdout evaluation of the top features: returns AUROC or Pearson r.
double holdout_score(const DataMatrix& x, const TargetVector& y,
                     const std::vector<std::size_t>& features, const std::string& evaluator,
                     std::size_t k, double test_fraction, std::uint64_t seed) {
  Rng rng = Rng(seed).split(7);
  const auto [train, test] = split_indices(y, test_fraction, rng);
  const Matrix cols = x.values.select_cols(features);
  const Matrix xtr = cols.select_rows(train);
  const Matrix xte = cols.select_rows(test);
  std::vector<double> ytr, yte;
  for (std::size_t i : train) ytr.push_back(y.values[i]);
  for (std::size_t i : test) yte.push_back(y.values[i]);
  if (evaluator == "knn") return knn_evaluate(xtr, ytr, xte, yte, k, y.task);
  MlpEvalOptions options;
  options.seed = seed;
  return mlp_evaluate(xtr, ytr, xte, yte, y.task, options);
}

int run_evaluate(const DataArgs& data_args, const std::string& ranking_path,
                 std::optional<std::size_t> top, const std::string& evaluator,
                 std::size_t k, double test_fraction, std::uint64_t seed) {
  const DataMatrix x = load_x(data_args);
  const TargetVector y = load_y(data_args);
  const std::vector<RankingRecord> records = ranking_from_tsv(read_file(ranking_path));
  std::size_t take = top ? *top : records.size();
  if (take == 0 || take > records.size()) throw UsageError("--top out of range");
  std::vector<std::size_t> features;
  for (std::size_t i = 0; i < take; ++i) {
    if (records[i].feature >= x.d()) throw UsageError("ranking feature index exceeds d");
    features.push_back(records[i].feature);
  }
  const double score = holdout_score(x, y, features, evaluator, k, test_fraction, seed);
  std::printf("%s %s %.6f\n", evaluator.c_str(),
              y.task == Task::kClassification ? "auroc" : "pearson_r", score);
  return 0;
}

void apply_params(const Params& p, RunConfig& c) {
  for (const auto& [name, v] : p) {
    if (name == "learning_rate") {
      c.mafs.learning_rate = c.baseline.learning_rate = v;
    } else if (name == "weight_decay") {
      c.mafs.weight_decay = c.baseline.weight_decay = v;
    } else if (name == "batch_size") {
      c.mafs.batch_size = c.baseline.batch_size = static_cast<std::size_t>(v);
    } else if (name == "gamma") {
      c.mafs.gamma = v;
    } else if (name == "lambda") {
      if (c.method == Method::kMafs) {
        c.mafs.lambda = v;
      } else {
        c.baseline.lambda = v;
      }
    } else if (name == "lambda1") {
      c.baseline.lambda1 = v;
    } else if (name == "lambda2") {
      c.baseline.lambda2 = v;
    }
  }
}

int run_tune(const DataArgs& data_args, const std::string& config_path,
             const std::string& method, const SelectionArgs& sel, std::size_t budget,
             std::uint64_t seed, const std::string& out) {
  RunConfig base = load_config(config_path);
  base.method = parse_method(method);
  base.seed = seed;
  apply_selection(sel, base);
  const DataMatrix x = load_x(data_args);
  const TargetVector y = load_y(data_args);
  const std::size_t ell = base.rule.resolve(x.d());

  Rng split_rng = Rng(seed).split(9);
  const auto [fit, hold] = split_indices(y, 0.2, split_rng);
  DataMatrix x_fit{x.values.select_rows(fit), x.kinds};
  std::vector<double> yv;
  for (std::size_t i : fit) yv.push_back(y.values[i]);
  TargetVector y_fit = y.task == Task::kRegression ? TargetVector::regression(yv)
                                                   : TargetVector::classification(yv);

  SearchSpace space = base.method == Method::kMafs       ? mafs_search_space()
                      : base.method == Method::kCancelOut ? cancelout_search_space()
                                                          : earfs_search_space();
  space.budget = budget;
  space.seed = seed;
  const auto objective = [&](const Params& p) {
    RunConfig c = base;
    apply_params(p, c);
    const MethodRanking r = run_method(x_fit, y_fit, c, ell, seed);
    const Matrix cols = x.values.select_cols(r.features);
    std::vector<double> ytr, yte;
    for (std::size_t i : fit) ytr.push_back(y.values[i]);
    for (std::size_t i : hold) yte.push_back(y.values[i]);
    return knn_evaluate(cols.select_rows(fit), ytr, cols.select_rows(hold), yte, 5,
                        y.task);
  };
  const SearchResult result = random_search(space, objective);
  std::ostringstream log;
  log << "trial\tstatus\tscore";
  for (const auto& [name, v] : result.trials.front().params) log << '\t' << name;
  log << '\n';
  for (const Trial& t : result.trials) {
    log << t.index << '\t' << (t.failed ? "failed" : "ok") << '\t'
        << format_double(t.failed ? 0.0 : t.score);
    for (const auto& [name, v] : t.params) log << '\t' << format_double(v);
    log << '\n';
  }
  RunConfig best = base;
  apply_params(result.best, best);
  std::cerr << log.str();
  std::cerr << "best trial " << result.best_index << " score "
            << format_double(result.best_score) << "\n";
  emit(out, config_to_json(best));
  return 0;
}

int run_bench_cmd(std::size_t n, std::size_t d, const std::string& features,
                  const std::string& outcome, std::size_t replications,
                  const std::vector<std::string>& methods,
                  const std::vector<double>& ratios_percent, const std::string& config_path,
                  std::uint64_t seed, const std::string& out_dir) {
  BenchOptions options;
  options.simulation = SimulationSpec::with_defaults(
      n, d, parse_feature_type(features), parse_outcome_type(outcome), seed);
  options.replications = replications;
  options.seed = seed;
  options.config = load_config(config_path);
  options.methods.clear();
  for (const std::string& m : methods) options.methods.push_back(parse_method(m));
  options.ratios.clear();
  for (double r : ratios_percent) options.ratios.push_back(r / 100.0);
  const std::vector<BenchRecord> records = run_bench(options);

  std::ostringstream rec;
  rec << "replication\tseed\tmethod\tratio\tselected\tcoverage";
  for (Form f : kAllForms) rec << '\t' << to_string(f);
  rec << "\tseconds\n";
  for (const BenchRecord& r : records) {
    rec << r.replication << '\t' << r.seed << '\t' << to_string(r.method) << '\t'
        << format_double(r.ratio) << '\t' << r.selected << '\t'
        << format_double(r.coverage.overall);
    for (double v : r.coverage.per_form) rec << '\t' << format_double(v);
    rec << '\t' << format_double(r.seconds) << '\n';
  }
  std::ostringstream sum;
  sum << "method\tratio\treplications\tmean\tsd\tci_low\tci_high\n";
  for (const BenchSummary& s : summarize(records)) {
    sum << to_string(s.method) << '\t' << format_double(s.ratio) << '\t' << s.replications
        << '\t' << format_double(s.mean) << '\t' << format_double(s.sd) << '\t'
        << format_double(s.mean - s.ci_half_width) << '\t'
        << format_double(s.mean + s.ci_half_width) << '\n';
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    write_file_atomic((dir / "records.tsv").string(), rec.str());
    write_file_atomic((dir / "summary.tsv").string(), sum.str());
  }
  std::cout << sum.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mafs: multi-head attention feature selection"};
  app.require_subcommand(1);

  // simulate
  std::size_t sim_n = 500, sim_d = 2000;
  std::string sim_features = "continuous", sim_outcome = "continuous", sim_out = ".";
  std::uint64_t sim_seed = 0;
  auto* simulate_cmd = app.add_subcommand("simulate", "Write simulated X.csv, y.csv, truth.json");
  simulate_cmd->add_option("--n", sim_n, "Samples (500 or 2000)");
  simulate_cmd->add_option("--d", sim_d, "Features");
  simulate_cmd->add_option("--features", sim_features, "continuous, categorical, or combined");
  simulate_cmd->add_option("--outcome", sim_outcome, "continuous or binary");
  simulate_cmd->add_option("--seed", sim_seed, "Random seed")->required();
  simulate_cmd->add_option("--out-dir", sim_out, "Output directory");

  // filter
  DataArgs filter_data;
  std::vector<std::string> filter_methods = default_filter_methods();
  std::string filter_out;
  auto* filter_cmd = app.add_subcommand("filter", "Compute normalized filter priors (JSON)");
  add_data_options(filter_cmd, filter_data);
  filter_cmd->add_option("--methods", filter_methods, "Filters (sis, kendall, dcor)")
      ->delimiter(',');
  filter_cmd->add_option("--out", filter_out, "Output path (default stdout)");

  // select
  DataArgs select_data;
  std::string select_config, select_out, select_model;
  SelectionArgs select_sel;
  std::uint64_t select_seed = 0;
  auto* select_cmd = app.add_subcommand("select", "Run the MAFS pipeline and write a ranking");
  add_data_options(select_cmd, select_data);
  select_cmd->add_option("--config", select_config, "Config JSON");
  add_selection_options(select_cmd, select_sel);
  select_cmd->add_option("--seed", select_seed, "Random seed")->required();
  select_cmd->add_option("--out", select_out, "Ranking TSV path (default stdout)");
  select_cmd->add_option("--model-out", select_model, "Also write the model audit JSON");

  // baseline
  DataArgs base_data;
  std::string base_config, base_out, base_method;
  SelectionArgs base_sel;
  std::uint64_t base_seed = 0;
  auto* baseline_cmd = app.add_subcommand("baseline", "Train a gating baseline and write a ranking");
  add_data_options(baseline_cmd, base_data);
  baseline_cmd->add_option("--method", base_method, "cancelout, earfs, or earfs_filter_init")
      ->required()
      ->check(CLI::IsMember({"cancelout", "earfs", "earfs_filter_init"}));
  baseline_cmd->add_option("--config", base_config, "Config JSON");
  add_selection_options(baseline_cmd, base_sel);
  baseline_cmd->add_option("--seed", base_seed, "Random seed")->required();
  baseline_cmd->add_option("--out", base_out, "Ranking TSV path (default stdout)");

  // score
  std::string score_ranking, score_truth, score_out;
  std::optional<std::size_t> score_top;
  auto* score_cmd = app.add_subcommand("score", "Coverage of a ranking against ground truth");
  score_cmd->add_option("--ranking", score_ranking, "Ranking TSV")->required();
  score_cmd->add_option("--truth", score_truth, "Ground truth JSON")->required();
  score_cmd->add_option("--top", score_top, "Use only the first N ranked features");
  score_cmd->add_option("--out", score_out, "Report path (default stdout)");

  // evaluate
  DataArgs eval_data;
  std::string eval_ranking, eval_evaluator = "knn";
  std::optional<std::size_t> eval_top;
  std::size_t eval_k = 5;
  double eval_test = 0.2;
  std::uint64_t eval_seed = 0;
  auto* evaluate_cmd = app.add_subcommand(
      "evaluate",
      "Holdout AUROC (classification) or Pearson r (regression) of the selected "
      "features with KNN or a small MLP. SVM is not provided.");
  add_data_options(evaluate_cmd, eval_data);
  evaluate_cmd->add_option("--ranking", eval_ranking, "Ranking TSV")->required();
  evaluate_cmd->add_option("--top", eval_top, "Use only the first N ranked features");
  evaluate_cmd->add_option("--evaluator", eval_evaluator, "knn or mlp")
      ->check(CLI::IsMember({"knn", "mlp"}));
  evaluate_cmd->add_option("--k", eval_k, "Neighbours for knn");
  evaluate_cmd->add_option("--test-fraction", eval_test, "Holdout fraction");
  evaluate_cmd->add_option("--seed", eval_seed, "Random seed");

  // tune
  DataArgs tune_data;
  std::string tune_config, tune_method = "mafs", tune_out;
  SelectionArgs tune_sel;
  std::size_t tune_budget = 10;
  std::uint64_t tune_seed = 0;
  auto* tune_cmd = app.add_subcommand("tune", "Random hyperparameter search; writes best config");
  add_data_options(tune_cmd, tune_data);
  tune_cmd->add_option("--method", tune_method, "Method to tune");
  tune_cmd->add_option("--config", tune_config, "Base config JSON");
  add_selection_options(tune_cmd, tune_sel);
  tune_cmd->add_option("--budget", tune_budget, "Number of trials");
  tune_cmd->add_option("--seed", tune_seed, "Random seed");
  tune_cmd->add_option("--out", tune_out, "Best config path (default stdout)");

  // bench
  std::size_t bench_n = 500, bench_d = 2000, bench_reps = 5;
  std::string bench_features = "continuous", bench_outcome = "continuous", bench_config,
              bench_out;
  std::vector<std::string> bench_methods = {"mafs", "cancelout", "earfs", "earfs_filter_init"};
  std::vector<double> bench_ratios = {0.5, 1.0, 1.5, 2.0};
  std::uint64_t bench_seed = 0;
  auto* bench_cmd = app.add_subcommand("bench", "Replicated simulation study with summary table");
  bench_cmd->add_option("--n", bench_n, "Samples");
  bench_cmd->add_option("--d", bench_d, "Features");
  bench_cmd->add_option("--features", bench_features, "continuous, categorical, or combined");
  bench_cmd->add_option("--outcome", bench_outcome, "continuous or binary");
  bench_cmd->add_option("--replications", bench_reps, "Replications");
  bench_cmd->add_option("--methods", bench_methods, "Methods")->delimiter(',');
  bench_cmd->add_option("--ratios", bench_ratios, "Selection ratios in percent")->delimiter(',');
  bench_cmd->add_option("--config", bench_config, "Config JSON");
  bench_cmd->add_option("--seed", bench_seed, "Random seed")->required();
  bench_cmd->add_option("--out-dir", bench_out, "Write records.tsv and summary.tsv here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*simulate_cmd) {
      return run_simulate(sim_n, sim_d, sim_features, sim_outcome, sim_seed, sim_out);
    }
    if (*filter_cmd) return run_filter(filter_data, filter_methods, filter_out);
    if (*select_cmd) {
      return run_select(select_data, select_config, select_sel, std::nullopt, select_seed,
                        select_out, select_model);
    }
    if (*baseline_cmd) {
      return run_select(base_data, base_config, base_sel, base_method, base_seed, base_out,
                        "");
    }
    if (*score_cmd) return run_score(score_ranking, score_truth, score_top, score_out);
    if (*evaluate_cmd) {
      return run_evaluate(eval_data, eval_ranking, eval_top, eval_evaluator, eval_k,
                          eval_test, eval_seed);
    }
    if (*tune_cmd) {
      return run_tune(tune_data, tune_config, tune_method, tune_sel, tune_budget, tune_seed,
                      tune_out);
    }
    if (*bench_cmd) {
      return run_bench_cmd(bench_n, bench_d, bench_features, bench_outcome, bench_reps,
                           bench_methods, bench_ratios, bench_config, bench_seed, bench_out);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
