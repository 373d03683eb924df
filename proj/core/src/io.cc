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

#include "mafs/io.h"

#include <unistd.h>

#include <array>
#include <cerrno>
#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mafs/errors.h"

namespace mafs {

using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::size_t parse_index(const std::string& text, const std::string& what) {
  std::size_t v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw UsageError("malformed " + what + ": '" + text + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw UsageError("malformed " + what + ": '" + text + "'");
  }
  return v;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError("malformed " + what + " JSON: " + e.what());
  }
}

void check_schema(const json& j, const char* expected) {
  if (!j.is_object()) throw UsageError("expected a JSON object");
  if (!j.contains("schema")) throw UsageError("missing key 'schema'");
  if (!j["schema"].is_string() || j["schema"].get<std::string>() != expected) {
    throw UsageError("key 'schema' must be \"" + std::string(expected) + "\"");
  }
}

json hex_array(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(format_hex(x));
  return out;
}

std::vector<double> hex_vector(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw UsageError("key '" + key + "' must be an array");
  }
  std::vector<double> out;
  for (const json& e : j[key]) {
    if (!e.is_string()) throw UsageError("key '" + key + "' must hold strings");
    out.push_back(parse_double(e.get<std::string>(), key));
  }
  return out;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp + "'");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot rename onto '" + path + "': " + ec.message());
  }
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw NumericError("cannot format double");
  return std::string(buf.data(), ptr);
}

std::string format_hex(double v) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%a", v);
  return buf.data();
}

double parse_double(const std::string& text, const std::string& what) {
  if (text.empty()) throw UsageError("empty value for " + what);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE) {
    throw UsageError("malformed number for " + what + ": '" + text + "'");
  }
  return v;
}

std::string features_to_csv(const Matrix& x) {
  std::string out;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    if (c) out += ',';
    out += 'f' + std::to_string(c);
  }
  out += '\n';
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

Matrix features_from_csv(const std::string& text) {
  const std::vector<std::string> lines = lines_of(text);
  if (lines.empty()) throw UsageError("feature CSV is empty");
  const std::vector<std::string> header = split(lines[0], ',');
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] != "f" + std::to_string(c)) {
      throw UsageError("feature CSV header column " + std::to_string(c) +
                       " must be 'f" + std::to_string(c) + "', got '" + header[c] + "'");
    }
  }
  Matrix x(lines.size() - 1, header.size());
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::vector<std::string> cells = split(lines[r], ',');
    if (cells.size() != header.size()) {
      throw UsageError("feature CSV row " + std::to_string(r) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header.size()));
    }
    auto row = x.row(r - 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      row[c] = parse_double(cells[c], "feature CSV cell");
    }
  }
  return x;
}

std::string target_to_csv(const std::vector<double>& y) {
  std::string out = "y\n";
  for (double v : y) out += format_double(v) + '\n';
  return out;
}

std::vector<double> target_from_csv(const std::string& text) {
  const std::vector<std::string> lines = lines_of(text);
  if (lines.empty() || lines[0] != "y") {
    throw UsageError("target CSV must start with header 'y'");
  }
  std::vector<double> y;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    y.push_back(parse_double(lines[i], "target CSV value"));
  }
  return y;
}

namespace {

constexpr std::array<const char*, 6> kSetNames = {"A", "B", "C", "D", "E", "F"};

}  // namespace

std::string truth_to_json(const CausalAssignment& truth) {
  json j;
  j["schema"] = kTruthSchema;
  json sets = json::object();
  for (std::size_t s = 0; s < kSetNames.size(); ++s) {
    sets[kSetNames[s]] = truth.set(kAllForms[s]);
  }
  j["sets"] = sets;
  json pairs = json::array();
  for (const auto& [g, h] : truth.pairs) pairs.push_back({g, h});
  j["pairs"] = pairs;
  return j.dump(1) + "\n";
}

CausalAssignment truth_from_json(const std::string& text) {
  const json j = parse_json(text, "ground truth");
  check_schema(j, kTruthSchema);
  CausalAssignment truth;
  if (!j.contains("sets") || !j["sets"].is_object()) {
    throw UsageError("key 'sets' must be an object");
  }
  try {
    for (std::size_t s = 0; s < kSetNames.size(); ++s) {
      const json& sets = j["sets"];
      if (!sets.contains(kSetNames[s])) {
        throw UsageError(std::string("missing key 'sets.") + kSetNames[s] + "'");
      }
      truth.set(kAllForms[s]) = sets[kSetNames[s]].get<std::vector<std::size_t>>();
    }
    if (!j.contains("pairs")) throw UsageError("missing key 'pairs'");
    for (const json& p : j["pairs"]) {
      const auto v = p.get<std::vector<std::size_t>>();
      if (v.size() != 2) throw UsageError("key 'pairs' entries must have 2 indices");
      truth.pairs.emplace_back(v[0], v[1]);
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed ground truth: ") + e.what());
  }
  return truth;
}

std::vector<RankingRecord> make_records(const MethodRanking& ranking,
                                        std::uint64_t seed,
                                        const std::string& config_digest) {
  std::vector<RankingRecord> out;
  for (std::size_t i = 0; i < ranking.features.size(); ++i) {
    RankingRecord r;
    r.rank = i + 1;
    r.feature = ranking.features[i];
    r.score = ranking.scores[i];
    r.method = to_string(ranking.method);
    if (i < ranking.heads.size()) r.heads = ranking.heads[i];
    r.seed = seed;
    r.config_digest = config_digest;
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

constexpr const char kRankingHeader[] =
    "rank\tfeature\tscore\tmethod\theads\tseed\tconfig_digest";

}  // namespace

std::string ranking_to_tsv(const std::vector<RankingRecord>& records) {
  std::string out = std::string(kRankingHeader) + "\n";
  std::array<char, 64> buf{};
  for (const RankingRecord& r : records) {
    std::snprintf(buf.data(), buf.size(), "%.17g", r.score);
    std::string heads;
    for (std::size_t h = 0; h < r.heads.size(); ++h) {
      if (h) heads += ',';
      heads += std::to_string(r.heads[h]);
    }
    if (heads.empty()) heads = "-";
    out += std::to_string(r.rank) + '\t' + std::to_string(r.feature) + '\t' +
           buf.data() + '\t' + r.method + '\t' + heads + '\t' +
           std::to_string(r.seed) + '\t' + r.config_digest + '\n';
  }
  return out;
}

std::vector<RankingRecord> ranking_from_tsv(const std::string& text) {
  const std::vector<std::string> lines = lines_of(text);
  if (lines.empty() || lines[0] != kRankingHeader) {
    throw UsageError("ranking file must start with header '" +
                     std::string(kRankingHeader) + "'");
  }
  std::vector<RankingRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> cells = split(lines[i], '\t');
    if (cells.size() != 7) {
      throw UsageError("ranking line " + std::to_string(i) + " has " +
                       std::to_string(cells.size()) + " fields, expected 7");
    }
    RankingRecord r;
    r.rank = parse_index(cells[0], "rank");
    r.feature = parse_index(cells[1], "feature");
    r.score = parse_double(cells[2], "score");
    r.method = cells[3];
    if (cells[4] != "-") {
      for (const std::string& h : split(cells[4], ',')) {
        r.heads.push_back(parse_index(h, "heads"));
      }
    }
    r.seed = parse_u64(cells[5], "seed");
    r.config_digest = cells[6];
    if (r.rank != out.size() + 1) {
      throw UsageError("ranking line " + std::to_string(i) + ": expected rank " +
                       std::to_string(out.size() + 1));
    }
    if (!out.empty() && r.score > out.back().score) {
      throw UsageError("ranking line " + std::to_string(i) +
                       ": scores must be non-increasing");
    }
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

const char* to_key(AlphaActivation a) { return a == AlphaActivation::kNone ? "none" : "sigmoid"; }
const char* to_key(StopMonitor m) {
  return m == StopMonitor::kTotalLoss ? "total" : "prediction";
}
const char* to_key(AttentionInit a) { return a == AttentionInit::kPrior ? "prior" : "random"; }

json config_json(const RunConfig& c) {
  json j;
  j["schema"] = kConfigSchema;
  j["method"] = to_string(c.method);
  j["seed"] = c.seed;
  j["replications"] = c.replications;
  if (c.rule.kind == SelectionRule::Kind::kRatio) {
    j["selection_ratio"] = c.rule.ratio;
  } else {
    j["selection_count"] = c.rule.count;
  }
  j["filters"] = c.filters;
  j["init_filter"] = c.init_filter;
  const MAFSConfig& m = c.mafs;
  j["lambda"] = m.lambda;
  j["gamma"] = m.gamma;
  j["epsilon"] = m.epsilon;
  j["tau_max"] = m.tau_max;
  j["attention_hidden"] = m.attention_hidden;
  j["predictor_hidden"] = m.predictor_hidden;
  j["width_divisor"] = m.width_divisor;
  j["dropout_rate"] = m.dropout_rate;
  j["learning_rate"] = m.learning_rate;
  j["weight_decay"] = m.weight_decay;
  j["batch_size"] = m.batch_size;
  j["max_epochs"] = m.max_epochs;
  j["patience"] = m.patience;
  j["validation_fraction"] = m.validation_fraction;
  j["alpha_activation"] = to_key(m.alpha_activation);
  j["monitor"] = to_key(m.monitor);
  j["attention_init"] = to_key(m.attention_init);
  j["attention_init_scale"] = m.attention_init_scale;
  j["standardize_target"] = m.standardize_target;
  j["top_k"] = m.top_k;
  j["n_trees"] = m.n_trees;
  j["lambda1"] = c.baseline.lambda1;
  j["lambda2"] = c.baseline.lambda2;
  j["earfs_lambda"] = c.baseline.lambda;
  return j;
}

double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw UsageError("config key '" + key + "' must be a number");
  return v.get<double>();
}

std::size_t get_count(const json& v, const std::string& key) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw UsageError("config key '" + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::vector<std::size_t> get_counts(const json& v, const std::string& key) {
  if (!v.is_array()) throw UsageError("config key '" + key + "' must be an array");
  std::vector<std::size_t> out;
  for (const json& e : v) out.push_back(get_count(e, key));
  return out;
}

std::string get_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw UsageError("config key '" + key + "' must be a string");
  return v.get<std::string>();
}

bool get_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw UsageError("config key '" + key + "' must be a boolean");
  return v.get<bool>();
}

}  // namespace

std::string config_to_json(const RunConfig& config) {
  return config_json(config).dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text) {
  const json j = parse_json(text, "config");
  check_schema(j, kConfigSchema);
  RunConfig c;
  bool has_ratio = false;
  bool has_count = false;
  for (const auto& [key, v] : j.items()) {
    MAFSConfig& m = c.mafs;
    BaselineConfig& b = c.baseline;
    if (key == "schema") {
      continue;
    } else if (key == "method") {
      try {
        c.method = parse_method(get_string(v, key));
      } catch (const UsageError& e) {
        throw UsageError("config key 'method': " + std::string(e.what()));
      }
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) {
        throw UsageError("config key 'seed' must be a non-negative integer");
      }
      c.seed = v.get<std::uint64_t>();
    } else if (key == "replications") {
      c.replications = get_count(v, key);
    } else if (key == "selection_ratio") {
      c.rule = SelectionRule::from_ratio(get_number(v, key));
      has_ratio = true;
    } else if (key == "selection_count") {
      c.rule = SelectionRule::from_count(get_count(v, key));
      has_count = true;
    } else if (key == "filters") {
      if (!v.is_array()) throw UsageError("config key 'filters' must be an array");
      c.filters.clear();
      for (const json& e : v) c.filters.push_back(get_string(e, key));
    } else if (key == "init_filter") {
      c.init_filter = get_string(v, key);
    } else if (key == "lambda") {
      m.lambda = get_number(v, key);
    } else if (key == "gamma") {
      m.gamma = get_number(v, key);
    } else if (key == "epsilon") {
      m.epsilon = get_number(v, key);
    } else if (key == "tau_max") {
      m.tau_max = get_number(v, key);
    } else if (key == "attention_hidden") {
      m.attention_hidden = get_counts(v, key);
    } else if (key == "predictor_hidden") {
      m.predictor_hidden = b.predictor_hidden = get_counts(v, key);
    } else if (key == "width_divisor") {
      m.width_divisor = b.width_divisor = get_number(v, key);
    } else if (key == "dropout_rate") {
      m.dropout_rate = b.dropout_rate = get_number(v, key);
    } else if (key == "learning_rate") {
      m.learning_rate = b.learning_rate = get_number(v, key);
    } else if (key == "weight_decay") {
      m.weight_decay = b.weight_decay = get_number(v, key);
    } else if (key == "batch_size") {
      m.batch_size = b.batch_size = get_count(v, key);
    } else if (key == "max_epochs") {
      m.max_epochs = b.max_epochs = get_count(v, key);
    } else if (key == "patience") {
      m.patience = b.patience = get_count(v, key);
    } else if (key == "validation_fraction") {
      m.validation_fraction = b.validation_fraction = get_number(v, key);
    } else if (key == "alpha_activation") {
      const std::string s = get_string(v, key);
      if (s != "none" && s != "sigmoid") {
        throw UsageError("config key 'alpha_activation' must be \"none\" or \"sigmoid\"");
      }
      m.alpha_activation = s == "none" ? AlphaActivation::kNone : AlphaActivation::kSigmoid;
    } else if (key == "monitor") {
      const std::string s = get_string(v, key);
      if (s != "total" && s != "prediction") {
        throw UsageError("config key 'monitor' must be \"total\" or \"prediction\"");
      }
      m.monitor = s == "total" ? StopMonitor::kTotalLoss : StopMonitor::kPredictionLoss;
    } else if (key == "attention_init") {
      const std::string s = get_string(v, key);
      if (s != "prior" && s != "random") {
        throw UsageError("config key 'attention_init' must be \"prior\" or \"random\"");
      }
      m.attention_init = s == "prior" ? AttentionInit::kPrior : AttentionInit::kRandom;
    } else if (key == "attention_init_scale") {
      m.attention_init_scale = get_number(v, key);
    } else if (key == "standardize_target") {
      m.standardize_target = b.standardize_target = get_bool(v, key);
    } else if (key == "top_k") {
      m.top_k = get_count(v, key);
    } else if (key == "n_trees") {
      m.n_trees = get_count(v, key);
    } else if (key == "lambda1") {
      b.lambda1 = get_number(v, key);
    } else if (key == "lambda2") {
      b.lambda2 = get_number(v, key);
    } else if (key == "earfs_lambda") {
      b.lambda = get_number(v, key);
    } else {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
  if (has_ratio && has_count) {
    throw UsageError("config keys 'selection_ratio' and 'selection_count' are exclusive");
  }
  try {
    c.validate();
  } catch (const ArgumentError& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
  return c;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_digest(const RunConfig& config) {
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016" PRIx64,
                fnv1a64(config_json(config).dump()));
  return buf.data();
}

std::string model_to_json(const MAFSModel& model, const RunConfig& config) {
  json j;
  j["schema"] = kModelSchema;
  j["task"] = to_string(model.task);
  j["d"] = model.d;
  j["target_mean"] = format_hex(model.target_mean);
  j["target_scale"] = format_hex(model.target_scale);
  j["config"] = config_json(config);
  json heads = json::array();
  for (const HeadState& h : model.heads) {
    json e;
    e["index"] = h.index;
    e["prior"] = h.prior.method;
    e["best_epoch"] = h.best_epoch;
    e["alpha"] = hex_array(h.alpha);
    e["tau"] = hex_array(h.tau);
    heads.push_back(e);
  }
  j["heads"] = heads;
  return j.dump(1) + "\n";
}

std::vector<HeadAudit> model_heads_from_json(const std::string& text) {
  const json j = parse_json(text, "model");
  check_schema(j, kModelSchema);
  if (!j.contains("heads") || !j["heads"].is_array()) {
    throw UsageError("key 'heads' must be an array");
  }
  std::vector<HeadAudit> out;
  try {
    for (const json& e : j["heads"]) {
      HeadAudit h;
      h.index = e.at("index").get<std::size_t>();
      h.prior_method = e.at("prior").get<std::string>();
      h.best_epoch = e.at("best_epoch").get<std::size_t>();
      h.alpha = hex_vector(e, "alpha");
      h.tau = hex_vector(e, "tau");
      out.push_back(std::move(h));
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed model: ") + e.what());
  }
  return out;
}

std::string priors_to_json(const std::vector<FilterPrior>& priors) {
  json j;
  j["schema"] = kPriorsSchema;
  json arr = json::array();
  for (const FilterPrior& p : priors) {
    json e;
    e["method"] = p.method;
    e["raw"] = hex_array(p.raw);
    e["normalized"] = hex_array(p.normalized);
    e["raw_mean"] = format_hex(p.raw_mean);
    e["raw_sd"] = format_hex(p.raw_sd);
    e["flagged"] = p.flagged;
    arr.push_back(e);
  }
  j["priors"] = arr;
  return j.dump(1) + "\n";
}

std::vector<FilterPrior> priors_from_json(const std::string& text) {
  const json j = parse_json(text, "priors");
  check_schema(j, kPriorsSchema);
  if (!j.contains("priors") || !j["priors"].is_array()) {
    throw UsageError("key 'priors' must be an array");
  }
  std::vector<FilterPrior> out;
  try {
    for (const json& e : j["priors"]) {
      FilterPrior p;
      p.method = e.at("method").get<std::string>();
      p.raw = hex_vector(e, "raw");
      p.normalized = hex_vector(e, "normalized");
      p.raw_mean = parse_double(e.at("raw_mean").get<std::string>(), "raw_mean");
      p.raw_sd = parse_double(e.at("raw_sd").get<std::string>(), "raw_sd");
      p.flagged = e.at("flagged").get<std::vector<std::size_t>>();
      out.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed priors: ") + e.what());
  }
  return out;
}

std::string coverage_to_json(const CoverageReport& report) {
  json j;
  j["overall"] = report.overall;
  json forms = json::object();
  for (Form f : kAllForms) {
    forms[to_string(f)] = report.per_form[static_cast<std::size_t>(f)];
  }
  j["per_form"] = forms;
  j["selected_count"] = report.selected_count;
  j["causal_count"] = report.causal_count;
  j["hits"] = report.hits;
  return j.dump(2) + "\n";
}

}  // namespace mafs
