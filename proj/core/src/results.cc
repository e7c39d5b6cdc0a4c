/*
 * Copyright 2026 The fral Authors.
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

#include "fral/results.h"

#include <cstdlib>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "fral/config.h"
#include "fral/errors.h"

namespace fral {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string real(double v) { return fmt::format("{}", v); }

std::string opt_real(const std::optional<double>& v) { return v ? real(*v) : std::string(); }

std::ofstream open_append(const fs::path& path) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << text;
  out.flush();
  if (!out) throw Error(fmt::format("failed writing '{}'", path.string()));
}

json report_json(const FairnessReport& r) {
  json groups = json::array();
  for (const auto& g : r.metrics.groups) {
    json e = {{"group", g.group}, {"standard", g.standard}, {"count", g.count}};
    if (g.robust) e["robust"] = *g.robust;
    groups.push_back(e);
  }
  json j = {{"metric", metric_kind_name(r.metrics.kind)},
            {"groups", groups},
            {"F_std", r.f_std},
            {"disparity_std", r.disparity_std},
            {"group_avg_std", r.group_avg_std}};
  if (r.f_rob) {
    j["F_rob"] = *r.f_rob;
    j["disparity_rob"] = *r.disparity_rob;
    j["group_avg_rob"] = *r.group_avg_rob;
  }
  return j;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Reads a CSV with a header; returns rows as header-keyed maps. A trailing
// partial line (no newline) from an interrupted writer is ignored.
std::vector<std::map<std::string, std::string>> read_csv(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(fmt::format("cannot read '{}'", file.string()));
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (true) {
    const auto nl = text.find('\n', start);
    if (nl == std::string::npos) break;
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  if (lines.empty()) throw Error(fmt::format("'{}' has no header", file.string()));
  const auto header = split_csv(lines.front());
  std::vector<std::map<std::string, std::string>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_csv(lines[i]);
    if (fields.size() != header.size()) {
      throw Error(fmt::format("'{}' line {}: expected {} fields, got {}", file.string(), i + 1,
                              header.size(), fields.size()));
    }
    std::map<std::string, std::string> row;
    for (std::size_t c = 0; c < header.size(); ++c) row[header[c]] = fields[c];
    rows.push_back(std::move(row));
  }
  return rows;
}

const std::string& field(const std::map<std::string, std::string>& row, const std::string& key) {
  const auto it = row.find(key);
  if (it == row.end()) throw Error(fmt::format("missing column '{}'", key));
  return it->second;
}

double to_double(const std::string& s) { return s.empty() ? 0.0 : std::stod(s); }

}  // namespace

std::vector<std::string> metrics_header(int num_groups) {
  std::vector<std::string> h = {"round",         "strategy",      "seed",          "worst_group",
                                "labeled",       "selected",      "F_std",         "F_rob",
                                "disparity_std", "disparity_rob", "group_avg_std", "group_avg_rob"};
  for (int z = 0; z < num_groups; ++z) {
    h.push_back(fmt::format("std_g{}", z));
    h.push_back(fmt::format("rob_g{}", z));
  }
  h.insert(h.end(), {"selection_seconds", "std_train_seconds", "adv_train_seconds"});
  return h;
}

ResultsStore::ResultsStore(fs::path dir, const std::string& config_bytes,
                           const ExperimentConfig& cfg, bool save_snapshots)
    : dir_(std::move(dir)), cfg_(cfg), save_snapshots_(save_snapshots) {
  if (fs::exists(dir_ / kMetricsFile)) {
    throw Error(fmt::format("'{}' already holds an experiment", dir_.string()));
  }
  fs::create_directories(dir_ / "scores");
  if (save_snapshots_) fs::create_directories(dir_ / "snapshots");
  write_text(dir_ / kConfigCopyFile, config_bytes);
  write_text(dir_ / kResolvedConfigFile, to_json_text(cfg_));
}

void ResultsStore::on_start(const ExperimentConfig&, const DatasetBundle& bundle,
                            const PoolState& pool, int) {
  num_groups_ = bundle.num_groups;
  metrics_ = open_append(dir_ / kMetricsFile);
  const auto header = metrics_header(num_groups_);
  for (std::size_t i = 0; i < header.size(); ++i) metrics_ << (i ? "," : "") << header[i];
  metrics_ << "\n" << std::flush;

  std::ofstream initial(dir_ / kInitialPoolFile, std::ios::trunc);
  initial << "id,group,label\n";
  for (SampleId id : pool.labeled()) {
    initial << id << "," << bundle.groups[id] << "," << bundle.labels[id] << "\n";
  }
  initial.flush();

  acquired_ = open_append(dir_ / kAcquiredFile);
  acquired_ << "round,id,group,label\n" << std::flush;
  per_class_ = open_append(dir_ / kPerClassFile);
  per_class_ << "round,group,class,count,standard,robust\n" << std::flush;
  rounds_ = open_append(dir_ / kRoundsFile);
}

void ResultsStore::append_metrics(int round, std::optional<GroupId> worst, std::int64_t labeled,
                                  std::int64_t selected, const FairnessReport& r,
                                  const SectionTimes& times) {
  metrics_ << round << "," << strategy_name(cfg_.strategy) << "," << cfg_.seed << ","
           << (worst ? std::to_string(*worst) : std::string()) << "," << labeled << "," << selected
           << "," << real(r.f_std) << "," << opt_real(r.f_rob) << "," << real(r.disparity_std) << ","
           << opt_real(r.disparity_rob) << "," << real(r.group_avg_std) << ","
           << opt_real(r.group_avg_rob);
  for (const auto& g : r.metrics.groups) metrics_ << "," << real(g.standard) << "," << opt_real(g.robust);
  metrics_ << "," << real(times.seconds(kSelectionSection)) << ","
           << real(times.seconds(kStdTrainSection)) << "," << real(times.seconds(kAdvTrainSection))
           << "\n"
           << std::flush;
}

void ResultsStore::append_per_class(int round, const std::vector<ClassScore>& scores) {
  for (const auto& s : scores) {
    per_class_ << round << "," << s.group << "," << s.label << "," << s.count << ","
               << real(s.standard) << "," << opt_real(s.robust) << "\n";
  }
  per_class_.flush();
}

void ResultsStore::write_timing() {
  json rounds = json::array();
  for (std::size_t k = 0; k < timings_.size(); ++k) {
    json r = {{"round", k}};
    for (const auto& [label, s] : timings_[k]) r[label + "_seconds"] = s;
    rounds.push_back(r);
  }
  write_text(dir_ / kTimingFile,
             json{{"strategy", strategy_name(cfg_.strategy)}, {"rounds", rounds}}.dump(2) + "\n");
}

void ResultsStore::on_initialized(const InitReport& init, const ClassifierSnapshot& model) {
  append_metrics(0, std::nullopt, static_cast<std::int64_t>(init.labeled.size()), 0, init.test,
                 init.times);
  append_per_class(0, init.per_class);
  rounds_ << json{{"round", 0},
                  {"validation", report_json(init.validation)},
                  {"test", report_json(init.test)},
                  {"labeled", init.labeled.size()},
                  {"times", init.times.all()}}
                 .dump()
          << "\n"
          << std::flush;
  if (save_snapshots_) model.save((dir_ / "snapshots" / "round_0.snap").string());
  timings_.push_back(init.times.all());
  write_timing();
}

void ResultsStore::on_round(const RoundReport& report, const ClassifierSnapshot& model) {
  const int k = report.round;
  {
    std::ofstream scores(dir_ / "scores" / fmt::format("round_{}.csv", k), std::ios::trunc);
    scores << "id,group,i_std,i_rob,joint,selected\n";
    for (const auto& s : report.scores) {
      scores << s.id << "," << s.group << "," << opt_real(s.i_std) << "," << opt_real(s.i_rob)
             << "," << opt_real(s.joint) << "," << (s.selected ? 1 : 0) << "\n";
    }
  }
  for (std::size_t i = 0; i < report.selected.size(); ++i) {
    acquired_ << k << "," << report.selected[i] << "," << report.selected_groups[i] << ","
              << report.selected_labels[i] << "\n";
  }
  acquired_.flush();
  append_per_class(k, report.per_class);
  append_metrics(k, report.worst_group, report.labeled_count,
                 static_cast<std::int64_t>(report.selected.size()), report.test_after,
                 report.times);
  rounds_ << json{{"round", k},
                  {"strategy", strategy_name(report.strategy)},
                  {"worst_group", report.worst_group},
                  {"budget", report.budget},
                  {"candidates", report.candidate_count},
                  {"selected", report.selected},
                  {"selected_groups", report.selected_groups},
                  {"labeled", report.labeled_count},
                  {"validation_before", report_json(report.validation_before)},
                  {"test_before", report_json(report.test_before)},
                  {"validation_after", report_json(report.validation_after)},
                  {"test_after", report_json(report.test_after)},
                  {"times", report.times.all()},
                  {"seeds",
                   {{"robust_train", report.seeds.robust_train},
                    {"standard_train", report.seeds.standard_train},
                    {"selection", report.seeds.selection},
                    {"score_attack", report.seeds.score_attack},
                    {"eval_attack", report.seeds.eval_attack}}}}
                 .dump()
          << "\n"
          << std::flush;
  if (save_snapshots_) model.save((dir_ / "snapshots" / fmt::format("round_{}.snap", k)).string());
  timings_.push_back(report.times.all());
  write_timing();
}

void ResultsStore::finish(const FralResult& result) {
  json rounds = json::array();
  for (const auto& r : result.rounds) {
    rounds.push_back({{"round", r.round},
                      {"worst_group", r.worst_group},
                      {"selected", r.selected.size()},
                      {"test", report_json(r.test_after)}});
  }
  const json summary = {{"name", cfg_.name},
                        {"strategy", strategy_name(cfg_.strategy)},
                        {"seed", cfg_.seed},
                        {"rounds", cfg_.rounds},
                        {"budget", result.budget},
                        {"dataset", json::parse(dataset_signature(cfg_))},
                        {"initialization", report_json(result.init.test)},
                        {"per_round", rounds},
                        {"final", report_json(result.rounds.empty() ? result.init.test
                                                                    : result.rounds.back().test_after)},
                        {"final_labeled", result.pool.labeled().size()}};
  write_text(dir_ / kSummaryFile, summary.dump(2) + "\n");
}

std::vector<MetricsRow> read_metrics(const fs::path& file) {
  std::vector<MetricsRow> out;
  for (const auto& row : read_csv(file)) {
    MetricsRow m;
    m.round = std::stoi(field(row, "round"));
    m.strategy = field(row, "strategy");
    m.seed = std::stoull(field(row, "seed"));
    if (!field(row, "worst_group").empty()) m.worst_group = std::stoi(field(row, "worst_group"));
    m.labeled = std::stoll(field(row, "labeled"));
    m.selected = std::stoll(field(row, "selected"));
    m.f_std = to_double(field(row, "F_std"));
    m.f_rob = to_double(field(row, "F_rob"));
    m.disparity_std = to_double(field(row, "disparity_std"));
    m.disparity_rob = to_double(field(row, "disparity_rob"));
    m.group_avg_std = to_double(field(row, "group_avg_std"));
    m.group_avg_rob = to_double(field(row, "group_avg_rob"));
    for (int z = 0; row.contains(fmt::format("std_g{}", z)); ++z) {
      m.group_std.push_back(to_double(field(row, fmt::format("std_g{}", z))));
      m.group_rob.push_back(to_double(field(row, fmt::format("rob_g{}", z))));
    }
    m.selection_seconds = to_double(field(row, "selection_seconds"));
    m.std_train_seconds = to_double(field(row, "std_train_seconds"));
    m.adv_train_seconds = to_double(field(row, "adv_train_seconds"));
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<AcquiredRow> read_acquired(const fs::path& file) {
  std::vector<AcquiredRow> out;
  for (const auto& row : read_csv(file)) {
    out.push_back({std::stoi(field(row, "round")), std::stoll(field(row, "id")),
                   std::stoi(field(row, "group")), std::stoi(field(row, "label"))});
  }
  return out;
}

std::vector<AcquiredRow> read_initial_pool(const fs::path& file) {
  std::vector<AcquiredRow> out;
  for (const auto& row : read_csv(file)) {
    out.push_back({0, std::stoll(field(row, "id")), std::stoi(field(row, "group")),
                   std::stoi(field(row, "label"))});
  }
  return out;
}

std::vector<PerClassRow> read_per_class(const fs::path& file) {
  std::vector<PerClassRow> out;
  for (const auto& row : read_csv(file)) {
    PerClassRow r;
    r.round = std::stoi(field(row, "round"));
    r.group = std::stoi(field(row, "group"));
    r.label = std::stoi(field(row, "class"));
    r.count = std::stoll(field(row, "count"));
    r.standard = to_double(field(row, "standard"));
    if (!field(row, "robust").empty()) r.robust = to_double(field(row, "robust"));
    out.push_back(r);
  }
  return out;
}

fs::path results_root() {
  if (const char* env = std::getenv("FRAL_RESULTS_ROOT"); env != nullptr && *env != '\0') {
    return fs::path(env);
  }
  return fs::path("results");
}

}  // namespace fral
