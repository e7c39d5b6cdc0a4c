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

#ifndef FRAL_RESULTS_H_
#define FRAL_RESULTS_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fral/active_loop.h"

namespace fral {

// Layout of an experiment directory:
//
//   config.json            byte-identical copy of the input config
//   resolved_config.json   every field after defaults and overrides
//   metrics.csv            one row per round (round 0 = initialization), test split
//   rounds.jsonl           full per-round record, appended as rounds finish
//   scores/round_<k>.csv   id,group,i_std,i_rob,joint,selected
//   initial_pool.csv       id,group,label of the initial labeled pool
//   acquired.csv           round,id,group,label of every acquisition
//   per_class.csv          round,group,class,count,standard,robust (test split)
//   snapshots/round_<k>.snap
//   timing.json            per-round section seconds
//   summary.json           written once the run completes
//
// metrics.csv column order:
//   round,strategy,seed,worst_group,labeled,selected,
//   F_std,F_rob,disparity_std,disparity_rob,group_avg_std,group_avg_rob,
//   std_g0,rob_g0,...,std_g<|Z|-1>,rob_g<|Z|-1>,
//   selection_seconds,std_train_seconds,adv_train_seconds
// worst_group is empty on the initialization row. Reals are written in
// shortest round-trip form.
inline constexpr const char* kMetricsFile = "metrics.csv";
inline constexpr const char* kRoundsFile = "rounds.jsonl";
inline constexpr const char* kInitialPoolFile = "initial_pool.csv";
inline constexpr const char* kAcquiredFile = "acquired.csv";
inline constexpr const char* kPerClassFile = "per_class.csv";
inline constexpr const char* kTimingFile = "timing.json";
inline constexpr const char* kSummaryFile = "summary.json";
inline constexpr const char* kConfigCopyFile = "config.json";
inline constexpr const char* kResolvedConfigFile = "resolved_config.json";

std::vector<std::string> metrics_header(int num_groups);

// Writes an experiment directory incrementally; every row is flushed before
// the next round starts so a killed run leaves parseable files.
class ResultsStore : public RunObserver {
 public:
  // Creates `dir` (it must not already contain metrics.csv).
  ResultsStore(std::filesystem::path dir, const std::string& config_bytes,
               const ExperimentConfig& cfg, bool save_snapshots = true);

  const std::filesystem::path& dir() const { return dir_; }

  void on_start(const ExperimentConfig& cfg, const DatasetBundle& bundle, const PoolState& pool,
                int budget) override;
  void on_initialized(const InitReport& init, const ClassifierSnapshot& model) override;
  void on_round(const RoundReport& report, const ClassifierSnapshot& model) override;

  // Writes summary.json.
  void finish(const FralResult& result);

 private:
  void append_metrics(int round, std::optional<GroupId> worst, std::int64_t labeled,
                      std::int64_t selected, const FairnessReport& report,
                      const SectionTimes& times);
  void append_per_class(int round, const std::vector<ClassScore>& scores);
  void write_timing();

  std::filesystem::path dir_;
  ExperimentConfig cfg_;
  bool save_snapshots_;
  int num_groups_ = 0;
  std::ofstream metrics_;
  std::ofstream rounds_;
  std::ofstream acquired_;
  std::ofstream per_class_;
  std::vector<std::map<std::string, double>> timings_;
};

// One parsed metrics.csv row.
struct MetricsRow {
  int round = 0;
  std::string strategy;
  std::uint64_t seed = 0;
  std::optional<GroupId> worst_group;
  std::int64_t labeled = 0;
  std::int64_t selected = 0;
  double f_std = 0, f_rob = 0;
  double disparity_std = 0, disparity_rob = 0;
  double group_avg_std = 0, group_avg_rob = 0;
  std::vector<double> group_std;
  std::vector<double> group_rob;
  double selection_seconds = 0, std_train_seconds = 0, adv_train_seconds = 0;
};

std::vector<MetricsRow> read_metrics(const std::filesystem::path& file);

struct AcquiredRow {
  int round = 0;
  SampleId id = 0;
  GroupId group = 0;
  ClassId label = 0;
};

std::vector<AcquiredRow> read_acquired(const std::filesystem::path& file);
// initial_pool.csv rows carry round 0.
std::vector<AcquiredRow> read_initial_pool(const std::filesystem::path& file);

struct PerClassRow {
  int round = 0;
  GroupId group = 0;
  ClassId label = 0;
  std::int64_t count = 0;
  double standard = 0;
  std::optional<double> robust;
};

std::vector<PerClassRow> read_per_class(const std::filesystem::path& file);

// Root for experiment directories: $FRAL_RESULTS_ROOT, else "./results".
std::filesystem::path results_root();

}  // namespace fral

#endif  // FRAL_RESULTS_H_
