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

#ifndef FRAL_ACTIVE_LOOP_H_
#define FRAL_ACTIVE_LOOP_H_

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "fral/adversarial.h"
#include "fral/dataset.h"
#include "fral/errors.h"
#include "fral/fairness.h"
#include "fral/model.h"
#include "fral/pool.h"
#include "fral/selection.h"
#include "fral/training.h"

namespace fral {

struct ExperimentConfig {
  std::string name = "experiment";
  IngestionSpec dataset;
  std::string architecture = "mlp-relu-32";
  TrainConfig train;  // auxiliary standard model
  RobustTrainConfig robust_train;
  AttackConfig attack;  // evaluation threat model
  Strategy strategy = Strategy::kJin;
  int rounds = 5;
  // Fraction of |train| when in (0, 1), absolute count when >= 1.
  double budget = 0.02;
  double labeled_fraction = 0.2;
  WorstGroupMode worst_group_mode = WorstGroupMode::kMean;
  MetricKind metric = MetricKind::kAccuracy;
  std::uint64_t seed = 0;

  void validate() const;
};

// Per-stage seeds, all derived from the master seed and the round index so
// that runs differing only in strategy share their initialization.
struct RoundSeeds {
  std::uint64_t robust_train = 0;
  std::uint64_t standard_train = 0;
  std::uint64_t selection = 0;
  std::uint64_t score_attack = 0;
  std::uint64_t eval_attack = 0;
};

RoundSeeds round_seeds(std::uint64_t master, int round);
std::uint64_t pool_seed(std::uint64_t master);

// B from a fraction of |train| (rounded) or an absolute count. Throws
// ConfigError when the result is < 1 or the spec is neither.
int resolve_budget(double budget, std::int64_t train_size);

// Wall-clock seconds per labelled section within one round.
class SectionTimes {
 public:
  void record(const std::string& label, double seconds);
  double seconds(const std::string& label) const;  // 0 when never recorded
  bool contains(const std::string& label) const { return seconds_.contains(label); }
  const std::map<std::string, double>& all() const { return seconds_; }

 private:
  std::map<std::string, double> seconds_;
};

inline constexpr const char* kSelectionSection = "selection";
inline constexpr const char* kStdTrainSection = "std_train";
inline constexpr const char* kAdvTrainSection = "adv_train";

// Runs `thunk` and records its steady-clock duration under `label`, also
// when it throws. Returns {result, seconds} (just seconds for void thunks).
template <typename F>
auto time_section(SectionTimes& times, const std::string& label, F&& thunk) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - start).count();
  };
  using R = std::invoke_result_t<F>;
  try {
    if constexpr (std::is_void_v<R>) {
      std::forward<F>(thunk)();
      const double s = elapsed();
      times.record(label, s);
      return s;
    } else {
      R result = std::forward<F>(thunk)();
      const double s = elapsed();
      times.record(label, s);
      return std::pair<R, double>(std::move(result), s);
    }
  } catch (...) {
    times.record(label, elapsed());
    throw;
  }
}

struct InitReport {
  FairnessReport validation;
  FairnessReport test;
  std::vector<ClassScore> per_class;  // test split
  std::vector<SampleId> labeled;
  SectionTimes times;
};

struct RoundReport {
  int round = 0;
  GroupId worst_group = 0;
  Strategy strategy = Strategy::kJin;
  int budget = 0;
  std::int64_t candidate_count = 0;
  std::vector<SampleId> selected;
  std::vector<GroupId> selected_groups;
  std::vector<ClassId> selected_labels;  // revealed by the oracle after selection
  std::int64_t labeled_count = 0;        // |D_L| after acquisition
  FairnessReport validation_before;
  FairnessReport test_before;
  FairnessReport validation_after;
  FairnessReport test_after;
  std::vector<ClassScore> per_class;  // test split, after retraining
  std::vector<ScoreRecord> scores;
  SectionTimes times;
  RoundSeeds seeds;
};

// Receives results as they are produced so they can be persisted before the
// next round starts.
class RunObserver {
 public:
  virtual ~RunObserver() = default;
  virtual void on_start(const ExperimentConfig&, const DatasetBundle&, const PoolState&, int) {}
  virtual void on_initialized(const InitReport&, const ClassifierSnapshot&) {}
  virtual void on_round(const RoundReport&, const ClassifierSnapshot&) {}
};

struct FralResult {
  InitReport init;
  std::vector<RoundReport> rounds;
  ClassifierSnapshot final_model;
  PoolState pool;
  int budget = 0;
  int worst_group_evaluations = 0;
};

// An error inside the loop, tagged with the round it happened in (0 is the
// initialization).
class RunError : public Error {
 public:
  RunError(int round, const std::string& what);
  int round() const { return round_; }

 private:
  int round_;
};

// Initialization with adversarial training on D_L, then K rounds of
// worst-group evaluation on D_V, candidate filtering, scoring, top-B
// acquisition and adversarial retraining.
FralResult run_fral(const ExperimentConfig& cfg, const DatasetBundle& bundle,
                    RunObserver* observer = nullptr);

// Starts from a given pool instead of init_pools; labeled_fraction is ignored.
FralResult run_fral(const ExperimentConfig& cfg, const DatasetBundle& bundle,
                    const PoolState& initial, RunObserver* observer = nullptr);

// Loads cfg.dataset first.
FralResult run_fral(const ExperimentConfig& cfg, RunObserver* observer = nullptr);

}  // namespace fral

#endif  // FRAL_ACTIVE_LOOP_H_
