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

#ifndef FRAL_FAIRNESS_H_
#define FRAL_FAIRNESS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fral/adversarial.h"
#include "fral/dataset.h"
#include "fral/model.h"

namespace fral {

enum class MetricKind { kAccuracy, kMacroF1 };
enum class WorstGroupMode { kStandard, kRobust, kMean };

MetricKind parse_metric_kind(std::string_view name);
WorstGroupMode parse_worst_group_mode(std::string_view name);
const char* metric_kind_name(MetricKind kind);
const char* worst_group_mode_name(WorstGroupMode mode);

struct GroupScore {
  GroupId group = 0;
  double standard = 0.0;
  std::optional<double> robust;
  std::int64_t count = 0;
};

// Per-group metrics; groups appear in id order and every group of the
// dataset is present.
struct GroupMetrics {
  MetricKind kind = MetricKind::kAccuracy;
  std::vector<GroupScore> groups;

  bool has_robust() const;
  void validate() const;
};

struct FairnessReport {
  GroupMetrics metrics;
  double f_std = 0.0;  // worst group, benign
  double disparity_std = 0.0;
  double group_avg_std = 0.0;
  std::optional<double> f_rob;
  std::optional<double> disparity_rob;
  std::optional<double> group_avg_rob;
};

// Predictions of one model on one split, benign and (optionally) attacked.
struct SplitPredictions {
  std::vector<SampleId> ids;
  std::vector<ClassId> labels;
  std::vector<GroupId> groups;
  std::vector<ClassId> standard;
  std::optional<std::vector<ClassId>> robust;
};

// Attack seeds are fixed per sample: row seed = derive_seed(attack_seed,
// "sample", id), so the same sample sees the same random start whichever
// batch it is evaluated in.
SplitPredictions predict_split(const ClassifierSnapshot& model, const DatasetBundle& bundle,
                               Split split, const AttackConfig* attack,
                               std::uint64_t attack_seed);

GroupMetrics group_metrics(const SplitPredictions& preds, int num_groups, int num_classes,
                           MetricKind kind);

// predict_split followed by group_metrics. Throws ValidationError when a
// group has no samples in the split.
GroupMetrics evaluate_groups(const ClassifierSnapshot& model, const DatasetBundle& bundle,
                             Split split, const AttackConfig* attack, std::uint64_t attack_seed,
                             MetricKind kind = MetricKind::kAccuracy);

FairnessReport aggregate(const GroupMetrics& metrics);

// Unweighted mean over classes of 2PR/(P+R); 0/0 counts as 0 and classes
// without support contribute 0.
double macro_f1(std::span<const ClassId> predictions, std::span<const ClassId> labels,
                int num_classes);

// argmin over groups of the selected metric (mean = (std + rob) / 2). Ties
// go to the lower standard metric, then to the lowest group id.
GroupId worst_group(const FairnessReport& report, WorstGroupMode mode);

// Per-class recall on benign and attacked inputs for one group.
struct ClassScore {
  GroupId group = 0;
  ClassId label = 0;
  std::int64_t count = 0;
  double standard = 0.0;
  std::optional<double> robust;
};

std::vector<ClassScore> per_class_scores(const SplitPredictions& preds, int num_groups,
                                         int num_classes);

}  // namespace fral

#endif  // FRAL_FAIRNESS_H_
