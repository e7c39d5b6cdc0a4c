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

#include "fral/fairness.h"

#include <algorithm>
#include <cmath>
#include <tuple>

#include <fmt/format.h>

#include "fral/errors.h"
#include "fral/random.h"

namespace fral {

MetricKind parse_metric_kind(std::string_view name) {
  if (name == "accuracy") return MetricKind::kAccuracy;
  if (name == "macro-f1") return MetricKind::kMacroF1;
  throw ConfigError(fmt::format("unknown metric '{}' (expected accuracy or macro-f1)", name));
}

WorstGroupMode parse_worst_group_mode(std::string_view name) {
  if (name == "standard") return WorstGroupMode::kStandard;
  if (name == "robust") return WorstGroupMode::kRobust;
  if (name == "mean") return WorstGroupMode::kMean;
  throw ConfigError(
      fmt::format("unknown worst-group mode '{}' (expected standard, robust or mean)", name));
}

const char* metric_kind_name(MetricKind kind) {
  return kind == MetricKind::kAccuracy ? "accuracy" : "macro-f1";
}

const char* worst_group_mode_name(WorstGroupMode mode) {
  switch (mode) {
    case WorstGroupMode::kStandard:
      return "standard";
    case WorstGroupMode::kRobust:
      return "robust";
    case WorstGroupMode::kMean:
      return "mean";
  }
  return "mean";
}

bool GroupMetrics::has_robust() const {
  return !groups.empty() &&
         std::all_of(groups.begin(), groups.end(), [](const GroupScore& g) { return g.robust.has_value(); });
}

void GroupMetrics::validate() const {
  if (groups.empty()) throw ValidationError("group metrics are empty");
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& g = groups[i];
    if (g.group != static_cast<GroupId>(i)) {
      throw ValidationError("group metrics must list every group in id order");
    }
    const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(g.standard) || (g.robust && !in_unit(*g.robust))) {
      throw ValidationError(fmt::format("group {} metric outside [0, 1]", g.group));
    }
  }
}

SplitPredictions predict_split(const ClassifierSnapshot& model, const DatasetBundle& bundle,
                               Split split, const AttackConfig* attack,
                               std::uint64_t attack_seed) {
  SplitPredictions preds;
  preds.ids = bundle.split(split);
  for (SampleId id : preds.ids) {
    preds.labels.push_back(bundle.labels[id]);
    preds.groups.push_back(bundle.groups[id]);
  }
  const Eigen::MatrixXd x = bundle.gather(preds.ids);
  preds.standard = predict_labels(model, x);
  if (attack != nullptr) {
    std::vector<std::uint64_t> seeds;
    seeds.reserve(preds.ids.size());
    for (SampleId id : preds.ids) {
      seeds.push_back(derive_seed(attack_seed, "sample", static_cast<std::uint64_t>(id)));
    }
    const Eigen::MatrixXd adv = pgd_attack(model, x, preds.labels, *attack, seeds);
    preds.robust = predict_labels(model, adv);
  }
  return preds;
}

namespace {

double group_score(std::span<const ClassId> predicted, std::span<const ClassId> labels,
                   int num_classes, MetricKind kind) {
  if (kind == MetricKind::kMacroF1) return macro_f1(predicted, labels, num_classes);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predicted[i] == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace

GroupMetrics group_metrics(const SplitPredictions& preds, int num_groups, int num_classes,
                           MetricKind kind) {
  GroupMetrics out;
  out.kind = kind;
  for (GroupId z = 0; z < num_groups; ++z) {
    std::vector<ClassId> labels, standard, robust;
    for (std::size_t i = 0; i < preds.ids.size(); ++i) {
      if (preds.groups[i] != z) continue;
      labels.push_back(preds.labels[i]);
      standard.push_back(preds.standard[i]);
      if (preds.robust) robust.push_back((*preds.robust)[i]);
    }
    if (labels.empty()) {
      throw ValidationError(fmt::format("group {} has no samples in the evaluated split", z));
    }
    GroupScore score;
    score.group = z;
    score.count = static_cast<std::int64_t>(labels.size());
    score.standard = group_score(standard, labels, num_classes, kind);
    if (preds.robust) score.robust = group_score(robust, labels, num_classes, kind);
    out.groups.push_back(score);
  }
  return out;
}

GroupMetrics evaluate_groups(const ClassifierSnapshot& model, const DatasetBundle& bundle,
                             Split split, const AttackConfig* attack, std::uint64_t attack_seed,
                             MetricKind kind) {
  const SplitPredictions preds = predict_split(model, bundle, split, attack, attack_seed);
  return group_metrics(preds, bundle.num_groups, bundle.num_classes, kind);
}

FairnessReport aggregate(const GroupMetrics& metrics) {
  metrics.validate();
  FairnessReport r;
  r.metrics = metrics;
  const auto summarize = [&](auto value, double& worst, double& disparity, double& avg) {
    double lo = value(metrics.groups.front());
    double hi = lo;
    double sum = 0.0;
    for (const auto& g : metrics.groups) {
      const double v = value(g);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    worst = lo;
    disparity = hi - lo;
    avg = sum / static_cast<double>(metrics.groups.size());
  };
  summarize([](const GroupScore& g) { return g.standard; }, r.f_std, r.disparity_std,
            r.group_avg_std);
  if (metrics.has_robust()) {
    double worst = 0, disparity = 0, avg = 0;
    summarize([](const GroupScore& g) { return *g.robust; }, worst, disparity, avg);
    r.f_rob = worst;
    r.disparity_rob = disparity;
    r.group_avg_rob = avg;
  }
  return r;
}

double macro_f1(std::span<const ClassId> predictions, std::span<const ClassId> labels,
                int num_classes) {
  if (predictions.size() != labels.size()) {
    throw ShapeError("macro_f1: predictions and labels differ in length");
  }
  if (labels.empty() || num_classes < 1) return 0.0;
  std::vector<std::int64_t> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const ClassId y = labels[i];
    const ClassId p = predictions[i];
    if (p == y) {
      ++tp[y];
    } else {
      if (p >= 0 && p < num_classes) ++fp[p];
      ++fn[y];
    }
  }
  double sum = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    const double denom = 2.0 * tp[c] + fp[c] + fn[c];
    // 2PR / (P + R) == 2TP / (2TP + FP + FN)
    sum += denom > 0.0 ? 2.0 * tp[c] / denom : 0.0;
  }
  return sum / num_classes;
}

GroupId worst_group(const FairnessReport& report, WorstGroupMode mode) {
  const auto& groups = report.metrics.groups;
  if (groups.empty()) throw ValidationError("cannot pick the worst group of an empty report");
  if (mode != WorstGroupMode::kStandard && !report.metrics.has_robust()) {
    throw ValidationError("worst-group mode needs robust metrics");
  }
  const auto key = [mode](const GroupScore& g) {
    double v = g.standard;
    if (mode == WorstGroupMode::kRobust) v = *g.robust;
    if (mode == WorstGroupMode::kMean) v = 0.5 * (g.standard + *g.robust);
    return std::make_tuple(v, g.standard, g.group);
  };
  const auto it = std::min_element(groups.begin(), groups.end(),
                                   [&](const GroupScore& a, const GroupScore& b) {
                                     return key(a) < key(b);
                                   });
  return it->group;
}

std::vector<ClassScore> per_class_scores(const SplitPredictions& preds, int num_groups,
                                         int num_classes) {
  std::vector<ClassScore> out;
  for (GroupId z = 0; z < num_groups; ++z) {
    for (ClassId c = 0; c < num_classes; ++c) {
      ClassScore s;
      s.group = z;
      s.label = c;
      std::int64_t hit_std = 0, hit_rob = 0;
      for (std::size_t i = 0; i < preds.ids.size(); ++i) {
        if (preds.groups[i] != z || preds.labels[i] != c) continue;
        ++s.count;
        hit_std += preds.standard[i] == c ? 1 : 0;
        if (preds.robust) hit_rob += (*preds.robust)[i] == c ? 1 : 0;
      }
      if (s.count > 0) {
        s.standard = static_cast<double>(hit_std) / static_cast<double>(s.count);
        if (preds.robust) s.robust = static_cast<double>(hit_rob) / static_cast<double>(s.count);
      }
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace fral
