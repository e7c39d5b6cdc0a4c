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

#include "fral/dataset.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <opencv2/imgcodecs.hpp>

#include "fral/errors.h"
#include "fral/random.h"

namespace fral {

const char* split_name(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kValidation:
      return "validation";
    case Split::kTest:
      return "test";
  }
  return "unknown";
}

const std::vector<SampleId>& DatasetBundle::split(Split s) const {
  switch (s) {
    case Split::kTrain:
      return train;
    case Split::kValidation:
      return validation;
    case Split::kTest:
      return test;
  }
  return train;
}

Example DatasetBundle::example(SampleId id) const {
  Example e;
  e.id = id;
  e.features.resize(features.cols());
  for (Eigen::Index j = 0; j < features.cols(); ++j) e.features[j] = features(id, j);
  if (labels[id] != kNoLabel) e.label = labels[id];
  e.group = groups[id];
  return e;
}

Eigen::MatrixXd DatasetBundle::gather(std::span<const SampleId> ids) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ids.size()), features.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = features.row(ids[i]);
  }
  return out;
}

void DatasetBundle::validate() const {
  const SampleId n = size();
  if (static_cast<SampleId>(labels.size()) != n || features.rows() != n) {
    throw ValidationError("dataset columns have inconsistent lengths");
  }
  if (num_classes < 1 || num_groups < 1) {
    throw ValidationError("dataset needs at least one class and one group");
  }
  for (SampleId i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      const double v = features(i, j);
      if (!std::isfinite(v)) {
        throw ValidationError(fmt::format("sample {}: non-finite feature {}", i, j));
      }
      if (!clamp.contains(v)) {
        throw ValidationError(fmt::format("sample {}: feature {} = {} outside [{}, {}]",
                                          i, j, v, clamp.lo, clamp.hi));
      }
    }
    if (labels[i] != kNoLabel && (labels[i] < 0 || labels[i] >= num_classes)) {
      throw ValidationError(fmt::format("sample {}: label {} not in [0, {})", i,
                                        labels[i], num_classes));
    }
    if (groups[i] < 0 || groups[i] >= num_groups) {
      throw ValidationError(fmt::format("sample {}: group {} not in [0, {})", i,
                                        groups[i], num_groups));
    }
  }

  std::vector<int> owner(static_cast<std::size_t>(n), -1);
  for (Split s : {Split::kTrain, Split::kValidation, Split::kTest}) {
    const auto& ids = split(s);
    std::vector<char> has_group(num_groups, 0);
    std::vector<char> has_class(num_classes, 0);
    for (SampleId id : ids) {
      if (id < 0 || id >= n) {
        throw ValidationError(fmt::format("split '{}' references unknown id {}",
                                          split_name(s), id));
      }
      if (owner[id] != -1) {
        throw ValidationError(fmt::format("sample {} appears in more than one split", id));
      }
      owner[id] = static_cast<int>(s);
      has_group[groups[id]] = 1;
      if (labels[id] != kNoLabel) has_class[labels[id]] = 1;
      if (s != Split::kTrain && labels[id] == kNoLabel) {
        throw ValidationError(fmt::format("split '{}': sample {} has no label",
                                          split_name(s), id));
      }
    }
    for (GroupId z = 0; z < num_groups; ++z) {
      if (!has_group[z]) {
        throw ValidationError(fmt::format("split '{}' has no samples of group {}",
                                          split_name(s), z));
      }
    }
    for (ClassId c = 0; c < num_classes; ++c) {
      if (!has_class[c]) {
        throw ValidationError(fmt::format("split '{}' has no samples of class {}",
                                          split_name(s), c));
      }
    }
  }
}

DatasetBundle make_bundle(std::vector<Example> examples, int num_classes,
                          int num_groups, ClampRange clamp,
                          const std::vector<Split>& split_of) {
  if (split_of.size() != examples.size()) {
    throw ValidationError("split assignment size does not match example count");
  }
  DatasetBundle b;
  b.num_classes = num_classes;
  b.num_groups = num_groups;
  b.clamp = clamp;
  const auto n = static_cast<Eigen::Index>(examples.size());
  const auto d = examples.empty() ? Eigen::Index{0}
                                  : static_cast<Eigen::Index>(examples.front().features.size());
  b.features.resize(n, d);
  b.labels.resize(examples.size());
  b.groups.resize(examples.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& e = examples[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(e.features.size()) != d) {
      throw IngestionError(fmt::format("row {}: expected {} features, got {}", i, d,
                                       e.features.size()));
    }
    for (Eigen::Index j = 0; j < d; ++j) b.features(i, j) = e.features[j];
    b.labels[i] = e.label.value_or(kNoLabel);
    b.groups[i] = e.group;
    switch (split_of[i]) {
      case Split::kTrain:
        b.train.push_back(i);
        break;
      case Split::kValidation:
        b.validation.push_back(i);
        break;
      case Split::kTest:
        b.test.push_back(i);
        break;
    }
  }
  return b;
}

std::vector<Split> stratified_splits(std::span<const ClassId> labels,
                                     std::span<const GroupId> groups,
                                     const SplitFractions& fractions,
                                     std::uint64_t seed) {
  const auto n = static_cast<std::int64_t>(labels.size());
  const double total = fractions.train + fractions.validation + fractions.test;
  if (fractions.train <= 0 || fractions.validation < 0 || fractions.test < 0 ||
      std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be nonnegative, train > 0, and sum to 1");
  }
  Rng rng = make_rng(seed, "splits");

  std::map<std::pair<ClassId, GroupId>, std::vector<std::int64_t>> cells;
  for (std::int64_t i = 0; i < n; ++i) cells[{labels[i], groups[i]}].push_back(i);

  // Spread each cell evenly over [0, 1) with a random phase, then interleave.
  std::vector<std::pair<double, std::int64_t>> keyed;
  keyed.reserve(static_cast<std::size_t>(n));
  std::uniform_real_distribution<double> phase(0.0, 1.0);
  for (auto& [cell, members] : cells) {
    std::shuffle(members.begin(), members.end(), rng);
    const double u = phase(rng);
    const double m = static_cast<double>(members.size());
    for (std::size_t k = 0; k < members.size(); ++k) {
      keyed.emplace_back((static_cast<double>(k) + u) / m, members[k]);
    }
  }
  std::sort(keyed.begin(), keyed.end());

  const auto n_val = static_cast<std::int64_t>(std::llround(fractions.validation * n));
  const auto n_test = static_cast<std::int64_t>(std::llround(fractions.test * n));
  std::vector<Split> out(static_cast<std::size_t>(n), Split::kTrain);
  std::vector<std::int64_t> rest;
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t id = keyed[i].second;
    if ((i + 1) * n_val / n > i * n_val / n) {
      out[id] = Split::kValidation;
    } else {
      rest.push_back(id);
    }
  }
  const auto m = static_cast<std::int64_t>(rest.size());
  for (std::int64_t j = 0; j < m; ++j) {
    if ((j + 1) * n_test / m > j * n_test / m) out[rest[j]] = Split::kTest;
  }
  return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, delimiter)) fields.push_back(field);
  if (!line.empty() && line.back() == delimiter) fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::optional<int> parse_int_field(const std::string& raw, const char* what,
                                   std::int64_t row) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || v < 0) {
    throw IngestionError(fmt::format("row {}: invalid {} value '{}'", row, what, s));
  }
  return v;
}

std::optional<Split> parse_split_field(const std::string& raw, std::int64_t row) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  if (s == "train") return Split::kTrain;
  if (s == "validation" || s == "val") return Split::kValidation;
  if (s == "test") return Split::kTest;
  throw IngestionError(fmt::format("row {}: invalid split value '{}'", row, s));
}

// Shared tail of every loader: infer C and |Z|, assign splits, validate.
DatasetBundle finish_bundle(std::vector<Example> examples,
                            std::vector<std::optional<Split>> explicit_splits,
                            const IngestionSpec& spec) {
  if (examples.empty()) throw IngestionError("dataset has no rows");
  int num_classes = 0;
  int num_groups = 0;
  std::vector<ClassId> labels;
  std::vector<GroupId> groups;
  for (const auto& e : examples) {
    if (e.label) num_classes = std::max(num_classes, *e.label + 1);
    num_groups = std::max(num_groups, e.group + 1);
    labels.push_back(e.label.value_or(kNoLabel));
    groups.push_back(e.group);
  }
  std::vector<Split> split_of;
  const bool any_explicit =
      std::any_of(explicit_splits.begin(), explicit_splits.end(),
                  [](const auto& s) { return s.has_value(); });
  if (any_explicit) {
    for (std::size_t i = 0; i < explicit_splits.size(); ++i) {
      if (!explicit_splits[i]) {
        throw IngestionError(fmt::format("row {}: missing split value", i));
      }
      split_of.push_back(*explicit_splits[i]);
    }
  } else {
    split_of = stratified_splits(labels, groups, spec.fractions, spec.seed);
  }
  DatasetBundle b = make_bundle(std::move(examples), num_classes, num_groups,
                                spec.clamp, split_of);
  b.validate();
  return b;
}

void scale_columns_into(std::vector<Example>& examples, ClampRange clamp) {
  if (examples.empty()) return;
  const std::size_t d = examples.front().features.size();
  for (std::size_t j = 0; j < d; ++j) {
    double lo = examples.front().features[j];
    double hi = lo;
    for (const auto& e : examples) {
      lo = std::min(lo, e.features[j]);
      hi = std::max(hi, e.features[j]);
    }
    for (auto& e : examples) {
      const double t = hi > lo ? (e.features[j] - lo) / (hi - lo) : 0.0;
      e.features[j] = clamp.lo + clamp.width() * t;
    }
  }
}

}  // namespace

DatasetBundle load_tabular(const IngestionSpec& spec) {
  std::ifstream in(spec.path);
  if (!in) throw IngestionError(fmt::format("cannot open tabular file '{}'", spec.path));
  std::string line;
  if (!std::getline(in, line)) throw IngestionError("tabular file is empty");
  const auto header = split_fields(line, spec.delimiter);

  std::vector<std::size_t> feature_cols;
  std::optional<std::size_t> label_col, group_col, split_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    if (name.rfind("feature_", 0) == 0) {
      feature_cols.push_back(c);
    } else if (name == "label") {
      label_col = c;
    } else if (name == "group") {
      group_col = c;
    } else if (name == "split") {
      split_col = c;
    }
  }
  if (!group_col) throw IngestionError("tabular file has no 'group' column");
  if (!label_col) throw IngestionError("tabular file has no 'label' column");
  if (feature_cols.empty()) throw IngestionError("tabular file has no 'feature_*' columns");

  std::vector<Example> examples;
  std::vector<std::optional<Split>> splits;
  std::int64_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, spec.delimiter);
    if (fields.size() != header.size()) {
      throw IngestionError(fmt::format("row {}: expected {} fields, got {}", row,
                                       header.size(), fields.size()));
    }
    Example e;
    e.id = row;
    for (std::size_t c : feature_cols) {
      const std::string s = trim(fields[c]);
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(s, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (s.empty() || pos != s.size() || !std::isfinite(v)) {
        throw IngestionError(fmt::format("row {}: invalid value '{}' in column '{}'",
                                         row, s, trim(header[c])));
      }
      e.features.push_back(v);
    }
    e.label = parse_int_field(fields[*label_col], "label", row);
    const auto group = parse_int_field(fields[*group_col], "group", row);
    if (!group) throw IngestionError(fmt::format("row {}: missing group value", row));
    e.group = *group;
    splits.push_back(split_col ? parse_split_field(fields[*split_col], row) : std::nullopt);
    examples.push_back(std::move(e));
    ++row;
  }
  scale_columns_into(examples, spec.clamp);
  return finish_bundle(std::move(examples), std::move(splits), spec);
}

DatasetBundle load_image_manifest(const IngestionSpec& spec) {
  namespace fs = std::filesystem;
  std::ifstream in(spec.path);
  if (!in) throw IngestionError(fmt::format("cannot open manifest '{}'", spec.path));
  const fs::path base = fs::path(spec.path).parent_path();

  std::vector<Example> examples;
  std::vector<std::optional<Split>> splits;
  std::string line;
  std::int64_t row = 0;
  int rows = -1, cols = -1, channels = -1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, ',');
    if (row == 0 && examples.empty() && !fields.empty() && trim(fields[0]) == "path") {
      continue;  // header
    }
    if (fields.size() != 3 && fields.size() != 4) {
      throw IngestionError(fmt::format("manifest row {}: expected path,label,group", row));
    }
    const fs::path file = base / trim(fields[0]);
    const cv::Mat img = cv::imread(file.string(), cv::IMREAD_ANYCOLOR);
    if (img.empty()) {
      throw IngestionError(fmt::format("manifest row {}: cannot decode '{}'", row,
                                       file.string()));
    }
    if (rows < 0) {
      rows = img.rows;
      cols = img.cols;
      channels = img.channels();
    } else if (img.rows != rows || img.cols != cols || img.channels() != channels) {
      throw IngestionError(fmt::format("manifest row {}: image shape differs from first image",
                                       row));
    }
    cv::Mat bytes;
    img.convertTo(bytes, CV_8U);
    Example e;
    e.id = row;
    e.features.reserve(bytes.total() * bytes.channels());
    for (int r = 0; r < bytes.rows; ++r) {
      const auto* p = bytes.ptr<unsigned char>(r);
      for (int k = 0; k < bytes.cols * bytes.channels(); ++k) {
        e.features.push_back(spec.clamp.lo + spec.clamp.width() * (p[k] / 255.0));
      }
    }
    e.label = parse_int_field(fields[1], "label", row);
    const auto group = parse_int_field(fields[2], "group", row);
    if (!group) throw IngestionError(fmt::format("manifest row {}: missing group value", row));
    e.group = *group;
    splits.push_back(fields.size() == 4 ? parse_split_field(fields[3], row) : std::nullopt);
    examples.push_back(std::move(e));
    ++row;
  }
  return finish_bundle(std::move(examples), std::move(splits), spec);
}

namespace {

struct GaussianCell {
  std::vector<double> mean;  // latent units
};

// Latent vectors are mapped to features as lo + width * clip(0.5 + kScale * v).
constexpr double kLatentScale = 0.09;

double to_feature(double latent, ClampRange clamp) {
  const double t = std::clamp(0.5 + kLatentScale * latent, 0.0, 1.0);
  return clamp.lo + clamp.width() * t;
}

DatasetBundle generate_two_group_gaussians(const IngestionSpec& spec) {
  if (spec.dim < 3) throw ConfigError("two-group-gaussians needs dim >= 3");
  Rng rng = make_rng(spec.seed, "synthetic/two-group-gaussians");
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr double kMinorityShare = 0.3;

  std::vector<Example> examples;
  examples.reserve(static_cast<std::size_t>(spec.num_samples));
  for (std::int64_t i = 0; i < spec.num_samples; ++i) {
    Example e;
    e.id = i;
    e.group = unit(rng) < kMinorityShare ? 1 : 0;
    e.label = unit(rng) < 0.5 ? 1 : 0;
    const double sign = *e.label == 1 ? 1.0 : -1.0;
    std::vector<double> v(static_cast<std::size_t>(spec.dim));
    for (double& x : v) x = noise(rng);
    if (e.group == 0) {
      // Majority: well separated along axis 0.
      v[0] += 1.4 * sign;
      v[2] -= 1.0;
    } else {
      // Minority: weaker separation along a different axis, so the boundary
      // learned from majority samples transfers poorly.
      v[1] += 1.0 * sign;
      v[0] += 0.3 * sign;
      v[2] += 1.0;
    }
    for (double x : v) e.features.push_back(to_feature(x, spec.clamp));
    examples.push_back(std::move(e));
  }
  std::vector<std::optional<Split>> none(examples.size());
  return finish_bundle(std::move(examples), std::move(none), spec);
}

DatasetBundle generate_two_group_imbalanced(const IngestionSpec& spec) {
  if (spec.dim < 5) throw ConfigError("two-group-imbalanced needs dim >= 5");
  Rng rng = make_rng(spec.seed, "synthetic/two-group-imbalanced");
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr double kMinorityShare = 0.35;
  const std::array<std::array<double, 4>, 2> priors{{{0.45, 0.30, 0.17, 0.08},
                                                    {0.60, 0.25, 0.10, 0.05}}};
  const std::array<double, 2> separation{1.8, 1.3};

  std::vector<Example> examples;
  examples.reserve(static_cast<std::size_t>(spec.num_samples));
  for (std::int64_t i = 0; i < spec.num_samples; ++i) {
    Example e;
    e.id = i;
    e.group = unit(rng) < kMinorityShare ? 1 : 0;
    const double u = unit(rng);
    double acc = 0.0;
    int label = 3;
    for (int c = 0; c < 4; ++c) {
      acc += priors[e.group][c];
      if (u < acc) {
        label = c;
        break;
      }
    }
    e.label = label;
    std::vector<double> v(static_cast<std::size_t>(spec.dim));
    for (double& x : v) x = noise(rng);
    v[label] += separation[e.group];
    v[4] += e.group == 0 ? -1.0 : 1.0;
    for (double x : v) e.features.push_back(to_feature(x, spec.clamp));
    examples.push_back(std::move(e));
  }
  std::vector<std::optional<Split>> none(examples.size());
  return finish_bundle(std::move(examples), std::move(none), spec);
}

}  // namespace

std::vector<std::string> synthetic_generator_names() {
  return {"two-group-gaussians", "two-group-imbalanced"};
}

DatasetBundle generate_synthetic(const IngestionSpec& spec) {
  if (spec.num_samples < 1) throw ConfigError("synthetic num_samples must be >= 1");
  if (spec.generator == "two-group-gaussians") return generate_two_group_gaussians(spec);
  if (spec.generator == "two-group-imbalanced") return generate_two_group_imbalanced(spec);
  throw ConfigError(fmt::format("unknown synthetic generator '{}'", spec.generator));
}

DatasetBundle load_dataset(const IngestionSpec& spec) {
  if (spec.clamp.hi <= spec.clamp.lo) throw ConfigError("clamp range must have hi > lo");
  switch (spec.kind) {
    case IngestionSpec::Kind::kTabular:
      return load_tabular(spec);
    case IngestionSpec::Kind::kImageManifest:
      return load_image_manifest(spec);
    case IngestionSpec::Kind::kSynthetic:
      return generate_synthetic(spec);
  }
  throw ConfigError("unknown ingestion kind");
}

}  // namespace fral
