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

#ifndef FRAL_DATASET_H_
#define FRAL_DATASET_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fral {

// Sample ids are dense: an example's id is its row in DatasetBundle::features.
using SampleId = std::int64_t;
using GroupId = int;
using ClassId = int;

inline constexpr ClassId kNoLabel = -1;

struct ClampRange {
  double lo = 0.0;
  double hi = 1.0;

  double width() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

struct Example {
  SampleId id = 0;
  std::vector<double> features;
  std::optional<ClassId> label;
  GroupId group = 0;
};

enum class Split { kTrain, kValidation, kTest };

const char* split_name(Split split);

// A fixed dataset with disjoint train / validation / test splits.
//
// Features are stored row-major by sample id. Labels are stored for every
// sample that has ground truth; for the train split they play the role of the
// annotation oracle and are only revealed through the pool API.
struct DatasetBundle {
  Eigen::MatrixXd features;          // n x d
  std::vector<ClassId> labels;       // kNoLabel when absent
  std::vector<GroupId> groups;
  int num_classes = 0;
  int num_groups = 0;
  ClampRange clamp;
  std::vector<SampleId> train;
  std::vector<SampleId> validation;
  std::vector<SampleId> test;

  SampleId size() const { return static_cast<SampleId>(groups.size()); }
  int feature_dim() const { return static_cast<int>(features.cols()); }
  const std::vector<SampleId>& split(Split s) const;
  Example example(SampleId id) const;

  // Rows of `features` for `ids`, in order.
  Eigen::MatrixXd gather(std::span<const SampleId> ids) const;

  // Throws ValidationError when any invariant does not hold: finite features
  // inside the clamp range, labels < C, groups < |Z|, pairwise disjoint splits,
  // every group and every class present in every split.
  void validate() const;
};

// Builds a bundle from examples. Ids are reassigned to their position.
// `split_of` assigns each example to a split; its size must match `examples`.
DatasetBundle make_bundle(std::vector<Example> examples, int num_classes,
                          int num_groups, ClampRange clamp,
                          const std::vector<Split>& split_of);

struct SplitFractions {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
};

// Deterministic split assignment stratified over (class, group) cells. The
// validation and test sizes are exactly round(fraction * n); each cell is
// spread evenly over the sequence so it lands in every split when it has
// enough members.
std::vector<Split> stratified_splits(std::span<const ClassId> labels,
                                     std::span<const GroupId> groups,
                                     const SplitFractions& fractions,
                                     std::uint64_t seed);

struct IngestionSpec {
  enum class Kind { kTabular, kImageManifest, kSynthetic };

  Kind kind = Kind::kSynthetic;
  std::string path;             // tabular file or image manifest
  char delimiter = ',';
  std::string generator = "two-group-gaussians";
  std::uint64_t seed = 0;       // generator draws and split assignment
  std::int64_t num_samples = 1000;
  int dim = 8;                  // synthetic feature dimension
  SplitFractions fractions;
  ClampRange clamp;
};

// Loads, scales into the clamp range, splits and validates a dataset.
DatasetBundle load_dataset(const IngestionSpec& spec);

// Tabular ingestion: header row with `feature_*`, `label`, `group` and an
// optional `split` column (train / validation / test). Feature columns are
// min-max scaled into the clamp range. A blank label cell means "no ground
// truth"; a blank or missing group is an ingestion error.
DatasetBundle load_tabular(const IngestionSpec& spec);

// Image ingestion: manifest lines `path,label,group` (relative paths resolve
// against the manifest's directory). Images are decoded as grayscale or
// color, must share one shape, and are flattened and mapped from [0,255]
// into the clamp range.
DatasetBundle load_image_manifest(const IngestionSpec& spec);

// Named generators: "two-group-gaussians" (C=2, |Z|=2, the minority group has
// its own, harder decision boundary) and "two-group-imbalanced" (C=4 with a
// long-tailed class prior that differs per group).
DatasetBundle generate_synthetic(const IngestionSpec& spec);

std::vector<std::string> synthetic_generator_names();

}  // namespace fral

#endif  // FRAL_DATASET_H_
