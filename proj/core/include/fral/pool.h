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

#ifndef FRAL_POOL_H_
#define FRAL_POOL_H_

#include <cstdint>
#include <span>
#include <vector>

#include "fral/dataset.h"

namespace fral {

struct Acquisition {
  int round = 0;
  std::vector<SampleId> ids;
};

// Labeled / unlabeled partition of the train split.
//
// Both index sets are kept sorted. The state is a value: acquire_labels
// returns a new PoolState and leaves its argument untouched.
class PoolState {
 public:
  PoolState() = default;

  const std::vector<SampleId>& labeled() const { return labeled_; }
  const std::vector<SampleId>& unlabeled() const { return unlabeled_; }
  const std::vector<Acquisition>& acquisition_log() const { return log_; }

  bool is_labeled(SampleId id) const;
  bool is_unlabeled(SampleId id) const;

  // Throws ValidationError unless labeled and unlabeled are disjoint and
  // their union is exactly `train`.
  void check_partition(std::span<const SampleId> train) const;

 private:
  friend PoolState init_pools(const DatasetBundle&, double, std::uint64_t);
  friend PoolState acquire_labels(const PoolState&, const DatasetBundle&,
                                  std::span<const SampleId>, int);

  std::vector<SampleId> labeled_;
  std::vector<SampleId> unlabeled_;
  std::vector<Acquisition> log_;
};

// Random labeled subset of the train split of size
// round(labeled_fraction * |train|). One sample per (class, group) cell is
// drawn first while capacity allows; the rest is uniform. Only train samples
// that carry ground truth are eligible for the initial labeled set.
PoolState init_pools(const DatasetBundle& bundle, double labeled_fraction,
                     std::uint64_t seed);

// Unlabeled ids whose group equals z. Empty when the group has no unlabeled
// members; throws ValidationError for z outside [0, |Z|).
std::vector<SampleId> group_subset(const PoolState& pool, const DatasetBundle& bundle,
                                   GroupId z);

// Moves `ids` from unlabeled to labeled and appends to the acquisition log.
// The batch is rejected as a whole (ValidationError, pool untouched) if any
// id is unknown, already labeled, duplicated, or has no ground truth.
PoolState acquire_labels(const PoolState& pool, const DatasetBundle& bundle,
                         std::span<const SampleId> ids, int round);

// Labeled samples with their revealed labels.
struct LabeledView {
  std::vector<SampleId> ids;
  std::vector<ClassId> labels;
};

LabeledView labeled_view(const PoolState& pool, const DatasetBundle& bundle);

// Indices into `view` in which every present class occurs max-class-count
// times: all originals plus draws with replacement for minority classes,
// shuffled by `seed`.
std::vector<std::size_t> oversample_by_class(const LabeledView& view, std::uint64_t seed);

}  // namespace fral

#endif  // FRAL_POOL_H_
