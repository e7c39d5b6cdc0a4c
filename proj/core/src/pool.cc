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

#include "fral/pool.h"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "fral/errors.h"
#include "fral/random.h"

namespace fral {

bool PoolState::is_labeled(SampleId id) const {
  return std::binary_search(labeled_.begin(), labeled_.end(), id);
}

bool PoolState::is_unlabeled(SampleId id) const {
  return std::binary_search(unlabeled_.begin(), unlabeled_.end(), id);
}

void PoolState::check_partition(std::span<const SampleId> train) const {
  std::vector<SampleId> sorted_train(train.begin(), train.end());
  std::sort(sorted_train.begin(), sorted_train.end());
  std::vector<SampleId> both;
  std::set_intersection(labeled_.begin(), labeled_.end(), unlabeled_.begin(),
                        unlabeled_.end(), std::back_inserter(both));
  if (!both.empty()) {
    throw ValidationError(fmt::format("sample {} is both labeled and unlabeled", both.front()));
  }
  std::vector<SampleId> all;
  std::merge(labeled_.begin(), labeled_.end(), unlabeled_.begin(), unlabeled_.end(),
             std::back_inserter(all));
  if (all != sorted_train) {
    throw ValidationError("labeled and unlabeled pools do not cover the train split");
  }
}

PoolState init_pools(const DatasetBundle& bundle, double labeled_fraction,
                     std::uint64_t seed) {
  if (!(labeled_fraction > 0.0 && labeled_fraction < 1.0)) {
    throw ConfigError(fmt::format("labeled_fraction must be in (0, 1), got {}",
                                  labeled_fraction));
  }
  const auto& train = bundle.train;
  const auto target = static_cast<std::size_t>(
      std::llround(labeled_fraction * static_cast<double>(train.size())));
  std::vector<SampleId> eligible;
  for (SampleId id : train) {
    if (bundle.labels[id] != kNoLabel) eligible.push_back(id);
  }
  if (target == 0) throw ValidationError("labeled_fraction yields an empty labeled pool");
  if (target > eligible.size()) {
    throw ValidationError(fmt::format("need {} labeled samples but only {} have ground truth",
                                      target, eligible.size()));
  }

  Rng rng = make_rng(seed, "init-pools");
  std::shuffle(eligible.begin(), eligible.end(), rng);

  // First shuffled member of each (class, group) cell, cells in random order.
  std::map<std::pair<ClassId, GroupId>, SampleId> first_of_cell;
  for (SampleId id : eligible) first_of_cell.try_emplace({bundle.labels[id], bundle.groups[id]}, id);
  std::vector<SampleId> seeds;
  for (const auto& [cell, id] : first_of_cell) seeds.push_back(id);
  std::shuffle(seeds.begin(), seeds.end(), rng);
  if (seeds.size() > target) seeds.resize(target);

  std::vector<SampleId> chosen = seeds;
  std::sort(seeds.begin(), seeds.end());
  for (SampleId id : eligible) {
    if (chosen.size() == target) break;
    if (!std::binary_search(seeds.begin(), seeds.end(), id)) chosen.push_back(id);
  }

  PoolState pool;
  pool.labeled_ = std::move(chosen);
  std::sort(pool.labeled_.begin(), pool.labeled_.end());
  for (SampleId id : train) {
    if (!std::binary_search(pool.labeled_.begin(), pool.labeled_.end(), id)) {
      pool.unlabeled_.push_back(id);
    }
  }
  std::sort(pool.unlabeled_.begin(), pool.unlabeled_.end());
  pool.log_.push_back({0, pool.labeled_});
  return pool;
}

std::vector<SampleId> group_subset(const PoolState& pool, const DatasetBundle& bundle,
                                   GroupId z) {
  if (z < 0 || z >= bundle.num_groups) {
    throw ValidationError(fmt::format("unknown group id {}", z));
  }
  std::vector<SampleId> out;
  for (SampleId id : pool.unlabeled()) {
    if (bundle.groups[id] == z) out.push_back(id);
  }
  return out;
}

PoolState acquire_labels(const PoolState& pool, const DatasetBundle& bundle,
                         std::span<const SampleId> ids, int round) {
  std::vector<SampleId> batch(ids.begin(), ids.end());
  std::sort(batch.begin(), batch.end());
  if (std::adjacent_find(batch.begin(), batch.end()) != batch.end()) {
    throw ValidationError("acquisition batch contains duplicate ids");
  }
  for (SampleId id : batch) {
    if (id < 0 || id >= bundle.size()) {
      throw ValidationError(fmt::format("acquisition rejected: unknown id {}", id));
    }
    if (pool.is_labeled(id)) {
      throw ValidationError(fmt::format("acquisition rejected: id {} already labeled", id));
    }
    if (!pool.is_unlabeled(id)) {
      throw ValidationError(fmt::format("acquisition rejected: id {} not in the unlabeled pool", id));
    }
    if (bundle.labels[id] == kNoLabel) {
      throw ValidationError(fmt::format("acquisition rejected: id {} has no ground truth", id));
    }
  }

  PoolState next = pool;
  std::vector<SampleId> labeled;
  std::merge(pool.labeled_.begin(), pool.labeled_.end(), batch.begin(), batch.end(),
             std::back_inserter(labeled));
  std::vector<SampleId> unlabeled;
  std::set_difference(pool.unlabeled_.begin(), pool.unlabeled_.end(), batch.begin(),
                      batch.end(), std::back_inserter(unlabeled));
  next.labeled_ = std::move(labeled);
  next.unlabeled_ = std::move(unlabeled);
  next.log_.push_back({round, std::vector<SampleId>(ids.begin(), ids.end())});
  return next;
}

LabeledView labeled_view(const PoolState& pool, const DatasetBundle& bundle) {
  LabeledView view;
  view.ids = pool.labeled();
  view.labels.reserve(view.ids.size());
  for (SampleId id : view.ids) view.labels.push_back(bundle.labels[id]);
  return view;
}

std::vector<std::size_t> oversample_by_class(const LabeledView& view, std::uint64_t seed) {
  if (view.ids.empty()) throw ValidationError("cannot oversample an empty labeled set");
  std::map<ClassId, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < view.labels.size(); ++i) by_class[view.labels[i]].push_back(i);
  std::size_t max_count = 0;
  for (const auto& [c, members] : by_class) max_count = std::max(max_count, members.size());

  Rng rng = make_rng(seed, "oversample");
  std::vector<std::size_t> out;
  out.reserve(max_count * by_class.size());
  for (const auto& [c, members] : by_class) {
    out.insert(out.end(), members.begin(), members.end());
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    for (std::size_t k = members.size(); k < max_count; ++k) out.push_back(members[pick(rng)]);
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace fral
