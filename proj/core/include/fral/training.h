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

#ifndef FRAL_TRAINING_H_
#define FRAL_TRAINING_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fral/dataset.h"
#include "fral/model.h"
#include "fral/pool.h"

namespace fral {

enum class OptimizerKind { kSgd, kAdam };

OptimizerKind parse_optimizer(std::string_view name);
const char* optimizer_name(OptimizerKind kind);

struct TrainConfig {
  int epochs = 30;
  int batch_size = 64;
  double learning_rate = 1e-2;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double momentum = 0.9;  // sgd only
  std::uint64_t seed = 0;
  bool oversample = false;

  // Throws ConfigError. Zero epochs is allowed (returns the initial model).
  void validate() const;
};

// Materialized training samples.
struct TrainingSet {
  Eigen::MatrixXd features;
  std::vector<ClassId> labels;
};

TrainingSet make_training_set(const DatasetBundle& bundle, const LabeledView& view);

// Loss of one minibatch under `model`; writes the parameter gradient.
using BatchObjective = std::function<double(
    const ClassifierSnapshot& model, const Eigen::MatrixXd& x, std::span<const ClassId> y,
    std::uint64_t batch_seed, Eigen::VectorXd* grad)>;

// Minibatch first-order optimization shared by standard and adversarial
// training. Each epoch visits a seeded permutation of the (optionally
// oversampled) training set. A non-finite loss or parameter raises
// TrainingError naming the epoch.
Eigen::VectorXd optimize(const ClassifierSnapshot& init, const TrainingSet& data,
                         const TrainConfig& cfg, const BatchObjective& objective);

// Cross-entropy training. The result is tagged `standard`.
ClassifierSnapshot train_standard(const ClassifierSnapshot& init, const TrainingSet& data,
                                  const TrainConfig& cfg, int round = 0);

// From-scratch variant: initializes `arch` from cfg.seed first.
ClassifierSnapshot train_standard(const Architecture& arch, const TrainingSet& data,
                                  const TrainConfig& cfg, int round = 0);

// Mean cross-entropy of the model over the whole set.
double dataset_cross_entropy(const ClassifierSnapshot& model, const TrainingSet& data);

}  // namespace fral

#endif  // FRAL_TRAINING_H_
