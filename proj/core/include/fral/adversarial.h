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

#ifndef FRAL_ADVERSARIAL_H_
#define FRAL_ADVERSARIAL_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fral/dataset.h"
#include "fral/model.h"
#include "fral/training.h"

namespace fral {

enum class AttackInit { kZero, kUniform };
enum class AttackObjective { kCrossEntropy, kKlToBenign };

AttackInit parse_attack_init(std::string_view name);
AttackObjective parse_attack_objective(std::string_view name);
const char* attack_init_name(AttackInit init);
const char* attack_objective_name(AttackObjective objective);

// Parses "4/255", "0.0157" or "0".
double parse_fraction(std::string_view text);

// L-infinity PGD threat model. Defaults: PGD-5, eps 4/255, step 2/255.
struct AttackConfig {
  double epsilon = 4.0 / 255.0;
  double step_size = 2.0 / 255.0;
  int num_steps = 5;
  AttackInit init = AttackInit::kUniform;
  ClampRange clamp;
  AttackObjective objective = AttackObjective::kCrossEntropy;

  void validate() const;
};

// Start point of a uniform-init attack: clamp(x + U(-eps, eps)^d), drawn
// from a generator seeded with `seed`.
Eigen::RowVectorXd random_start(const Eigen::Ref<const Eigen::RowVectorXd>& x, double epsilon,
                                ClampRange clamp, std::uint64_t seed);

// Projected sign-gradient ascent. Row i of the result satisfies
// |x~ - x|_inf <= eps and lies inside cfg.clamp. `row_seeds` supplies the
// random-start seed of each row (ignored for zero init). The cross-entropy
// objective needs `labels`; the KL objective maximizes
// KL(p(x) || p(x~)) and ignores them.
Eigen::MatrixXd pgd_attack(const ClassifierSnapshot& model, const Eigen::MatrixXd& x,
                           std::span<const ClassId> labels, const AttackConfig& cfg,
                           std::span<const std::uint64_t> row_seeds);

// Convenience overload: row i uses derive_seed(seed, "pgd-row", i).
Eigen::MatrixXd pgd_attack(const ClassifierSnapshot& model, const Eigen::MatrixXd& x,
                           std::span<const ClassId> labels, const AttackConfig& cfg,
                           std::uint64_t seed);

std::vector<std::uint64_t> row_seeds(std::uint64_t seed, Eigen::Index rows);

struct RobustTrainConfig {
  TrainConfig train;
  // Epochs for warm-start rounds; train.epochs applies to from-scratch runs.
  int finetune_epochs = 10;
  double trades_beta = 6.0;
  bool retrain_from_scratch = false;
  AttackConfig attack{.clamp = {}, .objective = AttackObjective::kKlToBenign};

  void validate() const;
};

struct TradesTerms {
  double cross_entropy = 0.0;
  double kl = 0.0;
  double total = 0.0;
};

// CE(p(x), y) + beta * KL(p(x) || p(x~)) with x~ given and held fixed.
// Optional gradient w.r.t. parameters.
TradesTerms trades_terms(const ClassifierSnapshot& model, const Eigen::MatrixXd& x,
                         std::span<const ClassId> y, const Eigen::MatrixXd& x_adv, double beta,
                         Eigen::VectorXd* grad = nullptr);

// Full TRADES loss: generates x~ with the KL-to-benign inner attack of
// cfg.attack, then evaluates trades_terms. Throws TrainingError on a
// non-finite value.
double trades_loss(const ClassifierSnapshot& model, const Eigen::MatrixXd& x,
                   std::span<const ClassId> y, const RobustTrainConfig& cfg, std::uint64_t seed);

// TRADES adversarial training. When `warm_start` is true, training continues
// from `init` for cfg.finetune_epochs; otherwise it runs cfg.train.epochs.
// The result is tagged `robust`.
ClassifierSnapshot train_adversarial(const ClassifierSnapshot& init, const TrainingSet& data,
                                     const RobustTrainConfig& cfg, bool warm_start,
                                     int round = 0);

// Fraction of rows whose prediction on the attacked input equals the label.
double robust_accuracy(const ClassifierSnapshot& model, const Eigen::MatrixXd& x,
                       std::span<const ClassId> y, const AttackConfig& cfg, std::uint64_t seed);

}  // namespace fral

#endif  // FRAL_ADVERSARIAL_H_
