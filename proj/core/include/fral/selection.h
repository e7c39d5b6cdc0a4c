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

#ifndef FRAL_SELECTION_H_
#define FRAL_SELECTION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fral/adversarial.h"
#include "fral/dataset.h"
#include "fral/model.h"
#include "fral/random.h"

namespace fral {

enum class Strategy { kJin, kRand, kEnt, kCset, kBadge, kGRand };

Strategy parse_strategy(std::string_view name);
const char* strategy_name(Strategy strategy);
std::vector<Strategy> all_strategies();

// JIN and G-RAND draw from the worst group's unlabeled samples; the others
// from the whole unlabeled pool.
bool is_group_aware(Strategy strategy);
bool needs_standard_model(Strategy strategy);

struct ScoreRecord {
  SampleId id = 0;
  GroupId group = 0;
  std::optional<double> i_std;
  std::optional<double> i_rob;
  std::optional<double> joint;  // the ranking score, when the strategy has one
  bool selected = false;
};

// Everything a strategy may look at. There is deliberately no label field:
// strategies only see features, groups and models.
struct SelectionRequest {
  const Eigen::MatrixXd* features = nullptr;  // all samples, row = id
  std::span<const GroupId> groups;
  std::vector<SampleId> candidates;
  std::vector<SampleId> labeled;  // centers for CSET
  int budget = 1;
  const ClassifierSnapshot* standard = nullptr;  // M_S, JIN only
  const ClassifierSnapshot* robust = nullptr;    // M_R
  AttackConfig attack;  // evaluation threat model; I_rob forces kl-to-benign
  std::uint64_t seed = 0;
  std::uint64_t attack_seed = 0;
};

struct SelectionResult {
  std::vector<SampleId> selected;  // in rank order
  std::vector<ScoreRecord> scores;  // one per candidate, candidate order
};

// I_std(x) = KL(p(x, M_S) || p(x, M_R)).
std::vector<double> score_standard_inconsistency(const ClassifierSnapshot* standard,
                                                 const ClassifierSnapshot& robust,
                                                 const Eigen::MatrixXd& features,
                                                 std::span<const SampleId> ids);

// I_rob(x) = KL(p(x, M_R) || p(A(x, eps), M_R)) with the kl-to-benign PGD
// attack; sample `id` uses seed derive_seed(attack_seed, "sample", id).
std::vector<double> score_robust_inconsistency(const ClassifierSnapshot& robust,
                                               const Eigen::MatrixXd& features,
                                               std::span<const SampleId> ids,
                                               const AttackConfig& attack,
                                               std::uint64_t attack_seed);

// Zero mean, unit population standard deviation. Constant input maps to
// all zeros.
std::vector<double> normalize(std::span<const double> scores);

// Positions of the top-k scores; ties go to the lower id.
std::vector<std::size_t> top_k(std::span<const double> scores, std::span<const SampleId> ids,
                               std::size_t k);

SelectionResult jin_select(const SelectionRequest& req);
SelectionResult baseline_select(Strategy strategy, const SelectionRequest& req);
SelectionResult select(Strategy strategy, const SelectionRequest& req);

// Shannon entropy (nats) of each probability row.
Eigen::VectorXd entropy_rows(const Eigen::MatrixXd& probs);

// Greedy k-center: repeatedly picks the point farthest from its nearest
// center (initial centers plus earlier picks). Ties go to the lower id.
// Without initial centers the first pick is drawn from `rng`.
std::vector<std::size_t> kcenter_greedy(const Eigen::MatrixXd& points,
                                        std::span<const SampleId> ids,
                                        const Eigen::MatrixXd& centers, std::size_t k, Rng& rng);

// k-means++ seeding: uniform first center, then D^2 sampling.
std::vector<std::size_t> kmeanspp_seeding(const Eigen::MatrixXd& points, std::size_t k, Rng& rng);

// Last-layer cross-entropy gradient at the argmax pseudo-label:
// row i = vec((p_i - e_yhat) h_i^T), h_i the penultimate activation.
Eigen::MatrixXd gradient_embeddings(const ClassifierSnapshot& model, const Eigen::MatrixXd& x);

}  // namespace fral

#endif  // FRAL_SELECTION_H_
