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

#include "fral/active_loop.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <glog/logging.h>

#include "fral/random.h"

namespace fral {

void ExperimentConfig::validate() const {
  if (name.empty()) throw ConfigError("name must not be empty");
  train.validate();
  robust_train.validate();
  attack.validate();
  if (rounds < 1) throw ConfigError("rounds must be >= 1");
  if (!(budget > 0.0)) throw ConfigError("budget must be > 0");
  if (budget >= 1.0 && budget != std::floor(budget)) {
    throw ConfigError(fmt::format("absolute budget must be an integer, got {}", budget));
  }
  if (!(labeled_fraction > 0.0 && labeled_fraction < 1.0)) {
    throw ConfigError("labeled_fraction must be in (0, 1)");
  }
}

RoundSeeds round_seeds(std::uint64_t master, int round) {
  const auto k = static_cast<std::uint64_t>(round);
  return RoundSeeds{
      .robust_train = derive_seed(master, "adv-train", k),
      .standard_train = derive_seed(master, "std-train", k),
      .selection = derive_seed(master, "select", k),
      .score_attack = derive_seed(master, "score-attack", k),
      .eval_attack = derive_seed(master, "eval-attack", k),
  };
}

std::uint64_t pool_seed(std::uint64_t master) { return derive_seed(master, "pool"); }

int resolve_budget(double budget, std::int64_t train_size) {
  double resolved = 0.0;
  if (budget > 0.0 && budget < 1.0) {
    resolved = std::round(budget * static_cast<double>(train_size));
  } else if (budget >= 1.0 && budget == std::floor(budget)) {
    resolved = budget;
  } else {
    throw ConfigError(fmt::format("budget must be a fraction in (0, 1) or an integer >= 1, got {}",
                                  budget));
  }
  if (resolved < 1.0) {
    throw ConfigError(fmt::format("budget {} of {} training samples resolves to {} (< 1)", budget,
                                  train_size, resolved));
  }
  return static_cast<int>(resolved);
}

void SectionTimes::record(const std::string& label, double seconds) {
  if (!seconds_.emplace(label, std::max(seconds, 0.0)).second) {
    throw std::logic_error(fmt::format("section '{}' timed twice in one round", label));
  }
}

double SectionTimes::seconds(const std::string& label) const {
  const auto it = seconds_.find(label);
  return it == seconds_.end() ? 0.0 : it->second;
}

RunError::RunError(int round, const std::string& what)
    : Error(fmt::format("round {}: {}", round, what)), round_(round) {}

namespace {

FairnessReport evaluate(const ClassifierSnapshot& model, const DatasetBundle& bundle, Split split,
                        const ExperimentConfig& cfg, std::uint64_t attack_seed) {
  return aggregate(evaluate_groups(model, bundle, split, &cfg.attack, attack_seed, cfg.metric));
}

// Robust training config for one round: seeded per round, attack clamp
// matching the dataset.
RobustTrainConfig robust_config(const ExperimentConfig& cfg, const DatasetBundle& bundle,
                                std::uint64_t seed) {
  RobustTrainConfig rc = cfg.robust_train;
  rc.train.seed = seed;
  rc.attack.clamp = bundle.clamp;
  return rc;
}

class Loop {
 public:
  Loop(const ExperimentConfig& cfg, const DatasetBundle& bundle, RunObserver* observer)
      : cfg_(cfg), bundle_(bundle), observer_(observer) {}

  FralResult run(const PoolState* initial) {
    FralResult result;
    if (initial != nullptr) {
      initial->check_partition(bundle_.train);
      result.pool = *initial;
    } else {
      result.pool = init_pools(bundle_, cfg_.labeled_fraction, pool_seed(cfg_.seed));
    }
    result.budget = resolve_budget(cfg_.budget, static_cast<std::int64_t>(bundle_.train.size()));
    arch_ = resolve_architecture(cfg_.architecture, bundle_.feature_dim(), bundle_.num_classes);
    if (observer_ != nullptr) observer_->on_start(cfg_, bundle_, result.pool, result.budget);

    ClassifierSnapshot robust = initialize(result);
    for (int k = 1; k <= cfg_.rounds; ++k) {
      try {
        RoundReport report = round(k, result, robust);
        if (observer_ != nullptr) observer_->on_round(report, robust);
        result.rounds.push_back(std::move(report));
      } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("round {}: {}", k, e.what()));
      } catch (const RunError&) {
        throw;
      } catch (const std::exception& e) {
        throw RunError(k, e.what());
      }
    }
    result.final_model = std::move(robust);
    return result;
  }

 private:
  ClassifierSnapshot initialize(FralResult& result) {
    try {
      const RoundSeeds seeds = round_seeds(cfg_.seed, 0);
      InitReport& init = result.init;
      init.labeled = result.pool.labeled();
      const TrainingSet data = make_training_set(bundle_, labeled_view(result.pool, bundle_));
      const RobustTrainConfig rc = robust_config(cfg_, bundle_, seeds.robust_train);
      auto [robust, seconds] = time_section(init.times, kAdvTrainSection, [&] {
        return train_adversarial(ClassifierSnapshot::initialize(arch_, derive_seed(seeds.robust_train, "init")),
                                 data, rc, /*warm_start=*/false, 0);
      });
      init.validation = evaluate(robust, bundle_, Split::kValidation, cfg_, seeds.eval_attack);
      const SplitPredictions test =
          predict_split(robust, bundle_, Split::kTest, &cfg_.attack, seeds.eval_attack);
      init.test = aggregate(group_metrics(test, bundle_.num_groups, bundle_.num_classes, cfg_.metric));
      init.per_class = per_class_scores(test, bundle_.num_groups, bundle_.num_classes);
      LOG(INFO) << "init: |D_L|=" << init.labeled.size() << " F_std=" << init.test.f_std
                << " F_rob=" << init.test.f_rob.value_or(0.0) << " (" << seconds << "s)";
      if (observer_ != nullptr) observer_->on_initialized(init, robust);
      return robust;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw RunError(0, e.what());
    }
  }

  RoundReport round(int k, FralResult& result, ClassifierSnapshot& robust) {
    RoundReport report;
    report.round = k;
    report.strategy = cfg_.strategy;
    report.budget = result.budget;
    report.seeds = round_seeds(cfg_.seed, k);
    const RoundSeeds& seeds = report.seeds;

    // Worst group from the current robust model on D_V, recomputed every round.
    report.validation_before = evaluate(robust, bundle_, Split::kValidation, cfg_, seeds.eval_attack);
    ++result.worst_group_evaluations;
    report.worst_group = worst_group(report.validation_before, cfg_.worst_group_mode);
    report.test_before = evaluate(robust, bundle_, Split::kTest, cfg_, seeds.eval_attack);

    std::vector<SampleId> candidates = is_group_aware(cfg_.strategy)
                                           ? group_subset(result.pool, bundle_, report.worst_group)
                                           : result.pool.unlabeled();
    report.candidate_count = static_cast<std::int64_t>(candidates.size());
    if (candidates.empty()) {
      throw ValidationError(fmt::format("no unlabeled candidates left for group {}",
                                        report.worst_group));
    }

    auto [selection, seconds] = time_section(report.times, kSelectionSection, [&] {
      std::optional<ClassifierSnapshot> standard;
      if (needs_standard_model(cfg_.strategy)) {
        time_section(report.times, kStdTrainSection, [&] {
          TrainConfig tc = cfg_.train;
          tc.seed = seeds.standard_train;
          standard = train_standard(arch_, make_training_set(bundle_, labeled_view(result.pool, bundle_)),
                                    tc, k);
        });
      }
      SelectionRequest req;
      req.features = &bundle_.features;
      req.groups = bundle_.groups;
      req.candidates = candidates;
      req.labeled = result.pool.labeled();
      req.budget = result.budget;
      req.standard = standard ? &*standard : nullptr;
      req.robust = &robust;
      req.attack = cfg_.attack;
      req.attack.clamp = bundle_.clamp;
      req.seed = seeds.selection;
      req.attack_seed = seeds.score_attack;
      return select(cfg_.strategy, req);
    });

    if (is_group_aware(cfg_.strategy)) {
      for (SampleId id : selection.selected) {
        if (bundle_.groups[id] != report.worst_group) {
          throw std::logic_error(fmt::format("{} selected id {} outside worst group {}",
                                             strategy_name(cfg_.strategy), id, report.worst_group));
        }
      }
    }

    const std::size_t before = result.pool.labeled().size();
    result.pool = acquire_labels(result.pool, bundle_, selection.selected, k);
    result.pool.check_partition(bundle_.train);
    if (result.pool.labeled().size() != before + selection.selected.size()) {
      throw std::logic_error("labeled pool did not grow by the acquired count");
    }
    report.selected = selection.selected;
    for (SampleId id : report.selected) {
      report.selected_groups.push_back(bundle_.groups[id]);
      report.selected_labels.push_back(bundle_.labels[id]);
    }
    report.scores = std::move(selection.scores);
    report.labeled_count = static_cast<std::int64_t>(result.pool.labeled().size());

    const TrainingSet data = make_training_set(bundle_, labeled_view(result.pool, bundle_));
    const RobustTrainConfig rc = robust_config(cfg_, bundle_, seeds.robust_train);
    robust = time_section(report.times, kAdvTrainSection, [&] {
      if (rc.retrain_from_scratch) {
        return train_adversarial(ClassifierSnapshot::initialize(arch_, derive_seed(seeds.robust_train, "init")),
                                 data, rc, /*warm_start=*/false, k);
      }
      return train_adversarial(robust, data, rc, /*warm_start=*/true, k);
    }).first;

    report.validation_after = evaluate(robust, bundle_, Split::kValidation, cfg_, seeds.eval_attack);
    const SplitPredictions test =
        predict_split(robust, bundle_, Split::kTest, &cfg_.attack, seeds.eval_attack);
    report.test_after = aggregate(group_metrics(test, bundle_.num_groups, bundle_.num_classes, cfg_.metric));
    report.per_class = per_class_scores(test, bundle_.num_groups, bundle_.num_classes);
    LOG(INFO) << "round " << k << " " << strategy_name(cfg_.strategy) << ": z*=" << report.worst_group
              << " selected=" << report.selected.size() << " |D_L|=" << report.labeled_count
              << " F_std=" << report.test_after.f_std
              << " F_rob=" << report.test_after.f_rob.value_or(0.0) << " selection=" << seconds << "s";
    return report;
  }

  const ExperimentConfig& cfg_;
  const DatasetBundle& bundle_;
  RunObserver* observer_;
  Architecture arch_;
};

}  // namespace

FralResult run_fral(const ExperimentConfig& cfg, const DatasetBundle& bundle,
                    RunObserver* observer) {
  cfg.validate();
  return Loop(cfg, bundle, observer).run(nullptr);
}

FralResult run_fral(const ExperimentConfig& cfg, const DatasetBundle& bundle,
                    const PoolState& initial, RunObserver* observer) {
  cfg.validate();
  return Loop(cfg, bundle, observer).run(&initial);
}

FralResult run_fral(const ExperimentConfig& cfg, RunObserver* observer) {
  cfg.validate();
  const DatasetBundle bundle = load_dataset(cfg.dataset);
  return run_fral(cfg, bundle, observer);
}

}  // namespace fral
