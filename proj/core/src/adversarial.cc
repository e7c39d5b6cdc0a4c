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

#include "fral/adversarial.h"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "fral/errors.h"
#include "fral/random.h"

namespace fral {

AttackInit parse_attack_init(std::string_view name) {
  if (name == "zero") return AttackInit::kZero;
  if (name == "uniform") return AttackInit::kUniform;
  throw ConfigError(fmt::format("unknown attack init '{}' (expected zero or uniform)", name));
}

AttackObjective parse_attack_objective(std::string_view name) {
  if (name == "cross-entropy") return AttackObjective::kCrossEntropy;
  if (name == "kl-to-benign") return AttackObjective::kKlToBenign;
  throw ConfigError(
      fmt::format("unknown attack objective '{}' (expected cross-entropy or kl-to-benign)", name));
}

const char* attack_init_name(AttackInit init) {
  return init == AttackInit::kZero ? "zero" : "uniform";
}

const char* attack_objective_name(AttackObjective objective) {
  return objective == AttackObjective::kCrossEntropy ? "cross-entropy" : "kl-to-benign";
}

double parse_fraction(std::string_view text) {
  const auto parse_double = [&](std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
      throw ConfigError(fmt::format("cannot parse number '{}'", text));
    }
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_double(text);
  const double num = parse_double(text.substr(0, slash));
  const double den = parse_double(text.substr(slash + 1));
  if (den == 0.0) throw ConfigError(fmt::format("zero denominator in '{}'", text));
  return num / den;
}

void AttackConfig::validate() const {
  if (!(epsilon >= 0.0)) throw ConfigError("attack epsilon must be >= 0");
  if (!(step_size > 0.0)) throw ConfigError("attack step_size must be > 0");
  if (num_steps < 1) throw ConfigError("attack num_steps must be >= 1");
  if (!(clamp.hi > clamp.lo)) throw ConfigError("attack clamp range must have hi > lo");
}

void RobustTrainConfig::validate() const {
  train.validate();
  attack.validate();
  if (finetune_epochs < 0) throw ConfigError("finetune_epochs must be >= 0");
  if (!(trades_beta >= 0.0)) throw ConfigError("trades_beta must be >= 0");
}

Eigen::RowVectorXd random_start(const Eigen::Ref<const Eigen::RowVectorXd>& x, double epsilon,
                                ClampRange clamp, std::uint64_t seed) {
  Eigen::RowVectorXd out = x;
  if (epsilon > 0.0) {
    Rng rng(seed);
    std::uniform_real_distribution<double> noise(-epsilon, epsilon);
    for (Eigen::Index j = 0; j < out.size(); ++j) out[j] += noise(rng);
  }
  return out.cwiseMax(clamp.lo).cwiseMin(clamp.hi);
}

std::vector<std::uint64_t> row_seeds(std::uint64_t seed, Eigen::Index rows) {
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(rows));
  for (Eigen::Index i = 0; i < rows; ++i) {
    seeds[i] = derive_seed(seed, "pgd-row", static_cast<std::uint64_t>(i));
  }
  return seeds;
}

Eigen::MatrixXd pgd_attack(const ClassifierSnapshot& model, const Eigen::MatrixXd& x,
                           std::span<const ClassId> labels, const AttackConfig& cfg,
                           std::span<const std::uint64_t> seeds) {
  cfg.validate();
  if (x.cols() != model.input_dim()) {
    throw ShapeError(fmt::format("attack input has {} features, model expects {}", x.cols(),
                                 model.input_dim()));
  }
  const bool needs_labels = cfg.objective == AttackObjective::kCrossEntropy;
  if (needs_labels && static_cast<Eigen::Index>(labels.size()) != x.rows()) {
    throw ShapeError("cross-entropy attack requires one label per row");
  }
  if (cfg.init == AttackInit::kUniform && static_cast<Eigen::Index>(seeds.size()) != x.rows()) {
    throw ShapeError("uniform-init attack requires one seed per row");
  }

  const Eigen::MatrixXd lower = (x.array() - cfg.epsilon).cwiseMax(cfg.clamp.lo).matrix();
  const Eigen::MatrixXd upper = (x.array() + cfg.epsilon).cwiseMin(cfg.clamp.hi).matrix();

  Eigen::MatrixXd adv = x.cwiseMax(cfg.clamp.lo).cwiseMin(cfg.clamp.hi);
  if (cfg.init == AttackInit::kUniform) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      adv.row(i) = random_start(x.row(i), cfg.epsilon, cfg.clamp, seeds[i]);
    }
  }
  adv = adv.cwiseMax(lower).cwiseMin(upper);
  if (cfg.epsilon == 0.0) return adv;

  Eigen::MatrixXd benign_probs;
  if (!needs_labels) benign_probs = predict_proba(model, x);

  for (int step = 0; step < cfg.num_steps; ++step) {
    const ForwardCache cache = model.forward(adv);
    Eigen::MatrixXd dlogits = softmax_rows(cache.logits);
    if (needs_labels) {
      for (Eigen::Index i = 0; i < x.rows(); ++i) dlogits(i, labels[i]) -= 1.0;
    } else {
      dlogits -= benign_probs;  // d KL(p || q) / d logits_q = q - p
    }
    const Eigen::MatrixXd grad = model.input_gradient(cache, dlogits);
    adv += cfg.step_size * grad.array().sign().matrix();
    adv = adv.cwiseMax(lower).cwiseMin(upper);
  }
  return adv;
}

Eigen::MatrixXd pgd_attack(const ClassifierSnapshot& model, const Eigen::MatrixXd& x,
                           std::span<const ClassId> labels, const AttackConfig& cfg,
                           std::uint64_t seed) {
  return pgd_attack(model, x, labels, cfg, row_seeds(seed, x.rows()));
}

TradesTerms trades_terms(const ClassifierSnapshot& model, const Eigen::MatrixXd& x,
                         std::span<const ClassId> y, const Eigen::MatrixXd& x_adv, double beta,
                         Eigen::VectorXd* grad) {
  if (x.rows() == 0) throw ShapeError("TRADES loss needs a nonempty batch");
  const ForwardCache benign = model.forward(x);
  const ForwardCache adversarial = model.forward(x_adv);
  Eigen::MatrixXd d_ce, d_kl_benign, d_kl_adv;
  TradesTerms terms;
  terms.cross_entropy = cross_entropy(benign.logits, y, grad ? &d_ce : nullptr);
  terms.kl = kl_logits(benign.logits, adversarial.logits, grad ? &d_kl_benign : nullptr,
                       grad ? &d_kl_adv : nullptr);
  terms.total = terms.cross_entropy + beta * terms.kl;
  if (grad != nullptr) {
    *grad = model.parameter_gradient(benign, d_ce + beta * d_kl_benign);
    if (beta != 0.0) *grad += model.parameter_gradient(adversarial, beta * d_kl_adv);
  }
  return terms;
}

double trades_loss(const ClassifierSnapshot& model, const Eigen::MatrixXd& x,
                   std::span<const ClassId> y, const RobustTrainConfig& cfg, std::uint64_t seed) {
  AttackConfig inner = cfg.attack;
  inner.objective = AttackObjective::kKlToBenign;
  const Eigen::MatrixXd x_adv = pgd_attack(model, x, {}, inner, seed);
  const TradesTerms terms = trades_terms(model, x, y, x_adv, cfg.trades_beta);
  if (!std::isfinite(terms.total)) {
    throw TrainingError("non-finite TRADES loss");
  }
  return terms.total;
}

ClassifierSnapshot train_adversarial(const ClassifierSnapshot& init, const TrainingSet& data,
                                     const RobustTrainConfig& cfg, bool warm_start, int round) {
  cfg.validate();
  AttackConfig inner = cfg.attack;
  inner.objective = AttackObjective::kKlToBenign;
  const double beta = cfg.trades_beta;
  const BatchObjective objective = [&inner, beta](const ClassifierSnapshot& model,
                                                  const Eigen::MatrixXd& x,
                                                  std::span<const ClassId> y,
                                                  std::uint64_t batch_seed,
                                                  Eigen::VectorXd* grad) {
    const Eigen::MatrixXd x_adv = pgd_attack(model, x, {}, inner, batch_seed);
    return trades_terms(model, x, y, x_adv, beta, grad).total;
  };
  TrainConfig schedule = cfg.train;
  if (warm_start) schedule.epochs = cfg.finetune_epochs;
  Eigen::VectorXd params = optimize(init, data, schedule, objective);
  return init.with_parameters(std::move(params),
                              SnapshotInfo{TrainingMode::kRobust, cfg.train.seed, round});
}

double robust_accuracy(const ClassifierSnapshot& model, const Eigen::MatrixXd& x,
                       std::span<const ClassId> y, const AttackConfig& cfg, std::uint64_t seed) {
  if (x.rows() == 0) return 0.0;
  const Eigen::MatrixXd adv = pgd_attack(model, x, y, cfg, seed);
  const auto pred = predict_labels(model, adv);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == y[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

}  // namespace fral
