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

#include "fral/training.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "fral/errors.h"
#include "fral/random.h"

namespace fral {

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw ConfigError(fmt::format("unknown optimizer '{}' (expected sgd or adam)", name));
}

const char* optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0, 1)");
}

TrainingSet make_training_set(const DatasetBundle& bundle, const LabeledView& view) {
  TrainingSet set;
  set.features = bundle.gather(view.ids);
  set.labels = view.labels;
  return set;
}

namespace {

class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, Eigen::Index size)
      : cfg_(cfg),
        first_(Eigen::VectorXd::Zero(size)),
        second_(Eigen::VectorXd::Zero(size)) {}

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    ++t_;
    if (cfg_.optimizer == OptimizerKind::kSgd) {
      first_ = cfg_.momentum * first_ + grad;
      params -= cfg_.learning_rate * first_;
      return;
    }
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    first_ = kBeta1 * first_ + (1.0 - kBeta1) * grad;
    second_ = kBeta2 * second_ + (1.0 - kBeta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    params.array() -= cfg_.learning_rate * (first_.array() / c1) /
                      ((second_.array() / c2).sqrt() + kEps);
  }

 private:
  const TrainConfig& cfg_;
  Eigen::VectorXd first_;
  Eigen::VectorXd second_;
  int t_ = 0;
};

}  // namespace

Eigen::VectorXd optimize(const ClassifierSnapshot& init, const TrainingSet& data,
                         const TrainConfig& cfg, const BatchObjective& objective) {
  cfg.validate();
  Eigen::VectorXd params = init.parameters();
  if (cfg.epochs == 0) return params;
  if (data.labels.empty()) throw TrainingError("training set is empty");

  std::vector<std::size_t> order;
  if (cfg.oversample) {
    order = oversample_by_class(LabeledView{std::vector<SampleId>(data.labels.size()), data.labels},
                                derive_seed(cfg.seed, "oversample"));
  } else {
    order.resize(data.labels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
  }

  Optimizer opt(cfg, params.size());
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng = make_rng(cfg.seed, "epoch", static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0, b = 0; start < order.size(); start += batch, ++b) {
      const std::size_t end = std::min(order.size(), start + batch);
      Eigen::MatrixXd xb(static_cast<Eigen::Index>(end - start), data.features.cols());
      std::vector<ClassId> yb(end - start);
      for (std::size_t k = start; k < end; ++k) {
        xb.row(static_cast<Eigen::Index>(k - start)) =
            data.features.row(static_cast<Eigen::Index>(order[k]));
        yb[k - start] = data.labels[order[k]];
      }
      const ClassifierSnapshot current = init.with_parameters(params, init.info());
      Eigen::VectorXd grad;
      const std::uint64_t batch_seed =
          derive_seed(derive_seed(cfg.seed, "batch", static_cast<std::uint64_t>(epoch)), "index", b);
      const double loss = objective(current, xb, yb, batch_seed, &grad);
      if (!std::isfinite(loss) || !grad.allFinite()) {
        throw TrainingError(fmt::format("non-finite loss at epoch {} (batch {})", epoch, b));
      }
      opt.step(params, grad);
    }
    if (!params.allFinite()) {
      throw TrainingError(fmt::format("non-finite parameters after epoch {}", epoch));
    }
  }
  return params;
}

ClassifierSnapshot train_standard(const ClassifierSnapshot& init, const TrainingSet& data,
                                  const TrainConfig& cfg, int round) {
  const BatchObjective objective = [](const ClassifierSnapshot& model, const Eigen::MatrixXd& x,
                                      std::span<const ClassId> y, std::uint64_t,
                                      Eigen::VectorXd* grad) {
    const ForwardCache cache = model.forward(x);
    Eigen::MatrixXd dlogits;
    const double loss = cross_entropy(cache.logits, y, &dlogits);
    *grad = model.parameter_gradient(cache, dlogits);
    return loss;
  };
  Eigen::VectorXd params = optimize(init, data, cfg, objective);
  return init.with_parameters(std::move(params),
                              SnapshotInfo{TrainingMode::kStandard, cfg.seed, round});
}

ClassifierSnapshot train_standard(const Architecture& arch, const TrainingSet& data,
                                  const TrainConfig& cfg, int round) {
  return train_standard(ClassifierSnapshot::initialize(arch, derive_seed(cfg.seed, "init")), data,
                        cfg, round);
}

double dataset_cross_entropy(const ClassifierSnapshot& model, const TrainingSet& data) {
  return cross_entropy(model.logits(data.features), data.labels);
}

}  // namespace fral
