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

#include "fral/selection.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>
#include <glog/logging.h>

#include "fral/errors.h"

namespace fral {

Strategy parse_strategy(std::string_view name) {
  for (Strategy s : all_strategies()) {
    if (name == strategy_name(s)) return s;
  }
  throw ConfigError(fmt::format("unknown strategy '{}' (expected JIN, RAND, ENT, CSET, BADGE or G-RAND)",
                                name));
}

const char* strategy_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::kJin:
      return "JIN";
    case Strategy::kRand:
      return "RAND";
    case Strategy::kEnt:
      return "ENT";
    case Strategy::kCset:
      return "CSET";
    case Strategy::kBadge:
      return "BADGE";
    case Strategy::kGRand:
      return "G-RAND";
  }
  return "?";
}

std::vector<Strategy> all_strategies() {
  return {Strategy::kJin, Strategy::kRand, Strategy::kEnt,
          Strategy::kCset, Strategy::kBadge, Strategy::kGRand};
}

bool is_group_aware(Strategy strategy) {
  return strategy == Strategy::kJin || strategy == Strategy::kGRand;
}

bool needs_standard_model(Strategy strategy) { return strategy == Strategy::kJin; }

namespace {

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& features, std::span<const SampleId> ids) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ids.size()), features.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = features.row(ids[i]);
  }
  return out;
}

void check_request(const SelectionRequest& req) {
  if (req.features == nullptr) throw ValidationError("selection request has no features");
  if (req.robust == nullptr) throw ValidationError("selection request has no robust model");
  if (req.candidates.empty()) throw ValidationError("selection request has no candidates");
  if (req.budget < 1) throw ValidationError("selection budget must be >= 1");
}

std::size_t effective_budget(const SelectionRequest& req, Strategy strategy) {
  const auto b = static_cast<std::size_t>(req.budget);
  if (b > req.candidates.size()) {
    LOG(WARNING) << strategy_name(strategy) << ": budget " << b << " exceeds the "
                 << req.candidates.size() << " eligible candidates; selecting all of them";
    return req.candidates.size();
  }
  return b;
}

SelectionResult finish(const SelectionRequest& req, std::vector<std::size_t> picks,
                       std::vector<ScoreRecord> records) {
  SelectionResult result;
  for (std::size_t pos : picks) {
    result.selected.push_back(req.candidates[pos]);
    records[pos].selected = true;
  }
  result.scores = std::move(records);
  return result;
}

std::vector<ScoreRecord> blank_records(const SelectionRequest& req) {
  std::vector<ScoreRecord> records(req.candidates.size());
  for (std::size_t i = 0; i < req.candidates.size(); ++i) {
    records[i].id = req.candidates[i];
    records[i].group = req.groups.empty() ? 0 : req.groups[req.candidates[i]];
  }
  return records;
}

}  // namespace

std::vector<double> score_standard_inconsistency(const ClassifierSnapshot* standard,
                                                 const ClassifierSnapshot& robust,
                                                 const Eigen::MatrixXd& features,
                                                 std::span<const SampleId> ids) {
  if (standard == nullptr) throw ValidationError("standard inconsistency needs a standard model");
  const Eigen::MatrixXd x = gather_rows(features, ids);
  const Eigen::MatrixXd ps = predict_proba(*standard, x);
  const Eigen::MatrixXd pr = predict_proba(robust, x);
  std::vector<double> out(ids.size());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = kl_divergence(ps.row(i), pr.row(i));
  return out;
}

std::vector<double> score_robust_inconsistency(const ClassifierSnapshot& robust,
                                               const Eigen::MatrixXd& features,
                                               std::span<const SampleId> ids,
                                               const AttackConfig& attack,
                                               std::uint64_t attack_seed) {
  AttackConfig cfg = attack;
  cfg.objective = AttackObjective::kKlToBenign;
  const Eigen::MatrixXd x = gather_rows(features, ids);
  std::vector<std::uint64_t> seeds;
  seeds.reserve(ids.size());
  for (SampleId id : ids) seeds.push_back(derive_seed(attack_seed, "sample", static_cast<std::uint64_t>(id)));
  const Eigen::MatrixXd adv = pgd_attack(robust, x, {}, cfg, seeds);
  const Eigen::MatrixXd p = predict_proba(robust, x);
  const Eigen::MatrixXd q = predict_proba(robust, adv);
  std::vector<double> out(ids.size());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = kl_divergence(p.row(i), q.row(i));
  return out;
}

std::vector<double> normalize(std::span<const double> scores) {
  std::vector<double> out(scores.size(), 0.0);
  if (scores.empty()) return out;
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  if (*lo == *hi) return out;
  const double n = static_cast<double>(scores.size());
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] - mean;
  // Corrected two-pass: remove the rounding error left in the mean, which
  // matters when |mean| is large against the spread.
  const double residual = std::accumulate(out.begin(), out.end(), 0.0) / n;
  double var = 0.0;
  for (double& v : out) {
    v -= residual;
    var += v * v;
  }
  const double sd = std::sqrt(var / n);
  if (sd == 0.0) return std::vector<double>(scores.size(), 0.0);
  for (double& v : out) v /= sd;
  return out;
}

std::vector<std::size_t> top_k(std::span<const double> scores, std::span<const SampleId> ids,
                               std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  });
  order.resize(std::min(k, order.size()));
  return order;
}

SelectionResult jin_select(const SelectionRequest& req) {
  check_request(req);
  if (req.standard == nullptr) throw ValidationError("JIN needs a standard model");
  const std::size_t k = effective_budget(req, Strategy::kJin);
  const auto i_std = score_standard_inconsistency(req.standard, *req.robust, *req.features,
                                                  req.candidates);
  const auto i_rob = score_robust_inconsistency(*req.robust, *req.features, req.candidates,
                                                req.attack, req.attack_seed);
  const auto n_std = normalize(i_std);
  const auto n_rob = normalize(i_rob);
  std::vector<double> joint(req.candidates.size());
  auto records = blank_records(req);
  for (std::size_t i = 0; i < joint.size(); ++i) {
    joint[i] = n_std[i] + n_rob[i];
    records[i].i_std = i_std[i];
    records[i].i_rob = i_rob[i];
    records[i].joint = joint[i];
  }
  return finish(req, top_k(joint, req.candidates, k), std::move(records));
}

Eigen::VectorXd entropy_rows(const Eigen::MatrixXd& probs) {
  Eigen::VectorXd h(probs.rows());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < probs.cols(); ++c) {
      const double p = probs(i, c);
      if (p > 0.0) s -= p * std::log(p);
    }
    h[i] = s;
  }
  return h;
}

std::vector<std::size_t> kcenter_greedy(const Eigen::MatrixXd& points,
                                        std::span<const SampleId> ids,
                                        const Eigen::MatrixXd& centers, std::size_t k, Rng& rng) {
  const auto n = static_cast<std::size_t>(points.rows());
  k = std::min(k, n);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  const auto absorb = [&](const Eigen::RowVectorXd& center) {
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], (points.row(static_cast<Eigen::Index>(i)) - center).squaredNorm());
    }
  };
  for (Eigen::Index c = 0; c < centers.rows(); ++c) absorb(centers.row(c));

  std::vector<std::size_t> picks;
  std::vector<char> taken(n, 0);
  if (centers.rows() == 0 && k > 0) {
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    const std::size_t pos = first(rng);
    picks.push_back(pos);
    taken[pos] = 1;
    absorb(points.row(static_cast<Eigen::Index>(pos)));
  }
  while (picks.size() < k) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      if (best == n || nearest[i] > nearest[best] ||
          (nearest[i] == nearest[best] && ids[i] < ids[best])) {
        best = i;
      }
    }
    picks.push_back(best);
    taken[best] = 1;
    absorb(points.row(static_cast<Eigen::Index>(best)));
  }
  return picks;
}

std::vector<std::size_t> kmeanspp_seeding(const Eigen::MatrixXd& points, std::size_t k, Rng& rng) {
  const auto n = static_cast<std::size_t>(points.rows());
  k = std::min(k, n);
  std::vector<std::size_t> picks;
  if (k == 0) return picks;
  std::vector<char> taken(n, 0);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::size_t pos = first(rng);
  while (true) {
    picks.push_back(pos);
    taken[pos] = 1;
    if (picks.size() == k) break;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (points.row(static_cast<Eigen::Index>(i)) -
                               points.row(static_cast<Eigen::Index>(pos))).squaredNorm());
      if (!taken[i]) total += d2[i];
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (total > 0.0) {
      double target = unit(rng) * total;
      pos = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i] || d2[i] <= 0.0) continue;
        pos = i;
        target -= d2[i];
        if (target < 0.0) break;
      }
    } else {
      // Every remaining point coincides with a center: uniform over the rest.
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i]) rest.push_back(i);
      }
      std::uniform_int_distribution<std::size_t> pick(0, rest.size() - 1);
      pos = rest[pick(rng)];
    }
  }
  return picks;
}

Eigen::MatrixXd gradient_embeddings(const ClassifierSnapshot& model, const Eigen::MatrixXd& x) {
  const ForwardCache cache = model.forward(x);
  const Eigen::MatrixXd probs = softmax_rows(cache.logits);
  const Eigen::MatrixXd& h = cache.activations.back();
  const Eigen::Index c = probs.cols();
  const Eigen::Index d = h.cols();
  Eigen::MatrixXd out(x.rows(), c * d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index arg = 0;
    probs.row(i).maxCoeff(&arg);
    Eigen::RowVectorXd residual = probs.row(i);
    residual[arg] -= 1.0;
    for (Eigen::Index k = 0; k < c; ++k) out.row(i).segment(k * d, d) = residual[k] * h.row(i);
  }
  return out;
}

SelectionResult baseline_select(Strategy strategy, const SelectionRequest& req) {
  check_request(req);
  const std::size_t k = effective_budget(req, strategy);
  auto records = blank_records(req);
  Rng rng = make_rng(req.seed, strategy_name(strategy));

  switch (strategy) {
    case Strategy::kRand:
    case Strategy::kGRand: {
      std::vector<std::size_t> order(req.candidates.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::shuffle(order.begin(), order.end(), rng);
      order.resize(k);
      return finish(req, std::move(order), std::move(records));
    }
    case Strategy::kEnt: {
      const Eigen::MatrixXd x = gather_rows(*req.features, req.candidates);
      const Eigen::VectorXd h = entropy_rows(predict_proba(*req.robust, x));
      std::vector<double> scores(h.data(), h.data() + h.size());
      for (std::size_t i = 0; i < scores.size(); ++i) records[i].joint = scores[i];
      return finish(req, top_k(scores, req.candidates, k), std::move(records));
    }
    case Strategy::kCset: {
      const Eigen::MatrixXd emb = req.robust->embed(gather_rows(*req.features, req.candidates));
      const Eigen::MatrixXd centers = req.robust->embed(gather_rows(*req.features, req.labeled));
      for (std::size_t i = 0; i < records.size(); ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < centers.rows(); ++c) {
          nearest = std::min(nearest, (emb.row(static_cast<Eigen::Index>(i)) - centers.row(c)).norm());
        }
        if (centers.rows() > 0) records[i].joint = nearest;
      }
      return finish(req, kcenter_greedy(emb, req.candidates, centers, k, rng), std::move(records));
    }
    case Strategy::kBadge: {
      const Eigen::MatrixXd emb =
          gradient_embeddings(*req.robust, gather_rows(*req.features, req.candidates));
      for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].joint = emb.row(static_cast<Eigen::Index>(i)).norm();
      }
      return finish(req, kmeanspp_seeding(emb, k, rng), std::move(records));
    }
    case Strategy::kJin:
      break;
  }
  throw ConfigError(fmt::format("'{}' is not a baseline strategy", strategy_name(strategy)));
}

SelectionResult select(Strategy strategy, const SelectionRequest& req) {
  return strategy == Strategy::kJin ? jin_select(req) : baseline_select(strategy, req);
}

}  // namespace fral
