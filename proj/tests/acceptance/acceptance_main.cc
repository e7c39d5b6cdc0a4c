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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Thresholds below are fixed; do not tune
// them to make a run pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "fixtures.h"
#include "fral/active_loop.h"
#include "fral/adversarial.h"
#include "fral/config.h"
#include "fral/random.h"
#include "fral/report.h"
#include "fral/results.h"
#include "jin_oracle.h"
#include "oracles.h"

namespace fs = std::filesystem;
using namespace fral;

namespace {

// Pinned tolerances and limits.
constexpr double kKlTol = 1e-6;
constexpr double kKlMaxSeconds = 5.0;
constexpr double kNormTol = 1e-9;
constexpr double kNormMaxSeconds = 5.0;
constexpr double kBallSlack = 1e-6;
constexpr double kPgdMaxSeconds = 120.0;
constexpr double kTradesTol = 1e-6;
constexpr double kGradTol = 1e-4;
constexpr double kGradFloor = 1e-7;  // denominator floor for near-zero gradients
constexpr int kMaxGradParams = 200;
constexpr double kDirectionalSlackPp = 0.5;
constexpr double kMinImprovementPp = 2.0;
constexpr double kDeskMaxSeconds = 1800.0;

struct Verdict {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

int failures = 0;

void report(int id, const char* name, const Verdict& v, double seconds) {
  std::printf("[%s] criterion %d: %s (%.2f s)%s%s\n", v.pass ? "PASS" : "FAIL", id, name, seconds,
              v.detail.empty() ? "" : " - ", v.detail.c_str());
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

void run(int id, const char* name, const std::function<Verdict()>& body) {
  const auto start = Clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail = std::string("exception: ") + e.what();
  }
  report(id, name, v, seconds_since(start));
}

std::vector<double> random_simplex(Rng& rng, int n) {
  std::gamma_distribution<double> g(0.7, 1.0);
  std::vector<double> p(n);
  double s = 0.0;
  for (double& v : p) s += (v = g(rng));
  for (double& v : p) v /= s;
  return p;
}

Verdict kl_suite() {
  const auto start = Clock::now();
  Verdict v;
  Rng rng(1);
  for (int t = 0; t < 10000; ++t) {
    const auto p = random_simplex(rng, 2 + t % 9);
    const auto q = random_simplex(rng, 2 + t % 9);
    const double self = kl_divergence(std::span<const double>(p), std::span<const double>(p));
    const double d = kl_divergence(std::span<const double>(p), std::span<const double>(q));
    v.require(self == 0.0, fmt::format("KL(p, p) = {} at trial {}", self, t));
    v.require(d >= 0.0, fmt::format("KL(p, q) = {} < 0 at trial {}", d, t));
  }
  const std::vector<double> half{0.5, 0.5}, onehot{1.0, 0.0}, skew{0.9, 0.1};
  const auto check = [&](const std::vector<double>& p, const std::vector<double>& q, const char* label) {
    const double got = kl_divergence(std::span<const double>(p), std::span<const double>(q));
    const double want = testing::kl(p, q);
    v.require(std::abs(got - want) <= kKlTol, fmt::format("{}: {} vs oracle {}", label, got, want));
  };
  check(half, half, "identity");
  check(onehot, half, "one-hot vs uniform");
  check(skew, half, "skewed vs uniform");
  v.require(std::abs(testing::kl(onehot, half) - std::log(2.0)) <= kKlTol, "one-hot oracle is not ln 2");
  v.require(std::abs(testing::kl(skew, half) - (0.9 * std::log(1.8) + 0.1 * std::log(0.2))) <= kKlTol,
            "skewed oracle mismatch");
  const double t = seconds_since(start);
  v.require(t < kKlMaxSeconds, fmt::format("took {:.2f} s", t));
  return v;
}

Verdict normalization_suite() {
  const auto start = Clock::now();
  Verdict v;
  Rng rng(2);
  std::uniform_int_distribution<int> len(2, 500);
  std::lognormal_distribution<double> mag(0.0, 3.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> s(len(rng));
    const double scale = mag(rng);
    std::normal_distribution<double> d(mag(rng), scale);
    for (double& x : s) x = d(rng);
    const auto n = normalize(s);
    double mean = 0.0;
    for (double x : n) mean += x;
    mean /= static_cast<double>(n.size());
    double var = 0.0;
    for (double x : n) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(n.size()));
    v.require(std::abs(mean) < kNormTol, fmt::format("trial {}: mean {}", t, mean));
    v.require(std::abs(sd - 1.0) < kNormTol, fmt::format("trial {}: std {}", t, sd));
  }
  for (const std::vector<double>& s : {std::vector<double>{3, 3, 3}, std::vector<double>{5},
                                       std::vector<double>(40, -1.25)}) {
    for (double x : normalize(s)) v.require(x == 0.0, "zero-variance input not mapped to zeros");
  }
  const double t = seconds_since(start);
  v.require(t < kNormMaxSeconds, fmt::format("took {:.2f} s", t));
  return v;
}

Verdict pgd_ball_suite() {
  const auto start = Clock::now();
  Verdict v;
  Rng rng(3);
  std::uniform_int_distribution<int> cls(0, 2);
  int attacks = 0;
  for (int m = 0; m < 100; ++m) {
    const auto model = testing::random_model(m % 2 ? "mlp-relu-8" : "mlp-tanh-6", 5, 3, m);
    AttackConfig cfg;
    cfg.objective = m % 3 ? AttackObjective::kCrossEntropy : AttackObjective::kKlToBenign;
    cfg.init = m % 4 ? AttackInit::kUniform : AttackInit::kZero;
    // Points near the clamp boundary exercise the range projection.
    Eigen::MatrixXd x = testing::uniform_matrix(100, 5, 10'000 + m);
    for (Eigen::Index i = 0; i < 20; ++i) x(i, i % 5) = (i % 2) ? 1.0 : 0.0;
    std::vector<ClassId> y(100);
    for (auto& c : y) c = cls(rng);
    const Eigen::MatrixXd adv = pgd_attack(model, x, y, cfg, m);
    attacks += static_cast<int>(x.rows());
    const double dist = (adv - x).cwiseAbs().maxCoeff();
    v.require(dist <= cfg.epsilon + kBallSlack, fmt::format("model {}: ||x~ - x||inf = {}", m, dist));
    v.require(adv.minCoeff() >= 0.0 && adv.maxCoeff() <= 1.0, fmt::format("model {}: left [0, 1]", m));
    AttackConfig zero = cfg;
    zero.epsilon = 0.0;
    v.require(pgd_attack(model, x, y, zero, m) == x, fmt::format("model {}: eps = 0 moved the input", m));
  }
  v.require(attacks == 10000, fmt::format("ran {} attacks", attacks));
  const double t = seconds_since(start);
  v.require(t < kPgdMaxSeconds, fmt::format("took {:.2f} s", t));
  return v;
}

Verdict trades_degeneracy() {
  Verdict v;
  RobustTrainConfig cfg;
  for (int t = 0; t < 100; ++t) {
    const auto model = testing::random_model(t % 2 ? "mlp-relu-10" : "mlp-tanh-8", 6, 4, 100 + t);
    const Eigen::MatrixXd x = testing::uniform_matrix(16, 6, 200 + t);
    std::vector<ClassId> y(16);
    for (int i = 0; i < 16; ++i) y[i] = (i * 7 + t) % 4;
    const double ce = cross_entropy(model.logits(x), y);
    cfg.trades_beta = 0.0;
    cfg.attack.epsilon = 4.0 / 255.0;
    const double beta0 = trades_loss(model, x, y, cfg, t);
    v.require(std::abs(beta0 - ce) <= kTradesTol, fmt::format("batch {}: beta=0 gives {} vs CE {}", t, beta0, ce));
    cfg.trades_beta = 6.0;
    cfg.attack.epsilon = 0.0;
    AttackConfig inner = cfg.attack;
    inner.objective = AttackObjective::kKlToBenign;
    const TradesTerms terms = trades_terms(model, x, y, pgd_attack(model, x, {}, inner, t), 6.0);
    v.require(terms.kl == 0.0, fmt::format("batch {}: eps=0 KL term {}", t, terms.kl));
    v.require(trades_loss(model, x, y, cfg, t) == ce, fmt::format("batch {}: eps=0 loss != CE", t));
  }
  return v;
}

template <typename Loss>
double worst_gradient_error(const ClassifierSnapshot& model, const Eigen::VectorXd& analytic, Loss loss) {
  const Eigen::VectorXd theta = model.parameters();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    Eigen::VectorXd up = theta, down = theta;
    up[k] += 1e-6;
    down[k] -= 1e-6;
    const double numeric =
        (loss(model.with_parameters(up, model.info())) - loss(model.with_parameters(down, model.info()))) / 2e-6;
    worst = std::max(worst, testing::relative_error(analytic[k], numeric, kGradFloor));
  }
  return worst;
}

Verdict gradient_checks() {
  Verdict v;
  double worst_ce = 0.0, worst_trades = 0.0;
  for (int t = 0; t < 5; ++t) {
    const auto model = testing::random_model("mlp-tanh-12", 5, 3, 300 + t);
    v.require(model.parameters().size() <= kMaxGradParams, "model too large");
    const Eigen::MatrixXd x = testing::uniform_matrix(12, 5, 400 + t);
    std::vector<ClassId> y(12);
    for (int i = 0; i < 12; ++i) y[i] = (i + t) % 3;
    Eigen::MatrixXd dl;
    const ForwardCache cache = model.forward(x);
    cross_entropy(cache.logits, y, &dl);
    worst_ce = std::max(worst_ce, worst_gradient_error(model, model.parameter_gradient(cache, dl),
                                                       [&](const ClassifierSnapshot& m) {
                                                         return cross_entropy(m.logits(x), y);
                                                       }));
    AttackConfig inner;
    inner.epsilon = 0.1;
    inner.objective = AttackObjective::kKlToBenign;
    const Eigen::MatrixXd adv = pgd_attack(model, x, {}, inner, t);
    Eigen::VectorXd g;
    trades_terms(model, x, y, adv, 6.0, &g);
    worst_trades = std::max(worst_trades, worst_gradient_error(model, g, [&](const ClassifierSnapshot& m) {
                              return trades_terms(m, x, y, adv, 6.0).total;
                            }));
  }
  v.require(worst_ce < kGradTol, fmt::format("cross-entropy relative error {:.3g}", worst_ce));
  v.require(worst_trades < kGradTol, fmt::format("TRADES relative error {:.3g}", worst_trades));
  if (v.pass) v.detail = fmt::format("worst relative error CE {:.2g}, TRADES {:.2g}", worst_ce, worst_trades);
  return v;
}

Verdict jin_oracle_equivalence() {
  Verdict v;
  Rng rng(6);
  std::uniform_real_distribution<double> unit(0.0, 1.0), weight(-3.0, 3.0);
  std::uniform_int_distribution<int> count(2, 20);
  int ties = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = count(rng);
    const int dim = 1 + t % 4;
    const int classes = 2 + t % 3;
    const auto random_linear = [&] {
      testing::LinearParams p;
      p.w.assign(classes, std::vector<double>(dim));
      p.b.assign(classes, 0.0);
      for (auto& row : p.w) {
        for (double& w : row) w = weight(rng);
      }
      for (double& b : p.b) b = weight(rng);
      return p;
    };
    testing::JinCase c;
    c.standard = random_linear();
    c.robust = random_linear();
    // Every third trial disables the attack and duplicates points so joint
    // scores tie exactly and the id rule decides.
    const bool tie_trial = t % 3 == 0;
    c.epsilon = tie_trial ? 0.0 : 4.0 / 255.0 * (1 + t % 4);
    c.step = c.epsilon > 0 ? c.epsilon / 2 : 0.01;
    c.attack_seed = 1000 + t;
    c.budget = 1 + t % n;
    std::set<std::int64_t> used;
    std::uniform_int_distribution<std::int64_t> idd(0, 99);
    while (static_cast<int>(c.ids.size()) < n) {
      const auto id = idd(rng);
      if (used.insert(id).second) c.ids.push_back(id);
    }
    for (int i = 0; i < n; ++i) {
      if (tie_trial && i > 0 && i % 2 == 0) {
        c.x.push_back(c.x[i - 1]);
        continue;
      }
      std::vector<double> row(dim);
      for (double& x : row) x = unit(rng);
      c.x.push_back(row);
    }
    const auto oracle = testing::jin_oracle(c);
    for (std::size_t i = 0; i + 1 < oracle.joint.size(); ++i) {
      for (std::size_t j = i + 1; j < oracle.joint.size(); ++j) ties += oracle.joint[i] == oracle.joint[j];
    }

    const auto ms = testing::linear_model(c.standard.w, c.standard.b);
    const auto mr = testing::linear_model(c.robust.w, c.robust.b);
    Eigen::MatrixXd features = Eigen::MatrixXd::Zero(100, dim);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < dim; ++j) features(c.ids[i], j) = c.x[i][j];
    }
    const std::vector<GroupId> groups(100, 0);
    SelectionRequest req;
    req.features = &features;
    req.groups = groups;
    req.candidates = c.ids;
    req.budget = c.budget;
    req.standard = &ms;
    req.robust = &mr;
    req.attack.epsilon = c.epsilon;
    req.attack.step_size = c.step;
    req.attack.num_steps = 1;
    req.attack_seed = c.attack_seed;
    const auto got = jin_select(req);
    v.require(got.selected == oracle.selected,
              fmt::format("trial {}: selected {} vs oracle {}", t, fmt::join(got.selected, " "),
                          fmt::join(oracle.selected, " ")));
  }
  v.require(ties > 0, "no trial exercised a tie");
  if (v.pass) v.detail = fmt::format("100 trials, {} tied pairs", ties);
  return v;
}

ExperimentConfig toy_loop_config(Strategy s, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.name = "acceptance-toy";
  cfg.strategy = s;
  cfg.seed = seed;
  cfg.rounds = 5;
  cfg.budget = 0.02;
  cfg.labeled_fraction = 0.2;
  cfg.architecture = "mlp-relu-16";
  cfg.dataset.num_samples = 1500;
  cfg.train.epochs = 10;
  cfg.robust_train.train.epochs = 10;
  cfg.robust_train.finetune_epochs = 3;
  return cfg;
}

Verdict loop_invariants() {
  Verdict v;
  for (Strategy s : all_strategies()) {
    const ExperimentConfig cfg = toy_loop_config(s, 3);
    const DatasetBundle bundle = load_dataset(cfg.dataset);
    const std::string name = strategy_name(s);
    const FralResult a = run_fral(cfg, bundle);
    const FralResult b = run_fral(cfg, bundle);
    const int budget = resolve_budget(cfg.budget, static_cast<std::int64_t>(bundle.train.size()));
    v.require(static_cast<int>(a.rounds.size()) == cfg.rounds, name + ": wrong number of rounds");
    v.require(a.worst_group_evaluations == cfg.rounds, name + ": worst group not recomputed every round");
    std::size_t labeled = a.init.labeled.size();
    std::set<SampleId> seen(a.init.labeled.begin(), a.init.labeled.end());
    for (std::size_t k = 0; k < a.rounds.size(); ++k) {
      const RoundReport& r = a.rounds[k];
      v.require(static_cast<int>(r.selected.size()) == std::min<std::int64_t>(budget, r.candidate_count),
                fmt::format("{} round {}: selected {} with B = {}", name, r.round, r.selected.size(), budget));
      labeled += r.selected.size();
      v.require(static_cast<std::size_t>(r.labeled_count) == labeled,
                fmt::format("{} round {}: |D_L| {} expected {}", name, r.round, r.labeled_count, labeled));
      for (SampleId id : r.selected) {
        v.require(seen.insert(id).second, fmt::format("{}: id {} acquired twice", name, id));
        if (is_group_aware(s)) {
          v.require(bundle.groups[id] == r.worst_group,
                    fmt::format("{} round {}: id {} outside z*", name, r.round, id));
        }
      }
      v.require(r.selected == b.rounds[k].selected,
                fmt::format("{} round {}: identically seeded runs differ", name, r.round));
    }
    a.pool.check_partition(bundle.train);
    v.require(a.pool.labeled().size() == labeled, name + ": final pool size");
    v.require(a.pool.labeled().size() + a.pool.unlabeled().size() == bundle.train.size(),
              name + ": pool does not cover train");

    // Label blindness: hide every unlabeled label behind a constant.
    const PoolState pool = init_pools(bundle, cfg.labeled_fraction, pool_seed(cfg.seed));
    DatasetBundle hidden = bundle;
    for (SampleId id : pool.unlabeled()) hidden.labels[id] = 0;
    ExperimentConfig one = cfg;
    one.rounds = 1;
    const FralResult original = run_fral(one, bundle, pool);
    const FralResult blind = run_fral(one, hidden, pool);
    v.require(original.rounds[0].selected == blind.rounds[0].selected,
              name + ": selection changed when unlabeled labels were hidden");
    v.require(original.rounds[0].selected == a.rounds[0].selected,
              name + ": explicit initial pool differs from init_pools");
  }
  return v;
}

constexpr const char* kDeskConfig = R"({
  "name": "desk",
  "rounds": 5,
  "budget": 0.02,
  "labeled_fraction": 0.2,
  "architecture": "mlp-relu-32",
  "worst_group_mode": "mean",
  "metric": "accuracy",
  "dataset": {"kind": "synthetic", "generator": "two-group-gaussians", "seed": 0, "num_samples": 5000, "dim": 8},
  "attack": {"epsilon": "4/255", "step_size": "2/255", "num_steps": 5},
  "train": {"epochs": 30, "batch_size": 64, "learning_rate": 0.01},
  "robust_train": {"epochs": 30, "finetune_epochs": 10, "trades_beta": 6.0}
})";

struct DeskRuns {
  std::map<std::string, std::vector<fs::path>> dirs;
  std::map<std::string, std::vector<double>> final_rob;
  std::map<std::string, std::vector<double>> init_rob;
};

fs::path persist_run(const fs::path& root, const std::string& strategy, int seed, DeskRuns& out) {
  const std::string text = kDeskConfig;
  const ExperimentConfig cfg = parse_config(
      text, {{"strategy", strategy}, {"seed", std::to_string(seed)}});
  const fs::path dir = root / fmt::format("{}_seed{}", strategy, seed);
  ResultsStore store(dir, text, cfg, /*save_snapshots=*/false);
  const FralResult r = run_fral(cfg, &store);
  store.finish(r);
  out.dirs[strategy].push_back(dir);
  out.final_rob[strategy].push_back(*r.rounds.back().test_after.f_rob);
  out.init_rob[strategy].push_back(*r.init.test.f_rob);
  return dir;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

DeskRuns desk_runs;
const fs::path kDeskRoot = fs::temp_directory_path() / "fral-acceptance-desk";

Verdict desk_experiment() {
  const auto start = Clock::now();
  Verdict v;
  fs::remove_all(kDeskRoot);
  for (int seed = 0; seed < 3; ++seed) {
    for (const char* s : {"JIN", "RAND", "G-RAND"}) persist_run(kDeskRoot, s, seed, desk_runs);
  }
  const double jin = 100 * mean(desk_runs.final_rob["JIN"]);
  const double rnd = 100 * mean(desk_runs.final_rob["RAND"]);
  const double grand = 100 * mean(desk_runs.final_rob["G-RAND"]);
  const double init = 100 * mean(desk_runs.init_rob["JIN"]);
  v.require(jin >= rnd, fmt::format("JIN {:.2f} < RAND {:.2f}", jin, rnd));
  v.require(jin >= grand - kDirectionalSlackPp, fmt::format("JIN {:.2f} < G-RAND {:.2f} - 0.5", jin, grand));
  v.require(jin - init >= kMinImprovementPp, fmt::format("JIN gain {:.2f} pp over init", jin - init));
  const double t = seconds_since(start);
  v.require(t < kDeskMaxSeconds, fmt::format("took {:.0f} s", t));
  if (v.pass) {
    v.detail = fmt::format("worst-group robust acc: init {:.2f}, JIN {:.2f}, RAND {:.2f}, G-RAND {:.2f}", init,
                           jin, rnd, grand);
  }
  return v;
}

Verdict timing_report() {
  Verdict v;
  if (desk_runs.dirs.empty()) {
    v.require(false, "desk-scale runs are missing");
    return v;
  }
  for (const char* s : {"ENT", "CSET", "BADGE"}) persist_run(kDeskRoot, s, 0, desk_runs);
  std::vector<RunRecord> runs;
  for (const auto& [strategy, dirs] : desk_runs.dirs) {
    for (const auto& d : dirs) runs.push_back(load_run(d));
  }
  const Comparison c = compare_runs(runs);
  std::map<std::string, double> seconds;
  for (const auto& row : c.timing) seconds[row.label] = row.seconds.mean;
  for (Strategy s : all_strategies()) {
    v.require(seconds.contains(strategy_name(s)), fmt::format("no timing row for {}", strategy_name(s)));
  }
  v.require(seconds.contains("Init. AT"), "no initial adversarial training row");
  v.require(seconds["JIN"] > seconds["G-RAND"],
            fmt::format("JIN {:.4f} s <= G-RAND {:.4f} s", seconds["JIN"], seconds["G-RAND"]));
  const std::string text = render_text(c);
  render_json(c);
  std::fputs(text.c_str(), stdout);
  return v;
}

}  // namespace

int main() {
  run(1, "KL divergence suite", kl_suite);
  run(2, "normalization suite", normalization_suite);
  run(3, "PGD epsilon-ball suite", pgd_ball_suite);
  run(4, "TRADES degeneracy", trades_degeneracy);
  run(5, "gradient checks", gradient_checks);
  run(6, "JIN oracle equivalence", jin_oracle_equivalence);
  run(7, "pool and loop invariants", loop_invariants);
  run(8, "desk-scale directional experiment", desk_experiment);
  run(9, "timing report", timing_report);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
