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

#include <numeric>
#include <vector>

#include <benchmark/benchmark.h>

#include "fral/adversarial.h"
#include "fral/dataset.h"
#include "fral/selection.h"
#include "fral/training.h"

namespace {

using namespace fral;

struct Setup {
  DatasetBundle bundle;
  ClassifierSnapshot standard;
  ClassifierSnapshot robust;

  explicit Setup(std::int64_t n) {
    IngestionSpec spec;
    spec.num_samples = n;
    bundle = load_dataset(spec);
    const Architecture arch = resolve_architecture("mlp-relu-32", bundle.feature_dim(), bundle.num_classes);
    standard = ClassifierSnapshot::initialize(arch, 1);
    robust = ClassifierSnapshot::initialize(arch, 2);
  }
};

void BM_PgdAttack(benchmark::State& state) {
  const Setup s(2000);
  const Eigen::MatrixXd x = s.bundle.gather(s.bundle.train);
  std::vector<ClassId> y;
  for (SampleId id : s.bundle.train) y.push_back(s.bundle.labels[id]);
  AttackConfig cfg;
  cfg.num_steps = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pgd_attack(s.robust, x, y, cfg, 0));
  state.SetItemsProcessed(state.iterations() * x.rows());
}
BENCHMARK(BM_PgdAttack)->Arg(1)->Arg(5)->Arg(10);

void BM_JinScoring(benchmark::State& state) {
  const Setup s(state.range(0));
  SelectionRequest req;
  req.features = &s.bundle.features;
  req.groups = s.bundle.groups;
  req.candidates = s.bundle.train;
  req.budget = static_cast<int>(s.bundle.train.size() / 50);
  req.standard = &s.standard;
  req.robust = &s.robust;
  for (auto _ : state) benchmark::DoNotOptimize(jin_select(req));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(req.candidates.size()));
}
BENCHMARK(BM_JinScoring)->Arg(1000)->Arg(5000);

void BM_TradesEpoch(benchmark::State& state) {
  const Setup s(2000);
  TrainingSet data{s.bundle.gather(s.bundle.train), {}};
  for (SampleId id : s.bundle.train) data.labels.push_back(s.bundle.labels[id]);
  RobustTrainConfig cfg;
  cfg.train.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train_adversarial(s.robust, data, cfg, false));
}
BENCHMARK(BM_TradesEpoch)->Unit(benchmark::kMillisecond);

void BM_StandardEpoch(benchmark::State& state) {
  const Setup s(2000);
  TrainingSet data{s.bundle.gather(s.bundle.train), {}};
  for (SampleId id : s.bundle.train) data.labels.push_back(s.bundle.labels[id]);
  TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train_standard(s.standard, data, cfg));
}
BENCHMARK(BM_StandardEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
