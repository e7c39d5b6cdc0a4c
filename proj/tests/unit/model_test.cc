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

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "fral/errors.h"
#include "fral/model.h"
#include "fral/random.h"
#include "oracles.h"

namespace fral {
namespace {

TEST(Architecture, Parses) {
  EXPECT_TRUE(resolve_architecture("linear", 3, 2).hidden.empty());
  const Architecture a = resolve_architecture("mlp-relu-16x8", 4, 3);
  EXPECT_EQ(a.hidden, (std::vector<int>{16, 8}));
  EXPECT_EQ(a.parameter_count(), 4 * 16 + 16 + 16 * 8 + 8 + 8 * 3 + 3);
  EXPECT_EQ(resolve_architecture("mlp-tanh-5", 2, 2).activation, Activation::kTanh);
  EXPECT_THROW(resolve_architecture("resnet", 2, 2), ConfigError);
  EXPECT_THROW(resolve_architecture("mlp-relu-0", 2, 2), ConfigError);
  EXPECT_THROW(resolve_architecture("linear", 2, 1), ConfigError);
}

TEST(PredictProba, RowsSumToOne) {
  const auto model = testing::random_model("mlp-relu-8", 5, 4, 1);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Eigen::MatrixXd x = testing::uniform_matrix(17, 5, s, -3.0, 3.0);
    const Eigen::MatrixXd p = predict_proba(model, x);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-6);
      EXPECT_GE(p.row(i).minCoeff(), 0.0);
    }
  }
}

TEST(PredictProba, DuplicatedRowsIdentical) {
  const auto model = testing::random_model("mlp-tanh-6", 3, 3, 2);
  Eigen::MatrixXd x = testing::uniform_matrix(4, 3, 5);
  x.row(3) = x.row(1);
  const Eigen::MatrixXd p = predict_proba(model, x);
  EXPECT_EQ(p.row(1), p.row(3));
}

TEST(PredictProba, HandSetLinearModel) {
  const std::vector<std::vector<double>> w{{1.0, -2.0}, {0.5, 0.25}, {-1.0, 0.0}};
  const std::vector<double> b{0.1, -0.3, 0.2};
  const std::vector<double> x{0.4, 0.7};
  const auto expect = testing::softmax(testing::linear_logits(w, b, x));
  Eigen::MatrixXd in(1, 2);
  in << x[0], x[1];
  const Eigen::MatrixXd p = predict_proba(testing::linear_model(w, b), in);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(p(0, c), expect[c], 1e-12);
}

TEST(PredictProba, ShapeMismatch) {
  const auto model = testing::random_model("linear", 3, 2, 1);
  EXPECT_THROW(predict_proba(model, Eigen::MatrixXd::Zero(2, 4)), ShapeError);
}

TEST(PredictProba, ExtremeLogitsStayFinite) {
  const auto model = testing::linear_model({{1e4}, {-1e4}}, {0.0, 0.0});
  Eigen::MatrixXd x(1, 1);
  x << 1.0;
  const Eigen::MatrixXd p = predict_proba(model, x);
  EXPECT_TRUE(p.allFinite());
  EXPECT_NEAR(p(0, 0), 1.0, 1e-12);
}

TEST(KlDivergence, WorkedExamples) {
  const std::vector<double> half{0.5, 0.5};
  EXPECT_EQ(kl_divergence(std::span<const double>(half), std::span<const double>(half)), 0.0);

  const std::vector<double> onehot{1.0, 0.0};
  EXPECT_NEAR(kl_divergence(std::span<const double>(onehot), std::span<const double>(half)),
              testing::kl(onehot, half), 1e-6);
  EXPECT_NEAR(testing::kl(onehot, half), std::log(2.0), 1e-6);

  const std::vector<double> skew{0.9, 0.1};
  const double oracle = 0.9 * std::log(1.8) + 0.1 * std::log(0.2);
  EXPECT_NEAR(testing::kl(skew, half), oracle, 1e-12);
  EXPECT_NEAR(kl_divergence(std::span<const double>(skew), std::span<const double>(half)), oracle,
              1e-6);
  EXPECT_NEAR(oracle, 0.3681, 5e-5);
}

TEST(KlDivergence, NonNegativeAndZeroOnIdentity) {
  Rng rng(3);
  std::gamma_distribution<double> g(0.5, 1.0);
  for (int t = 0; t < 2000; ++t) {
    const int n = 2 + t % 6;
    std::vector<double> p(n), q(n);
    double sp = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
      p[i] = g(rng);
      q[i] = g(rng);
      sp += p[i];
      sq += q[i];
    }
    for (int i = 0; i < n; ++i) {
      p[i] /= sp;
      q[i] /= sq;
    }
    EXPECT_GE(kl_divergence(std::span<const double>(p), std::span<const double>(q)), 0.0);
    EXPECT_EQ(kl_divergence(std::span<const double>(p), std::span<const double>(p)), 0.0);
  }
}

TEST(KlDivergence, LengthMismatch) {
  const std::vector<double> a{1.0}, b{0.5, 0.5};
  EXPECT_THROW(kl_divergence(std::span<const double>(a), std::span<const double>(b)), ShapeError);
}

TEST(KlLogits, MatchesClampedKlOnModerateLogits) {
  const Eigen::MatrixXd a = testing::uniform_matrix(5, 3, 1, -2, 2);
  const Eigen::MatrixXd b = testing::uniform_matrix(5, 3, 2, -2, 2);
  const Eigen::MatrixXd pa = softmax_rows(a), pb = softmax_rows(b);
  double mean = 0.0;
  for (int i = 0; i < 5; ++i) mean += kl_divergence(pa.row(i), pb.row(i)) / 5.0;
  EXPECT_NEAR(kl_logits(a, b), mean, 1e-10);
}

TEST(CrossEntropy, MatchesOracle) {
  const Eigen::MatrixXd z = testing::uniform_matrix(4, 3, 9, -1, 1);
  const std::vector<ClassId> y{0, 2, 1, 2};
  double expect = 0.0;
  for (int i = 0; i < 4; ++i) {
    const auto p = testing::softmax({z(i, 0), z(i, 1), z(i, 2)});
    expect -= std::log(p[y[i]]) / 4.0;
  }
  EXPECT_NEAR(cross_entropy(z, y), expect, 1e-12);
}

TEST(Snapshot, SaveLoadRoundTrip) {
  ClassifierSnapshot model = testing::random_model("mlp-relu-7x3", 4, 3, 11);
  model = model.with_parameters(model.parameters(), SnapshotInfo{TrainingMode::kRobust, 42, 3});
  std::stringstream buf;
  model.save(buf);
  const ClassifierSnapshot back = ClassifierSnapshot::load(buf);
  EXPECT_EQ(back.architecture().id, "mlp-relu-7x3");
  EXPECT_EQ(back.parameters(), model.parameters());
  EXPECT_EQ(back.info().mode, TrainingMode::kRobust);
  EXPECT_EQ(back.info().seed, 42u);
  EXPECT_EQ(back.info().round, 3);
}

TEST(Snapshot, RejectsGarbage) {
  std::stringstream buf("not a snapshot\n");
  EXPECT_THROW(ClassifierSnapshot::load(buf), Error);
}

TEST(Snapshot, InitializeIsSeeded) {
  const Architecture a = resolve_architecture("mlp-relu-4", 3, 2);
  EXPECT_EQ(ClassifierSnapshot::initialize(a, 1).parameters(),
            ClassifierSnapshot::initialize(a, 1).parameters());
  EXPECT_NE(ClassifierSnapshot::initialize(a, 1).parameters(),
            ClassifierSnapshot::initialize(a, 2).parameters());
}

TEST(Embed, LastHiddenLayer) {
  const auto model = testing::random_model("mlp-relu-6x5", 3, 2, 4);
  const Eigen::MatrixXd x = testing::uniform_matrix(7, 3, 1);
  const Eigen::MatrixXd h = model.embed(x);
  EXPECT_EQ(h.rows(), 7);
  EXPECT_EQ(h.cols(), 5);
}

}  // namespace
}  // namespace fral
