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

#ifndef FRAL_MODEL_H_
#define FRAL_MODEL_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fral/dataset.h"

namespace fral {

enum class Activation { kTanh, kRelu };
enum class TrainingMode { kStandard, kRobust };

const char* training_mode_name(TrainingMode mode);

// Fully connected network description resolved from a registry id:
//   "linear"            softmax regression
//   "mlp-<act>-<h>"     one hidden layer of width h, act in {tanh, relu}
//   "mlp-<act>-<h1>x<h2>..."  several hidden layers
struct Architecture {
  std::string id;
  int input_dim = 0;
  int num_classes = 0;
  std::vector<int> hidden;
  Activation activation = Activation::kRelu;

  std::int64_t parameter_count() const;
};

Architecture resolve_architecture(std::string_view id, int input_dim, int num_classes);

// Intermediate activations kept for backpropagation.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;  // [input, hidden_1, ..., hidden_L]
  std::vector<Eigen::MatrixXd> pre_activations;
  Eigen::MatrixXd logits;
};

struct SnapshotInfo {
  TrainingMode mode = TrainingMode::kStandard;
  std::uint64_t seed = 0;
  int round = 0;
};

// Frozen classifier weights plus provenance.
//
// Parameters are one flat vector; layer l stores W_l (out x in, column
// major) followed by b_l. All prediction methods are pure.
class ClassifierSnapshot {
 public:
  ClassifierSnapshot() = default;
  ClassifierSnapshot(Architecture arch, Eigen::VectorXd parameters, SnapshotInfo info);

  // Glorot-uniform weights, zero biases.
  static ClassifierSnapshot initialize(const Architecture& arch, std::uint64_t seed);

  const Architecture& architecture() const { return arch_; }
  const Eigen::VectorXd& parameters() const { return params_; }
  const SnapshotInfo& info() const { return info_; }
  int input_dim() const { return arch_.input_dim; }
  int num_classes() const { return arch_.num_classes; }

  ClassifierSnapshot with_parameters(Eigen::VectorXd parameters, SnapshotInfo info) const;

  ForwardCache forward(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd logits(const Eigen::MatrixXd& x) const;
  // Last hidden layer (the input itself for "linear").
  Eigen::MatrixXd embed(const Eigen::MatrixXd& x) const;

  // Backpropagates d(loss)/d(logits) (n x C).
  Eigen::VectorXd parameter_gradient(const ForwardCache& cache,
                                     const Eigen::MatrixXd& dlogits) const;
  Eigen::MatrixXd input_gradient(const ForwardCache& cache,
                                 const Eigen::MatrixXd& dlogits) const;

  // Versioned text header followed by little-endian doubles.
  void save(std::ostream& out) const;
  static ClassifierSnapshot load(std::istream& in);
  void save(const std::string& path) const;
  static ClassifierSnapshot load(const std::string& path);

 private:
  Eigen::MatrixXd backward(const ForwardCache& cache, const Eigen::MatrixXd& dlogits,
                           Eigen::VectorXd* param_grad) const;

  Architecture arch_;
  Eigen::VectorXd params_;
  SnapshotInfo info_;
};

// Row-wise softmax of logits.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);
Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& logits);

// Row-wise probability vectors for a batch (n x d). Throws ShapeError when
// the column count differs from the model's input dimension.
Eigen::MatrixXd predict_proba(const ClassifierSnapshot& model, const Eigen::MatrixXd& batch);

std::vector<ClassId> predict_labels(const ClassifierSnapshot& model,
                                    const Eigen::MatrixXd& batch);

// True when all entries are >= 0 and the sum is within `tol` of one.
bool is_probability_vector(std::span<const double> p, double tol = 1e-6);

// KL(p || q) = sum_i p_i ln(p_i / q_i) after clamping both vectors to
// [1e-12, 1] and renormalizing.
double kl_divergence(std::span<const double> p, std::span<const double> q);
double kl_divergence(const Eigen::Ref<const Eigen::RowVectorXd>& p,
                     const Eigen::Ref<const Eigen::RowVectorXd>& q);

inline constexpr double kProbabilityFloor = 1e-12;

// Mean cross-entropy of logits against integer labels; optionally writes
// d(loss)/d(logits).
double cross_entropy(const Eigen::MatrixXd& logits, std::span<const ClassId> labels,
                     Eigen::MatrixXd* dlogits = nullptr);

// Mean over rows of KL(softmax(benign) || softmax(adversarial)), computed in
// log space. Optional gradients w.r.t. both logit matrices.
double kl_logits(const Eigen::MatrixXd& benign_logits,
                 const Eigen::MatrixXd& adversarial_logits,
                 Eigen::MatrixXd* dbenign = nullptr,
                 Eigen::MatrixXd* dadversarial = nullptr);

}  // namespace fral

#endif  // FRAL_MODEL_H_
