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

#include "fral/model.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "fral/errors.h"
#include "fral/random.h"

namespace fral {

const char* training_mode_name(TrainingMode mode) {
  return mode == TrainingMode::kRobust ? "robust" : "standard";
}

std::int64_t Architecture::parameter_count() const {
  std::int64_t count = 0;
  int in = input_dim;
  for (int h : hidden) {
    count += static_cast<std::int64_t>(h) * in + h;
    in = h;
  }
  return count + static_cast<std::int64_t>(num_classes) * in + num_classes;
}

Architecture resolve_architecture(std::string_view id, int input_dim, int num_classes) {
  if (input_dim < 1 || num_classes < 2) {
    throw ConfigError(fmt::format("architecture needs input_dim >= 1 and >= 2 classes (got {}, {})",
                                  input_dim, num_classes));
  }
  Architecture arch;
  arch.id = std::string(id);
  arch.input_dim = input_dim;
  arch.num_classes = num_classes;
  if (id == "linear") return arch;

  constexpr std::string_view kTanh = "mlp-tanh-";
  constexpr std::string_view kRelu = "mlp-relu-";
  std::string_view widths;
  if (id.starts_with(kTanh)) {
    arch.activation = Activation::kTanh;
    widths = id.substr(kTanh.size());
  } else if (id.starts_with(kRelu)) {
    arch.activation = Activation::kRelu;
    widths = id.substr(kRelu.size());
  } else {
    throw ConfigError(fmt::format("unknown architecture '{}'", id));
  }
  while (!widths.empty()) {
    const auto cut = widths.find('x');
    const std::string_view token = widths.substr(0, cut);
    int w = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), w);
    if (ec != std::errc() || ptr != token.data() + token.size() || w < 1) {
      throw ConfigError(fmt::format("bad hidden width '{}' in architecture '{}'", token, id));
    }
    arch.hidden.push_back(w);
    widths = cut == std::string_view::npos ? std::string_view{} : widths.substr(cut + 1);
  }
  if (arch.hidden.empty()) throw ConfigError(fmt::format("architecture '{}' has no layers", id));
  return arch;
}

namespace {

struct LayerShape {
  int in;
  int out;
  std::int64_t offset;  // start of W; b follows at offset + in * out
};

std::vector<LayerShape> layer_shapes(const Architecture& arch) {
  std::vector<LayerShape> shapes;
  std::int64_t offset = 0;
  int in = arch.input_dim;
  auto add = [&](int out) {
    shapes.push_back({in, out, offset});
    offset += static_cast<std::int64_t>(in) * out + out;
    in = out;
  };
  for (int h : arch.hidden) add(h);
  add(arch.num_classes);
  return shapes;
}

using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation act) {
  if (act == Activation::kTanh) return z.array().tanh().matrix();
  return z.cwiseMax(0.0);
}

Eigen::MatrixXd activation_derivative(const Eigen::MatrixXd& z, const Eigen::MatrixXd& a,
                                      Activation act) {
  if (act == Activation::kTanh) return (1.0 - a.array().square()).matrix();
  return (z.array() > 0.0).cast<double>().matrix();
}

}  // namespace

ClassifierSnapshot::ClassifierSnapshot(Architecture arch, Eigen::VectorXd parameters,
                                       SnapshotInfo info)
    : arch_(std::move(arch)), params_(std::move(parameters)), info_(info) {
  if (params_.size() != arch_.parameter_count()) {
    throw ShapeError(fmt::format("architecture '{}' needs {} parameters, got {}", arch_.id,
                                 arch_.parameter_count(), params_.size()));
  }
}

ClassifierSnapshot ClassifierSnapshot::initialize(const Architecture& arch, std::uint64_t seed) {
  Eigen::VectorXd params = Eigen::VectorXd::Zero(arch.parameter_count());
  Rng rng = make_rng(seed, "init-weights");
  for (const auto& layer : layer_shapes(arch)) {
    const double limit = std::sqrt(6.0 / (layer.in + layer.out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(layer.in) * layer.out; ++k) {
      params[layer.offset + k] = dist(rng);
    }
  }
  return ClassifierSnapshot(arch, std::move(params), SnapshotInfo{TrainingMode::kStandard, seed, 0});
}

ClassifierSnapshot ClassifierSnapshot::with_parameters(Eigen::VectorXd parameters,
                                                       SnapshotInfo info) const {
  return ClassifierSnapshot(arch_, std::move(parameters), info);
}

ForwardCache ClassifierSnapshot::forward(const Eigen::MatrixXd& x) const {
  if (x.cols() != arch_.input_dim) {
    throw ShapeError(fmt::format("expected {} input features, got {}", arch_.input_dim, x.cols()));
  }
  const auto shapes = layer_shapes(arch_);
  ForwardCache cache;
  cache.activations.push_back(x);
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const auto& s = shapes[l];
    ConstMatMap w(params_.data() + s.offset, s.out, s.in);
    ConstVecMap b(params_.data() + s.offset + static_cast<std::int64_t>(s.in) * s.out, s.out);
    Eigen::MatrixXd z = cache.activations.back() * w.transpose();
    z.rowwise() += b.transpose();
    if (l + 1 == shapes.size()) {
      cache.logits = std::move(z);
    } else {
      cache.activations.push_back(activate(z, arch_.activation));
      cache.pre_activations.push_back(std::move(z));
    }
  }
  return cache;
}

Eigen::MatrixXd ClassifierSnapshot::logits(const Eigen::MatrixXd& x) const {
  return forward(x).logits;
}

Eigen::MatrixXd ClassifierSnapshot::embed(const Eigen::MatrixXd& x) const {
  return forward(x).activations.back();
}

Eigen::MatrixXd ClassifierSnapshot::backward(const ForwardCache& cache,
                                             const Eigen::MatrixXd& dlogits,
                                             Eigen::VectorXd* param_grad) const {
  const auto shapes = layer_shapes(arch_);
  if (param_grad != nullptr) *param_grad = Eigen::VectorXd::Zero(params_.size());
  Eigen::MatrixXd delta = dlogits;  // gradient w.r.t. the current layer's output
  for (std::size_t l = shapes.size(); l-- > 0;) {
    const auto& s = shapes[l];
    if (l + 1 < shapes.size()) {
      delta = delta.cwiseProduct(activation_derivative(cache.pre_activations[l],
                                                       cache.activations[l + 1],
                                                       arch_.activation));
    }
    const Eigen::MatrixXd& input = cache.activations[l];
    if (param_grad != nullptr) {
      Eigen::Map<Eigen::MatrixXd> dw(param_grad->data() + s.offset, s.out, s.in);
      Eigen::Map<Eigen::VectorXd> db(
          param_grad->data() + s.offset + static_cast<std::int64_t>(s.in) * s.out, s.out);
      dw.noalias() = delta.transpose() * input;
      db = delta.colwise().sum().transpose();
    }
    ConstMatMap w(params_.data() + s.offset, s.out, s.in);
    delta = delta * w;
  }
  return delta;
}

Eigen::VectorXd ClassifierSnapshot::parameter_gradient(const ForwardCache& cache,
                                                       const Eigen::MatrixXd& dlogits) const {
  Eigen::VectorXd grad;
  backward(cache, dlogits, &grad);
  return grad;
}

Eigen::MatrixXd ClassifierSnapshot::input_gradient(const ForwardCache& cache,
                                                   const Eigen::MatrixXd& dlogits) const {
  return backward(cache, dlogits, nullptr);
}

namespace {

constexpr std::string_view kSnapshotMagic = "FRAL-SNAPSHOT";
constexpr int kSnapshotVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "snapshot blobs are written in native little-endian order");

}  // namespace

void ClassifierSnapshot::save(std::ostream& out) const {
  out << kSnapshotMagic << " v" << kSnapshotVersion << "\n"
      << "architecture " << arch_.id << "\n"
      << "input_dim " << arch_.input_dim << "\n"
      << "num_classes " << arch_.num_classes << "\n"
      << "mode " << training_mode_name(info_.mode) << "\n"
      << "seed " << info_.seed << "\n"
      << "round " << info_.round << "\n"
      << "parameters " << params_.size() << "\n"
      << "end\n";
  out.write(reinterpret_cast<const char*>(params_.data()),
            static_cast<std::streamsize>(params_.size() * sizeof(double)));
  if (!out) throw Error("failed to write snapshot");
}

ClassifierSnapshot ClassifierSnapshot::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      line != fmt::format("{} v{}", kSnapshotMagic, kSnapshotVersion)) {
    throw Error(fmt::format("not a version {} snapshot: '{}'", kSnapshotVersion, line));
  }
  std::string arch_id, mode;
  int input_dim = 0, num_classes = 0, round = 0;
  std::uint64_t seed = 0;
  std::int64_t count = -1;
  while (std::getline(in, line) && line != "end") {
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    if (key == "architecture") fields >> arch_id;
    else if (key == "input_dim") fields >> input_dim;
    else if (key == "num_classes") fields >> num_classes;
    else if (key == "mode") fields >> mode;
    else if (key == "seed") fields >> seed;
    else if (key == "round") fields >> round;
    else if (key == "parameters") fields >> count;
    else throw Error(fmt::format("unknown snapshot header field '{}'", key));
  }
  if (line != "end") throw Error("truncated snapshot header");
  Architecture arch = resolve_architecture(arch_id, input_dim, num_classes);
  if (count != arch.parameter_count()) throw Error("snapshot parameter count mismatch");
  Eigen::VectorXd params(count);
  in.read(reinterpret_cast<char*>(params.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw Error("truncated snapshot body");
  SnapshotInfo info{mode == "robust" ? TrainingMode::kRobust : TrainingMode::kStandard, seed,
                    round};
  return ClassifierSnapshot(std::move(arch), std::move(params), info);
}

void ClassifierSnapshot::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write snapshot '{}'", path));
  save(out);
}

ClassifierSnapshot ClassifierSnapshot::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read snapshot '{}'", path));
  return load(in);
}

Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::VectorXd max = logits.rowwise().maxCoeff();
  Eigen::MatrixXd shifted = logits.colwise() - max;
  Eigen::VectorXd lse = shifted.array().exp().rowwise().sum().log().matrix();
  return shifted.colwise() - lse;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  return log_softmax_rows(logits).array().exp().matrix();
}

Eigen::MatrixXd predict_proba(const ClassifierSnapshot& model, const Eigen::MatrixXd& batch) {
  return softmax_rows(model.logits(batch));
}

std::vector<ClassId> predict_labels(const ClassifierSnapshot& model,
                                    const Eigen::MatrixXd& batch) {
  const Eigen::MatrixXd logits = model.logits(batch);
  std::vector<ClassId> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index arg = 0;
    logits.row(i).maxCoeff(&arg);
    out[i] = static_cast<ClassId>(arg);
  }
  return out;
}

bool is_probability_vector(std::span<const double> p, double tol) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tol;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw ShapeError(fmt::format("kl_divergence length mismatch ({} vs {})", p.size(), q.size()));
  }
  const auto clamped = [](std::span<const double> v) {
    std::vector<double> out(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[i] = std::clamp(v[i], kProbabilityFloor, 1.0);
      sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
  };
  const auto pc = clamped(p);
  const auto qc = clamped(q);
  double kl = 0.0;
  for (std::size_t i = 0; i < pc.size(); ++i) kl += pc[i] * std::log(pc[i] / qc[i]);
  return std::max(kl, 0.0);
}

double kl_divergence(const Eigen::Ref<const Eigen::RowVectorXd>& p,
                     const Eigen::Ref<const Eigen::RowVectorXd>& q) {
  return kl_divergence(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
                       std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
}

double cross_entropy(const Eigen::MatrixXd& logits, std::span<const ClassId> labels,
                     Eigen::MatrixXd* dlogits) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size()) {
    throw ShapeError("cross_entropy: logits rows and labels differ in length");
  }
  const double n = static_cast<double>(logits.rows());
  const Eigen::MatrixXd logp = log_softmax_rows(logits);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) loss -= logp(i, labels[i]);
  if (dlogits != nullptr) {
    *dlogits = logp.array().exp().matrix();
    for (Eigen::Index i = 0; i < logits.rows(); ++i) (*dlogits)(i, labels[i]) -= 1.0;
    *dlogits /= n;
  }
  return loss / n;
}

double kl_logits(const Eigen::MatrixXd& benign_logits,
                 const Eigen::MatrixXd& adversarial_logits, Eigen::MatrixXd* dbenign,
                 Eigen::MatrixXd* dadversarial) {
  if (benign_logits.rows() != adversarial_logits.rows() ||
      benign_logits.cols() != adversarial_logits.cols()) {
    throw ShapeError("kl_logits: shape mismatch");
  }
  const double n = static_cast<double>(benign_logits.rows());
  const Eigen::MatrixXd logp = log_softmax_rows(benign_logits);
  const Eigen::MatrixXd logq = log_softmax_rows(adversarial_logits);
  const Eigen::MatrixXd p = logp.array().exp().matrix();
  const Eigen::MatrixXd gap = logp - logq;
  const Eigen::VectorXd row_kl = p.cwiseProduct(gap).rowwise().sum();
  if (dbenign != nullptr) {
    // d/da_j sum_i p_i (log p_i - log q_i) = p_j (gap_j - KL)
    *dbenign = (p.array() * (gap.colwise() - row_kl).array()).matrix() / n;
  }
  if (dadversarial != nullptr) {
    *dadversarial = (logq.array().exp().matrix() - p) / n;
  }
  return row_kl.sum() / n;
}

}  // namespace fral
