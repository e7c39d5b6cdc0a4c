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

#include "fixtures.h"

#include <fstream>
#include <random>

#include "fral/random.h"

namespace fral::testing {

ClassifierSnapshot linear_model(const std::vector<std::vector<double>>& w,
                                const std::vector<double>& b) {
  const int classes = static_cast<int>(w.size());
  const int dim = static_cast<int>(w.front().size());
  const Architecture arch = resolve_architecture("linear", dim, classes);
  Eigen::VectorXd params(arch.parameter_count());
  // W is stored column-major (classes x dim), then the bias.
  for (int j = 0; j < dim; ++j) {
    for (int c = 0; c < classes; ++c) params[j * classes + c] = w[c][j];
  }
  for (int c = 0; c < classes; ++c) params[dim * classes + c] = b[c];
  return ClassifierSnapshot(arch, params, SnapshotInfo{});
}

ClassifierSnapshot constant_model(int input_dim, const std::vector<double>& bias) {
  return linear_model(std::vector<std::vector<double>>(bias.size(), std::vector<double>(input_dim, 0.0)),
                      bias);
}

ClassifierSnapshot random_model(const std::string& arch, int input_dim, int num_classes,
                                std::uint64_t seed) {
  return ClassifierSnapshot::initialize(resolve_architecture(arch, input_dim, num_classes), seed);
}

DatasetBundle grid_bundle(int n_train, int n_val, int n_test, int num_classes, int num_groups,
                          int dim, std::uint64_t seed) {
  Rng rng = make_rng(seed, "test/grid-bundle");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Example> examples;
  std::vector<Split> split_of;
  const auto add = [&](int n, Split split) {
    for (int i = 0; i < n; ++i) {
      Example e;
      e.id = static_cast<SampleId>(examples.size());
      e.label = i % num_classes;
      e.group = (i / num_classes) % num_groups;
      for (int j = 0; j < dim; ++j) e.features.push_back(unit(rng));
      examples.push_back(std::move(e));
      split_of.push_back(split);
    }
  };
  add(n_train, Split::kTrain);
  add(n_val, Split::kValidation);
  add(n_test, Split::kTest);
  return make_bundle(std::move(examples), num_classes, num_groups, ClampRange{}, split_of);
}

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double lo,
                               double hi) {
  Rng rng = make_rng(seed, "test/uniform-matrix");
  std::uniform_real_distribution<double> unit(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = unit(rng);
  }
  return m;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("fral-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace fral::testing
