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

#ifndef FRAL_TESTS_SUPPORT_FIXTURES_H_
#define FRAL_TESTS_SUPPORT_FIXTURES_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fral/dataset.h"
#include "fral/model.h"

namespace fral::testing {

// Linear classifier with logits = x w^T + b; w is given row per class.
ClassifierSnapshot linear_model(const std::vector<std::vector<double>>& w,
                                const std::vector<double>& b);

// A model whose logits ignore the input.
ClassifierSnapshot constant_model(int input_dim, const std::vector<double>& bias);

ClassifierSnapshot random_model(const std::string& arch, int input_dim, int num_classes,
                                std::uint64_t seed);

// Bundle with the given split sizes; labels cycle through classes and groups
// cycle through groups (offset so every (class, group) cell is populated).
// Features are uniform in [0, 1].
DatasetBundle grid_bundle(int n_train, int n_val, int n_test, int num_classes, int num_groups,
                          int dim, std::uint64_t seed);

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                               double lo = 0.0, double hi = 1.0);

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace fral::testing

#endif  // FRAL_TESTS_SUPPORT_FIXTURES_H_
