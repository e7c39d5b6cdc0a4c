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

#ifndef FRAL_CONFIG_H_
#define FRAL_CONFIG_H_

#include <string>
#include <string_view>
#include <vector>

#include "fral/active_loop.h"

namespace fral {

// Experiment configuration files are JSON objects. Every field of
// ExperimentConfig is addressable by a dotted path (e.g. "robust_train.epochs"),
// both in the file and in command-line overrides. Unknown keys are errors.
//
//   {
//     "name": "toy", "strategy": "JIN", "rounds": 5, "budget": 0.02,
//     "labeled_fraction": 0.2, "seed": 0, "architecture": "mlp-relu-32",
//     "worst_group_mode": "mean", "metric": "accuracy",
//     "dataset": {"kind": "synthetic", "generator": "two-group-gaussians",
//                 "seed": 0, "num_samples": 3000, "dim": 8},
//     "attack": {"epsilon": "4/255", "step_size": "2/255", "num_steps": 5},
//     "train": {"epochs": 30, "batch_size": 64, "learning_rate": 0.01},
//     "robust_train": {"epochs": 30, "finetune_epochs": 10, "trades_beta": 6.0}
//   }
//
// robust_train.attack defaults to the evaluation attack's radius, step and
// step count; its objective is always kl-to-benign.

// Parses "key.path=value". The value is read as JSON when it parses as JSON
// and as a plain string otherwise.
struct ConfigOverride {
  std::string path;
  std::string value;
};

ConfigOverride parse_override(std::string_view text);

// Parses JSON text, applies overrides in order, and validates. Throws
// ConfigError naming the offending key.
ExperimentConfig parse_config(std::string_view json_text,
                              const std::vector<ConfigOverride>& overrides = {});

ExperimentConfig load_config(const std::string& path,
                             const std::vector<ConfigOverride>& overrides = {});

// Fully resolved configuration (every field, defaults filled in) as pretty
// JSON text. parse_config(to_json_text(c)) reproduces c.
std::string to_json_text(const ExperimentConfig& cfg);

// Canonical JSON of the dataset section; runs are comparable when equal.
std::string dataset_signature(const ExperimentConfig& cfg);

std::string read_file(const std::string& path);

}  // namespace fral

#endif  // FRAL_CONFIG_H_
