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

#include "fral/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "fral/errors.h"

namespace fral {

using json = nlohmann::json;

namespace {

std::string join_path(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Reads keys from one JSON object and reports any key that was never read.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) {
      throw ConfigError(fmt::format("config key '{}' must be an object", path_.empty() ? "<root>" : path_));
    }
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  Section child(const std::string& key) {
    const json* j = find(key);
    static const json kEmpty = json::object();
    return Section(j != nullptr ? *j : kEmpty, join_path(path_, key));
  }

  void read(const std::string& key, int& out) {
    if (const json* j = find(key)) {
      if (!j->is_number_integer()) throw type_error(key, "an integer");
      out = j->get<int>();
    }
  }
  void read(const std::string& key, std::int64_t& out) {
    if (const json* j = find(key)) {
      if (!j->is_number_integer()) throw type_error(key, "an integer");
      out = j->get<std::int64_t>();
    }
  }
  void read(const std::string& key, std::uint64_t& out) {
    if (const json* j = find(key)) {
      if (!j->is_number_unsigned() && !(j->is_number_integer() && j->get<std::int64_t>() >= 0)) {
        throw type_error(key, "a nonnegative integer");
      }
      out = j->get<std::uint64_t>();
    }
  }
  void read(const std::string& key, double& out) {
    if (const json* j = find(key)) {
      if (!j->is_number()) throw type_error(key, "a number");
      out = j->get<double>();
    }
  }
  void read(const std::string& key, bool& out) {
    if (const json* j = find(key)) {
      if (!j->is_boolean()) throw type_error(key, "a boolean");
      out = j->get<bool>();
    }
  }
  void read(const std::string& key, std::string& out) {
    if (const json* j = find(key)) {
      if (!j->is_string()) throw type_error(key, "a string");
      out = j->get<std::string>();
    }
  }
  // Number or fraction string such as "4/255".
  void read_fraction(const std::string& key, double& out) {
    if (const json* j = find(key)) {
      if (j->is_number()) {
        out = j->get<double>();
      } else if (j->is_string()) {
        try {
          out = parse_fraction(j->get<std::string>());
        } catch (const ConfigError& e) {
          throw ConfigError(fmt::format("config key '{}': {}", join_path(path_, key), e.what()));
        }
      } else {
        throw type_error(key, "a number or a fraction string");
      }
    }
  }
  template <typename Enum, typename Parse>
  void read_enum(const std::string& key, Enum& out, Parse parse) {
    std::string text;
    if (has(key)) {
      read(key, text);
      try {
        out = parse(text);
      } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("config key '{}': {}", join_path(path_, key), e.what()));
      }
    } else {
      find(key);
    }
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.contains(key)) {
        throw ConfigError(fmt::format("unknown config key '{}'", join_path(path_, key)));
      }
    }
  }

 private:
  ConfigError type_error(const std::string& key, const char* expected) const {
    return ConfigError(fmt::format("config key '{}' must be {}", join_path(path_, key), expected));
  }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_clamp(Section& s, ClampRange& clamp) {
  if (const json* j = s.find("clamp")) {
    if (!j->is_array() || j->size() != 2 || !(*j)[0].is_number() || !(*j)[1].is_number()) {
      throw ConfigError("config key 'clamp' must be [lo, hi]");
    }
    clamp.lo = (*j)[0].get<double>();
    clamp.hi = (*j)[1].get<double>();
  }
}

IngestionSpec read_dataset(Section s) {
  IngestionSpec spec;
  std::string kind = "synthetic";
  s.read("kind", kind);
  if (kind == "synthetic") {
    spec.kind = IngestionSpec::Kind::kSynthetic;
  } else if (kind == "tabular") {
    spec.kind = IngestionSpec::Kind::kTabular;
  } else if (kind == "images") {
    spec.kind = IngestionSpec::Kind::kImageManifest;
  } else {
    throw ConfigError(fmt::format("config key 'dataset.kind': unknown kind '{}' "
                                  "(expected synthetic, tabular or images)", kind));
  }
  s.read("path", spec.path);
  std::string delimiter(1, spec.delimiter);
  s.read("delimiter", delimiter);
  if (delimiter == "\\t" || delimiter == "tab") delimiter = "\t";
  if (delimiter.size() != 1) throw ConfigError("config key 'dataset.delimiter' must be one character");
  spec.delimiter = delimiter[0];
  s.read("generator", spec.generator);
  s.read("seed", spec.seed);
  s.read("num_samples", spec.num_samples);
  s.read("dim", spec.dim);
  {
    Section splits = s.child("splits");
    splits.read("train", spec.fractions.train);
    splits.read("validation", spec.fractions.validation);
    splits.read("test", spec.fractions.test);
    splits.finish();
  }
  read_clamp(s, spec.clamp);
  s.finish();
  if (spec.kind != IngestionSpec::Kind::kSynthetic && spec.path.empty()) {
    throw ConfigError("config key 'dataset.path' is required for tabular and image datasets");
  }
  return spec;
}

void read_train(Section& s, TrainConfig& tc) {
  s.read("epochs", tc.epochs);
  s.read("batch_size", tc.batch_size);
  s.read("learning_rate", tc.learning_rate);
  s.read_enum("optimizer", tc.optimizer, parse_optimizer);
  s.read("momentum", tc.momentum);
  s.read("oversample", tc.oversample);
}

void read_attack(Section s, AttackConfig& ac, bool allow_objective) {
  s.read_fraction("epsilon", ac.epsilon);
  s.read_fraction("step_size", ac.step_size);
  s.read("num_steps", ac.num_steps);
  s.read_enum("init", ac.init, parse_attack_init);
  if (allow_objective) s.read_enum("objective", ac.objective, parse_attack_objective);
  s.finish();
}

json attack_json(const AttackConfig& a, bool with_objective) {
  json j = {{"epsilon", a.epsilon},
            {"step_size", a.step_size},
            {"num_steps", a.num_steps},
            {"init", attack_init_name(a.init)}};
  if (with_objective) j["objective"] = attack_objective_name(a.objective);
  return j;
}

json train_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"optimizer", optimizer_name(t.optimizer)},
          {"momentum", t.momentum},
          {"oversample", t.oversample}};
}

json dataset_json(const IngestionSpec& d) {
  const char* kind = d.kind == IngestionSpec::Kind::kSynthetic
                         ? "synthetic"
                         : (d.kind == IngestionSpec::Kind::kTabular ? "tabular" : "images");
  json j = {{"kind", kind},
            {"seed", d.seed},
            {"splits",
             {{"train", d.fractions.train},
              {"validation", d.fractions.validation},
              {"test", d.fractions.test}}},
            {"clamp", {d.clamp.lo, d.clamp.hi}}};
  if (d.kind == IngestionSpec::Kind::kSynthetic) {
    j["generator"] = d.generator;
    j["num_samples"] = d.num_samples;
    j["dim"] = d.dim;
  } else {
    j["path"] = d.path;
    if (d.kind == IngestionSpec::Kind::kTabular) j["delimiter"] = std::string(1, d.delimiter);
  }
  return j;
}

void apply_override(json& root, const ConfigOverride& o) {
  json value;
  try {
    value = json::parse(o.value);
  } catch (const json::parse_error&) {
    value = o.value;
  }
  json* node = &root;
  std::string_view rest = o.path;
  while (true) {
    const auto dot = rest.find('.');
    const std::string key(rest.substr(0, dot));
    if (key.empty()) throw ConfigError(fmt::format("malformed override path '{}'", o.path));
    if (!node->is_object()) {
      throw ConfigError(fmt::format("override '{}' descends into a non-object", o.path));
    }
    if (dot == std::string_view::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    rest = rest.substr(dot + 1);
  }
}

}  // namespace

ConfigOverride parse_override(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError(fmt::format("override '{}' is not of the form key.path=value", text));
  }
  return {std::string(text.substr(0, eq)), std::string(text.substr(eq + 1))};
}

ExperimentConfig parse_config(std::string_view json_text,
                              const std::vector<ConfigOverride>& overrides) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  for (const auto& o : overrides) apply_override(root, o);

  ExperimentConfig cfg;
  Section top(root, "");
  top.read("name", cfg.name);
  cfg.dataset = read_dataset(top.child("dataset"));
  top.read("architecture", cfg.architecture);
  {
    Section train = top.child("train");
    read_train(train, cfg.train);
    train.finish();
  }
  read_attack(top.child("attack"), cfg.attack, /*allow_objective=*/true);
  cfg.attack.clamp = cfg.dataset.clamp;
  {
    // The inner training attack inherits the evaluation threat model.
    cfg.robust_train.attack = cfg.attack;
    cfg.robust_train.attack.objective = AttackObjective::kKlToBenign;
    cfg.robust_train.train = cfg.train;
    Section robust = top.child("robust_train");
    read_train(robust, cfg.robust_train.train);
    robust.read("finetune_epochs", cfg.robust_train.finetune_epochs);
    robust.read("trades_beta", cfg.robust_train.trades_beta);
    robust.read("retrain_from_scratch", cfg.robust_train.retrain_from_scratch);
    read_attack(robust.child("attack"), cfg.robust_train.attack, /*allow_objective=*/false);
    robust.finish();
  }
  top.read_enum("strategy", cfg.strategy, parse_strategy);
  top.read("rounds", cfg.rounds);
  top.read("budget", cfg.budget);
  top.read("labeled_fraction", cfg.labeled_fraction);
  top.read_enum("worst_group_mode", cfg.worst_group_mode, parse_worst_group_mode);
  top.read_enum("metric", cfg.metric, parse_metric_kind);
  top.read("seed", cfg.seed);
  top.finish();
  cfg.validate();
  return cfg;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ExperimentConfig load_config(const std::string& path, const std::vector<ConfigOverride>& overrides) {
  return parse_config(read_file(path), overrides);
}

std::string to_json_text(const ExperimentConfig& cfg) {
  json robust = train_json(cfg.robust_train.train);
  robust["finetune_epochs"] = cfg.robust_train.finetune_epochs;
  robust["trades_beta"] = cfg.robust_train.trades_beta;
  robust["retrain_from_scratch"] = cfg.robust_train.retrain_from_scratch;
  robust["attack"] = attack_json(cfg.robust_train.attack, false);
  const json j = {{"name", cfg.name},
                  {"dataset", dataset_json(cfg.dataset)},
                  {"architecture", cfg.architecture},
                  {"train", train_json(cfg.train)},
                  {"robust_train", robust},
                  {"attack", attack_json(cfg.attack, true)},
                  {"strategy", strategy_name(cfg.strategy)},
                  {"rounds", cfg.rounds},
                  {"budget", cfg.budget},
                  {"labeled_fraction", cfg.labeled_fraction},
                  {"worst_group_mode", worst_group_mode_name(cfg.worst_group_mode)},
                  {"metric", metric_kind_name(cfg.metric)},
                  {"seed", cfg.seed}};
  return j.dump(2) + "\n";
}

std::string dataset_signature(const ExperimentConfig& cfg) {
  return dataset_json(cfg.dataset).dump();
}

}  // namespace fral
