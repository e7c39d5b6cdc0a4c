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

// fral: run fairness-aware robust active learning experiments and summarize
// their results.
//
//   fral run CONFIG [--override key.path=value]... [--out DIR] [--no-snapshots]
//   fral report DIR... [--json]
//   fral plot DIR KIND
//   fral validate-config CONFIG [--override key.path=value]...
//
// Results land in $FRAL_RESULTS_ROOT (default ./results) unless --out is set.
// Exit codes: 0 success, 2 configuration error, 3 any other failure.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <glog/logging.h>

#include "fral/config.h"
#include "fral/errors.h"
#include "fral/plot.h"
#include "fral/report.h"
#include "fral/results.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::vector<fral::ConfigOverride> parse_overrides(const std::vector<std::string>& raw) {
  std::vector<fral::ConfigOverride> out;
  for (const auto& r : raw) out.push_back(fral::parse_override(r));
  return out;
}

fs::path default_run_dir(const fral::ExperimentConfig& cfg) {
  const fs::path root = fral::results_root();
  const std::string base =
      fmt::format("{}_{}_seed{}", cfg.name, fral::strategy_name(cfg.strategy), cfg.seed);
  fs::path dir = root / base;
  for (int n = 2; fs::exists(dir / fral::kMetricsFile); ++n) dir = root / fmt::format("{}_{}", base, n);
  return dir;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& raw_overrides,
            const std::string& out, bool snapshots) {
  const std::string bytes = fral::read_file(config_path);
  const fral::ExperimentConfig cfg = fral::parse_config(bytes, parse_overrides(raw_overrides));
  const fs::path dir = out.empty() ? default_run_dir(cfg) : fs::path(out);
  fral::ResultsStore store(dir, bytes, cfg, snapshots);
  LOG(INFO) << "writing results to " << dir.string();
  const fral::FralResult result = fral::run_fral(cfg, &store);
  store.finish(result);
  std::printf("%s\n", dir.string().c_str());
  return 0;
}

int cmd_report(const std::vector<std::string>& dirs, bool as_json) {
  std::vector<fral::RunRecord> runs;
  for (const auto& d : dirs) runs.push_back(fral::load_run(d));
  const fral::Comparison c = fral::compare_runs(runs);
  std::fputs((as_json ? fral::render_json(c) : fral::render_text(c)).c_str(), stdout);
  return 0;
}

int cmd_plot(const std::string& dir, const std::string& kind) {
  const fs::path out = fral::write_plot(dir, fral::parse_plot_kind(kind));
  std::printf("%s\n", out.string().c_str());
  return 0;
}

int cmd_validate(const std::string& config_path, const std::vector<std::string>& raw_overrides) {
  const fral::ExperimentConfig cfg =
      fral::load_config(config_path, parse_overrides(raw_overrides));
  std::fputs(fral::to_json_text(cfg).c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  google::InitGoogleLogging(argv[0]);
  FLAGS_logtostderr = true;

  CLI::App app{"Fairness-aware robust active learning experiments"};
  app.require_subcommand(1);

  std::string config_path, out, plot_dir, plot_kind;
  std::vector<std::string> overrides, report_dirs;
  bool no_snapshots = false, as_json = false;

  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("config", config_path, "JSON experiment config")->required();
  run->add_option("-o,--override", overrides, "key.path=value (repeatable)");
  run->add_option("--out", out, "Experiment directory (default: under $FRAL_RESULTS_ROOT)");
  run->add_flag("--no-snapshots", no_snapshots, "Do not save model snapshots");

  auto* report = app.add_subcommand("report", "Compare finished experiments");
  report->add_option("dirs", report_dirs, "Experiment directories")->required();
  report->add_flag("--json", as_json, "Machine-readable output");

  auto* plot = app.add_subcommand("plot", "Render an SVG plot into DIR/plots");
  plot->add_option("dir", plot_dir, "Experiment directory")->required();
  plot->add_option("kind", plot_kind, "metric-curves | label-distribution | per-class-bars")
      ->required();

  auto* validate = app.add_subcommand("validate-config", "Parse a config and print it resolved");
  validate->add_option("config", config_path, "JSON experiment config")->required();
  validate->add_option("-o,--override", overrides, "key.path=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, overrides, out, !no_snapshots);
    if (*report) return cmd_report(report_dirs, as_json);
    if (*plot) return cmd_plot(plot_dir, plot_kind);
    if (*validate) return cmd_validate(config_path, overrides);
  } catch (const fral::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const fral::RunError& e) {
    std::fprintf(stderr, "run failed in round %d: %s\n", e.round(), e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}
