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

#include "fral/report.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "fral/config.h"
#include "fral/errors.h"

namespace fral {

namespace fs = std::filesystem;
using json = nlohmann::json;

RunRecord load_run(const fs::path& dir) {
  if (!fs::exists(dir / kResolvedConfigFile) || !fs::exists(dir / kMetricsFile)) {
    throw Error(fmt::format("'{}' is not an experiment directory", dir.string()));
  }
  const ExperimentConfig cfg = parse_config(read_file((dir / kResolvedConfigFile).string()));
  RunRecord run;
  run.dir = dir;
  run.strategy = strategy_name(cfg.strategy);
  run.seed = cfg.seed;
  run.rounds = cfg.rounds;
  run.dataset = dataset_signature(cfg);
  run.metrics = read_metrics(dir / kMetricsFile);
  return run;
}

Stat summarize(const std::vector<double>& values) {
  Stat s;
  s.n = static_cast<int>(values.size());
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (s.n - 1));
  }
  return s;
}

namespace {

ComparisonRow row_from(const std::string& label, const std::vector<const MetricsRow*>& rows) {
  std::vector<double> ws, ds, as, wr, dr, ar;
  for (const MetricsRow* m : rows) {
    ws.push_back(m->f_std);
    ds.push_back(m->disparity_std);
    as.push_back(m->group_avg_std);
    wr.push_back(m->f_rob);
    dr.push_back(m->disparity_rob);
    ar.push_back(m->group_avg_rob);
  }
  ComparisonRow r;
  r.label = label;
  r.runs = static_cast<int>(rows.size());
  r.worst_std = summarize(ws);
  r.disparity_std = summarize(ds);
  r.group_avg_std = summarize(as);
  r.worst_rob = summarize(wr);
  r.disparity_rob = summarize(dr);
  r.group_avg_rob = summarize(ar);
  return r;
}

std::string cell(const Stat& s) {
  return fmt::format("{:6.2f} ± {:4.2f}", 100.0 * s.mean, 100.0 * s.stddev);
}

json stat_json(const Stat& s) { return {{"mean", s.mean}, {"std", s.stddev}, {"n", s.n}}; }

}  // namespace

Comparison compare_runs(const std::vector<RunRecord>& runs) {
  if (runs.empty()) throw Error("no experiment directories to compare");
  Comparison c;
  c.rounds = runs.front().rounds;
  c.dataset = runs.front().dataset;
  for (const auto& run : runs) {
    if (run.rounds != c.rounds || run.dataset != c.dataset) {
      throw Error(fmt::format("'{}' does not match the shape of '{}' (dataset or rounds differ)",
                              run.dir.string(), runs.front().dir.string()));
    }
    if (run.metrics.empty() || run.metrics.front().round != 0) {
      throw Error(fmt::format("'{}' has no initialization row", run.dir.string()));
    }
    if (static_cast<int>(run.metrics.size()) != c.rounds + 1) {
      throw Error(fmt::format("'{}' is incomplete ({} of {} rows)", run.dir.string(),
                              run.metrics.size(), c.rounds + 1));
    }
  }

  std::vector<const MetricsRow*> init_rows;
  std::vector<double> init_seconds;
  std::vector<std::string> order;
  std::map<std::string, std::vector<const MetricsRow*>> finals;
  std::map<std::string, std::vector<double>> selection_seconds;
  for (const auto& run : runs) {
    init_rows.push_back(&run.metrics.front());
    init_seconds.push_back(run.metrics.front().adv_train_seconds);
    if (!finals.contains(run.strategy)) order.push_back(run.strategy);
    finals[run.strategy].push_back(&run.metrics.back());
    for (std::size_t k = 1; k < run.metrics.size(); ++k) {
      selection_seconds[run.strategy].push_back(run.metrics[k].selection_seconds);
    }
  }
  c.rows.push_back(row_from("Initialization", init_rows));
  c.timing.push_back({"Init. AT", static_cast<int>(init_seconds.size()), summarize(init_seconds)});
  for (const auto& name : order) {
    c.rows.push_back(row_from(name, finals[name]));
    c.timing.push_back({name, static_cast<int>(finals[name].size()), summarize(selection_seconds[name])});
  }
  return c;
}

std::string render_text(const Comparison& c) {
  std::string out = fmt::format("{} rounds, dataset {}\n\n", c.rounds, c.dataset);
  out += fmt::format("{:<16}{:>5} | {:^15} {:^15} {:^15} | {:^15} {:^15} {:^15}\n", "method", "runs",
                     "std worst", "std disparity", "std grp avg", "rob worst", "rob disparity",
                     "rob grp avg");
  for (const auto& r : c.rows) {
    out += fmt::format("{:<16}{:>5} | {} {} {} | {} {} {}\n", r.label, r.runs, cell(r.worst_std),
                       cell(r.disparity_std), cell(r.group_avg_std), cell(r.worst_rob),
                       cell(r.disparity_rob), cell(r.group_avg_rob));
  }
  out += "\nselection seconds per round (Init. AT: initial adversarial training)\n";
  for (const auto& t : c.timing) {
    out += fmt::format("{:<16}{:>5} | {:10.4f} ± {:.4f}\n", t.label, t.runs, t.seconds.mean,
                       t.seconds.stddev);
  }
  return out;
}

std::string render_json(const Comparison& c) {
  json rows = json::array();
  for (const auto& r : c.rows) {
    rows.push_back({{"label", r.label},
                    {"runs", r.runs},
                    {"standard",
                     {{"worst", stat_json(r.worst_std)},
                      {"disparity", stat_json(r.disparity_std)},
                      {"group_avg", stat_json(r.group_avg_std)}}},
                    {"robust",
                     {{"worst", stat_json(r.worst_rob)},
                      {"disparity", stat_json(r.disparity_rob)},
                      {"group_avg", stat_json(r.group_avg_rob)}}}});
  }
  json timing = json::array();
  for (const auto& t : c.timing) {
    timing.push_back({{"label", t.label}, {"runs", t.runs}, {"seconds", stat_json(t.seconds)}});
  }
  return json{{"rounds", c.rounds}, {"dataset", json::parse(c.dataset)}, {"rows", rows},
              {"timing", timing}}
             .dump(2) +
         "\n";
}

}  // namespace fral
