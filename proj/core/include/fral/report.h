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

#ifndef FRAL_REPORT_H_
#define FRAL_REPORT_H_

#include <filesystem>
#include <string>
#include <vector>

#include "fral/results.h"

namespace fral {

// A finished (or partially finished) experiment directory.
struct RunRecord {
  std::filesystem::path dir;
  std::string strategy;
  std::uint64_t seed = 0;
  int rounds = 0;
  std::string dataset;  // canonical dataset JSON
  std::vector<MetricsRow> metrics;
};

RunRecord load_run(const std::filesystem::path& dir);

// Mean and sample standard deviation (0 for a single value).
struct Stat {
  double mean = 0.0;
  double stddev = 0.0;
  int n = 0;
};

Stat summarize(const std::vector<double>& values);

struct ComparisonRow {
  std::string label;  // "Initialization" or a strategy name
  int runs = 0;
  Stat worst_std, disparity_std, group_avg_std;
  Stat worst_rob, disparity_rob, group_avg_rob;
};

struct TimingRow {
  std::string label;  // "Init. AT" or a strategy name
  int runs = 0;
  Stat seconds;  // per round (per run for Init. AT)
};

struct Comparison {
  int rounds = 0;
  std::string dataset;
  std::vector<ComparisonRow> rows;  // initialization first, then strategies
  std::vector<TimingRow> timing;
};

// Final-round worst / disparity / group-average per strategy with
// mean +- std over the runs of that strategy; the initialization row uses
// round 0. Throws Error when runs differ in dataset or round count.
Comparison compare_runs(const std::vector<RunRecord>& runs);

std::string render_text(const Comparison& c);
std::string render_json(const Comparison& c);

}  // namespace fral

#endif  // FRAL_REPORT_H_
