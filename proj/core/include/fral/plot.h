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

#ifndef FRAL_PLOT_H_
#define FRAL_PLOT_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fral {

enum class PlotKind { kMetricCurves, kLabelDistribution, kPerClassBars };

PlotKind parse_plot_kind(std::string_view name);
const char* plot_kind_name(PlotKind kind);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// What a plot shows, independent of how it is drawn.
struct PlotData {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<std::string> categories;  // bar plots: one per x position
  std::vector<Series> series;
  bool bars = false;
};

// metric-curves:      F_std and F_rob against round (K + 1 points each),
//                     from metrics.csv.
// label-distribution: class histogram of the initial labeled pool and of
//                     all acquired labels, from initial_pool.csv and
//                     acquired.csv.
// per-class-bars:     per-class standard and robust recall of the final
//                     round's worst group (last non-empty worst_group in
//                     metrics.csv), from per_class.csv.
// Throws Error when a required file is missing.
PlotData plot_data(const std::filesystem::path& run_dir, PlotKind kind);

std::string render_svg(const PlotData& data);

// Writes <run_dir>/plots/<kind>.svg and returns its path.
std::filesystem::path write_plot(const std::filesystem::path& run_dir, PlotKind kind);

}  // namespace fral

#endif  // FRAL_PLOT_H_
