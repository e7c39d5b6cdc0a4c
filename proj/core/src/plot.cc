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

#include "fral/plot.h"

#include <algorithm>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "fral/errors.h"
#include "fral/results.h"

namespace fral {

namespace fs = std::filesystem;

PlotKind parse_plot_kind(std::string_view name) {
  if (name == "metric-curves") return PlotKind::kMetricCurves;
  if (name == "label-distribution") return PlotKind::kLabelDistribution;
  if (name == "per-class-bars") return PlotKind::kPerClassBars;
  throw ConfigError(fmt::format(
      "unknown plot kind '{}' (expected metric-curves, label-distribution or per-class-bars)", name));
}

const char* plot_kind_name(PlotKind kind) {
  switch (kind) {
    case PlotKind::kMetricCurves:
      return "metric-curves";
    case PlotKind::kLabelDistribution:
      return "label-distribution";
    case PlotKind::kPerClassBars:
      return "per-class-bars";
  }
  return "?";
}

namespace {

fs::path require(const fs::path& dir, const char* name, PlotKind kind) {
  const fs::path p = dir / name;
  if (!fs::exists(p)) {
    throw Error(fmt::format("{} plot needs '{}', which is missing", plot_kind_name(kind), p.string()));
  }
  return p;
}

PlotData metric_curves(const fs::path& dir) {
  const auto rows = read_metrics(require(dir, kMetricsFile, PlotKind::kMetricCurves));
  PlotData d;
  d.title = "worst-group metrics per round (test split)";
  d.x_label = "round";
  d.y_label = "metric";
  Series s_std{"F_std", {}, {}}, s_rob{"F_rob", {}, {}};
  for (const auto& r : rows) {
    s_std.x.push_back(r.round);
    s_std.y.push_back(r.f_std);
    s_rob.x.push_back(r.round);
    s_rob.y.push_back(r.f_rob);
  }
  d.series = {s_std, s_rob};
  return d;
}

PlotData label_distribution(const fs::path& dir) {
  const auto initial = read_initial_pool(require(dir, kInitialPoolFile, PlotKind::kLabelDistribution));
  const auto acquired = read_acquired(require(dir, kAcquiredFile, PlotKind::kLabelDistribution));
  ClassId max_class = 0;
  for (const auto& r : initial) max_class = std::max(max_class, r.label);
  for (const auto& r : acquired) max_class = std::max(max_class, r.label);
  PlotData d;
  d.title = "label distribution: initial pool vs acquired";
  d.x_label = "class";
  d.y_label = "count";
  d.bars = true;
  Series s_init{"initial", {}, {}}, s_acq{"acquired", {}, {}};
  for (ClassId c = 0; c <= max_class; ++c) {
    d.categories.push_back(std::to_string(c));
    s_init.x.push_back(c);
    s_acq.x.push_back(c);
    s_init.y.push_back(static_cast<double>(
        std::count_if(initial.begin(), initial.end(), [c](const auto& r) { return r.label == c; })));
    s_acq.y.push_back(static_cast<double>(
        std::count_if(acquired.begin(), acquired.end(), [c](const auto& r) { return r.label == c; })));
  }
  d.series = {s_init, s_acq};
  return d;
}

PlotData per_class_bars(const fs::path& dir) {
  const auto metrics = read_metrics(require(dir, kMetricsFile, PlotKind::kPerClassBars));
  const auto rows = read_per_class(require(dir, kPerClassFile, PlotKind::kPerClassBars));
  GroupId group = 0;
  int last_round = 0;
  for (const auto& m : metrics) {
    if (m.worst_group) group = *m.worst_group;
    last_round = std::max(last_round, m.round);
  }
  PlotData d;
  d.title = fmt::format("per-class recall, group {} (initialization vs round {})", group, last_round);
  d.x_label = "class";
  d.y_label = "recall";
  d.bars = true;
  std::map<int, std::map<ClassId, PerClassRow>> by_round;
  for (const auto& r : rows) {
    if (r.group == group && (r.round == 0 || r.round == last_round)) by_round[r.round][r.label] = r;
  }
  std::vector<Series> series;
  for (int round : {0, last_round}) {
    if (!by_round.contains(round) || (round == last_round && last_round == 0 && !series.empty())) continue;
    Series s_std{fmt::format("standard (round {})", round), {}, {}};
    Series s_rob{fmt::format("robust (round {})", round), {}, {}};
    for (const auto& [c, r] : by_round[round]) {
      s_std.x.push_back(c);
      s_std.y.push_back(r.standard);
      s_rob.x.push_back(c);
      s_rob.y.push_back(r.robust.value_or(0.0));
    }
    series.push_back(std::move(s_std));
    series.push_back(std::move(s_rob));
  }
  if (!series.empty()) {
    for (double c : series.front().x) d.categories.push_back(std::to_string(static_cast<int>(c)));
  }
  d.series = std::move(series);
  return d;
}

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out += ch;
    }
  }
  return out;
}

}  // namespace

PlotData plot_data(const fs::path& run_dir, PlotKind kind) {
  switch (kind) {
    case PlotKind::kMetricCurves:
      return metric_curves(run_dir);
    case PlotKind::kLabelDistribution:
      return label_distribution(run_dir);
    case PlotKind::kPerClassBars:
      return per_class_bars(run_dir);
  }
  throw Error("unknown plot kind");
}

std::string render_svg(const PlotData& d) {
  constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 160, kTop = 40, kBottom = 50;
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  double x_min = 0, x_max = 1, y_max = 0;
  bool first = true;
  for (const auto& s : d.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        x_min = x_max = s.x[i];
        first = false;
      }
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  }
  if (y_max <= 0) y_max = 1;
  if (!d.bars && y_max <= 1.0) y_max = 1.0;

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
      "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kW, kH);
  svg += fmt::format("<text x=\"{}\" y=\"20\" font-size=\"14\">{}</text>\n", kLeft, escape(d.title));
  svg += fmt::format(
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n"
      "<line x1=\"{0}\" y1=\"{3}\" x2=\"{0}\" y2=\"{1}\" stroke=\"black\"/>\n",
      kLeft, kTop + ph, kLeft + pw, kTop);
  svg += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", kLeft + pw / 2, kH - 10, escape(d.x_label));
  svg += fmt::format("<text x=\"10\" y=\"{}\">{}</text>\n", kTop - 8, escape(d.y_label));
  for (int t = 0; t <= 4; ++t) {
    const double v = y_max * t / 4.0;
    const double y = kTop + ph - ph * t / 4.0;
    svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.2f}</text>\n", kLeft - 6, y + 4, v);
  }
  const auto ypos = [&](double v) { return kTop + ph - ph * (v / y_max); };

  if (d.bars) {
    const std::size_t groups = std::max<std::size_t>(d.categories.size(), 1);
    const double slot = pw / static_cast<double>(groups);
    const double bar = slot * 0.8 / static_cast<double>(std::max<std::size_t>(d.series.size(), 1));
    for (std::size_t g = 0; g < d.categories.size(); ++g) {
      svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                         kLeft + slot * (g + 0.5), kTop + ph + 16, escape(d.categories[g]));
    }
    for (std::size_t s = 0; s < d.series.size(); ++s) {
      for (std::size_t i = 0; i < d.series[s].y.size(); ++i) {
        const double x = kLeft + slot * (i + 0.1) + bar * s;
        const double y = ypos(d.series[s].y[i]);
        svg += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                           x, y, bar, kTop + ph - y, kPalette[s % 6]);
      }
    }
  } else {
    const double span = x_max > x_min ? x_max - x_min : 1.0;
    const auto xpos = [&](double v) { return kLeft + pw * (v - x_min) / span; };
    for (double v = x_min; v <= x_max; v += 1.0) {
      svg += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", xpos(v),
                         kTop + ph + 16, v);
    }
    for (std::size_t s = 0; s < d.series.size(); ++s) {
      std::string points;
      for (std::size_t i = 0; i < d.series[s].x.size(); ++i) {
        points += fmt::format("{:.2f},{:.2f} ", xpos(d.series[s].x[i]), ypos(d.series[s].y[i]));
      }
      svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n",
                         kPalette[s % 6], points);
      for (std::size_t i = 0; i < d.series[s].x.size(); ++i) {
        svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n",
                           xpos(d.series[s].x[i]), ypos(d.series[s].y[i]), kPalette[s % 6]);
      }
    }
  }
  for (std::size_t s = 0; s < d.series.size(); ++s) {
    const double y = kTop + 10 + 18 * s;
    svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n", kW - kRight + 10,
                       y, kPalette[s % 6]);
    svg += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", kW - kRight + 28, y + 10,
                       escape(d.series[s].name));
  }
  svg += "</svg>\n";
  return svg;
}

fs::path write_plot(const fs::path& run_dir, PlotKind kind) {
  const PlotData data = plot_data(run_dir, kind);
  fs::create_directories(run_dir / "plots");
  const fs::path out = run_dir / "plots" / fmt::format("{}.svg", plot_kind_name(kind));
  std::ofstream file(out, std::ios::trunc);
  if (!file) throw Error(fmt::format("cannot write '{}'", out.string()));
  file << render_svg(data);
  return out;
}

}  // namespace fral
