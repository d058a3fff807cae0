// Copyright (c) 2026 The groundworld Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Learning curves: rolling success rate against episode index.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "groundworld/renderer.hpp"
#include "groundworld/trainer.hpp"

namespace groundworld {

struct PlotSeries {
  std::string label;
  std::vector<MetricsRow> rows;
};

struct PlotConfig {
  int width = 800;
  int height = 480;
  int max_points = 2000;  ///< per series; rows are thinned evenly beyond this
  std::string title = "rolling success rate";
};

/// One plotted point, as written to the sidecar CSV.
struct PlotPoint {
  int series = 0;
  std::int64_t episode = 0;
  int stage = 0;
  double success_rate = 0.0;
};

/// Row indices kept when thinning `n` rows to at most `max_points`; always
/// includes the first and last row.
std::vector<std::size_t> thin_indices(std::size_t n, int max_points);

std::vector<PlotPoint> plot_points(const std::vector<PlotSeries>& series, const PlotConfig& cfg);

/// Draws the curves. Throws std::invalid_argument when there is nothing to
/// plot.
Frame plot_curves(const std::vector<PlotSeries>& series, const PlotConfig& cfg);

/// "series,label,episode,stage,success_rate"
std::string plot_points_csv(const std::vector<PlotSeries>& series, const std::vector<PlotPoint>& points);

/// Reads each metrics file, writes `out` and `out` with ".csv" appended.
/// Labels default to the file stems.
void plot_files(const std::vector<std::filesystem::path>& inputs, std::vector<std::string> labels,
                const std::filesystem::path& out, const PlotConfig& cfg = {});

/// Draws ASCII text with the built-in 5x7 font, `scale` pixels per dot.
void draw_text(Frame& img, int x, int y, std::string_view text, Rgb color, int scale = 1);
/// Width in pixels of `text` at `scale`.
int text_width(std::string_view text, int scale = 1);

}  // namespace groundworld
