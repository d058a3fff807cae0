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

#include "groundworld/plot.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

namespace groundworld {
namespace {

using Glyph = std::array<const char*, 7>;

const std::map<char, Glyph>& font() {
  static const std::map<char, Glyph> f = {
      {' ', {".....", ".....", ".....", ".....", ".....", ".....", "....."}},
      {'0', {".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."}},
      {'1', {"..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."}},
      {'2', {".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"}},
      {'3', {"#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."}},
      {'4', {"...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."}},
      {'5', {"#####", "#....", "####.", "....#", "....#", "#...#", ".###."}},
      {'6', {"..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."}},
      {'7', {"#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."}},
      {'8', {".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."}},
      {'9', {".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."}},
      {'A', {".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
      {'B', {"####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."}},
      {'C', {".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."}},
      {'D', {"###..", "#..#.", "#...#", "#...#", "#...#", "#..#.", "###.."}},
      {'E', {"#####", "#....", "#....", "####.", "#....", "#....", "#####"}},
      {'F', {"#####", "#....", "#....", "####.", "#....", "#....", "#...."}},
      {'G', {".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####"}},
      {'H', {"#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
      {'I', {".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."}},
      {'J', {"..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."}},
      {'K', {"#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"}},
      {'L', {"#....", "#....", "#....", "#....", "#....", "#....", "#####"}},
      {'M', {"#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"}},
      {'N', {"#...#", "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#"}},
      {'O', {".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
      {'P', {"####.", "#...#", "#...#", "####.", "#....", "#....", "#...."}},
      {'Q', {".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"}},
      {'R', {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"}},
      {'S', {".####", "#....", "#....", ".###.", "....#", "....#", "####."}},
      {'T', {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."}},
      {'U', {"#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
      {'V', {"#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."}},
      {'W', {"#...#", "#...#", "#...#", "#.#.#", "#.#.#", "#.#.#", ".#.#."}},
      {'X', {"#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"}},
      {'Y', {"#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."}},
      {'Z', {"#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"}},
      {'.', {".....", ".....", ".....", ".....", ".....", ".##..", ".##.."}},
      {',', {".....", ".....", ".....", ".....", ".##..", "..#..", ".#..."}},
      {'-', {".....", ".....", ".....", "#####", ".....", ".....", "....."}},
      {'+', {".....", "..#..", "..#..", "#####", "..#..", "..#..", "....."}},
      {'=', {".....", ".....", "#####", ".....", "#####", ".....", "....."}},
      {'%', {"##...", "##..#", "...#.", "..#..", ".#...", "#..##", "...##"}},
      {':', {".....", ".##..", ".##..", ".....", ".##..", ".##..", "....."}},
      {'>', {".#...", "..#..", "...#.", "....#", "...#.", "..#..", ".#..."}},
      {'(', {"...#.", "..#..", ".#...", ".#...", ".#...", "..#..", "...#."}},
      {')', {".#...", "..#..", "...#.", "...#.", "...#.", "..#..", ".#..."}},
      {'/', {".....", "....#", "...#.", "..#..", ".#...", "#....", "....."}},
      {'_', {".....", ".....", ".....", ".....", ".....", ".....", "#####"}},
  };
  return f;
}

const Glyph kUnknown = {"#####", "#...#", "#...#", "#...#", "#...#", "#...#", "#####"};

constexpr std::array<Rgb, 6> kSeriesColors = {{
    {31, 119, 180},
    {214, 39, 40},
    {44, 160, 44},
    {255, 127, 14},
    {148, 103, 189},
    {23, 190, 207},
}};
constexpr Rgb kBlack{0, 0, 0}, kWhite{255, 255, 255}, kGrid{225, 225, 225}, kCriterion{150, 150, 150};

void put(Frame& img, int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  for (int ch = 0; ch < 3; ++ch) img.at(ch, y, x) = c[static_cast<std::size_t>(ch)];
}

void line(Frame& img, int x0, int y0, int x1, int y1, Rgb c, int thick = 1, int dash = 0) {
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy, n = 0;
  for (;;) {
    if (dash == 0 || (n / dash) % 2 == 0)
      for (int t = 0; t < thick; ++t) {
        put(img, x0, y0 + t, c);
        put(img, x0 + t, y0, c);
      }
    ++n;
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void fill_rect(Frame& img, int x0, int y0, int x1, int y1, Rgb c) {
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) put(img, x, y, c);
}

// 1-2-5 step giving at most `max_ticks` intervals over [0, hi].
double nice_step(double hi, int max_ticks) {
  const double raw = hi / max_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) return m * mag;
  return 10.0 * mag;
}

std::string episode_label(double v) {
  if (v >= 1e6) return fmt::format("{:g}M", v / 1e6);
  if (v >= 1e3) return fmt::format("{:g}K", v / 1e3);
  return fmt::format("{:g}", v);
}

}  // namespace

void draw_text(Frame& img, int x, int y, std::string_view text, Rgb color, int scale) {
  for (char ch : text) {
    const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    const auto it = font().find(up);
    const Glyph& g = it == font().end() ? kUnknown : it->second;
    for (int r = 0; r < 7; ++r)
      for (int c = 0; c < 5; ++c)
        if (g[static_cast<std::size_t>(r)][c] == '#') fill_rect(img, x + c * scale, y + r * scale, x + (c + 1) * scale, y + (r + 1) * scale, color);
    x += 6 * scale;
  }
}

int text_width(std::string_view text, int scale) {
  return text.empty() ? 0 : static_cast<int>(text.size()) * 6 * scale - scale;
}

std::vector<std::size_t> thin_indices(std::size_t n, int max_points) {
  std::vector<std::size_t> out;
  if (n == 0) return out;
  const std::size_t cap = static_cast<std::size_t>(std::max(2, max_points));
  if (n <= cap) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  // Evenly spaced by integer arithmetic, first and last included.
  for (std::size_t k = 0; k < cap; ++k) out.push_back(k * (n - 1) / (cap - 1));
  return out;
}

std::vector<PlotPoint> plot_points(const std::vector<PlotSeries>& series, const PlotConfig& cfg) {
  std::vector<PlotPoint> pts;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& rows = series[s].rows;
    for (std::size_t i : thin_indices(rows.size(), cfg.max_points))
      pts.push_back({static_cast<int>(s), rows[i].episode, rows[i].stage, rows[i].success_rate});
  }
  return pts;
}

Frame plot_curves(const std::vector<PlotSeries>& series, const PlotConfig& cfg) {
  if (series.empty() || std::all_of(series.begin(), series.end(), [](const PlotSeries& s) { return s.rows.empty(); }))
    throw std::invalid_argument("empty metrics: nothing to plot");
  if (cfg.width < 200 || cfg.height < 150) throw std::invalid_argument("plot is too small");

  Frame img(cfg.width, cfg.height);
  std::fill(img.data.begin(), img.data.end(), std::uint8_t{255});
  const int left = 60, right = cfg.width - 20, top = 36, bottom = cfg.height - 44;
  const int pw = right - left, ph = bottom - top;

  std::int64_t max_ep = 1;
  for (const auto& s : series)
    if (!s.rows.empty()) max_ep = std::max(max_ep, s.rows.back().episode);
  const double xstep = nice_step(static_cast<double>(max_ep), 6);
  const double xmax = std::ceil(static_cast<double>(max_ep) / xstep) * xstep;
  auto px = [&](double ep) { return left + static_cast<int>(std::lround(ep / xmax * pw)); };
  auto py = [&](double rate) { return bottom - static_cast<int>(std::lround(std::clamp(rate, 0.0, 1.0) * ph)); };

  for (int k = 0; k <= 5; ++k) {
    const double r = 0.2 * k;
    line(img, left, py(r), right, py(r), kGrid);
    const std::string lbl = fmt::format("{:.1f}", r);
    draw_text(img, left - 8 - text_width(lbl), py(r) - 3, lbl, kBlack);
  }
  for (double e = 0.0; e <= xmax + 0.5 * xstep; e += xstep) {
    line(img, px(e), top, px(e), bottom, kGrid);
    line(img, px(e), bottom, px(e), bottom + 4, kBlack);
    const std::string lbl = episode_label(e);
    draw_text(img, px(e) - text_width(lbl) / 2, bottom + 8, lbl, kBlack);
  }
  line(img, left, py(0.8), right, py(0.8), kCriterion, 1, 4);
  line(img, left, top, left, bottom, kBlack);
  line(img, left, bottom, right, bottom, kBlack);
  draw_text(img, (left + right - text_width(cfg.title, 2)) / 2, 10, cfg.title, kBlack, 2);
  draw_text(img, (left + right - text_width("episode")) / 2, bottom + 24, "episode", kBlack);

  const auto pts = plot_points(series, cfg);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const auto& a = pts[i - 1];
    const auto& b = pts[i];
    if (a.series != b.series) continue;
    const Rgb c = kSeriesColors[static_cast<std::size_t>(a.series) % kSeriesColors.size()];
    if (b.stage != a.stage) line(img, px(static_cast<double>(b.episode)), top, px(static_cast<double>(b.episode)), bottom, c, 1, 3);
    line(img, px(static_cast<double>(a.episode)), py(a.success_rate), px(static_cast<double>(b.episode)),
         py(b.success_rate), c, 2);
  }

  int ly = top + 8;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const Rgb c = kSeriesColors[s % kSeriesColors.size()];
    fill_rect(img, left + 10, ly, left + 22, ly + 7, c);
    fill_rect(img, left + 26, ly - 2, left + 30 + text_width(series[s].label), ly + 9, kWhite);
    draw_text(img, left + 28, ly, series[s].label, kBlack);
    ly += 14;
  }
  return img;
}

std::string plot_points_csv(const std::vector<PlotSeries>& series, const std::vector<PlotPoint>& points) {
  std::string out = "series,label,episode,stage,success_rate\n";
  for (const auto& p : points)
    out += fmt::format("{},{},{},{},{:.6f}\n", p.series, series[static_cast<std::size_t>(p.series)].label, p.episode,
                       p.stage, p.success_rate);
  return out;
}

void plot_files(const std::vector<std::filesystem::path>& inputs, std::vector<std::string> labels,
                const std::filesystem::path& out, const PlotConfig& cfg) {
  if (inputs.empty()) throw std::invalid_argument("no metrics files given");
  if (!labels.empty() && labels.size() != inputs.size())
    throw std::invalid_argument("need one label per metrics file");
  std::vector<PlotSeries> series;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::string label = labels.empty() ? inputs[i].stem().string() : labels[i];
    if (label.find(',') != std::string::npos) throw std::invalid_argument("labels may not contain commas");
    series.push_back({std::move(label), read_metrics_csv(inputs[i])});
  }
  const Frame img = plot_curves(series, cfg);
  write_png(out, img);
  std::ofstream csv(out.string() + ".csv", std::ios::binary | std::ios::trunc);
  if (!csv) throw std::runtime_error(fmt::format("cannot write {}.csv", out.string()));
  csv << plot_points_csv(series, plot_points(series, cfg));
}

}  // namespace groundworld
