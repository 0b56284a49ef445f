// Copyright 2026 The transeval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "commands.hpp"

namespace transeval::cli {
namespace {

constexpr double kPanelWidth = 420.0;
constexpr double kPanelHeight = 280.0;
constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 36.0;
constexpr double kMarginBottom = 44.0;

struct Panel {
  std::string title;
  std::vector<double> x;
  std::vector<double> y;
};

std::string Fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string Tick(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void Expand(double& lo, double& hi) {
  if (hi > lo) return;
  const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.05;
  lo -= pad;
  hi += pad;
}

std::string RenderPanel(const Panel& p, double ox, double oy) {
  const double plot_w = kPanelWidth - kMarginLeft - kMarginRight;
  const double plot_h = kPanelHeight - kMarginTop - kMarginBottom;
  double x_lo = *std::min_element(p.x.begin(), p.x.end());
  double x_hi = *std::max_element(p.x.begin(), p.x.end());
  double y_lo = *std::min_element(p.y.begin(), p.y.end());
  double y_hi = *std::max_element(p.y.begin(), p.y.end());
  Expand(x_lo, x_hi);
  Expand(y_lo, y_hi);
  auto sx = [&](double v) { return ox + kMarginLeft + (v - x_lo) / (x_hi - x_lo) * plot_w; };
  auto sy = [&](double v) { return oy + kMarginTop + (y_hi - v) / (y_hi - y_lo) * plot_h; };

  std::string s = "  <g>\n";
  s += "    <text x=\"" + Fixed(ox + kPanelWidth / 2) + "\" y=\"" + Fixed(oy + 22) +
       "\" text-anchor=\"middle\" font-size=\"14\">" + p.title + "</text>\n";
  s += "    <rect x=\"" + Fixed(ox + kMarginLeft) + "\" y=\"" + Fixed(oy + kMarginTop) +
       "\" width=\"" + Fixed(plot_w) + "\" height=\"" + Fixed(plot_h) +
       "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = y_lo + (y_hi - y_lo) * i / 4.0;
    s += "    <text x=\"" + Fixed(ox + kMarginLeft - 6) + "\" y=\"" + Fixed(sy(yv) + 4) +
         "\" text-anchor=\"end\" font-size=\"10\">" + Tick(yv) + "</text>\n";
    const double xv = x_lo + (x_hi - x_lo) * i / 4.0;
    s += "    <text x=\"" + Fixed(sx(xv)) + "\" y=\"" + Fixed(oy + kMarginTop + plot_h + 16) +
         "\" text-anchor=\"middle\" font-size=\"10\">" + Tick(xv) + "</text>\n";
  }
  s += "    <text x=\"" + Fixed(ox + kMarginLeft + plot_w / 2) + "\" y=\"" +
       Fixed(oy + kPanelHeight - 8) + "\" text-anchor=\"middle\" font-size=\"11\">epoch</text>\n";
  s += "    <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    if (i) s += ' ';
    s += Fixed(sx(p.x[i])) + "," + Fixed(sy(p.y[i]));
  }
  s += "\"/>\n";
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    s += "    <circle cx=\"" + Fixed(sx(p.x[i])) + "\" cy=\"" + Fixed(sy(p.y[i])) +
         "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  }
  s += "  </g>\n";
  return s;
}

}  // namespace

std::string RenderSvg(const MetricSeries& series) {
  std::vector<Panel> panels;
  std::vector<double> x;
  for (const auto& r : series.records) x.push_back(static_cast<double>(r.epoch));
  const bool has_fid = !series.records.empty() &&
                       std::all_of(series.records.begin(), series.records.end(),
                                   [](const EpochRecord& r) { return r.fid.has_value(); });
  if (has_fid) {
    Panel p{"FID", x, {}};
    for (const auto& r : series.records) p.y.push_back(*r.fid);
    panels.push_back(std::move(p));
  }
  Panel frd{"FRD", x, {}}, crd{"CRD distance", x, {}}, ll{"Random forest log loss", x, {}};
  for (const auto& r : series.records) {
    frd.y.push_back(r.frd);
    crd.y.push_back(r.crd_distance);
    ll.y.push_back(r.rf_mean_logloss);
  }
  panels.push_back(std::move(frd));
  panels.push_back(std::move(crd));
  panels.push_back(std::move(ll));

  const int cols = 2;
  const int rows = static_cast<int>((panels.size() + cols - 1) / cols);
  const double width = cols * kPanelWidth;
  const double height = rows * kPanelHeight;
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Fixed(width, 0) + "\" height=\"" +
       Fixed(height, 0) + "\" viewBox=\"0 0 " + Fixed(width, 0) + " " + Fixed(height, 0) +
       "\" font-family=\"sans-serif\">\n";
  s += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (series.records.empty()) {
    s += "  <text x=\"20\" y=\"40\">no epochs</text>\n";
  } else {
    for (std::size_t i = 0; i < panels.size(); ++i) {
      s += RenderPanel(panels[i], static_cast<double>(i % cols) * kPanelWidth,
                       static_cast<double>(i / cols) * kPanelHeight);
    }
  }
  s += "</svg>\n";
  return s;
}

}  // namespace transeval::cli
