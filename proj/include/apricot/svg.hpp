#pragma once

// Hand-rolled SVG line plots: axes, ticks, polylines, legend. No charting
// dependency so that identical input yields byte-identical output.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace apricot {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

namespace svg_detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline const char* kPalette[6] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace svg_detail

inline std::string render_plot(const std::vector<PlotSeries>& series, const std::string& x_label,
                               const std::string& y_label) {
  if (series.empty()) throw std::invalid_argument("render_plot: no series");
  double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
  bool any = false;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (!any) {
        x_min = x_max = x;
        y_min = y_max = y;
        any = true;
      }
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  if (!any) throw std::invalid_argument("render_plot: all series empty");
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min + 1.0;

  const double W = 800, H = 500, ML = 70, MR = 30, MT = 30, MB = 60;
  auto px = [&](double x) { return ML + (x - x_min) / (x_max - x_min) * (W - ML - MR); };
  auto py = [&](double y) { return H - MB - (y - y_min) / (y_max - y_min) * (H - MT - MB); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
         "viewBox=\"0 0 800 500\">\n";
  out += "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
  // axes
  out += "<line x1=\"" + svg_detail::num(ML) + "\" y1=\"" + svg_detail::num(H - MB) + "\" x2=\"" +
         svg_detail::num(W - MR) + "\" y2=\"" + svg_detail::num(H - MB) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out += "<line x1=\"" + svg_detail::num(ML) + "\" y1=\"" + svg_detail::num(MT) + "\" x2=\"" +
         svg_detail::num(ML) + "\" y2=\"" + svg_detail::num(H - MB) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  // ticks
  for (int i = 0; i <= 5; ++i) {
    const double fx = x_min + (x_max - x_min) * i / 5.0;
    const double fy = y_min + (y_max - y_min) * i / 5.0;
    out += "<line x1=\"" + svg_detail::num(px(fx)) + "\" y1=\"" + svg_detail::num(H - MB) +
           "\" x2=\"" + svg_detail::num(px(fx)) + "\" y2=\"" + svg_detail::num(H - MB + 5) +
           "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + svg_detail::num(px(fx)) + "\" y=\"" + svg_detail::num(H - MB + 20) +
           "\" font-size=\"12\" text-anchor=\"middle\">" + svg_detail::num(fx) + "</text>\n";
    out += "<line x1=\"" + svg_detail::num(ML - 5) + "\" y1=\"" + svg_detail::num(py(fy)) +
           "\" x2=\"" + svg_detail::num(ML) + "\" y2=\"" + svg_detail::num(py(fy)) +
           "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + svg_detail::num(ML - 8) + "\" y=\"" + svg_detail::num(py(fy) + 4) +
           "\" font-size=\"12\" text-anchor=\"end\">" + svg_detail::num(fy) + "</text>\n";
  }
  // axis labels
  out += "<text x=\"" + svg_detail::num((ML + W - MR) / 2) + "\" y=\"" + svg_detail::num(H - 15) +
         "\" font-size=\"14\" text-anchor=\"middle\">" + x_label + "</text>\n";
  out += "<text x=\"18\" y=\"" + svg_detail::num((MT + H - MB) / 2) +
         "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         svg_detail::num((MT + H - MB) / 2) + ")\">" + y_label + "</text>\n";
  // series
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = svg_detail::kPalette[s % 6];
    std::string pts;
    for (const auto& [x, y] : series[s].points) {
      pts += svg_detail::num(px(x));
      pts += ',';
      pts += svg_detail::num(py(y));
      pts += ' ';
    }
    if (!pts.empty()) pts.pop_back();
    out += "<polyline fill=\"none\" stroke=\"";
    out += color;
    out += "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    // legend
    const double ly = MT + 18.0 * static_cast<double>(s);
    out += "<line x1=\"" + svg_detail::num(W - MR - 150) + "\" y1=\"" + svg_detail::num(ly) +
           "\" x2=\"" + svg_detail::num(W - MR - 125) + "\" y2=\"" + svg_detail::num(ly) +
           "\" stroke=\"";
    out += color;
    out += "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + svg_detail::num(W - MR - 118) + "\" y=\"" + svg_detail::num(ly + 4) +
           "\" font-size=\"12\">" + series[s].label + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace apricot
