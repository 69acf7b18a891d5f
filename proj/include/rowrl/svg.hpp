#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "rowrl/common.hpp"

namespace rowrl {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y)
};

// Static polyline chart; output is deterministic for identical inputs.
inline std::string render_line_chart(const std::vector<PlotSeries>& series,
                                     const std::string& x_label,
                                     const std::string& y_label,
                                     const std::string& title = "") {
  if (series.empty()) throw DomainError("plot: no series");
  for (const PlotSeries& s : series)
    if (s.points.empty()) throw DomainError("plot: empty series " + s.label);

  const int width = 860, height = 520;
  const int ml = 72, mr = 180, mt = 40, mb = 56;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double xmin = series[0].points[0].first, xmax = xmin;
  double ymin = series[0].points[0].second, ymax = ymin;
  for (const PlotSeries& s : series) {
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return ml + pw * (x - xmin) / (xmax - xmin); };
  auto py = [&](double y) { return mt + ph * (1.0 - (y - ymin) / (ymax - ymin)); };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  char buf[256];
  std::string svg;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" "
                "height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                width, height, width, height);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"24\" font-family=\"sans-serif\" "
                  "font-size=\"16\">%s</text>\n",
                  ml, title.c_str());
    svg += buf;
  }

  // axes and ticks
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" "
                "stroke=\"black\"/>\n<line x1=\"%d\" y1=\"%d\" x2=\"%.2f\" "
                "y2=\"%d\" stroke=\"black\"/>\n",
                ml, mt, ml, height - mb, ml, height - mb, ml + pw, height - mb);
  svg += buf;
  const int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    const double fx = xmin + (xmax - xmin) * i / ticks;
    const double fy = ymin + (ymax - ymin) * i / ticks;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%d\" x2=\"%.2f\" y2=\"%d\" "
                  "stroke=\"black\"/>\n",
                  px(fx), height - mb, px(fx), height - mb + 5);
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%d\" font-family=\"sans-serif\" "
                  "font-size=\"11\" text-anchor=\"middle\">%.4g</text>\n",
                  px(fx), height - mb + 18, fx);
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%d\" y1=\"%.2f\" x2=\"%d\" y2=\"%.2f\" "
                  "stroke=\"black\"/>\n",
                  ml - 5, py(fy), ml, py(fy));
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%.2f\" font-family=\"sans-serif\" "
                  "font-size=\"11\" text-anchor=\"end\">%.5g</text>\n",
                  ml - 8, py(fy) + 4, fy);
    svg += buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%d\" font-family=\"sans-serif\" "
                "font-size=\"13\" text-anchor=\"middle\">%s</text>\n",
                ml + pw / 2, height - 12, x_label.c_str());
  svg += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"16\" y=\"%.2f\" font-family=\"sans-serif\" "
                "font-size=\"13\" transform=\"rotate(-90 16 %.2f)\" "
                "text-anchor=\"middle\">%s</text>\n",
                mt + ph / 2, mt + ph / 2, y_label.c_str());
  svg += buf;

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = palette[s % (sizeof palette / sizeof palette[0])];
    std::string pts;
    for (const auto& [x, y] : series[s].points) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(x), py(y));
      pts += buf;
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    const double ly = mt + 16.0 * (s + 1);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                  "stroke=\"%s\" stroke-width=\"2\"/>\n",
                  ml + pw + 12, ly, ml + pw + 34, ly, color);
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" "
                  "font-size=\"12\">%s</text>\n",
                  ml + pw + 40, ly + 4, series[s].label.c_str());
    svg += buf;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace rowrl
