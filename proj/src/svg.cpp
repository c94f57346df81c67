#include "luxloop/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace luxloop {

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::vector<SvgSeries>& series, int width,
                              int height) {
  if (series.empty()) throw std::invalid_argument("no series to plot");
  std::size_t n = 0;
  double lo = 0.0, hi = 1.0;
  bool any = false;
  for (const auto& s : series) {
    n = std::max(n, s.values.size());
    for (double v : s.values) {
      const double y = v * s.scale;
      if (!any) {
        lo = hi = y;
        any = true;
      } else {
        lo = std::min(lo, y);
        hi = std::max(hi, y);
      }
    }
  }
  if (!any || n < 2) throw std::invalid_argument("series have no data to plot");
  if (hi == lo) hi = lo + 1.0;

  const double ml = 60, mr = 20, mt = 40, mb = 40;
  const double pw = width - ml - mr;
  const double ph = height - mt - mb;
  const auto x_of = [&](std::size_t i) {
    return ml + pw * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  const auto y_of = [&](double v) { return mt + ph * (1.0 - (v - lo) / (hi - lo)); };

  char buf[256];
  std::string svg;
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n",
                width, height, width, height);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%0.f\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">",
                ml);
  svg += buf;
  svg += title + "</text>\n";

  // Axes and horizontal gridlines with value labels.
  for (int g = 0; g <= 4; ++g) {
    const double v = lo + (hi - lo) * g / 4.0;
    const double y = y_of(v);
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                  "stroke=\"#dddddd\"/>\n",
                  ml, y, ml + pw, y);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"4\" y=\"%.1f\" font-family=\"sans-serif\" "
                  "font-size=\"11\">%.4g</text>\n",
                  y + 4, v);
    svg += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                ml, mt + ph, ml + pw, mt + ph);
  svg += buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.1f\" y=\"%d\" font-family=\"sans-serif\" font-size=\"12\">%s"
                "</text>\n",
                ml + pw / 2 - 20, height - 8, x_label.c_str());
  svg += buf;

  double legend_x = ml + 8;
  for (const auto& s : series) {
    if (s.values.size() < 2) continue;
    svg += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", x_of(i), y_of(s.values[i] * s.scale));
      svg += buf;
    }
    svg += "\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\" "
                  "fill=\"%s\">%s</text>\n",
                  legend_x, mt - 6, s.color.c_str(), s.name.c_str());
    svg += buf;
    legend_x += 10.0 + 7.5 * static_cast<double>(s.name.size());
  }
  svg += "</svg>\n";
  return svg;
}

void write_svg(const std::string& path, const std::string& svg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << svg;
}

}  // namespace luxloop
