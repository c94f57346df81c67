#pragma once

#include <string>
#include <vector>

namespace luxloop {

struct SvgSeries {
  std::string name;
  std::string color;
  std::vector<double> values;  // shared x axis: sample index
  double scale = 1.0;          // display scaling only, applied before plotting
};

// Minimal multi-series line chart. Output contains no timestamps, so repeated
// rendering of the same data is byte-identical.
std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::vector<SvgSeries>& series, int width = 960,
                              int height = 480);

void write_svg(const std::string& path, const std::string& svg);

}  // namespace luxloop
