#include "luxloop/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace luxloop {

double quantile_linear(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

FiveNum five_number_summary(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("summary of empty sample");
  std::sort(values.begin(), values.end());
  FiveNum out;
  out.min = values.front();
  out.max = values.back();
  const auto at = [&](double q) {
    const double h = (static_cast<double>(values.size()) - 1.0) * q;
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
  };
  out.q1 = at(0.25);
  out.median = at(0.5);
  out.q3 = at(0.75);
  return out;
}

Histogram Histogram::build(const std::vector<double>& values, double bin_width,
                           double origin) {
  if (bin_width <= 0.0) throw std::invalid_argument("bin width must be positive");
  Histogram h;
  h.bin_width = bin_width;
  h.origin = origin;
  for (double v : values) {
    const double offset = (v - origin) / bin_width;
    if (offset < 0.0) throw std::invalid_argument("value below histogram origin");
    const std::size_t bin = static_cast<std::size_t>(offset);
    if (bin >= h.counts.size()) h.counts.resize(bin + 1, 0);
    ++h.counts[bin];
  }
  return h;
}

long Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0L);
}

}  // namespace luxloop
