#pragma once

#include <vector>

namespace luxloop {

struct FiveNum {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  bool operator==(const FiveNum&) const = default;
};

// Quantile by the linear-interpolation method on the sorted sample:
// h = (n-1)*q, result = x[floor(h)] + frac(h) * (x[floor(h)+1] - x[floor(h)]).
double quantile_linear(std::vector<double> values, double q);

// min, Q1, median, Q3, max. Throws std::invalid_argument on empty input.
FiveNum five_number_summary(std::vector<double> values);

// Fixed-width histogram with bins [origin + i*w, origin + (i+1)*w).
struct Histogram {
  double bin_width = 1.0;
  double origin = 0.0;
  std::vector<long> counts;

  static Histogram build(const std::vector<double>& values, double bin_width,
                         double origin = 0.0);
  long total() const;
};

}  // namespace luxloop
