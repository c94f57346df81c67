#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

// Hand-rolled reference calculators. These deliberately do not call into the
// library so each check has an independent path to the expected value.
namespace testoracle {

inline double bellman_once(double old_q, double reward, double best_next, double alpha,
                           double gamma) {
  return old_q + alpha * (reward + gamma * best_next - old_q);
}

inline double ema_once(double previous, double raw, double alpha) {
  return previous + alpha * (raw - previous);
}

// Element-wise average of equally sized vectors.
inline std::vector<double> mean_elementwise(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("no rows");
  std::vector<double> out(rows.front().size(), 0.0);
  for (const auto& row : rows) {
    if (row.size() != out.size()) throw std::invalid_argument("ragged rows");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += row[i];
  }
  for (auto& v : out) v /= static_cast<double>(rows.size());
  return out;
}

}  // namespace testoracle
