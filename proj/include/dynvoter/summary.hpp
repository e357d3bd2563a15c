#pragma once

#include <cmath>
#include <vector>

namespace dynvoter {

struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
};

inline MeanEstimate mean_and_se(const std::vector<double>& xs) {
  MeanEstimate e;
  if (xs.empty()) return e;
  const auto m = static_cast<double>(xs.size());
  double s = 0.0;
  for (double x : xs) s += x;
  e.mean = s / m;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - e.mean) * (x - e.mean);
    e.se = std::sqrt(ss / (m - 1.0) / m);
  }
  return e;
}

}  // namespace dynvoter
