#pragma once

// Fisher-Wright diffusion dB = sqrt(2 theta B (1 - B)) dW, the scaling limit
// of the rescaled opinion density.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

namespace dynvoter {

struct FwPath {
  std::vector<double> s;
  std::vector<double> B;
  std::optional<int> absorbed_at;  // 0 or 1
};

inline double fw_default_dt(double theta) { return 1e-3 * std::min(1.0, 1.0 / (2.0 * theta)); }

/// Euler-Maruyama with clamp-then-absorb at the boundaries. Records every
/// `record_stride`-th step plus the final time; the step count is
/// round(T / dt), so T is always hit exactly.
inline FwPath fw_simulate(double theta, double u, double T, double dt, Rng& rng,
                          std::int64_t record_stride = 1) {
  detail::require(u >= 0.0 && u <= 1.0, "u must lie in [0, 1]");
  detail::require(T >= 0.0, "T must be >= 0");
  detail::require(dt > 0.0, "dt must be positive");
  detail::require(theta >= 0.0, "theta must be >= 0");
  detail::require(record_stride >= 1, "record stride must be >= 1");
  const std::int64_t steps = std::max<std::int64_t>(std::llround(T / dt), T > 0.0 ? 1 : 0);
  const double h = steps > 0 ? T / static_cast<double>(steps) : 0.0;
  const double sqrt_h = std::sqrt(h);
  FwPath p;
  double b = u;
  if (b == 0.0) p.absorbed_at = 0;
  if (b == 1.0) p.absorbed_at = 1;
  p.s.push_back(0.0);
  p.B.push_back(b);
  for (std::int64_t k = 1; k <= steps; ++k) {
    if (!p.absorbed_at) {
      b += std::sqrt(2.0 * theta * b * (1.0 - b)) * sqrt_h * rng.normal();
      if (b <= 0.0) {
        b = 0.0;
        p.absorbed_at = 0;
      } else if (b >= 1.0) {
        b = 1.0;
        p.absorbed_at = 1;
      }
    }
    if (k % record_stride == 0 || k == steps) {
      p.s.push_back(h * static_cast<double>(k));
      p.B.push_back(b);
    }
  }
  return p;
}

/// E[B_s (1 - B_s)] = u (1 - u) exp(-2 theta s).
inline double fw_heterozygosity(double theta, double u, double s) {
  return u * (1.0 - u) * std::exp(-2.0 * theta * s);
}

}  // namespace dynvoter
