#pragma once

// Diffusion constant of the voter model on rewired random regular graphs and
// the closed-form quantities of the killed distance chain built from it.
//
// Everything here is a pure function of (d, nu); all reals are doubles.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "error.hpp"

namespace dynvoter {

struct ModelConst {
  int d = 3;
  double nu = 0.0;
  double beta = std::sqrt(2.0);        // sqrt(d - 1)
  double rho = 2.0 * std::sqrt(2.0) / 3;  // 2 sqrt(d - 1) / d
};

inline ModelConst make_consts(int d, double nu) {
  detail::require(d >= 2, "degree d must be >= 2, got " + std::to_string(d));
  detail::require(nu >= 0.0 && std::isfinite(nu),
                  "rewiring rate nu must be finite and >= 0");
  ModelConst c;
  c.d = d;
  c.nu = nu;
  c.beta = std::sqrt(static_cast<double>(d - 1));
  c.rho = 2.0 * c.beta / d;
  return c;
}

struct DeltaEval {
  double value = 0.0;
  std::int64_t depth = 0;  // truncation depth of the accepted approximant
};

namespace detail {

inline constexpr std::int64_t kMaxDepth = std::int64_t{1} << 20;
inline constexpr std::int64_t kStartDepth = 64;

// Partial denominator b_k = (2 + k nu) / rho, k >= 1.
inline double partial_denominator(const ModelConst& c, std::int64_t k) {
  return (2.0 + static_cast<double>(k) * c.nu) / c.rho;
}

// Approximant of Delta(shift) truncated after `depth` levels, evaluated
// bottom-up from Delta(shift + depth) = 0.
inline double delta_backward(const ModelConst& c, std::int64_t shift,
                             std::int64_t depth) {
  double x = 0.0;
  for (std::int64_t k = shift + depth; k > shift; --k) {
    x = 1.0 / (partial_denominator(c, k) - x);
  }
  return x;
}

// Same continued fraction evaluated top-down through the three-term
// recurrences for numerators and denominators of successive convergents,
// renormalised every step so the super-exponential growth of the
// denominators cannot overflow.
inline DeltaEval delta_forward(const ModelConst& c, std::int64_t shift,
                               double tol) {
  double p_prev = 1.0, p = 0.0;  // P_{-1}, P_0
  double q_prev = 0.0, q = 1.0;  // Q_{-1}, Q_0
  double last = std::numeric_limits<double>::quiet_NaN();
  for (std::int64_t k = 1; k <= kMaxDepth; ++k) {
    const double b = partial_denominator(c, shift + k);
    const double a = (k == 1) ? 1.0 : -1.0;
    const double p_next = b * p + a * p_prev;
    const double q_next = b * q + a * q_prev;
    p_prev = p / q_next;
    q_prev = q / q_next;
    p = p_next / q_next;
    q = 1.0;
    if (k > 1 && std::abs(p - last) < tol) return {p, k};
    last = p;
  }
  throw numerical_failure("forward convergents of Delta did not settle within depth 2^20");
}

}  // namespace detail

/// Delta(shift): the continued fraction with partial denominators
/// b_{shift+1}, b_{shift+2}, ... . The truncation depth starts at 64 and is
/// doubled until two successive approximants differ by less than `tol`.
inline DeltaEval delta_cf_shifted(const ModelConst& c, std::int64_t shift,
                                  double tol) {
  detail::require(tol > 0.0, "tolerance must be positive");
  detail::require(shift >= 0, "shift must be >= 0");
  std::int64_t depth = detail::kStartDepth;
  double prev = detail::delta_backward(c, shift, depth);
  while (depth < detail::kMaxDepth) {
    depth *= 2;
    const double cur = detail::delta_backward(c, shift, depth);
    if (std::abs(cur - prev) < tol) return {cur, depth};
    prev = cur;
  }
  throw numerical_failure("continued fraction Delta did not converge within depth 2^20 (d=" +
                          std::to_string(c.d) + ", nu=" + std::to_string(c.nu) + ")");
}

/// Delta_{d,nu} by backward recurrence, cross-checked against the forward
/// convergents; the two must agree within 10 * tol.
inline DeltaEval delta_cf(const ModelConst& c, double tol = 1e-12) {
  const DeltaEval back = delta_cf_shifted(c, 0, tol);
  const DeltaEval fwd = detail::delta_forward(c, 0, tol);
  if (std::abs(back.value - fwd.value) > 10.0 * tol) {
    throw numerical_failure("backward and forward evaluations of Delta disagree");
  }
  return back;
}

/// Forward-convergent evaluation on its own, for cross-checks.
inline DeltaEval delta_cf_forward(const ModelConst& c, double tol = 1e-12) {
  detail::require(tol > 0.0, "tolerance must be positive");
  return detail::delta_forward(c, 0, tol);
}

inline double theta(const ModelConst& c, double tol = 1e-12) {
  return 1.0 - delta_cf(c, tol).value / c.beta;
}

/// Delta(0), ..., Delta(i_max), each evaluated as its own shifted fraction.
inline std::vector<double> delta_seq(const ModelConst& c, std::int64_t i_max,
                                     double tol = 1e-14) {
  detail::require(i_max >= 0, "i_max must be >= 0");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(i_max) + 1);
  for (std::int64_t i = 0; i <= i_max; ++i) {
    out.push_back(delta_cf_shifted(c, i, tol).value);
  }
  return out;
}

/// Probability that the killed distance chain started at ell ever hits 0:
/// q(ell) = prod_{i < ell} Delta(i) / beta.
inline double meet_prob_q(const ModelConst& c, std::int64_t ell) {
  detail::require(ell >= 0, "ell must be >= 0");
  if (ell == 0) return 1.0;
  double q = 1.0;
  for (double delta : delta_seq(c, ell - 1)) q *= delta / c.beta;
  return q;
}

/// Expected time at 0 of the killed distance chain started at i:
/// R(0) = 1 / (2 theta) and R(i) = R(0) q(i).
inline double local_time_R(const ModelConst& c, std::int64_t i) {
  detail::require(i >= 0, "i must be >= 0");
  return meet_prob_q(c, i) / (2.0 * theta(c));
}

namespace detail {

struct SeriesResult {
  double sum = 0.0;
  std::int64_t terms = 0;
};

// S = sum_{l >= 1} l chi_{l-1}, chi_i = prod_{j <= i} beta Delta(j). Stops
// once five consecutive terms fall below 1e-16 of the partial sum.
inline SeriesResult chi_series(const ModelConst& c) {
  constexpr std::int64_t kMaxTerms = 1'000'000;
  SeriesResult r;
  double chi = 1.0;
  int small_run = 0;
  for (std::int64_t ell = 1; ell <= kMaxTerms; ++ell) {
    chi *= c.beta * delta_cf_shifted(c, ell - 1, 1e-15).value;
    const double term = static_cast<double>(ell) * chi;
    r.sum += term;
    r.terms = ell;
    small_run = (term < 1e-16 * r.sum) ? small_run + 1 : 0;
    if (small_run >= 5) return r;
  }
  throw numerical_failure("series sum l chi_{l-1} did not converge");
}

}  // namespace detail

struct GammaRate {
  double gamma_n = 0.0;    // thinned nice-pair rate at finite n
  std::int64_t hbar = 0;   // tree height floor(delta log_d n)
  double gamma_inf = 0.0;  // n-free limit of n * gamma_n
  double attempt_rate = 0.0;  // unthinned nice-pair rate (q == 1)
};

/// Tree height floor(delta log_d n).
inline std::int64_t tree_height(int d, std::int64_t n, double delta) {
  const double h = delta * std::log(static_cast<double>(n)) / std::log(static_cast<double>(d));
  return static_cast<std::int64_t>(std::floor(h + 1e-12));
}

inline GammaRate gamma_rate(const ModelConst& c, std::int64_t n, double delta) {
  detail::require(n >= c.d + 1, "n must be >= d + 1");
  detail::require(delta > 0.0, "delta must be positive");
  GammaRate g;
  g.hbar = tree_height(c.d, n, delta);
  if (g.hbar < 1) {
    throw degenerate_height("tree height floor(delta log_d n) = " + std::to_string(g.hbar) +
                            " < 1 for n=" + std::to_string(n) +
                            ", delta=" + std::to_string(delta));
  }
  const double dn1 = static_cast<double>(c.d) * static_cast<double>(n) - 1.0;
  const double prefactor = c.nu / dn1 * c.d * c.d / (c.d - 1.0);
  const std::int64_t l_max = 2 * g.hbar - 1;
  double chi = 1.0;        // (d-1)^l q(l) = beta^l prod Delta(i)
  double weight = 1.0;     // (d-1)^l
  double thinned = 0.0, unthinned = 0.0;
  const std::vector<double> deltas = delta_seq(c, l_max - 1);
  for (std::int64_t ell = 1; ell <= l_max; ++ell) {
    chi *= c.beta * deltas[static_cast<std::size_t>(ell - 1)];
    weight *= c.d - 1.0;
    thinned += static_cast<double>(ell) * chi;
    unthinned += static_cast<double>(ell) * weight;
  }
  g.gamma_n = prefactor * thinned;
  g.attempt_rate = prefactor * unthinned;
  g.gamma_inf = (c.nu == 0.0) ? 0.0 : c.d * c.nu / (c.d - 1.0) * detail::chi_series(c).sum;
  return g;
}

/// |(d nu/(d-1)) S - 2 (1 - Delta(0)/beta)|; only defined for nu > 0.
inline double identity_residual(const ModelConst& c) {
  detail::require(c.nu > 0.0, "identity residual requires nu > 0");
  const double lhs = c.d * c.nu / (c.d - 1.0) * detail::chi_series(c).sum;
  const double rhs = 2.0 * (1.0 - delta_cf_shifted(c, 0, 1e-15).value / c.beta);
  return std::abs(lhs - rhs);
}

struct ThetaBundle {
  ModelConst consts;
  double delta0 = 0.0;
  double theta = 0.0;
  std::vector<double> delta_seq;
  std::int64_t depth_used = 0;
  // identity_residual for nu > 0; for nu == 0 the fixed-point residual
  // |Delta (2/rho - Delta) - 1| of the homogeneous fraction.
  double residual = 0.0;
};

inline ThetaBundle theta_bundle(const ModelConst& c, double tol = 1e-12,
                                std::int64_t i_max = 10) {
  ThetaBundle b;
  b.consts = c;
  const DeltaEval eval = delta_cf(c, tol);
  b.delta0 = eval.value;
  b.depth_used = eval.depth;
  b.theta = 1.0 - b.delta0 / c.beta;
  b.delta_seq = delta_seq(c, i_max);
  b.residual = (c.nu > 0.0) ? identity_residual(c)
                            : std::abs(b.delta0 * (2.0 / c.rho - b.delta0) - 1.0);
  return b;
}

struct AsymptoticRow {
  int d = 0;
  double nu = 0.0;
  double theta = 0.0;
  double nu_gap = 0.0;  // nu (1 - theta)
  double d_gap = 0.0;   // d (1 - theta)
  double slope = 0.0;   // (theta - theta_{d,0}) / nu, NaN at nu == 0
};

inline std::vector<AsymptoticRow> asymptotic_table(const std::vector<int>& d_grid,
                                                   const std::vector<double>& nu_grid) {
  detail::require(!d_grid.empty() && !nu_grid.empty(), "grids must be nonempty");
  std::vector<AsymptoticRow> rows;
  for (int d : d_grid) {
    const double theta0 = theta(make_consts(d, 0.0));
    for (double nu : nu_grid) {
      AsymptoticRow r;
      r.d = d;
      r.nu = nu;
      r.theta = theta(make_consts(d, nu));
      r.nu_gap = nu * (1.0 - r.theta);
      r.d_gap = d * (1.0 - r.theta);
      r.slope = (nu > 0.0) ? (r.theta - theta0) / nu : std::numeric_limits<double>::quiet_NaN();
      rows.push_back(r);
    }
  }
  return rows;
}

}  // namespace dynvoter
