#pragma once

// Estimators tying simulation output to closed forms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "error.hpp"
#include "parallel.hpp"
#include "process.hpp"
#include "summary.hpp"

namespace dynvoter {

/// sup_x |F_n(x) - F(x)| for the empirical CDF of `samples`, checked on both
/// sides of every jump. The left limit of F is read one ulp below the sample,
/// so atoms of the reference are handled.
template <class Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& reference_cdf) {
  detail::require(!samples.empty(), "KS statistic needs at least one sample");
  std::sort(samples.begin(), samples.end());
  const auto m = static_cast<double>(samples.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double x = samples[i];
    const double f = reference_cdf(x);
    const double f_left = reference_cdf(std::nextafter(x, -std::numeric_limits<double>::infinity()));
    // F_n jumps from i/m to (k+1)/m across the run of ties ending at k
    std::size_t k = i;
    while (k + 1 < samples.size() && samples[k + 1] == x) ++k;
    sup = std::max({sup, std::abs(static_cast<double>(k + 1) / m - f),
                    std::abs(f_left - static_cast<double>(i) / m)});
    i = k;
  }
  return sup;
}

inline auto exponential_cdf(double rate) {
  return [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); };
}

struct RateFit {
  double rate = 0.0;
  double se = 0.0;
  double lo = 0.0;  // 95% normal-approximation interval
  double hi = 0.0;
};

/// Exponential MLE rate = 1 / mean with delta-method standard error
/// rate / sqrt(m).
inline RateFit exp_rate_fit(const std::vector<double>& samples) {
  detail::require(!samples.empty(), "rate fit needs samples");
  double s = 0.0;
  for (double x : samples) {
    detail::require(x > 0.0, "rate fit needs strictly positive samples");
    s += x;
  }
  const auto m = static_cast<double>(samples.size());
  RateFit f;
  f.rate = m / s;
  f.se = f.rate / std::sqrt(m);
  f.lo = f.rate - 1.96 * f.se;
  f.hi = f.rate + 1.96 * f.se;
  return f;
}

/// Rate fit on meeting results; censored samples are a contract violation.
inline RateFit exp_rate_fit(const std::vector<MeetingResult>& results, double scale = 1.0) {
  std::vector<double> xs;
  xs.reserve(results.size());
  for (const auto& r : results) {
    detail::require(!r.censored, "censored samples need a censored estimator");
    xs.push_back(r.tau / scale);
  }
  return exp_rate_fit(xs);
}

struct SurvivalCurve {
  std::vector<double> s;
  std::vector<double> empirical;
  std::vector<double> reference;  // exp(-2 theta s)
  double sup_gap = 0.0;
};

inline SurvivalCurve survival_curve(std::vector<double> scaled_samples, double theta,
                                    const std::vector<double>& grid) {
  detail::require(!scaled_samples.empty(), "survival curve needs samples");
  std::sort(scaled_samples.begin(), scaled_samples.end());
  SurvivalCurve c;
  c.s = grid;
  const auto m = static_cast<double>(scaled_samples.size());
  for (double s : grid) {
    const auto above = scaled_samples.end() - std::upper_bound(scaled_samples.begin(), scaled_samples.end(), s);
    const double emp = static_cast<double>(above) / m;
    const double ref = std::exp(-2.0 * theta * s);
    c.empirical.push_back(emp);
    c.reference.push_back(ref);
    c.sup_gap = std::max(c.sup_gap, std::abs(emp - ref));
  }
  return c;
}

namespace detail {

// Cumulative integral at time t, linear between grid points (exact when t
// is a grid time, since the integrals are accumulated event by event).
inline double cumulative_at(const std::vector<double>& grid, const std::vector<double>& cum,
                            double t) {
  auto it = std::lower_bound(grid.begin(), grid.end(), t);
  const auto k = static_cast<std::size_t>(it - grid.begin());
  if (it != grid.end() && std::abs(*it - t) <= 1e-9 * std::max(1.0, t)) return cum[k];
  if (k == 0) return cum.front();
  if (k >= grid.size()) return cum.back();
  const double w = (t - grid[k - 1]) / (grid[k] - grid[k - 1]);
  return cum[k - 1] + w * (cum[k] - cum[k - 1]);
}

}  // namespace detail

/// (alpha/n) int_0^T D_{alpha s} ds - int_0^T O_{alpha s}(1 - O_{alpha s}) ds
/// with alpha = n / (2 theta).
inline double homogenisation_functional(const VoterTrace& trace, double theta, std::uint32_t n,
                                        double T) {
  detail::require(theta > 0.0 && n > 0 && T >= 0.0, "invalid homogenisation parameters");
  detail::require(!trace.t.empty(), "empty trace");
  const double alpha = n / (2.0 * theta);
  const double t_end = alpha * T;
  if (trace.t.back() < t_end * (1.0 - 1e-12)) {
    throw insufficient_horizon("trace ends before alpha_n T");
  }
  const double int_d = detail::cumulative_at(trace.t, trace.D_integral, t_end);
  const double int_h = detail::cumulative_at(trace.t, trace.H_integral, t_end);
  return int_d / n - int_h / alpha;
}

struct HomogenisationReport {
  std::uint32_t n = 0;
  double T = 0.0;
  std::vector<double> values;
  MeanEstimate summary;
};

/// Voter runs from Bernoulli(u) on a configuration-model graph, each traced
/// to alpha_n T with the endpoint on the grid.
inline HomogenisationReport homogenisation_experiment(std::uint32_t n, std::uint32_t d, double nu,
                                                      double u, double T, std::size_t reps,
                                                      std::uint64_t seed, unsigned threads) {
  const double th = theta(make_consts(static_cast<int>(d), nu));
  const double horizon = n / (2.0 * th) * T;
  HomogenisationReport rep;
  rep.n = n;
  rep.T = T;
  rep.values = run_replicas(reps, seed, threads, [&](std::size_t, Rng& rng) {
    const VoterTrace tr = simulate_voter(n, d, nu, u, horizon, horizon / 20.0, rng);
    return homogenisation_functional(tr, th, n, T);
  });
  rep.summary = mean_and_se(rep.values);
  return rep;
}

/// Fraction of edge-started meeting runs with tau > s. The window
/// n^0.3 <= s <= n^0.7 is enforced unless `enforce_window` is false.
inline MeanEstimate edge_tail_estimate(std::uint32_t n, std::uint32_t d, double nu, double s,
                                       std::size_t reps, std::uint64_t seed, unsigned threads,
                                       bool enforce_window = true) {
  detail::require(s >= 0.0, "s must be >= 0");
  if (enforce_window) {
    detail::require(s >= std::pow(n, 0.3) && s <= std::pow(n, 0.7),
                    "s_n must lie in [n^0.3, n^0.7]");
  }
  auto hits = run_replicas(reps, seed, threads, [&](std::size_t, Rng& rng) {
    const MeetingResult r = simulate_two_walks(n, d, nu, WalkStart::edge(), s, rng);
    return r.censored ? 1.0 : 0.0;
  });
  return mean_and_se(hits);
}

}  // namespace dynvoter
