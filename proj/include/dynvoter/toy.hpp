#pragma once

// The killed distance chain of two walks on the infinite d-regular tree with
// disappearing edges, and the two-phase renewal model built on top of it.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "error.hpp"
#include "rng.hpp"
#include "summary.hpp"
#include "theta.hpp"

namespace dynvoter {

enum class ChainOutcome { hit0, dagger };

struct ChainResult {
  ChainOutcome outcome = ChainOutcome::dagger;
  double elapsed = 0.0;
  double local_time_at_0 = 0.0;
};

struct ChainStep {
  std::int64_t next = 0;  // -1 for the cemetery state
  double hold = 0.0;
};

/// One jump of the distance chain: from i >= 1 up at 2(d-1)/d, down at 2/d,
/// killed at nu i; from 0 up at 2.
inline ChainStep chain_step(std::int64_t i, int d, double nu, Rng& rng) {
  ChainStep st;
  if (i == 0) {
    st.hold = rng.exponential(2.0);
    st.next = 1;
    return st;
  }
  const double up = 2.0 * (d - 1.0) / d;
  const double kill = nu * static_cast<double>(i);
  const double total = 2.0 + kill;
  st.hold = rng.exponential(total);
  const double pick = rng.uniform() * total;
  if (pick < kill) {
    st.next = -1;
  } else {
    st.next = (pick < kill + up) ? i + 1 : i - 1;
  }
  return st;
}

/// Exact simulation of the distance chain.
///
/// Started at i0 >= 1 the run stops at the first visit to 0 (hit0) or at
/// the killing (dagger). Started at 0 it runs until killed and accumulates
/// the total time spent at 0.
inline ChainResult chain_run(std::int64_t i0, int d, double nu, Rng& rng) {
  detail::require(i0 >= 0, "initial distance must be >= 0");
  detail::require(d >= 2, "d must be >= 2");
  detail::require(nu > 0.0, "the chain is only absorbed for nu > 0");
  ChainResult res;
  std::int64_t i = i0;
  const bool stop_at_zero = i0 >= 1;
  for (;;) {
    if (i == 0 && stop_at_zero) {
      res.outcome = ChainOutcome::hit0;
      return res;
    }
    const ChainStep st = chain_step(i, d, nu, rng);
    res.elapsed += st.hold;
    if (i == 0) res.local_time_at_0 += st.hold;
    if (st.next < 0) {
      res.outcome = ChainOutcome::dagger;
      return res;
    }
    i = st.next;
  }
}

/// Monte Carlo collision local time from 0.
inline MeanEstimate mc_R0(int d, double nu, std::size_t reps, Rng& rng) {
  detail::require(reps >= 1, "reps must be >= 1");
  std::vector<double> xs(reps);
  for (auto& x : xs) x = chain_run(0, d, nu, rng).local_time_at_0;
  return mean_and_se(xs);
}

/// Monte Carlo probability of reaching 0 from distance ell >= 1.
inline MeanEstimate mc_q(int d, double nu, std::int64_t ell, std::size_t reps, Rng& rng) {
  detail::require(ell >= 1, "ell must be >= 1");
  detail::require(reps >= 1, "reps must be >= 1");
  std::vector<double> xs(reps);
  for (auto& x : xs) x = chain_run(ell, d, nu, rng).outcome == ChainOutcome::hit0 ? 1.0 : 0.0;
  return mean_and_se(xs);
}

struct TwoPhaseSample {
  double tau_first_total = 0.0;
  double tau_second_total = 0.0;
  double tau_final = 0.0;
  std::int64_t iterations = 0;
};

/// Two-phase renewal model at fixed (d, nu, n, delta).
///
/// Each iteration waits an Exp(attempt_rate) time for a nice pair, draws the
/// new distance l on {1, ..., 2 hbar - 1} with weight l (d-1)^l, then runs
/// the distance chain from l: reaching 0 ends the process, killing starts a
/// new iteration. The chain outcome is the Bernoulli(q(l)) coin, so the total
/// first-phase time is Exp(gamma_n).
class TwoPhaseModel {
 public:
  TwoPhaseModel(int d, double nu, std::int64_t n, double delta)
      : d_(d), nu_(nu), rate_(gamma_rate(make_consts(d, nu), n, delta)) {
    detail::require(nu > 0.0, "two-phase model requires nu > 0");
    std::vector<double> w;
    double p = 1.0;
    for (std::int64_t ell = 1; ell <= 2 * rate_.hbar - 1; ++ell) {
      p *= d - 1.0;
      w.push_back(static_cast<double>(ell) * p);
    }
    distance_ = std::discrete_distribution<std::int64_t>(w.begin(), w.end());
  }

  const GammaRate& rates() const { return rate_; }

  TwoPhaseSample sample(Rng& rng) {
    TwoPhaseSample s;
    for (;;) {
      ++s.iterations;
      s.tau_first_total += rng.exponential(rate_.attempt_rate);
      const std::int64_t ell = distance_(rng) + 1;
      const ChainResult r = chain_run(ell, d_, nu_, rng);
      s.tau_second_total += r.elapsed;
      if (r.outcome == ChainOutcome::hit0) break;
    }
    s.tau_final = s.tau_first_total + s.tau_second_total;
    return s;
  }

 private:
  int d_;
  double nu_;
  GammaRate rate_;
  std::discrete_distribution<std::int64_t> distance_;
};

inline TwoPhaseSample two_phase_sample(int d, double nu, std::int64_t n, double delta, Rng& rng) {
  TwoPhaseModel model(d, nu, n, delta);
  return model.sample(rng);
}

}  // namespace dynvoter
