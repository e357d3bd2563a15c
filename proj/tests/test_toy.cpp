#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dynvoter/toy.hpp"

using namespace dynvoter;

TEST(ChainStep, FromZeroOnlyMovesUpAtRateTwo) {
  Rng rng(1);
  std::vector<double> holds;
  for (int k = 0; k < 50'000; ++k) {
    const auto st = chain_step(0, 3, 0.3, rng);
    EXPECT_EQ(st.next, 1);
    holds.push_back(st.hold);
  }
  const auto m = mean_and_se(holds);
  EXPECT_NEAR(m.mean, 0.5, 3.0 * m.se);
}

TEST(ChainStep, JumpProbabilities) {
  Rng rng(2);
  const int d = 3;
  const double nu = 0.3;
  const int reps = 100'000;
  for (std::int64_t i : {1, 2, 5}) {
    int up = 0, down = 0, kill = 0;
    for (int k = 0; k < reps; ++k) {
      const auto st = chain_step(i, d, nu, rng);
      if (st.next < 0) ++kill;
      else if (st.next == i + 1) ++up;
      else if (st.next == i - 1) ++down;
      else ADD_FAILURE() << "impossible jump";
    }
    const double total = 2.0 + nu * i;
    const double p[3] = {2.0 * (d - 1.0) / d / total, 2.0 / d / total, nu * i / total};
    const int c[3] = {up, down, kill};
    for (int j = 0; j < 3; ++j) {
      const double se = std::sqrt(p[j] * (1.0 - p[j]) / reps);
      EXPECT_NEAR(c[j] / static_cast<double>(reps), p[j], 3.0 * se) << "i=" << i << " j=" << j;
    }
  }
}

TEST(ChainStep, FirstJumpFromOneKillsWithProbabilityNuOverTwoPlusNu) {
  Rng rng(3);
  const double nu = 0.7;
  const int reps = 100'000;
  int kill = 0;
  for (int k = 0; k < reps; ++k) kill += chain_step(1, 4, nu, rng).next < 0;
  const double p = nu / (2.0 + nu);
  EXPECT_NEAR(kill / static_cast<double>(reps), p, 3.0 * std::sqrt(p * (1 - p) / reps));
}

TEST(ChainRun, Preconditions) {
  Rng rng(4);
  EXPECT_THROW(chain_run(-1, 3, 0.3, rng), invalid_parameter);
  EXPECT_THROW(chain_run(1, 3, 0.0, rng), invalid_parameter);
  EXPECT_THROW(mc_q(3, 0.3, 0, 10, rng), invalid_parameter);
}

TEST(ChainRun, StartedAboveZeroHasNoLocalTime) {
  Rng rng(5);
  for (int k = 0; k < 1000; ++k) {
    const auto r = chain_run(2, 3, 0.3, rng);
    EXPECT_EQ(r.local_time_at_0, 0.0);
    EXPECT_GT(r.elapsed, 0.0);
  }
}

TEST(McQ, MatchesClosedFormForSmallDistances) {
  Rng rng(6);
  const auto c = make_consts(3, 0.3);
  for (int ell = 1; ell <= 5; ++ell) {
    const auto m = mc_q(3, 0.3, ell, 40'000, rng);
    EXPECT_NEAR(m.mean, meet_prob_q(c, ell), 3.0 * m.se) << ell;
  }
}

TEST(McR0, MatchesInverseTwoTheta) {
  Rng rng(7);
  const auto m = mc_R0(3, 0.3, 40'000, rng);
  EXPECT_NEAR(m.mean, 1.0 / (2.0 * theta(make_consts(3, 0.3))), 3.0 * m.se);
}

TEST(McR0, TenRegularUnitRate) {
  Rng rng(8);
  const auto m = mc_R0(10, 1.0, 40'000, rng);
  EXPECT_NEAR(m.mean, local_time_R(make_consts(10, 1.0), 0), 3.0 * m.se);
}

TEST(McR0, LargeNuSingleVisit) {
  Rng rng(9);
  const auto m = mc_R0(3, 1e3, 40'000, rng);
  EXPECT_NEAR(m.mean, 0.5, 3.0 * m.se + 1e-3);
}

TEST(TwoPhase, FirstPhaseTotalIsExponentialGamma) {
  const TwoPhaseModel base(3, 0.3, 100'000, 0.4);
  Rng rng(10);
  std::vector<double> first, iters;
  for (int k = 0; k < 20'000; ++k) {
    TwoPhaseModel m = base;
    const auto s = m.sample(rng);
    first.push_back(s.tau_first_total);
    iters.push_back(static_cast<double>(s.iterations));
    EXPECT_NEAR(s.tau_final, s.tau_first_total + s.tau_second_total, 1e-9 * s.tau_final);
  }
  const auto mf = mean_and_se(first), mi = mean_and_se(iters);
  EXPECT_NEAR(mf.mean, 1.0 / base.rates().gamma_n, 3.0 * mf.se);
  EXPECT_NEAR(mi.mean, base.rates().attempt_rate / base.rates().gamma_n, 3.0 * mi.se);
}

TEST(TwoPhase, LargeNuGivesThetaNearOne) {
  const double nu = 50.0;
  const std::int64_t n = 100'000;
  const double th = theta(make_consts(3, nu));
  EXPECT_GT(th, 0.98);
  Rng rng(11);
  std::vector<double> scaled;
  TwoPhaseModel m(3, nu, n, 0.4);
  for (int k = 0; k < 400; ++k) scaled.push_back(m.sample(rng).tau_final / static_cast<double>(n));
  const auto ms = mean_and_se(scaled);
  EXPECT_NEAR(ms.mean, 1.0 / (2.0 * th), 3.0 * ms.se + 0.02);
}

TEST(TwoPhase, DegenerateHeight) {
  Rng rng(12);
  EXPECT_THROW(two_phase_sample(3, 0.3, 100'000, 0.02, rng), degenerate_height);
  EXPECT_NO_THROW(two_phase_sample(3, 0.3, 100'000, 0.4, rng));
}
