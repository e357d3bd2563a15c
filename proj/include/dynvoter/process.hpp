#pragma once

// Event-driven (Gillespie) simulation of random walks and the voter model on
// the rewiring graph, and the graphical construction used for duality.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyngraph.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "theta.hpp"

namespace dynvoter {

// ---------------------------------------------------------------------------
// Two walks

enum class StartMode { stationary_pair, edge, explicit_pair };

struct WalkStart {
  StartMode mode = StartMode::stationary_pair;
  Vertex x = 0;
  Vertex y = 0;

  static WalkStart stationary() { return {}; }
  static WalkStart edge() { return {StartMode::edge, 0, 0}; }
  static WalkStart at(Vertex x, Vertex y) { return {StartMode::explicit_pair, x, y}; }
};

struct MeetingResult {
  double tau = 0.0;  // meeting time, or t_cap when censored
  bool censored = false;
  StartMode start_mode = StartMode::stationary_pair;
};

/// Default censoring cap 20 n / (2 theta).
inline double default_meeting_cap(std::uint32_t n, double theta_value) {
  return 20.0 * n / (2.0 * theta_value);
}

/// Two independent rate-1 walks on the rewiring graph started from `graph`.
/// Stops at the first jump that puts both walks on one vertex; censors at
/// t_cap.
inline MeetingResult simulate_two_walks(GraphState graph, double nu, WalkStart start,
                                        double t_cap, Rng& rng) {
  detail::require(nu >= 0.0, "nu must be >= 0");
  detail::require(t_cap >= 0.0, "t_cap must be >= 0");
  MeetingResult res;
  res.start_mode = start.mode;
  Vertex x = 0, y = 0;
  switch (start.mode) {
    case StartMode::stationary_pair:
      x = static_cast<Vertex>(rng.index(graph.n()));
      y = static_cast<Vertex>(rng.index(graph.n()));
      break;
    case StartMode::edge:
      std::tie(x, y) = uniform_edge(graph, rng);
      break;
    case StartMode::explicit_pair:
      detail::require(start.x < graph.n() && start.y < graph.n(), "start vertex out of range");
      x = start.x;
      y = start.y;
      break;
  }
  if (x == y) return res;

  const double rewire_rate = rewire_total_rate(graph.n(), graph.d(), nu);
  const double total = rewire_rate + 2.0;
  double t = 0.0;
  for (;;) {
    t += rng.exponential(total);
    if (t > t_cap) {
      res.tau = t_cap;
      res.censored = true;
      return res;
    }
    const double pick = rng.uniform() * total;
    if (pick < rewire_rate) {
      random_rewire(graph, rng);
      continue;
    }
    Vertex& mover = (pick < rewire_rate + 1.0) ? x : y;
    const auto i = static_cast<std::uint32_t>(rng.index(graph.d()));
    mover = graph.neighbour(graph.stub_of(mover, i));
    if (x == y) {
      res.tau = t;
      return res;
    }
  }
}

/// Same, on a fresh configuration-model graph.
inline MeetingResult simulate_two_walks(std::uint32_t n, std::uint32_t d, double nu,
                                        WalkStart start, double t_cap, Rng& rng) {
  GraphState g = sample_matching(n, d, rng);
  return simulate_two_walks(std::move(g), nu, start, t_cap, rng);
}

// ---------------------------------------------------------------------------
// Voter model

struct VoterTrace {
  std::uint32_t n = 0;
  std::vector<double> t;           // grid times
  std::vector<double> O;           // opinion-1 density
  std::vector<double> D;           // discordance density
  std::vector<double> D_integral;  // int_0^t D_s ds, exact between events
  std::vector<double> H_integral;  // int_0^t O_s (1 - O_s) ds, exact between events
  std::optional<double> consensus_time;
};

/// Discordance counter: number of edges whose endpoints disagree, i.e.
/// (D * d n / 2). Self-loops never count.
inline std::uint64_t count_discordant(const GraphState& g, const std::vector<std::uint8_t>& eta) {
  std::uint64_t c = 0;
  for (Stub s = 0; s < g.stubs(); ++s) {
    if (eta[g.vertex_of(s)] == 1 && eta[g.neighbour(s)] == 0) ++c;
  }
  return c;
}

struct VoterOptions {
  bool verify_counter = false;  // full recount of D at every grid point
};

/// Voter model on the rewiring graph. Every vertex rings at rate 1, picks
/// one of its stubs uniformly and copies the opinion at the other end.
/// Samples O and D on the grid k * horizon / K, K = round(horizon /
/// grid_step); a non-finite horizon samples only t = 0 and runs to
/// consensus. Reaching consensus stops the dynamics.
inline VoterTrace simulate_voter(GraphState g, double nu, std::vector<std::uint8_t> eta,
                                 double horizon, double grid_step, Rng& rng,
                                 VoterOptions opts = {}) {
  detail::require(nu >= 0.0, "nu must be >= 0");
  detail::require(eta.size() == g.n(), "initial configuration must have n entries");
  detail::require(horizon > 0.0, "horizon must be positive");
  detail::require(grid_step > 0.0, "grid step must be positive");
  const std::uint32_t n = g.n();
  const double dn = static_cast<double>(n) * g.d();
  std::int64_t K = 0;
  if (std::isfinite(horizon)) {
    K = std::max<std::int64_t>(1, std::llround(horizon / grid_step));
  }

  VoterTrace tr;
  tr.n = n;
  std::uint64_t ones = 0;
  for (auto v : eta) {
    detail::require(v <= 1, "opinions must be 0 or 1");
    ones += v;
  }
  std::uint64_t disc = count_discordant(g, eta);

  auto density_O = [&] { return static_cast<double>(ones) / n; };
  auto density_D = [&] { return 2.0 * static_cast<double>(disc) / dn; };
  double int_D = 0.0, int_H = 0.0;
  std::int64_t k = 0;
  double t = 0.0;

  auto record_until = [&](double t_end) {
    // state is constant on [t, t_end)
    const double o = density_O(), dd = density_D();
    while (k <= K) {
      const double tk = (K == 0) ? 0.0 : horizon * static_cast<double>(k) / static_cast<double>(K);
      if (!(tk < t_end) && !(k == K && tk <= t_end)) break;
      if (opts.verify_counter && count_discordant(g, eta) != disc) {
        throw std::logic_error("incremental discordance counter diverged from recount");
      }
      tr.t.push_back(tk);
      tr.O.push_back(o);
      tr.D.push_back(dd);
      tr.D_integral.push_back(int_D + dd * (tk - t));
      tr.H_integral.push_back(int_H + o * (1.0 - o) * (tk - t));
      ++k;
    }
    int_D += dd * (t_end - t);
    int_H += o * (1.0 - o) * (t_end - t);
    t = t_end;
  };

  auto edge_discordant = [&](Stub s, Stub s2) -> std::uint64_t {
    return eta[g.vertex_of(s)] != eta[g.vertex_of(s2)] ? 1 : 0;
  };

  const double rewire_rate = rewire_total_rate(n, g.d(), nu);
  const double total = rewire_rate + n;
  const double end = std::isfinite(horizon) ? horizon : std::numeric_limits<double>::infinity();

  if (ones == 0 || ones == n) {
    tr.consensus_time = 0.0;
    record_until(std::isfinite(end) ? end : 0.0);
    return tr;
  }

  for (;;) {
    const double t_next = t + rng.exponential(total);
    if (t_next > end) {
      record_until(end);
      return tr;
    }
    record_until(t_next);
    if (rng.uniform() * total < rewire_rate) {
      const Stub a = static_cast<Stub>(rng.index(g.stubs()));
      Stub b = static_cast<Stub>(rng.index(g.stubs() - 1));
      if (b >= a) ++b;
      if (a == b || g.partner(a) == b) continue;
      const Stub a2 = g.partner(a), b2 = g.partner(b);
      disc -= edge_discordant(a, a2) + edge_discordant(b, b2);
      g.apply_rewire(a, b);
      disc += edge_discordant(a, b) + edge_discordant(a2, b2);
      continue;
    }
    const Stub s = static_cast<Stub>(rng.index(g.stubs()));
    const Vertex x = g.vertex_of(s);
    const Vertex y = g.neighbour(s);
    if (eta[x] == eta[y]) continue;
    const std::uint8_t old_opinion = eta[x];
    for (std::uint32_t i = 0; i < g.d(); ++i) {
      const Vertex w = g.neighbour(g.stub_of(x, i));
      if (w == x) continue;
      if (eta[w] == old_opinion) {
        ++disc;
      } else {
        --disc;
      }
    }
    eta[x] = static_cast<std::uint8_t>(1 - old_opinion);
    if (old_opinion == 1) {
      --ones;
    } else {
      ++ones;
    }
    if (ones == 0 || ones == n) {
      tr.consensus_time = t;
      record_until(std::isfinite(end) ? end : t);
      return tr;
    }
  }
}

/// i.i.d. Bernoulli(u) opinions.
inline std::vector<std::uint8_t> bernoulli_opinions(std::uint32_t n, double u, Rng& rng) {
  detail::require(u >= 0.0 && u <= 1.0, "density u must lie in [0, 1]");
  std::vector<std::uint8_t> eta(n);
  for (auto& v : eta) v = rng.bernoulli(u) ? 1 : 0;
  return eta;
}

/// Voter model from a configuration-model graph and Bernoulli(u) opinions.
inline VoterTrace simulate_voter(std::uint32_t n, std::uint32_t d, double nu, double u,
                                 double horizon, double grid_step, Rng& rng,
                                 VoterOptions opts = {}) {
  GraphState g = sample_matching(n, d, rng);
  auto eta = bernoulli_opinions(n, u, rng);
  return simulate_voter(std::move(g), nu, std::move(eta), horizon, grid_step, rng, opts);
}

// ---------------------------------------------------------------------------
// Graphical construction

enum class ClockKind : std::uint8_t { walk, rewire };

struct LogEntry {
  double time = 0.0;
  ClockKind kind = ClockKind::walk;
  Stub stub = 0;        // walk clock: ringing stub
  Vertex partner = 0;   // walk clock: vertex matched to `stub` at that instant
  RewireEvent rewire;   // rewire clock
};

struct EventLog {
  std::uint32_t n = 0;
  std::uint32_t d = 0;
  double horizon = 0.0;
  std::vector<LogEntry> entries;  // strictly increasing times
};

struct LoggedRun {
  GraphState initial;
  EventLog log;
};

/// All arrivals up to `horizon`: one rate-1/d walk clock per stub and the
/// rewiring clocks. Walk entries record the partner vertex at their instant.
inline EventLog simulate_with_log(const GraphState& initial, double nu, double horizon, Rng& rng) {
  detail::require(horizon > 0.0, "horizon must be positive");
  detail::require(nu >= 0.0, "nu must be >= 0");
  GraphState g = initial;
  EventLog log;
  log.n = g.n();
  log.d = g.d();
  log.horizon = horizon;
  const double rewire_rate = rewire_total_rate(g.n(), g.d(), nu);
  const double walk_rate = g.n();  // d n stubs at rate 1/d
  const double total = rewire_rate + walk_rate;
  double t = 0.0;
  for (;;) {
    t += rng.exponential(total);
    if (t > horizon) return log;
    LogEntry e;
    e.time = t;
    if (rng.uniform() * total < rewire_rate) {
      e.kind = ClockKind::rewire;
      e.rewire = random_rewire(g, rng, t);
    } else {
      e.kind = ClockKind::walk;
      e.stub = static_cast<Stub>(rng.index(g.stubs()));
      e.partner = g.neighbour(e.stub);
    }
    log.entries.push_back(e);
  }
}

inline LoggedRun simulate_with_log(std::uint32_t n, std::uint32_t d, double nu, double horizon,
                                   Rng& rng) {
  LoggedRun run{sample_matching(n, d, rng), {}};
  run.log = simulate_with_log(run.initial, nu, horizon, rng);
  return run;
}

/// Graph after replaying every rewire entry of the log.
inline GraphState replay_graph(GraphState g, const EventLog& log) {
  for (const auto& e : log.entries) {
    if (e.kind == ClockKind::rewire) g.apply_rewire(e.rewire.a, e.rewire.b);
  }
  return g;
}

/// Voter configuration at time t built from the walk clocks of the log.
inline std::vector<std::uint8_t> forward_voter_from_log(std::vector<std::uint8_t> eta,
                                                        const EventLog& log, double t) {
  detail::require(t <= log.horizon, "t beyond log horizon");
  detail::require(eta.size() == log.n, "configuration size must equal n");
  for (const auto& e : log.entries) {
    if (e.time > t) break;
    if (e.kind != ClockKind::walk) continue;
    eta[e.stub / log.d] = eta[e.partner];
  }
  return eta;
}

/// Position at the end of the backward walk started from x at time t.
inline Vertex backward_walk(const EventLog& log, double t, Vertex x) {
  detail::require(t <= log.horizon, "t beyond log horizon");
  detail::require(x < log.n, "vertex out of range");
  auto it = std::upper_bound(log.entries.begin(), log.entries.end(), t,
                             [](double v, const LogEntry& e) { return v < e.time; });
  while (it != log.entries.begin()) {
    --it;
    if (it->kind == ClockKind::walk && it->stub / log.d == x) x = it->partner;
  }
  return x;
}

struct DualityReport {
  bool pass = true;
  std::vector<Vertex> mismatches;
};

/// eta_t(x) == xi(backward_walk(t, x)) for every x, both sides read from
/// one log.
inline DualityReport duality_check(const std::vector<std::uint8_t>& xi, const EventLog& log,
                                   double t) {
  DualityReport rep;
  const auto eta_t = forward_voter_from_log(xi, log, t);
  for (Vertex x = 0; x < log.n; ++x) {
    if (eta_t[x] != xi[backward_walk(log, t, x)]) rep.mismatches.push_back(x);
  }
  rep.pass = rep.mismatches.empty();
  return rep;
}

inline DualityReport duality_check(std::uint32_t n, std::uint32_t d, double nu,
                                   const std::vector<std::uint8_t>& xi, double t, Rng& rng) {
  const LoggedRun run = simulate_with_log(n, d, nu, t, rng);
  return duality_check(xi, run.log, t);
}

// ---------------------------------------------------------------------------
// Consensus time (exploratory; not gated)

struct ConsensusReport {
  std::vector<double> scaled_times;  // tau_cons / n for runs that reached consensus
  std::size_t not_reached = 0;
  double mean = 0.0;
  double se = 0.0;
  double prediction = 0.0;  // 2 H(u) / theta
};

inline double binary_entropy(double u) {
  auto term = [](double p) { return p > 0.0 ? -p * std::log(p) : 0.0; };
  return term(u) + term(1.0 - u);
}

inline ConsensusReport consensus_time_experiment(std::uint32_t n, std::uint32_t d, double nu,
                                                 double u, std::size_t reps, std::uint64_t seed,
                                                 unsigned threads, double cap_factor = 200.0) {
  detail::require(u > 0.0 && u < 1.0, "u must lie in (0, 1)");
  const double cap = cap_factor * n;
  auto runs = run_replicas(reps, seed, threads, [&](std::size_t, Rng& rng) {
    return simulate_voter(n, d, nu, u, cap, cap, rng).consensus_time;
  });
  ConsensusReport rep;
  for (const auto& r : runs) {
    if (r) {
      rep.scaled_times.push_back(*r / n);
    } else {
      ++rep.not_reached;
    }
  }
  const std::size_t m = rep.scaled_times.size();
  if (m > 0) {
    double s = 0.0, s2 = 0.0;
    for (double v : rep.scaled_times) {
      s += v;
      s2 += v * v;
    }
    rep.mean = s / m;
    rep.se = m > 1 ? std::sqrt(std::max(0.0, (s2 - m * rep.mean * rep.mean) / (m - 1)) / m) : 0.0;
  }
  rep.prediction = 2.0 * binary_entropy(u) / theta(make_consts(static_cast<int>(d), nu));
  return rep;
}

}  // namespace dynvoter
