#pragma once

// Random d-regular multigraphs as perfect matchings of stubs, and the
// edge-rewiring dynamics acting on them.
//
// Stub (x, i), 1 <= i <= d, has index x * d + (i - 1). Self-loops and
// multi-edges are allowed and always counted with multiplicity.

#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <utility>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

namespace dynvoter {

using Stub = std::uint32_t;
using Vertex = std::uint32_t;

struct RewireEvent {
  double time = 0.0;
  Stub a = 0;
  Stub b = 0;
  bool applied = false;
};

class GraphState {
 public:
  GraphState() = default;

  /// Takes ownership of an explicit matching; throws unless it is a
  /// fixed-point-free involution on n * d stubs.
  GraphState(std::uint32_t n, std::uint32_t d, std::vector<Stub> match)
      : n_(n), d_(d), match_(std::move(match)) {
    detail::require(match_.size() == static_cast<std::size_t>(n) * d,
                    "matching must have n * d entries");
    detail::require(is_valid(), "matching must be a fixed-point-free involution");
  }

  std::uint32_t n() const { return n_; }
  std::uint32_t d() const { return d_; }
  std::size_t stubs() const { return match_.size(); }
  const std::vector<Stub>& matching() const { return match_; }

  Stub partner(Stub s) const { return match_[s]; }
  Vertex vertex_of(Stub s) const { return s / d_; }
  Vertex neighbour(Stub s) const { return vertex_of(match_[s]); }
  Stub stub_of(Vertex x, std::uint32_t i) const { return x * d_ + i; }

  /// Swap (a, a'), (b, b') into (a, b), (a', b'). No-op when a == b or a and
  /// b are already matched to each other.
  bool apply_rewire(Stub a, Stub b) {
    if (a == b || match_[a] == b) return false;
    const Stub a2 = match_[a];
    const Stub b2 = match_[b];
    match_[a] = b;
    match_[b] = a;
    match_[a2] = b2;
    match_[b2] = a2;
    return true;
  }

  bool is_valid() const {
    if (match_.size() % 2 != 0) return false;
    for (std::size_t s = 0; s < match_.size(); ++s) {
      const Stub m = match_[s];
      if (m >= match_.size() || m == s || match_[m] != s) return false;
    }
    return true;
  }

  /// Debug dump, one `s match[s]` pair per line.
  void dump(std::ostream& os) const {
    for (std::size_t s = 0; s < match_.size(); ++s) os << s << ' ' << match_[s] << '\n';
  }

  friend bool operator==(const GraphState&, const GraphState&) = default;

 private:
  std::uint32_t n_ = 0;
  std::uint32_t d_ = 0;
  std::vector<Stub> match_;
};

/// Uniform perfect matching on n * d stubs (configuration model).
inline GraphState sample_matching(std::uint32_t n, std::uint32_t d, Rng& rng) {
  detail::require(n >= 2 && d >= 1, "need n >= 2 and d >= 1");
  const std::uint64_t total = static_cast<std::uint64_t>(n) * d;
  detail::require(total % 2 == 0, "n * d must be even");
  detail::require(total < std::numeric_limits<Stub>::max(), "too many stubs");
  std::vector<Stub> perm(total);
  std::iota(perm.begin(), perm.end(), Stub{0});
  // Fisher-Yates with our own index draws keeps the matching a function of
  // the raw stream only.
  for (std::uint64_t i = total - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.index(i + 1)]);
  }
  std::vector<Stub> match(total);
  for (std::uint64_t i = 0; i < total; i += 2) {
    match[perm[i]] = perm[i + 1];
    match[perm[i + 1]] = perm[i];
  }
  return GraphState(n, d, std::move(match));
}

/// Total rewiring rate nu * d n / 4: every stub rings at rate nu / 4.
inline double rewire_total_rate(std::uint64_t n, std::uint32_t d, double nu) {
  return nu * static_cast<double>(n) * d / 4.0;
}

/// One rewiring-clock ring: stub a uniform, its mark b uniform among the
/// other d n - 1 stubs. Returns the event with `applied` filled in.
inline RewireEvent random_rewire(GraphState& g, Rng& rng, double time = 0.0) {
  const std::uint64_t total = g.stubs();
  RewireEvent ev;
  ev.time = time;
  ev.a = static_cast<Stub>(rng.index(total));
  Stub b = static_cast<Stub>(rng.index(total - 1));
  if (b >= ev.a) ++b;
  ev.b = b;
  ev.applied = g.apply_rewire(ev.a, ev.b);
  return ev;
}

inline constexpr std::uint32_t kInfiniteDistance = std::numeric_limits<std::uint32_t>::max();

/// Graph distance, or kInfiniteDistance when above `cutoff` or disconnected.
inline std::uint32_t bfs_distance(const GraphState& g, Vertex x, Vertex y,
                                  std::uint32_t cutoff = kInfiniteDistance) {
  detail::require(x < g.n() && y < g.n(), "vertex out of range");
  if (x == y) return 0;
  std::vector<std::uint32_t> dist(g.n(), kInfiniteDistance);
  std::queue<Vertex> frontier;
  dist[x] = 0;
  frontier.push(x);
  while (!frontier.empty()) {
    const Vertex v = frontier.front();
    frontier.pop();
    if (dist[v] >= cutoff) break;
    for (std::uint32_t i = 0; i < g.d(); ++i) {
      const Vertex w = g.neighbour(g.stub_of(v, i));
      if (dist[w] != kInfiniteDistance) continue;
      dist[w] = dist[v] + 1;
      if (w == y) return dist[w];
      frontier.push(w);
    }
  }
  return kInfiniteDistance;
}

/// Endpoints of a uniform edge (with multiplicity): a uniform stub and the
/// vertex it is matched to. A self-loop yields (x, x).
inline std::pair<Vertex, Vertex> uniform_edge(const GraphState& g, Rng& rng) {
  const auto s = static_cast<Stub>(rng.index(g.stubs()));
  return {g.vertex_of(s), g.neighbour(s)};
}

}  // namespace dynvoter
