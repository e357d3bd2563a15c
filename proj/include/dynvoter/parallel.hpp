#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "rng.hpp"

namespace dynvoter {

/// Worker count from DYNVOTER_THREADS, else the hardware concurrency.
inline unsigned default_threads() {
  if (const char* env = std::getenv("DYNVOTER_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(r, rng_r) for r in [0, reps) on a bounded pool of workers and
/// returns the results in replica order. rng_r = Rng(seed, r), so the output
/// does not depend on `threads`. The first exception thrown by any replica is
/// rethrown after all workers have stopped.
template <class Fn>
auto run_replicas(std::size_t reps, std::uint64_t seed, unsigned threads, Fn&& fn) {
  using Result = std::decay_t<std::invoke_result_t<Fn&, std::size_t, Rng&>>;
  std::vector<Result> out(reps);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= reps) return;
      try {
        Rng rng(seed, r);
        out[r] = fn(r, rng);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(reps);
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(reps, 1))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace dynvoter
