#ifndef INTERLACE_PARALLEL_HPP_
#define INTERLACE_PARALLEL_HPP_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "interlace/errors.hpp"

namespace interlace {

inline unsigned default_workers() {
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates f(0..n-1) on a pool of `workers` threads and returns the
/// results in index order, so the output never depends on scheduling.
/// If any call throws, the exception from the lowest index is rethrown.
template <class F>
auto parallel_map(std::size_t n, unsigned workers, F &&f)
    -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  std::vector<R> out(n);
  if (n == 0) return out;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));

  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::size_t err_index = n;
  std::exception_ptr err;
  auto body = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto &t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);
  return out;
}

template <class R>
struct ReplicaBatch {
  std::vector<R> results;  // kept replicas, in replica order
  std::vector<std::size_t> ids;
  std::size_t dropped = 0;

  double drop_rate() const {
    const auto n = results.size() + dropped;
    return n == 0 ? 0.0 : static_cast<double>(dropped) / static_cast<double>(n);
  }
};

/// Runs f(replica_id) for every replica. A replica whose trajectory exceeds
/// the step budget is dropped, logged and counted; it is never retried.
template <class F>
auto run_replicas(std::size_t n, unsigned workers, F &&f)
    -> ReplicaBatch<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  auto raw = parallel_map(n, workers, [&](std::size_t i) -> std::optional<R> {
    try {
      return f(i);
    } catch (const StepLimitExceeded &e) {
      return std::nullopt;
    }
  });
  ReplicaBatch<R> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i]) {
      out.results.push_back(std::move(*raw[i]));
      out.ids.push_back(i);
    } else {
      ++out.dropped;
      std::clog << "replica " << i << " dropped: step limit exceeded\n";
    }
  }
  return out;
}

}  // namespace interlace

#endif  // INTERLACE_PARALLEL_HPP_
