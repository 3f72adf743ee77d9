#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "symrc/errors.hpp"

namespace symrc::harness {

inline constexpr const char* kWorkersEnv = "SYMRC_WORKERS";

/// Worker count: SYMRC_WORKERS if set, else `requested` if positive, else the
/// hardware concurrency.
inline int resolve_workers(int requested = 0) {
  if (const char* env = std::getenv(kWorkersEnv); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError(kWorkersEnv, "must be a positive integer");
    return static_cast<int>(v);
  }
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs job(i) for i in [0, count) on `workers` threads. Jobs must not throw
/// (each records its own failure); the first escaped exception is rethrown.
inline void parallel_for(std::size_t count, int workers,
                         const std::function<void(std::size_t)>& job) {
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto loop = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < std::min(threads, count); ++t) pool.emplace_back(loop);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace symrc::harness
