#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace pathlens {

/// Worker count: hardware concurrency, capped by PATHLENS_THREADS when set.
inline std::size_t worker_count() {
  std::size_t n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PATHLENS_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min(n, static_cast<std::size_t>(cap));
    } catch (const std::exception&) {
      // unparsable value: keep the hardware default
    }
  }
  return n;
}

namespace detail {
inline thread_local bool in_parallel_region = false;
}  // namespace detail

/// Runs task(t) for t in [0, n_tasks). Each task must write only its own
/// output slot; the caller reduces in task order, so results do not depend
/// on scheduling. The first exception thrown by a task is rethrown.
/// Nested calls run serially on the calling worker.
template <class Task>
void parallel_tasks(std::size_t n_tasks, Task&& task) {
  const std::size_t workers = detail::in_parallel_region ? 1 : std::min(worker_count(), n_tasks);
  if (workers <= 1) {
    for (std::size_t t = 0; t < n_tasks; ++t) task(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    const bool outer = detail::in_parallel_region;
    detail::in_parallel_region = true;
    for (std::size_t t = next++; t < n_tasks; t = next++) {
      try {
        task(t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
    detail::in_parallel_region = outer;
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace pathlens
