#pragma once

// Ordered parallel map. Results land at their input index, so the assembled
// output does not depend on the thread count.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace focklab {

/// Worker count: explicit request, else FOCKLAB_THREADS, else hardware concurrency.
inline unsigned resolve_threads(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FOCKLAB_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

template <class T, class F>
auto parallel_map(const std::vector<T>& items, F&& f, unsigned threads = 0) {
  using R = decltype(f(items.front()));
  std::vector<R> out(items.size());
  const unsigned n = std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(items.size()));
  if (n <= 1) {
    for (std::size_t i = 0; i < items.size(); ++i) out[i] = f(items[i]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      try {
        out[i] = f(items[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = items.size();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace focklab
