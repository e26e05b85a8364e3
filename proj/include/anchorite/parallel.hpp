#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace anchorite {

/// Resolves a requested worker count; 0 means the available hardware parallelism.
inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(begin, end) over contiguous chunks of [0, n). Results must be
/// written to index-owned slots; the chunking never influences values.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(resolve_threads(threads), n);
  if (workers <= 1) {
    if (n > 0) body(std::size_t{0}, n);
    return;
  }
  // Interleaved small chunks balance triangular workloads (pairs i < j).
  const std::size_t chunk = std::max<std::size_t>(1, n / (workers * 8));
  std::size_t next = 0;
  std::mutex mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      std::size_t begin;
      {
        std::lock_guard lock(mu);
        if (next >= n || failure) return;
        begin = next;
        next = std::min(n, next + chunk);
      }
      try {
        body(begin, std::min(n, begin + chunk));
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace anchorite
