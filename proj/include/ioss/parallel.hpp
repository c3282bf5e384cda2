#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace ioss {

/// 0 means "use hardware concurrency".
inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Splits [0, count) into contiguous chunks, evaluates `work(begin, end)` on
/// each (in parallel when threads > 1) and folds the partial results with
/// `merge` in chunk order. With an associative merge the result does not
/// depend on the thread count. The first exception, in chunk order, is
/// rethrown.
template <class Partial, class Work, class Merge>
Partial parallel_reduce(std::uint64_t count, unsigned threads, Work work, Merge merge) {
  const std::uint64_t workers =
      std::max<std::uint64_t>(1, std::min<std::uint64_t>(resolve_threads(threads), count));
  if (workers == 1) return work(std::uint64_t{0}, count);

  std::vector<Partial> partials(workers);
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::uint64_t chunk = (count + workers - 1) / workers;
  for (std::uint64_t w = 0; w < workers; ++w) {
    const std::uint64_t begin = std::min(count, w * chunk);
    const std::uint64_t end = std::min(count, begin + chunk);
    pool.emplace_back([&, w, begin, end] {
      try {
        partials[w] = work(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  Partial acc = std::move(partials[0]);
  for (std::uint64_t w = 1; w < workers; ++w) acc = merge(std::move(acc), std::move(partials[w]));
  return acc;
}

}  // namespace ioss
