#ifndef LENSRECT_PARALLEL_H_
#define LENSRECT_PARALLEL_H_

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace lensrect {

// 0 means "all available hardware threads".
inline int ResolveThreadCount(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(begin, end) over contiguous chunks of [0, count). Each index is
// visited exactly once, so results written per index do not depend on the
// thread count. The first exception thrown by a worker is rethrown.
inline void ParallelFor(int count, int threads,
                        const std::function<void(int, int)>& fn) {
  const int workers = std::min(ResolveThreadCount(threads), std::max(count, 1));
  if (workers <= 1) {
    fn(0, count);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const int chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(count, begin + chunk);
    pool.emplace_back([&, w, begin, end] {
      try {
        if (begin < end) fn(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace lensrect

#endif  // LENSRECT_PARALLEL_H_
