#include "pcrlb/parallel.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace pcrlb {

unsigned hardware_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  if (workers == 0) workers = hardware_workers();
  const std::size_t threads = std::min<std::size_t>(workers, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::mutex mutex;
  std::exception_ptr first_error;
  std::size_t first_index = std::numeric_limits<std::size_t>::max();

  auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (i < first_index) {
          first_index = i;
          first_error = std::current_exception();
        }
        return;
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(threads);
  const std::size_t block = (count + threads - 1) / threads;
  for (std::size_t w = 0; w < threads; ++w) {
    const std::size_t begin = w * block;
    const std::size_t end = std::min(count, begin + block);
    if (begin >= end) break;
    pool.emplace_back(worker, begin, end);
  }
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace pcrlb
