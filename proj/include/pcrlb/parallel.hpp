#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace pcrlb {

unsigned hardware_workers();

// Runs body(i) for i in [0, count) on up to `workers` threads (0 = all
// cores). Items are handed out in contiguous blocks. If bodies throw, the
// exception from the lowest failing index is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

// Pairwise reduction with a topology fixed by the item count alone.
template <typename T, typename Combine>
T tree_reduce(std::vector<T> items, Combine combine) {
  if (items.empty()) return T{};
  while (items.size() > 1) {
    std::vector<T> next;
    next.reserve((items.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < items.size(); i += 2) next.push_back(combine(items[i], items[i + 1]));
    if (items.size() % 2 == 1) next.push_back(std::move(items.back()));
    items = std::move(next);
  }
  return std::move(items.front());
}

}  // namespace pcrlb
