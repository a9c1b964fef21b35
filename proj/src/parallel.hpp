#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace urnmix::detail {

// Splits [0, count) into `threads` contiguous ranges and runs body(begin, end)
// on each. Callers only write disjoint outputs, so results never depend on the split.
template <class Body>
void parallel_for(std::uint64_t count, unsigned threads, Body&& body) {
  threads = std::max(1u, threads);
  if (threads == 1 || count < 2 * static_cast<std::uint64_t>(threads)) {
    body(std::uint64_t{0}, count);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  const std::uint64_t chunk = (count + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::uint64_t begin = std::min(count, t * chunk);
    const std::uint64_t end = std::min(count, begin + chunk);
    if (begin == end) break;
    workers.emplace_back([&body, begin, end] { body(begin, end); });
  }
}

}  // namespace urnmix::detail
