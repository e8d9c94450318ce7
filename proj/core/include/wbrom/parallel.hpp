#pragma once

#include <cstddef>
#include <functional>

namespace wbrom {

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 = hardware
/// concurrency). Work is split into contiguous blocks, so results written by
/// index are independent of scheduling. The first exception is rethrown.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

std::size_t default_thread_count();

}  // namespace wbrom
