#pragma once

#include <cstddef>
#include <functional>

namespace hifu {

/// Worker threads available to element loops. Defaults to the hardware
/// concurrency, capped by the HIFU_THREADS environment variable.
[[nodiscard]] unsigned worker_count();

/// Overrides worker_count(); 0 restores the environment-derived default.
void set_worker_count(unsigned n);

/// Runs `body(begin, end)` over contiguous chunks of [0, n). Chunks never
/// overlap, so bodies that write only to their own index range need no
/// synchronisation. Small ranges run inline on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 4096);

}  // namespace hifu
