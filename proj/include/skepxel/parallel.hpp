#pragma once

#include <cstddef>
#include <functional>

namespace skepxel {

// Runs fn(i) for i in [0, count) on up to `workers` threads. Work items are
// handed out in index order; callers write results into slot i so output
// never depends on scheduling. The first exception thrown by any item is
// rethrown after all threads join.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace skepxel
