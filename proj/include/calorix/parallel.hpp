#pragma once

#include <cstddef>
#include <functional>

namespace calorix {

/// Worker count used when a caller passes threads <= 0: the value from
/// set_default_threads if positive, else CALORIX_THREADS, else the hardware count.
int default_threads();
void set_default_threads(int threads);

/// Runs body(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any body is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int threads = 0);

}  // namespace calorix
