#pragma once

#include <functional>

namespace sysid {

/// Resolves a thread-count request: n > 0 is taken as-is; n <= 0 falls back
/// to the SYSID_CLT_THREADS environment variable, then to the hardware
/// concurrency.
int resolve_threads(int requested);

/// Runs fn(i) for i in [0, n). Work is sliced by index so the set of calls
/// (and anything they write into index-addressed storage) is independent of
/// the thread count.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace sysid
