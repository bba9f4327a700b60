#pragma once

#include <cstddef>
#include <functional>

namespace qraman {

// Thread count: QRAMAN_THREADS env var if set, else hardware concurrency.
int thread_count();

// Runs fn(i) for i in [0, n) across threads. Work items must be independent;
// results keyed by index stay deterministic regardless of scheduling.
// The first exception, if any, is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace qraman
