#ifndef AUFUSE_PARALLEL_HPP
#define AUFUSE_PARALLEL_HPP

#include <functional>

namespace aufuse {

/// Runs fn(0..count-1) on up to `jobs` worker threads. Work items must
/// write results only to their own pre-sized slots so the outcome is
/// identical for every job count; the first exception thrown by a worker
/// is rethrown after all workers join. jobs <= 1 runs inline.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

} // namespace aufuse

#endif // AUFUSE_PARALLEL_HPP
