#pragma once

#include <functional>

namespace svk {

// Worker cap for library-internal parallel loops (0 = hardware concurrency).
void set_threads(int n);
int threads();

// Runs f(i) for i in [begin, end), work-shared across up to threads() workers.
// Iterations must be independent; results must not depend on scheduling.
void parallel_for(long begin, long end, const std::function<void(long)>& f);

}  // namespace svk
