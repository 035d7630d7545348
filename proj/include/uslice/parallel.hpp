#pragma once

#include <functional>

#include "uslice/types.hpp"

namespace uslice {

// Worker cap: USLICE_THREADS when set (>= 1), hardware concurrency otherwise.
int max_threads();

// Runs fn(i) for i in [0, n) across the worker cap. Nested calls degrade to
// sequential execution. Workers must write to disjoint slots; reductions
// happen after the join, in index order, so results are run-to-run stable.
void parallel_for(Index n, const std::function<void(Index)>& fn);

}  // namespace uslice
