#pragma once
#include <functional>

namespace tcl {

// Worker count: TCL_ENGINE_WORKERS when set and valid, else the hardware
// concurrency, never less than 1.
int default_workers();

// Run fn(i) for i in [0, n_tasks) across `workers` threads with a static
// contiguous partition. workers <= 1 (or n_tasks <= 1) runs inline. The first
// exception thrown by any task is rethrown after all threads join. Callers
// that reduce results must write into preassigned slots and combine in fixed
// order afterwards; this function imposes no reduction order of its own.
void parallel_for(int n_tasks, int workers, const std::function<void(int)>& fn);

}  // namespace tcl
