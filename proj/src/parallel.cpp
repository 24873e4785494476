#include "tcl/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace tcl {

int default_workers() {
  if (const char* s = std::getenv("TCL_ENGINE_WORKERS")) {
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end && *end == '\0' && v >= 1 && v <= 4096) return (int)v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw >= 1 ? (int)hw : 1;
}

void parallel_for(int n_tasks, int workers, const std::function<void(int)>& fn) {
  if (n_tasks <= 0) return;
  if (workers < 1) workers = 1;
  if (workers > n_tasks) workers = n_tasks;
  if (workers == 1) {
    for (int i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  auto run_range = [&](int lo, int hi) {
    try {
      for (int i = lo; i < hi; ++i) {
        if (failed.load(std::memory_order_relaxed)) return;
        fn(i);
      }
    } catch (...) {
      bool expected = false;
      if (failed.compare_exchange_strong(expected, true)) {
        first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers - 1);
  int base = n_tasks / workers, rem = n_tasks % workers;
  int lo = 0;
  std::vector<std::pair<int, int>> ranges;
  for (int w = 0; w < workers; ++w) {
    int len = base + (w < rem ? 1 : 0);
    ranges.emplace_back(lo, lo + len);
    lo += len;
  }
  for (int w = 1; w < workers; ++w) {
    threads.emplace_back(run_range, ranges[w].first, ranges[w].second);
  }
  run_range(ranges[0].first, ranges[0].second);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace tcl
