#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "tcl/config.hpp"

namespace tcl {

// What a task run produced: the artifact files in creation order, plus the
// machine-readable summary that was (or would be) written alongside them.
// `passed` only goes false for validate runs whose tolerance gates failed.
struct TaskArtifacts {
  std::vector<std::string> files;
  nlohmann::json summary;
  bool passed = true;
};

// Resolve the numeric plan — grid sizes, step counts, window truncation,
// quadrature panel sizes — without running the heavy computation. This is
// what --dry-run prints.
nlohmann::json resolve_plan(const RunConfig& cfg);

// Execute the configured task, writing artifacts under cfg.output.directory.
// `workers` <= 0 falls back to default_workers().
TaskArtifacts run_task(const RunConfig& cfg, int workers = 0);

}  // namespace tcl
