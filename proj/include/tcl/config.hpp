#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcl/activity.hpp"
#include "tcl/levy.hpp"
#include "tcl/model_zoo.hpp"
#include "tcl/subordinator.hpp"

namespace tcl {

// ---------------------------------------------------------------------------
// Run description
// ---------------------------------------------------------------------------
// A run is one JSON document with five sections:
//
//   model    — one-factor activity rate ("cir", "lognormal",
//              "deterministic-unit") or a two-factor model ("two-factor",
//              "sv1".."sv4" with their parameter pins)
//   levy     — composition loadings alpha/beta/rho plus the subordinator
//              (two-factor models read only the subordinator)
//   numerics — horizon, Monte Carlo step/paths/seed, PDE step and rate grid
//   task     — what to compute: simulate | fp-solve | density | laplace |
//              cf | validate, plus the evaluation grids and tolerances
//   output   — artifact directory and formats
//
// Parsing is strict: unknown keys, wrong types, and contradictory values
// raise ConfigError naming the dotted key path.

struct NumericsSection {
  double t = 1.0;                 // calendar horizon
  double dt = 1e-3;               // Monte Carlo step
  std::size_t n_paths = 100000;   // Monte Carlo sample size
  std::uint64_t seed = 20260816;  // stream seed
  std::size_t store_paths = 64;   // trajectories kept at full resolution
  double pde_dt = 0.0;            // rate-equation step; 0 -> t / 400
  double x_max = 0.0;             // rate-grid extent; 0 -> default grid
  int n_x = 0;                    // rate-grid size; 0 -> default grid
};

struct ZGrid {
  double lo = -4.0;
  double hi = 4.0;
  int n = 161;
};

struct ToleranceSection {
  double ks = 0.02;           // Kolmogorov-Smirnov gate (density checks)
  double cf_abs = 1e-2;       // absolute gate on characteristic-function gaps
  double laplace_rel = 1e-2;  // relative gate on Laplace-transform gaps
};

enum class TaskKind { Simulate, FpSolve, Density, Laplace, Cf, Validate };

struct TaskSection {
  TaskKind kind = TaskKind::Simulate;
  std::vector<double> r_grid;      // laplace / validate arguments
  std::vector<double> theta_grid;  // cf / validate arguments
  ZGrid z_grid;                    // density / validate evaluation nodes
  bool z_grid_given = false;       // z_grid key present in the document
  double xi = 1.0;                 // fp-solve clock frequency
  double eta = 0.0;                // fp-solve driver frequency
  ToleranceSection tolerances;     // validate gates
};

struct OutputSection {
  std::string directory = "out";
  bool csv = true;
  bool json = true;
};

struct RunConfig {
  bool two_factor = false;
  std::optional<SVVariant> variant;  // set for model.type sv1..sv4
  std::string model_label;           // resolved model.type for reports

  // One-factor route (two_factor == false).
  ActivityModel model = ActivityModel::cir(1.0, 0.5, 1.0);
  LevyComposition levy;

  // Two-factor route (two_factor == true); spec mirrors tf.spec.
  TwoFactorModel tf;

  SubordinatorSpec spec = SubordinatorSpec::gamma_clock(0.2);
  NumericsSection numerics;
  TaskSection task;
  OutputSection output;
};

// Parse and schema-validate a JSON document into a RunConfig.
RunConfig parse_config(const nlohmann::json& doc);

// Read a JSON file and parse it; unreadable files and malformed JSON raise
// ConfigError.
nlohmann::json load_json_file(const std::string& path);

// Apply one "dotted.path=value" override onto a JSON document, creating
// intermediate objects as needed. The value text is interpreted as JSON when
// it parses (numbers, booleans, arrays, null) and as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Shipped reference configurations.
std::vector<std::string> preset_names();
nlohmann::json preset_config(const std::string& name);  // ConfigError if unknown

const char* task_kind_name(TaskKind kind);

}  // namespace tcl
