#pragma once

#include <cstdint>
#include <vector>

namespace tcl {

// Jointly simulated discrete paths under one seed.
//
// Terminal values are kept for every path; full per-step paths are kept only
// for the first `stored_paths` paths. Everything the transform comparisons
// need from a path is terminal, and storing millions of full paths would
// need tens of gigabytes, so the full-path arrays exist for plotting and
// path-level audits on a small prefix.
struct PathBundle {
  double dt = 0.0;
  int n_steps = 0;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  std::size_t stored_paths = 0;

  // Full paths, row-major [path][0..n_steps] (n_steps + 1 nodes including
  // time 0), only for the first stored_paths paths. The reported activity
  // rate is the clipped nonnegative value that feeds the clock and the
  // diffusion coefficient.
  std::vector<double> B, v, T;
  // Second-factor paths for two-factor models (empty otherwise).
  std::vector<double> B2, v2, T2;
  // Subordinator path sampled along the clock, J_{T_{t_k}} at each step node
  // (aligned to T2 for two-factor models); stored-prefix only, filled by the
  // Monte Carlo oracle.
  std::vector<double> J;

  // Terminal values at the horizon for all n_paths paths.
  std::vector<double> B_end, v_end, T_end;
  std::vector<double> B2_end, v2_end, T2_end;

  // Composition outputs, filled by the Monte Carlo oracle (empty otherwise).
  std::vector<double> J_end, Z_end, Y_end;
  // Driver values read at the composition time: B at J_{T_t} for the
  // one-factor composition; B^c and B^j at T^c_t for the two-factor model
  // (B2_eval_end empty otherwise). W_end is the orthogonal Gaussian at the
  // subordinated time, W_{J_{T_t}}.
  std::vector<double> B_eval_end, B2_eval_end, W_end;
  // Terminal price ratio S_t / S_0 under the two-factor price map
  // exp((r_int - delta_div) t + Y_t).
  std::vector<double> S_end;

  double path_at(const std::vector<double>& arr, std::size_t path,
                 int step) const {
    return arr[path * (static_cast<std::size_t>(n_steps) + 1) + step];
  }
};

}  // namespace tcl
