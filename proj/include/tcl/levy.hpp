#pragma once

namespace tcl {

// Composition X_t = alpha * J_t + beta * Z_{J_t} with Z = rho * B +
// sqrt(1 - rho^2) * W, where B also drives the activity-rate SDE.
struct LevyComposition {
  double alpha = 0.0;
  double beta = 1.0;
  double rho = 0.0;

  // Throws ConfigError when |rho| > 1.
  void validate() const;
  // sqrt(1 - rho^2), the loading on the independent Brownian W.
  double orthogonal_loading() const;
};

}  // namespace tcl
