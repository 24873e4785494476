#pragma once
#include <vector>

namespace tcl {

// Vertex-centered uniform 1-D finite-volume grid on [lo, hi]: n nodes,
// integration weights dx except dx/2 at both end nodes (so sum(w) = hi-lo).
struct Grid1D {
  double lo = 0.0, hi = 0.0, dx = 0.0;
  int n = 0;
  std::vector<double> x, w;

  static Grid1D uniform(double lo, double hi, int n);

  // Uniform grid on [0, x_max~] whose spacing is adjusted so that `anchor`
  // falls exactly on a node (the delta initial condition then occupies a
  // single node). The upper end is the smallest node multiple >= x_max.
  static Grid1D anchored(double x_max, double dx_target, double anchor);

  int index_near(double x0) const;
};

// Discrete delta at x0: two-node hat with exact unit mass and exact first
// moment (degenerates to a single node when x0 lies on the grid).
std::vector<double> delta_hat(const Grid1D& g, double x0);

}  // namespace tcl
