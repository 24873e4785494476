#include "tcl/grid.hpp"

#include <algorithm>
#include <cmath>

#include "tcl/errors.hpp"

namespace tcl {

Grid1D Grid1D::uniform(double lo, double hi, int n) {
  if (n < 2 || !(hi > lo)) throw DomainError("Grid1D::uniform: need n>=2 and hi>lo");
  Grid1D g;
  g.lo = lo;
  g.hi = hi;
  g.n = n;
  g.dx = (hi - lo) / (n - 1);
  g.x.resize(n);
  g.w.assign(n, g.dx);
  for (int i = 0; i < n; ++i) g.x[i] = lo + i * g.dx;
  g.x[n - 1] = hi;
  g.w[0] = 0.5 * g.dx;
  g.w[n - 1] = 0.5 * g.dx;
  return g;
}

Grid1D Grid1D::anchored(double x_max, double dx_target, double anchor) {
  if (!(x_max > 0.0) || !(dx_target > 0.0)) {
    throw DomainError("Grid1D::anchored: need x_max>0 and dx_target>0");
  }
  if (!(anchor > 0.0) || !(anchor < x_max)) {
    throw DomainError("Grid1D::anchored: anchor must lie inside (0, x_max)");
  }
  // Choose dx = anchor/k with k chosen so dx is as close to dx_target as
  // possible; then extend to the smallest multiple of dx covering x_max.
  int k = std::max(1, (int)std::lround(anchor / dx_target));
  double dx = anchor / k;
  int n = (int)std::ceil(x_max / dx - 1e-12) + 1;
  return uniform(0.0, dx * (n - 1), n);
}

int Grid1D::index_near(double x0) const {
  int i = (int)std::lround((x0 - lo) / dx);
  return std::clamp(i, 0, n - 1);
}

std::vector<double> delta_hat(const Grid1D& g, double x0) {
  if (x0 < g.lo - 1e-12 || x0 > g.hi + 1e-12) {
    throw DomainError("delta_hat: point outside grid");
  }
  std::vector<double> q(g.n, 0.0);
  double s = (x0 - g.lo) / g.dx;
  int i0 = (int)std::floor(s);
  i0 = std::clamp(i0, 0, g.n - 2);
  double frac = s - i0;
  if (frac < 1e-12) {
    q[i0] = 1.0 / g.w[i0];
  } else if (frac > 1.0 - 1e-12) {
    q[i0 + 1] = 1.0 / g.w[i0 + 1];
  } else {
    // Split mass so that total mass = 1 and mean = x0 exactly.
    q[i0] = (1.0 - frac) / g.w[i0];
    q[i0 + 1] = frac / g.w[i0 + 1];
  }
  return q;
}

}  // namespace tcl
