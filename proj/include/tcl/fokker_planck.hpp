#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "tcl/activity.hpp"

namespace tcl {

using cplx = std::complex<double>;

// Exponential-fitting weight B(z) = z / (e^z - 1) used by the
// Scharfetter-Gummel flux discretization. Complex-safe: series below
// |z| = 1e-4, reflection B(z) = -z + B(-z) for Re z < 0, overflow-guarded.
cplx bernoulli_B(cplx z);

// ---------------------------------------------------------------------------
// Axes and grids
// ---------------------------------------------------------------------------

// One vertex-centered finite-volume axis: nodes x[0..n-1] and trapezoid
// integration weights w (sum(w) == x.back() - x.front()).
struct Axis {
  std::vector<double> x, w;

  int n() const { return static_cast<int>(x.size()); }
  bool empty() const { return x.empty(); }

  // Uniform nodes on [lo, hi] with half-cell end weights.
  static Axis uniform(double lo, double hi, int n);
  // Arbitrary strictly increasing nodes, trapezoid weights.
  static Axis from_nodes(std::vector<double> nodes);
};

enum class GridStretch { Uniform, SinhClustered };

// Spatial domain of the solvers: activity-rate axis x (always present),
// optional clock axis y and Brownian axis z for the joint solvers.
struct SpatialGrid {
  Axis x;
  GridStretch stretching = GridStretch::Uniform;
  int anchor = 0;  // index of the x-node at (or nearest to) v0
  Axis y, z;       // empty unless attached via with_y / with_z

  // Uniform x-axis on [0, ~x_max] with spacing tuned so v0 is exactly a
  // node (the discrete delta then occupies a single node).
  static SpatialGrid rate_anchored(double x_max, double dx_target, double v0);
  // Plain uniform x-axis on [0, x_max] with n_x nodes (v0 need not be a
  // node; the initial delta splits over the bracketing pair).
  static SpatialGrid rate_uniform(double x_max, int n_x, double v0);
  // Sinh-clustered x-axis concentrating nodes near v0; the nearest node is
  // snapped onto v0 exactly.
  static SpatialGrid rate_sinh(double x_max, int n_x, double v0);

  SpatialGrid with_y(double y_max, int n_y) const;          // y in [0, y_max]
  SpatialGrid with_z(double z_half_width, int n_z) const;   // z symmetric

  bool has_y() const { return !y.empty(); }
  bool has_z() const { return !z.empty(); }

  // Invariants: 0 <= x_min < v0 < x_max, every axis has >= 16 nodes,
  // weights sum to the domain length. Violations throw ConfigError.
  void validate(double v0) const;
};

// Default production grid for the 1-D solvers: x_max 7.0, spacing ~0.0175,
// anchored on v0.
SpatialGrid default_rate_grid(double v0);

// ---------------------------------------------------------------------------
// Fields
// ---------------------------------------------------------------------------

// A solver output: complex nodal values over 1-3 axes (row-major, x slowest),
// the calendar time it represents, the Fourier node it was computed at (if
// any), and its integral against the product quadrature weights.
struct PDEField {
  std::vector<Axis> axes;
  std::vector<cplx> values;
  double time_level = 0.0;
  bool has_fourier_node = false;
  double xi = 0.0, eta = 0.0;
  cplx mass{0.0, 0.0};
};

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

// Fourier-reduced density PDE in the rate variable:
//   d_t qhat = 1/2 d_xx[sigma^2 qhat] - d_x[(mu - i eta sigma) qhat]
//              - (eta^2/2 + i xi (x+eps)) qhat,   qhat(0) = delta_{v0}.
// Crank-Nicolson with Rannacher startup on exponentially fitted fluxes.
PDEField solve_qhat(const ActivityModel& model, double t, double xi, double eta,
                    const SpatialGrid& grid, double dt);

// Full 3-D density of (v_t, T_t, B_t):
//   d_t q = 1/2 d_xx[sigma^2 q] + d_xz[sigma q] + 1/2 d_zz q
//           - d_x[mu q] - (x+eps) d_y q.
// Operator splitting: implicit x and z sweeps, explicit conservative mixed
// term (4th-order cross derivatives, two-step startup delay) and explicit
// MUSCL y-advection. Cross-validation scale only (total nodes <= 64^3).
PDEField solve_q3d(const ActivityModel& model, double t, const SpatialGrid& grid,
                   double dt);

// Joint density G(u,x,y) of the tilted rate and clock: drift carries
// mu - r rho sigma while u <= j and reverts to mu afterwards; y-transport at
// speed x + eps. The switch time min(j,t) is an exact time node.
PDEField solve_G(const ActivityModel& model, double r, double rho, double j,
                 double t, const SpatialGrid& grid, double dt);

// y-Fourier transform of the everywhere-tilted joint density:
//   d_t Ghat = 1/2 d_xx[sigma^2 Ghat] - d_x[(mu - r rho sigma) Ghat]
//              - i eta (x+eps) Ghat.
// No switch-off time; finite-horizon weights are applied by the transform
// layer. Runs on the default rate grid.
PDEField solve_Ghat(const ActivityModel& model, double r, double rho, double t,
                    double eta, double dt);

// Twin with the imaginary tilt mu + i theta rho sigma (characteristic-
// function route); theta = 0 reproduces solve_Ghat at r = 0 exactly.
PDEField solve_Ghat_theta(const ActivityModel& model, double theta, double rho,
                          double t, double eta, double dt);

// ---------------------------------------------------------------------------
// Snapshot-capable drivers (used by the transform assemblies)
// ---------------------------------------------------------------------------

// Discretization of the driver-frequency cross term i*eta*d_x(sigma q) in
// the frequency-domain rate solver. Auto removes the term exactly by a
// change of variables (a per-node phase in the integrated diffusion scale),
// which is unconditionally stable and dispersion-free at every frequency.
// Direct folds it into the advective flux instead; that reproduces the same
// discrete x-operator as the physical-space solver, so truncation errors
// cancel when the two are compared on a shared grid, at the price of
// accumulating phase error and of a stability bound (the imaginary face
// Peclet number 2|eta|h/sigma(v0) must stay well below ~2; requests beyond
// 1 are refused with StabilityError). Frequencies of zero and models with
// no Brownian driver take the same path under every setting.
enum class CrossScheme { Auto, Direct };

struct RateSolveOptions {
  double dt = 0.0;                     // time step, must be > 0
  bool rannacher = true;               // implicit-Euler startup smoothing
  std::vector<double> snap_times;      // calendar times in [0, t] to record
  std::optional<SpatialGrid> grid;     // default_rate_grid(v0) when absent
  CrossScheme cross_scheme = CrossScheme::Auto;
};

struct RateSolveResult {
  PDEField final_field;                // at time t
  std::vector<PDEField> snapshots;     // parallel to snap_times
};

RateSolveResult solve_qhat_snapshots(const ActivityModel& model, double t,
                                     double xi, double eta,
                                     const RateSolveOptions& opts);
RateSolveResult solve_Ghat_snapshots(const ActivityModel& model, double r,
                                     double rho, double t, double eta,
                                     const RateSolveOptions& opts);
RateSolveResult solve_Ghat_theta_snapshots(const ActivityModel& model,
                                           double theta, double rho, double t,
                                           double eta,
                                           const RateSolveOptions& opts);

}  // namespace tcl
