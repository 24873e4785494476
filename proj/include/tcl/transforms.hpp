#pragma once
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "tcl/activity.hpp"
#include "tcl/fokker_planck.hpp"
#include "tcl/levy.hpp"
#include "tcl/quadrature.hpp"
#include "tcl/subordinator.hpp"

namespace tcl {

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

enum class TransformKind { Pdf, Laplace, Cf };

// A batch of transform evaluations plus the resolution/truncation metadata a
// caller needs to judge them. `arguments` holds the evaluation points (z for
// densities, r or theta for transforms); `values` the corresponding results
// (densities are returned as complex with vanishing imaginary part so the
// imaginary residue stays inspectable).
struct TransformResult {
  TransformKind kind = TransformKind::Pdf;
  std::vector<double> arguments;
  std::vector<std::complex<double>> values;
  double xi_cutoff = 0.0;      // largest frequency retained in xi
  double eta_cutoff = 0.0;     // largest frequency retained in eta / u
  double j_cutoff = 0.0;       // upper end of the subordinator-window grid
  double truncation_estimate = 0.0;  // relative weight of the last panel kept
};

// ---------------------------------------------------------------------------
// Route selection
// ---------------------------------------------------------------------------

// Assembly route for the Laplace transforms. Auto picks Independent when the
// composition has |rho| < 1e-3 (the conditional law then factorizes through
// the clock) and Fourier otherwise.
enum class LaplaceRoute { Auto, Fourier, Independent };

// Assembly route for the exponentially tilted clock CF. Joint2D integrates
// the two-dimensional tilted rate/driver density; Fourier1D works on the
// Fourier side in the driver variable. Auto prefers Fourier1D for affine
// rate models and falls back to Joint2D (only available for t <= j) for
// non-affine ones.
enum class ClockTiltRoute { Auto, Joint2D, Fourier1D };

// ---------------------------------------------------------------------------
// Quadrature layout shared by the assemblies
// ---------------------------------------------------------------------------

// Frequency panels in xi: fixed panel edges scaled by nothing (the clock CF
// decays on an O(1) scale for the supported rate models), Gauss-Legendre 12
// per panel. `xi_max` trims the edge list.
PanelRule xi_panel_rule(double xi_max);

// Window nodes in j: a fine composite rule on [0, t) (panel edges at fixed
// fractions of t, Gauss-Legendre 8) and a geometrically widening tail on
// [t, jmax]. Splitting exactly at t matches the two analytic regimes of the
// window integrand.
struct WindowRule {
  PanelRule inner;  // nodes strictly below t
  PanelRule outer;  // nodes on [t, jmax]
  double jmax = 0.0;
};
WindowRule window_rule(double t, double jmax);

// Upper truncation point for the window integral: the exponential tilt
// e^{r^2 j / 2} fights the subordinator tail, so jmax is read off the
// envelope r^2 j / 2 + log f_{J_y}(j) (worst case over y near t), capped by
// the point where the integrand falls under `tol_abs` relative to the
// quadrature noise floor. Atomic clocks (identity) have no density envelope;
// they use a fixed multiple of t plus the noise cap.
double window_jmax(const SubordinatorSpec& spec, double r_level, double t,
                   double tol_abs, double noise_floor = 1e-13);

// ---------------------------------------------------------------------------
// Joint law of (T_t, B_j)
// ---------------------------------------------------------------------------

// E[e^{-i xi T_t - i eta B_j}]. For j >= t the driver increment after t is
// independent Gaussian; for j < t the remaining clock window is propagated
// with the closed-form conditional exponent on top of a PDE snapshot at j.
std::complex<double> joint_cf_T_B(const ActivityModel& model, double t,
                                  double j, double xi, double eta);

// Grid inversion engine for the joint density f_{T_t, B_s}(y, z). One PDE
// solve per retained (xi, eta) pair with snapshots at every requested driver
// time; the double Fourier sum is assembled with conjugate symmetry in xi.
// `driver_times` has one entry per y node in fixed mode (all equal) or the
// y-grid itself in diagonal mode (s = y, the law of (T_t, B_{T_t}) read
// along the diagonal).
class JointGridDensity {
 public:
  // Fixed driver time: density of (T_t, B_j) on y_grid x z_grid.
  static JointGridDensity fixed_time(const ActivityModel& model, double t,
                                     double j,
                                     const std::vector<double>& y_grid,
                                     const std::vector<double>& z_grid);
  // Diagonal mode: row k carries f_{T_t, B_{y_k}}(y_k, z). Used by the
  // shared-clock pricing reductions.
  static JointGridDensity diagonal(const ActivityModel& model, double t,
                                   const std::vector<double>& y_grid,
                                   const std::vector<double>& z_grid);

  const std::vector<double>& y_grid() const { return y_; }
  const std::vector<double>& z_grid() const { return z_; }
  // Row-major [y][z] density values.
  const std::vector<double>& values() const { return f_; }
  double value(std::size_t iy, std::size_t iz) const {
    return f_[iy * z_.size() + iz];
  }
  double xi_cutoff() const { return xi_cutoff_; }
  double eta_cutoff() const { return eta_cutoff_; }

 private:
  JointGridDensity() = default;
  static JointGridDensity build(const ActivityModel& model, double t,
                                const std::vector<double>& y_grid,
                                const std::vector<double>& z_grid,
                                bool diagonal, double j_fixed);
  std::vector<double> y_, z_, f_;
  double xi_cutoff_ = 0.0, eta_cutoff_ = 0.0;
};

// Pointwise wrapper: f_{T_t, B_j}(y, z) via a small local grid around the
// requested point. Prefer the engine for bulk evaluation.
double joint_density_T_B(const ActivityModel& model, double t, double j,
                         double y, double z);

// ---------------------------------------------------------------------------
// Exponentially tilted clock CF
// ---------------------------------------------------------------------------

// CF of the clock under the drift change the correlated tilt e^{-r rho B}
// induces up to time min(j, t): the rate drift picks up -r*rho*sigma(x) on
// that window. Two independent assemblies (joint 2-D density vs the Fourier
// side in the driver) serve as each other's oracle; Auto dispatches on model
// affinity. Note the correlation enters the definition (the tilt level is
// the product r*rho), so it is an explicit argument here.
std::complex<double> cf_tilted_clock(const ActivityModel& model, double t,
                                     double j, double r, double rho, double xi,
                                     ClockTiltRoute route = ClockTiltRoute::Auto);

// ---------------------------------------------------------------------------
// Transforms of Z_{J_t} and Y_t
// ---------------------------------------------------------------------------

// E[e^{-r Z_{J_{T_t}}}] (levy must have alpha = 0, beta = 1).
double laplace_Z(const ActivityModel& model, const LevyComposition& levy,
                 const SubordinatorSpec& spec, double t, double r,
                 LaplaceRoute route = LaplaceRoute::Auto);

// E[e^{i theta Z_{J_{T_t}}}] for the given correlation (levy as above).
std::complex<double> cf_Z(const ActivityModel& model,
                          const LevyComposition& levy,
                          const SubordinatorSpec& spec, double t, double theta,
                          LaplaceRoute route = LaplaceRoute::Auto);

// Density of Z_{J_{T_t}} on z_grid.
TransformResult pdf_Z(const ActivityModel& model, const LevyComposition& levy,
                      const SubordinatorSpec& spec, double t,
                      const std::vector<double>& z_grid);

// Density of Y_t = alpha J_{T_t} + beta Z_{J_{T_t}} on y_grid. beta = 0
// degenerates to a time-changed drift and is rejected.
TransformResult pdf_Y(const ActivityModel& model, const LevyComposition& levy,
                      const SubordinatorSpec& spec, double t,
                      const std::vector<double>& y_grid);

// E[e^{-r Y_t}].
double laplace_Y(const ActivityModel& model, const LevyComposition& levy,
                 const SubordinatorSpec& spec, double t, double r,
                 LaplaceRoute route = LaplaceRoute::Auto);

// E[e^{-r Z_{J_{T_t}}}] assembled through the inverse-clock factorization
// (requires strictly increasing subordinator paths). Shares the frequency
// machinery with laplace_Z but replaces the Fourier-in-y factor by the CF of
// the inverse clock along the window.
double cf_factored(const ActivityModel& model, const LevyComposition& levy,
                   const SubordinatorSpec& spec, double t, double r);

// Marginal density of the clock T_t evaluated at each y: Fourier inversion
// of the closed-form affine CF. Rejects the deterministic clock (atomic law)
// and non-affine models.
std::vector<double> clock_density_values(const ActivityModel& model, double t,
                                         const std::vector<double>& y);

}  // namespace tcl
