#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "tcl/paths.hpp"

namespace tcl {

using cplx = std::complex<double>;

// Activity-rate SDE dv = mu(v) dt + sigma(v) dB with business time
// T_t = int_0^t (v_s + eps_floor) ds.
//
// CIR:                     mu = kappa (1 - x), sigma = sigma_v sqrt(x)
// LogNormalMeanReverting:  mu = kappa (1 - x), sigma = sigma_v x
// DeterministicUnit:       v == 1
enum class ActivityKind { CIR, LogNormalMeanReverting, DeterministicUnit };

struct ActivityModel {
  ActivityKind kind = ActivityKind::CIR;
  double kappa = 1.0;
  double sigma_v = 0.5;
  double v0 = 1.0;
  double eps_floor = 0.0;

  static ActivityModel cir(double kappa, double sigma_v, double v0 = 1.0,
                           double eps_floor = 0.0);
  static ActivityModel lognormal_mean_reverting(double kappa, double sigma_v,
                                                double v0 = 1.0,
                                                double eps_floor = 0.0);
  static ActivityModel deterministic_unit(double eps_floor = 0.0);

  double drift(double x) const;
  double diffusion(double x) const;
  // True for the families whose conditional exponent is affine in the state.
  bool is_affine() const;
  // CIR only: 2 kappa <= sigma_v^2 (the rate can touch zero). A warning
  // flag, not an error: full-truncation simulation tolerates it.
  bool feller_violated() const;
  void validate() const;
};

// Affine conditional exponent. For the characteristic-function use
//   E[e^{i y_coeff T_t} | F_s] = exp(constant + x_coeff * v_s
//                                    + i * y_coeff * T_s).
struct AffineExponent {
  cplx constant{0.0, 0.0};
  cplx x_coeff{0.0, 0.0};
  double y_coeff = 0.0;

  cplx value(double x, double y) const {
    return constant + x_coeff * x + cplx(0.0, y_coeff) * y;
  }
};

// Conditional characteristic exponent of the clock at real frequency xi over
// the window [s, t]: solves the Riccati system for the affine families.
// Throws UnsupportedModel for non-affine models and DomainError when s > t.
AffineExponent conditional_cf_exponent(const ActivityModel& model, double t,
                                       double s, double xi);

// Generalization used by the transform assemblies: for any complex w with a
// finite Riccati flow, E[e^{w T_tau}] = exp(constant + x_coeff * v_0) over a
// window of length tau started at rate v_0 (with T_0 = 0). w = i*xi recovers
// the characteristic exponent; real w > 0 gives exponential moments. The
// returned y_coeff is 0; callers carrying a T_s phase apply w themselves.
AffineExponent conditional_exponent_general(const ActivityModel& model,
                                            double tau, cplx w);

// Discrete paths of (B, v, T) on a uniform grid: full-truncation Euler for
// the rate (negative excursions clipped inside the coefficients only; the
// bundle reports the clipped rate), left-endpoint clock accumulation,
// counter-based per-path streams (bitwise reproducible for a given seed at
// any worker count). workers = 0 uses the engine default.
PathBundle simulate_clock(const ActivityModel& model, double horizon, double dt,
                          std::size_t n_paths, std::uint64_t seed,
                          std::size_t store_paths = 64, int workers = 0);

// Exact solution of the log-normal mean-reverting SDE along a given Brownian
// path on a uniform grid with spacing dt (v0 = 1); validates the Euler
// stepper.
std::vector<double> closed_form_lognormal_path(const std::vector<double>& B_path,
                                               double dt, double kappa,
                                               double sigma_v);

// Drift under the exponential tilt: (u, x) -> mu(x) - r*rho*sigma(x)*1_{u<=j}.
std::function<double(double, double)> measure_changed_drift(
    const ActivityModel& model, double r, double rho, double j);

}  // namespace tcl
