#pragma once
#include <array>
#include <optional>

#include "tcl/activity.hpp"
#include "tcl/subordinator.hpp"

namespace tcl {

// ---------------------------------------------------------------------------
// Two-factor asset-return model
// ---------------------------------------------------------------------------
//
// Return process Y_t = X^c_{T^c_t} + X^j_{T^j_t} built from a continuous part
//
//   X^c_t = a_c1 t + a_c2 B^c_t + a_c3 B^j_t + a_c4 W^c_t
//
// run on the clock T^c_t = \int_0^t (v^c_s + eps) ds whose rate v^c is driven
// by B = sqrt(1 - rho^2) B^c + rho B^j, and a jump part
//
//   X^j_t = a_j1 J_t + a_j2 W^j_{J_t}
//
// run on the clock T^j_t = \int_0^t v^j_s ds whose rate v^j is driven by B^j
// (no elasticity floor on the jump side). B^c, B^j, W^c, W^j are independent
// Brownian motions and J is the subordinator in `spec`. The price map is
// S_t = S_0 exp((r_int - delta_div) t + Y_t).
struct TwoFactorModel {
  std::array<double, 4> a_c{0.05, 0.0, -0.3, 0.4};  // a_c1..a_c4
  std::array<double, 2> a_j{-0.1, 0.5};             // a_j1, a_j2
  ActivityModel clock_c = ActivityModel::cir(1.0, 0.5, 1.0);
  ActivityModel clock_j = ActivityModel::cir(1.0, 0.5, 1.0);
  double rho = 0.0;  // correlation wiring the continuous clock to B^j
  SubordinatorSpec spec = SubordinatorSpec::gamma_clock(0.2);
  double r_int = 0.0;      // risk-free rate in the price map
  double delta_div = 0.0;  // dividend yield in the price map

  // Throws ConfigError when |rho| > 1, when the jump clock carries a nonzero
  // elasticity floor, when the continuous clock has a positive floor but the
  // idiosyncratic loading a_c4 vanishes (the floor needs an unspanned
  // Gaussian component), or when a sub-model rejects its own parameters.
  void validate() const;

  // True when the two clocks are pathwise identical: rho = 1 and the same
  // rate dynamics, start value, and (zero) floor on both sides.
  bool shared_clock() const;
};

// The four stochastic-volatility reductions, distinguished by which return
// component receives a stochastic clock: SV1 only the continuous part, SV2
// only the jump part, SV3 both through one shared clock, SV4 both through
// separate clocks.
enum class SVVariant { SV1, SV2, SV3, SV4 };

// Free parameters for `build_sv_variant`. Plain fields are never pinned by a
// variant tag; optional fields are pinned by some tags, and supplying a value
// that contradicts the active pin is a ConfigError. Unset optionals fall back
// to the pin when one is active and to the defaults kappa = 1, sigma = 0.5,
// v0 = 1, eps_floor = 0 otherwise. Clocks with kappa = sigma = 0 degenerate
// to the deterministic unit rate (v0 must then be 1).
struct TwoFactorParams {
  double a_c1 = 0.05;
  double a_c3 = -0.3;
  double a_c4 = 0.4;
  double a_j1 = -0.1;
  double a_j2 = 0.5;
  std::optional<double> a_c2;     // pinned to 0 by SV2 and SV3
  std::optional<double> kappa_c;  // continuous-clock mean-reversion speed
  std::optional<double> sigma_c;  // continuous-clock vol-of-vol
  std::optional<double> v0_c;     // continuous-clock start value
  std::optional<double> kappa_j;  // jump-clock mean-reversion speed
  std::optional<double> sigma_j;  // jump-clock vol-of-vol
  std::optional<double> v0_j;     // jump-clock start value
  std::optional<double> rho;      // pinned by every tag (0, 0, 1, 0)
  std::optional<double> eps_floor;  // continuous-clock floor; SV3 pins 0
  SubordinatorSpec spec = SubordinatorSpec::gamma_clock(0.2);
  double r_int = 0.0;
  double delta_div = 0.0;
};

// Populate a TwoFactorModel under the tag's parameter restrictions:
//   SV1: v0_j = 1, kappa_j = sigma_j = 0 (deterministic jump clock), rho = 0;
//   SV2: v0_c = 1, kappa_c = sigma_c = 0 (deterministic continuous clock),
//        rho = 0, a_c2 = 0;
//   SV3: rho = 1, a_c2 = 0, both clocks share kappa / sigma / v0 and a zero
//        floor (one clock object on both sides);
//   SV4: rho = 0.
// A supplied free parameter that contradicts a pin raises ConfigError naming
// the violated pin. The result is validated before being returned.
TwoFactorModel build_sv_variant(SVVariant tag,
                                const TwoFactorParams& params = {});

// ---------------------------------------------------------------------------
// Transform assemblies
// ---------------------------------------------------------------------------

// Read-only decomposition of the continuous part against the clock driver B,
// as used by `laplace_Y_sv14`: the Gaussian loadings a_c2 B^c + a_c3 B^j
// split into driver_beta * B plus an independent Brownian motion of loading
// `orthogonal`, and the orthogonal and idiosyncratic variances complete into
// the effective drift alpha_eff(r). jump_theta is the subordinator argument
// of the conditional jump factor.
struct Sv14Decomposition {
  double driver_beta = 0.0;  // a_c2 sqrt(1 - rho^2) + rho a_c3
  double orthogonal = 0.0;   // |rho a_c2 - sqrt(1 - rho^2) a_c3|
  double alpha_eff = 0.0;    // a_c1 - r (a_c4^2 + orthogonal^2) / 2
  double jump_theta = 0.0;   // r a_j1 - r^2 a_j2^2 / 2
};
Sv14Decomposition sv14_decomposition(const TwoFactorModel& model, double r);

// E[exp(-r X^j_s) | T^j = s]: the conditional Laplace factor of the jump part
// at a realized clock value s >= 0, i.e. the subordinator transform at
// jump_theta. Strip violations surface as DomainError.
double jump_part_conditional_laplace(const TwoFactorModel& model, double r,
                                     double t_value);

// E[exp(-r X^j_{T^j_t})]: the conditional factor averaged over the jump
// clock. Deterministic jump clocks evaluate the factor at t; stochastic ones
// close the expectation through the affine exponent of T^j at the
// subordinator cumulant (no quadrature).
double jump_factor_expectation(const TwoFactorModel& model, double t,
                               double r);

// E[exp(-r Y_t)] for models whose jump clock is independent of the whole
// continuous system (SV1/SV4 shape): the product of the jump-factor
// expectation and the continuous-factor window assembly run at tilt level
// r * driver_beta. Requires rho = 0 (ConfigError otherwise) and, when the
// jump clock is stochastic, a_c3 = 0 (UnsupportedModel otherwise: a jump
// clock driven by a Brownian motion that also loads the continuous part
// breaks the product factorization).
double laplace_Y_sv14(const TwoFactorModel& model, double t, double r);

// E[exp(-r Y_t)] for models whose continuous clock is independent of the
// jump system (SV2 shape: rho = 0 and a_c2 = 0, ConfigError otherwise). The
// inner kernel F(t, s) = E[exp(-r a_c3 B^j_s) L_J(jump_theta, T^j_t)] closes
// in analytic form when a_c3 = 0 or the jump clock is deterministic and is
// otherwise integrated against the joint grid law of (T^j_t, B^j_s); the
// outer expectation over s = T^c_t collapses to one evaluation for a
// deterministic continuous clock and is otherwise quadrature against the
// clock density (expensive when the inner kernel also needs the grid law).
double laplace_Y_sv2(const TwoFactorModel& model, double t, double r);

// E[exp(-r Y_t)] for models whose two clocks are one shared clock (SV3
// shape: rho = 1, a_c2 = 0, identical clocks with zero floor, ConfigError
// otherwise). Integrates exp(-r alpha_c y - r a_c3 z) L_J(jump_theta, y)
// against the diagonal joint law of (T_t, B_{T_t}); a_c3 = 0 reduces to a
// one-dimensional integral against the clock density and a deterministic
// shared clock closes in analytic form.
double laplace_Y_sv3(const TwoFactorModel& model, double t, double r);

}  // namespace tcl
