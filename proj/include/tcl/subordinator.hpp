#pragma once

#include <complex>
#include <vector>

namespace tcl {

using cplx = std::complex<double>;

// Parametric family of the increasing Levy clock J.
//
// GammaClock:           J_y = drift*y + Gamma(shape m*y/nu, scale nu)
// InverseGaussianClock: J_y = drift*y + IG(mean m*y, shape lambda*(m*y)^2)
// IdentityClock:        J_y = y (deterministic; law is an atom, not a density)
//
// With unit_mean set, m = 1 - drift so that E J_y = y; otherwise m = 1 and
// the drift adds on top of a unit-rate stochastic part.
enum class ClockFamily { GammaClock, InverseGaussianClock, IdentityClock };

struct SubordinatorSpec {
  ClockFamily family = ClockFamily::GammaClock;
  double nu = 0.2;      // gamma family: variance rate of the unit-mean part
  double lambda = 2.0;  // IG family: shape rate
  double drift = 0.0;   // deterministic drift component
  bool unit_mean = true;

  static SubordinatorSpec gamma_clock(double nu, double drift = 0.0,
                                      bool unit_mean = true);
  static SubordinatorSpec inverse_gaussian(double lambda, double drift = 0.0,
                                           bool unit_mean = true);
  static SubordinatorSpec identity();

  // Scale of the stochastic part: unit_mean ? 1 - drift : 1.
  double mass_rate() const;
  // Var(J_y)/y for the stochastic part (0 for IdentityClock).
  double variance_rate() const;
  // True when every path of J is strictly increasing in y under the
  // engine's families: IdentityClock, or gamma/IG with positive drift.
  bool strictly_increasing() const;
  // Throws ConfigError on invalid parameters (nonpositive nu/lambda,
  // negative drift, or unit_mean with drift >= 1).
  void validate() const;
};

// f_{J_y}(j): density of J at business time y evaluated at j.
// IdentityClock has no density (AtomicLaw error); y<=0 or j<=0 is a
// DomainError. Returns 0 below the drift support j <= drift*y.
double subordinator_density(const SubordinatorSpec& spec, double y, double j);

// P(J_y <= j). IdentityClock returns the step 1_{j>=y}.
double subordinator_cdf(const SubordinatorSpec& spec, double y, double j);

// L_J(r,t) = E exp(-r J_t) for complex r inside the family's analytic strip
// (gamma: Re r > -1/nu; IG: Re r > -lambda/2; identity: all r).
cplx subordinator_laplace(const SubordinatorSpec& spec, cplx r, double t);

// Cumulant rate psi(r) with L_J(r,y) = exp(-y psi(r)) for real r in the
// strip; throws DomainError outside it.
double laplace_cumulant(const SubordinatorSpec& spec, double r);

// Precomputed quadrature table for the y-integral of f_{J_y}(j) at fixed j,
// so that many frequencies xi reuse one density evaluation pass.
struct FourierYTable {
  std::vector<double> y;   // quadrature nodes
  std::vector<double> wf;  // weight * density at each node
  double mass = 0.0;       // \int f_{J_y}(j) dy  (value at xi = 0)
  cplx eval(double xi) const;
};

FourierYTable make_fourier_y_table(const SubordinatorSpec& spec, double j);

// \int_0^infty e^{i xi y} f_{J_y}(j) dy; IdentityClock gives e^{i xi j}.
cplx fourier_in_y_of_density(const SubordinatorSpec& spec, double xi,
                             double j);

// Characteristic function chi(xi, F_j) = E exp(i xi F_j) of the inverse
// clock F_j = inf{y : J_y > j}, computed as 1 + i xi \int e^{i xi y}
// P(J_y <= j) dy. Requires strictly increasing paths (UnsupportedSpec
// otherwise); the gamma/IG integrand vanishes beyond y = j/drift.
cplx inverse_clock_cf(const SubordinatorSpec& spec, double xi, double j);

}  // namespace tcl
