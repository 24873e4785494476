#include "tcl/model_zoo.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tcl/errors.hpp"
#include "tcl/quadrature.hpp"
#include "tcl/transforms.hpp"

namespace tcl {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

constexpr double kDefaultKappa = 1.0;
constexpr double kDefaultSigma = 0.5;
constexpr double kDefaultV0 = 1.0;

// Resolve an optionally supplied parameter against a variant pin.
double pinned(const std::optional<double>& supplied, double pin,
              const std::string& tag, const std::string& what) {
  if (supplied && *supplied != pin)
    throw ConfigError(tag + " pins " + what + " = " + fmt(pin) + "; got " +
                      fmt(*supplied));
  return pin;
}

// Resolve a parameter the SV3 restriction forces equal on both clocks.
double shared_pin(const std::optional<double>& c_side,
                  const std::optional<double>& j_side, double dflt,
                  const std::string& what) {
  if (c_side && j_side && *c_side != *j_side)
    throw ConfigError("SV3 pins the two clocks equal: " + what +
                      " must match on both sides (got " + fmt(*c_side) +
                      " and " + fmt(*j_side) + ")");
  if (c_side) return *c_side;
  if (j_side) return *j_side;
  return dflt;
}

ActivityModel make_clock(double kappa, double sigma, double v0, double eps,
                         const std::string& side) {
  if (kappa == 0.0 && sigma == 0.0) {
    if (v0 != 1.0)
      throw ConfigError(side + ": a deterministic clock needs v0 = 1 (got " +
                        fmt(v0) + ")");
    return ActivityModel::deterministic_unit(eps);
  }
  if (kappa <= 0.0 || sigma <= 0.0)
    throw ConfigError(side +
                      ": rate parameters must be both zero (deterministic "
                      "clock) or both positive");
  return ActivityModel::cir(kappa, sigma, v0, eps);
}

// Mean and standard deviation of the clock T_t from centered differences of
// the cumulant generating function w -> log E[e^{w T_t}], which the affine
// exponent supplies in closed form.
struct ClockMoments {
  double mean = 0.0;
  double sd = 0.0;
};

ClockMoments clock_moments(const ActivityModel& model, double t) {
  if (model.kind == ActivityKind::DeterministicUnit)
    return {(1.0 + model.eps_floor) * t, 0.0};
  const double h = 1e-3;
  const double lp = conditional_exponent_general(model, t, cplx(h, 0.0))
                        .value(model.v0, 0.0)
                        .real();
  const double lm = conditional_exponent_general(model, t, cplx(-h, 0.0))
                        .value(model.v0, 0.0)
                        .real();
  ClockMoments m;
  m.mean = (lp - lm) / (2.0 * h);
  m.sd = std::sqrt(std::max((lp + lm) / (h * h), 0.0));
  return m;
}

// log E[e^{w T_t}] for a real exponent w, valid for every supported clock.
double clock_log_mgf(const ActivityModel& model, double t, double w) {
  if (model.kind == ActivityKind::DeterministicUnit)
    return w * (1.0 + model.eps_floor) * t;
  return conditional_exponent_general(model, t, cplx(w, 0.0))
      .value(model.v0, 0.0)
      .real();
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) /
                    static_cast<double>(n - 1);
  return g;
}

// Composite Simpson weights on a uniform grid with an odd node count (all
// grids in this translation unit are built that way).
std::vector<double> simpson_weights(std::size_t n, double h) {
  std::vector<double> w(n, 0.0);
  w.front() = w.back() = h / 3.0;
  for (std::size_t i = 1; i + 1 < n; ++i)
    w[i] = (i % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
  return w;
}

// Support grid for a stochastic clock's law: mean +/- a generous number of
// standard deviations, clipped to the positive axis (and to the floor times
// horizon, below which the clock value is impossible).
std::vector<double> clock_support_grid(const ActivityModel& model, double t,
                                       const ClockMoments& mom,
                                       std::size_t n) {
  const double floor_mass = model.eps_floor * t;
  const double lo = std::max({floor_mass + 1e-3 * mom.mean,
                              1e-2 * mom.mean, mom.mean - 8.0 * mom.sd});
  const double hi = mom.mean + 10.0 * mom.sd;
  return uniform_grid(lo, hi, n);
}

double theta_of(const TwoFactorModel& model, double r) {
  return r * model.a_j[0] - 0.5 * r * r * model.a_j[1] * model.a_j[1];
}

// E[e^{-r a3 B^j_s} L_J(theta, T^j_t)] by Simpson quadrature against the
// joint grid law of (T^j_t, B^j_s). Only reached when the jump clock is
// stochastic and a3 != 0 (every other regime closes analytically).
double sv2_kernel_grid(const TwoFactorModel& model, double t, double s,
                       double r, double theta, double a3) {
  const ActivityModel& clock = model.clock_j;
  const ClockMoments mom = clock_moments(clock, t);
  const std::size_t ny = 61, nz = 101;
  const std::vector<double> yg = clock_support_grid(clock, t, mom, ny);
  const double drift = -r * a3 * s;  // peak of the tilted driver Gaussian
  const double zpad = 6.0 * std::sqrt(s) + 0.5;
  const std::vector<double> zg =
      uniform_grid(std::min(0.0, drift) - zpad, std::max(0.0, drift) + zpad,
                   nz);
  const JointGridDensity law =
      JointGridDensity::fixed_time(clock, t, s, yg, zg);
  const std::vector<double> wy = simpson_weights(ny, yg[1] - yg[0]);
  const std::vector<double> wz = simpson_weights(nz, zg[1] - zg[0]);
  std::vector<double> tilt(nz);
  for (std::size_t iz = 0; iz < nz; ++iz)
    tilt[iz] = std::exp(-r * a3 * zg[iz]);
  std::vector<double> row_val(ny), row_mass(ny), tv(nz), tm(nz);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t iz = 0; iz < nz; ++iz) {
      const double fv = law.value(iy, iz);
      tm[iz] = wz[iz] * fv;
      tv[iz] = wz[iz] * tilt[iz] * fv;
    }
    const double lj =
        subordinator_laplace(model.spec, cplx(theta, 0.0), yg[iy]).real();
    row_mass[iy] = wy[iy] * pairwise_sum(tm);
    row_val[iy] = wy[iy] * lj * pairwise_sum(tv);
  }
  const double mass = pairwise_sum(row_mass);
  if (std::abs(mass - 1.0) > 2e-2)
    throw QuadratureError("joint law of (T_t, B_s) carries mass " + fmt(mass) +
                          " on the readout box; the (y, z) grid under-covers "
                          "the law");
  return pairwise_sum(row_val);
}

void check_transform_args(double t, double r) {
  if (!(t > 0.0) || !std::isfinite(t))
    throw DomainError("horizon t must be positive and finite");
  if (!std::isfinite(r))
    throw DomainError("transform argument r must be finite");
}

}  // namespace

void TwoFactorModel::validate() const {
  for (double a : a_c)
    if (!std::isfinite(a))
      throw ConfigError("continuous loadings a_c must be finite");
  for (double a : a_j)
    if (!std::isfinite(a)) throw ConfigError("jump loadings a_j must be finite");
  if (!std::isfinite(rho) || std::abs(rho) > 1.0)
    throw ConfigError("clock coupling rho must lie in [-1, 1]");
  if (!std::isfinite(r_int) || !std::isfinite(delta_div))
    throw ConfigError("price-map rates must be finite");
  clock_c.validate();
  clock_j.validate();
  if (clock_j.eps_floor != 0.0)
    throw ConfigError(
        "the jump-side clock carries no elasticity floor; its eps_floor must "
        "be 0");
  if (clock_c.eps_floor > 0.0 && a_c[3] == 0.0)
    throw ConfigError(
        "a positive elasticity floor on the continuous clock needs a nonzero "
        "idiosyncratic loading a_c4");
  spec.validate();
}

bool TwoFactorModel::shared_clock() const {
  return rho == 1.0 && clock_c.kind == clock_j.kind &&
         clock_c.kappa == clock_j.kappa &&
         clock_c.sigma_v == clock_j.sigma_v && clock_c.v0 == clock_j.v0 &&
         clock_c.eps_floor == 0.0 && clock_j.eps_floor == 0.0;
}

TwoFactorModel build_sv_variant(SVVariant tag, const TwoFactorParams& p) {
  TwoFactorModel m;
  m.a_c[0] = p.a_c1;
  m.a_c[2] = p.a_c3;
  m.a_c[3] = p.a_c4;
  m.a_j[0] = p.a_j1;
  m.a_j[1] = p.a_j2;
  m.spec = p.spec;
  m.r_int = p.r_int;
  m.delta_div = p.delta_div;
  switch (tag) {
    case SVVariant::SV1: {
      m.rho = pinned(p.rho, 0.0, "SV1", "rho");
      m.a_c[1] = p.a_c2.value_or(0.0);
      const double kj =
          pinned(p.kappa_j, 0.0, "SV1", "the jump-clock parameter kappa_j");
      const double sj =
          pinned(p.sigma_j, 0.0, "SV1", "the jump-clock parameter sigma_j");
      const double vj =
          pinned(p.v0_j, 1.0, "SV1", "the jump-clock start value v0_j");
      m.clock_j = make_clock(kj, sj, vj, 0.0, "jump clock");
      m.clock_c = make_clock(p.kappa_c.value_or(kDefaultKappa),
                             p.sigma_c.value_or(kDefaultSigma),
                             p.v0_c.value_or(kDefaultV0),
                             p.eps_floor.value_or(0.0), "continuous clock");
      break;
    }
    case SVVariant::SV2: {
      m.rho = pinned(p.rho, 0.0, "SV2", "rho");
      m.a_c[1] =
          pinned(p.a_c2, 0.0, "SV2", "the continuous driver loading a_c2");
      const double kc = pinned(p.kappa_c, 0.0, "SV2",
                               "the continuous-clock parameter kappa_c");
      const double sc = pinned(p.sigma_c, 0.0, "SV2",
                               "the continuous-clock parameter sigma_c");
      const double vc =
          pinned(p.v0_c, 1.0, "SV2", "the continuous-clock start value v0_c");
      m.clock_c =
          make_clock(kc, sc, vc, p.eps_floor.value_or(0.0), "continuous clock");
      m.clock_j = make_clock(p.kappa_j.value_or(kDefaultKappa),
                             p.sigma_j.value_or(kDefaultSigma),
                             p.v0_j.value_or(kDefaultV0), 0.0, "jump clock");
      break;
    }
    case SVVariant::SV3: {
      m.rho = pinned(p.rho, 1.0, "SV3", "rho");
      m.a_c[1] =
          pinned(p.a_c2, 0.0, "SV3", "the continuous driver loading a_c2");
      const double eps =
          pinned(p.eps_floor, 0.0, "SV3", "the elasticity floor");
      const double k = shared_pin(p.kappa_c, p.kappa_j, kDefaultKappa, "kappa");
      const double s = shared_pin(p.sigma_c, p.sigma_j, kDefaultSigma, "sigma");
      const double v = shared_pin(p.v0_c, p.v0_j, kDefaultV0, "v0");
      m.clock_c = make_clock(k, s, v, eps, "shared clock");
      m.clock_j = m.clock_c;
      break;
    }
    case SVVariant::SV4: {
      m.rho = pinned(p.rho, 0.0, "SV4", "rho");
      m.a_c[1] = p.a_c2.value_or(0.0);
      m.clock_c = make_clock(p.kappa_c.value_or(kDefaultKappa),
                             p.sigma_c.value_or(kDefaultSigma),
                             p.v0_c.value_or(kDefaultV0),
                             p.eps_floor.value_or(0.0), "continuous clock");
      m.clock_j = make_clock(p.kappa_j.value_or(kDefaultKappa),
                             p.sigma_j.value_or(kDefaultSigma),
                             p.v0_j.value_or(kDefaultV0), 0.0, "jump clock");
      break;
    }
  }
  m.validate();
  return m;
}

Sv14Decomposition sv14_decomposition(const TwoFactorModel& model, double r) {
  const double rho = model.rho;
  const double ortho = std::sqrt(std::max(1.0 - rho * rho, 0.0));
  Sv14Decomposition d;
  d.driver_beta = model.a_c[1] * ortho + rho * model.a_c[2];
  d.orthogonal = std::abs(rho * model.a_c[1] - ortho * model.a_c[2]);
  d.alpha_eff = model.a_c[0] - 0.5 * r *
                                   (model.a_c[3] * model.a_c[3] +
                                    d.orthogonal * d.orthogonal);
  d.jump_theta = theta_of(model, r);
  return d;
}

double jump_part_conditional_laplace(const TwoFactorModel& model, double r,
                                     double t_value) {
  model.validate();
  if (!std::isfinite(r))
    throw DomainError("transform argument r must be finite");
  if (!(t_value >= 0.0) || !std::isfinite(t_value))
    throw DomainError("the realized clock value must be nonnegative");
  if (t_value == 0.0) return 1.0;
  return subordinator_laplace(model.spec, cplx(theta_of(model, r), 0.0),
                              t_value)
      .real();
}

double jump_factor_expectation(const TwoFactorModel& model, double t,
                               double r) {
  model.validate();
  check_transform_args(t, r);
  if (r == 0.0) return 1.0;
  const double theta = theta_of(model, r);
  if (model.clock_j.kind == ActivityKind::DeterministicUnit)
    return subordinator_laplace(model.spec, cplx(theta, 0.0), t).real();
  const double psi = laplace_cumulant(model.spec, theta);
  return std::exp(clock_log_mgf(model.clock_j, t, -psi));
}

double laplace_Y_sv14(const TwoFactorModel& model, double t, double r) {
  model.validate();
  check_transform_args(t, r);
  if (model.rho != 0.0)
    throw ConfigError(
        "the product assembly needs rho = 0 (the jump clock independent of "
        "the whole continuous system)");
  if (r == 0.0) return 1.0;
  const bool jump_stochastic =
      model.clock_j.kind != ActivityKind::DeterministicUnit;
  if (jump_stochastic && model.a_c[2] != 0.0)
    throw UnsupportedModelError(
        "the product assembly needs the jump-clock driver decoupled from the "
        "continuous loadings: set a_c3 = 0 or make the jump clock "
        "deterministic");
  const Sv14Decomposition dec = sv14_decomposition(model, r);
  const double jf = jump_factor_expectation(model, t, r);
  LevyComposition levy;
  levy.alpha = dec.alpha_eff;
  levy.beta = dec.driver_beta;
  levy.rho = dec.driver_beta == 0.0 ? 0.0 : 1.0;
  const double cont =
      laplace_Y(model.clock_c, levy, SubordinatorSpec::identity(), t, r);
  return jf * cont;
}

double laplace_Y_sv2(const TwoFactorModel& model, double t, double r) {
  model.validate();
  check_transform_args(t, r);
  if (model.rho != 0.0 || model.a_c[1] != 0.0)
    throw ConfigError(
        "the jump-side assembly needs rho = 0 and a_c2 = 0 (the continuous "
        "clock independent of the jump system)");
  if (r == 0.0) return 1.0;
  const double a3 = model.a_c[2];
  const double alpha_c = model.a_c[0] - 0.5 * r * model.a_c[3] * model.a_c[3];
  const double theta = theta_of(model, r);
  const bool det_c = model.clock_c.kind == ActivityKind::DeterministicUnit;
  const bool det_j = model.clock_j.kind == ActivityKind::DeterministicUnit;

  // a3 = 0: the inner kernel is independent of the driver value, so the
  // outer average closes through the clock's exponential moment.
  if (a3 == 0.0)
    return std::exp(clock_log_mgf(model.clock_c, t, -r * alpha_c)) *
           jump_factor_expectation(model, t, r);

  // Deterministic jump clock: T^j_t = t exactly, the driver decouples from
  // the jump factor, and the kernel is L_J(theta, t) e^{(r a3)^2 s / 2}; the
  // outer average again closes through the clock's exponential moment.
  if (det_j) {
    const double lj = subordinator_laplace(model.spec, cplx(theta, 0.0), t)
                          .real();
    const double w = -r * alpha_c + 0.5 * (r * a3) * (r * a3);
    return lj * std::exp(clock_log_mgf(model.clock_c, t, w));
  }

  // Full jump-side kernel against the joint grid law.
  if (det_c) {
    const double s = (1.0 + model.clock_c.eps_floor) * t;
    return std::exp(-r * alpha_c * s) * sv2_kernel_grid(model, t, s, r, theta,
                                                        a3);
  }

  // Stochastic continuous clock on top of the full kernel: average against
  // the clock density (one joint grid build per node; supported, expensive).
  const ClockMoments mom = clock_moments(model.clock_c, t);
  const GaussLegendre& gl = GaussLegendre::get(15);
  const double floor_mass = model.clock_c.eps_floor * t;
  const double lo = std::max(floor_mass + 1e-3 * mom.mean,
                             mom.mean - 6.0 * mom.sd);
  const double hi = mom.mean + 6.0 * mom.sd;
  std::vector<double> nodes(gl.nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    nodes[i] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.nodes[i];
  const std::vector<double> dens = clock_density_values(model.clock_c, t,
                                                        nodes);
  std::vector<double> terms(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    terms[i] = 0.5 * (hi - lo) * gl.weights[i] * dens[i] *
               std::exp(-r * alpha_c * nodes[i]) *
               sv2_kernel_grid(model, t, nodes[i], r, theta, a3);
  return pairwise_sum(terms);
}

double laplace_Y_sv3(const TwoFactorModel& model, double t, double r) {
  model.validate();
  check_transform_args(t, r);
  if (model.rho != 1.0)
    throw ConfigError("the shared-clock assembly needs rho = 1");
  if (model.a_c[1] != 0.0)
    throw ConfigError("the shared-clock assembly needs a_c2 = 0");
  if (!model.shared_clock())
    throw ConfigError(
        "the shared-clock assembly needs identical clocks on both sides with "
        "a zero elasticity floor");
  if (r == 0.0) return 1.0;
  const double a3 = model.a_c[2];
  const double alpha_c = model.a_c[0] - 0.5 * r * model.a_c[3] * model.a_c[3];
  const double theta = theta_of(model, r);
  const ActivityModel& clock = model.clock_j;

  // Deterministic shared clock: T_t = t and B_t is a plain Gaussian.
  if (clock.kind == ActivityKind::DeterministicUnit)
    return std::exp(-r * alpha_c * t) *
           subordinator_laplace(model.spec, cplx(theta, 0.0), t).real() *
           std::exp(0.5 * (r * a3) * (r * a3) * t);

  // a3 = 0: the y-kernel e^{-r alpha_c y} L_J(theta, y) is exponential in
  // the clock value, so the integral closes through the clock's exponential
  // moment at -r alpha_c - psi(theta).
  if (a3 == 0.0) {
    const double psi = laplace_cumulant(model.spec, theta);
    return std::exp(clock_log_mgf(clock, t, -r * alpha_c - psi));
  }

  // General shared clock: integrate against the diagonal joint law of
  // (T_t, B_{T_t}).
  const ClockMoments mom = clock_moments(clock, t);
  const std::size_t ny = 61, nz = 101;
  const std::vector<double> yg = clock_support_grid(clock, t, mom, ny);
  const double d_lo = -r * a3 * yg.front();
  const double d_hi = -r * a3 * yg.back();
  const double zpad = 6.0 * std::sqrt(yg.back()) + 0.5;
  const std::vector<double> zg =
      uniform_grid(std::min({0.0, d_lo, d_hi}) - zpad,
                   std::max({0.0, d_lo, d_hi}) + zpad, nz);
  const JointGridDensity law = JointGridDensity::diagonal(clock, t, yg, zg);
  const std::vector<double> wy = simpson_weights(ny, yg[1] - yg[0]);
  const std::vector<double> wz = simpson_weights(nz, zg[1] - zg[0]);
  std::vector<double> tilt(nz);
  for (std::size_t iz = 0; iz < nz; ++iz)
    tilt[iz] = std::exp(-r * a3 * zg[iz]);
  std::vector<double> row_val(ny), row_mass(ny), tv(nz), tm(nz);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t iz = 0; iz < nz; ++iz) {
      const double fv = law.value(iy, iz);
      tm[iz] = wz[iz] * fv;
      tv[iz] = wz[iz] * tilt[iz] * fv;
    }
    const double g = std::exp(-r * alpha_c * yg[iy]) *
                     subordinator_laplace(model.spec, cplx(theta, 0.0),
                                          yg[iy])
                         .real();
    row_mass[iy] = wy[iy] * pairwise_sum(tm);
    row_val[iy] = wy[iy] * g * pairwise_sum(tv);
  }
  const double mass = pairwise_sum(row_mass);
  if (std::abs(mass - 1.0) > 2e-2)
    throw QuadratureError("diagonal joint law carries mass " + fmt(mass) +
                          " on the readout box; the (y, z) grid under-covers "
                          "the law");
  return pairwise_sum(row_val);
}

}  // namespace tcl
