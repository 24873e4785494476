#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "tcl/activity.hpp"
#include "tcl/errors.hpp"
#include "tcl/fokker_planck.hpp"
#include "tcl/quadrature.hpp"

using namespace tcl;

namespace {

const ActivityModel kCir = ActivityModel::cir(1.0, 0.5, 1.0);

// Closed-form transition density of the square-root rate process started at
// v0 (noncentral-chi-square type, expressed through the modified Bessel
// function of the first kind).
double cir_transition_pdf(double x, double kappa, double sigma, double v0,
                          double t) {
  if (x <= 0.0) return 0.0;
  const double cfac = sigma * sigma * (1.0 - std::exp(-kappa * t)) / (4.0 * kappa);
  const double df = 4.0 * kappa / (sigma * sigma);  // long-run mean 1
  const double nc = v0 * std::exp(-kappa * t) / cfac;
  const double z = x / cfac;
  const double order = 0.5 * df - 1.0;
  const double pdf_z = 0.5 * std::exp(-0.5 * (z + nc)) *
                       std::pow(z / nc, 0.25 * df - 0.5) *
                       std::cyl_bessel_i(order, std::sqrt(nc * z));
  return pdf_z / cfac;
}

// E exp(i xi T_t) from the Riccati oracle.
cplx clock_cf(const ActivityModel& model, double t, double xi) {
  AffineExponent e = conditional_cf_exponent(model, t, 0.0, xi);
  return std::exp(e.value(model.v0, 0.0));
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

}  // namespace

TEST_CASE("exponential-fitting weight: series, reflection, overflow") {
  CHECK(std::abs(bernoulli_B(cplx(0.0)) - 1.0) == 0.0);
  // reflection identity B(z) - B(-z) = -z across all three branches
  for (cplx z : {cplx(2.0, 3.0), cplx(-5.0, 1.0), cplx(1e-5, -2e-5),
                 cplx(0.3, 0.0), cplx(-720.0, 0.4)}) {
    const cplx lhs = bernoulli_B(z) - bernoulli_B(-z);
    CHECK(std::abs(lhs + z) < 1e-12 * std::max(1.0, std::abs(z)));
  }
  // continuity across the series cutoff
  const cplx lo = bernoulli_B(cplx(0.99e-4, 0.3e-4));
  const cplx hi = cplx(0.99e-4, 0.3e-4);
  const cplx direct = hi / (std::exp(hi) - 1.0);
  CHECK(std::abs(lo - direct) < 1e-11);
  // overflow guard: huge positive real part
  CHECK(std::abs(bernoulli_B(cplx(800.0, 0.0))) == 0.0);
  CHECK(std::abs(bernoulli_B(cplx(-800.0, 0.0)) - 800.0) < 1e-12);
}

TEST_CASE("axes and spatial grids satisfy their invariants") {
  Axis u = Axis::uniform(0.0, 7.0, 50);
  double sum = 0.0;
  for (double w : u.w) sum += w;
  CHECK(std::abs(sum - 7.0) < 1e-12);

  SpatialGrid anchored = default_rate_grid(1.0);
  CHECK(anchored.x.x[anchored.anchor] == 1.0);
  anchored.validate(1.0);

  SpatialGrid sinh_grid = SpatialGrid::rate_sinh(7.0, 240, 1.0);
  sinh_grid.validate(1.0);
  CHECK(sinh_grid.x.x[sinh_grid.anchor] == 1.0);
  CHECK(sinh_grid.x.x.front() == 0.0);
  CHECK(sinh_grid.x.x.back() == 7.0);
  for (int i = 0; i + 1 < sinh_grid.x.n(); ++i) {
    CHECK(sinh_grid.x.x[i + 1] > sinh_grid.x.x[i]);
  }
  // clustering: spacing near the anchor is finer than the uniform average
  const int a = sinh_grid.anchor;
  const double near = sinh_grid.x.x[a + 1] - sinh_grid.x.x[a];
  CHECK(near < 7.0 / 239);

  CHECK_THROWS_AS(SpatialGrid::rate_uniform(7.0, 15, 1.0).validate(1.0),
                  ConfigError);
  CHECK_THROWS_AS(SpatialGrid::rate_uniform(0.5, 32, 1.0).validate(1.0),
                  ConfigError);
}

TEST_CASE("zero-frequency profile reproduces the closed-form rate density") {
  // frozen oracle anchors for the closed form itself
  CHECK(std::abs(cir_transition_pdf(0.5, 1.0, 0.5, 1.0, 1.0) -
                 0.4080820181158142) < 1e-12);
  CHECK(std::abs(cir_transition_pdf(1.0, 1.0, 0.5, 1.0, 1.0) -
                 1.200202667887124) < 1e-12);
  CHECK(std::abs(cir_transition_pdf(1.5, 1.0, 0.5, 1.0, 1.0) -
                 0.3390579668694701) < 1e-12);

  const SpatialGrid grid = default_rate_grid(1.0);
  const PDEField f = solve_qhat(kCir, 1.0, 0.0, 0.0, grid, 1.0 / 400);
  CHECK(std::abs(f.mass - 1.0) < 1e-4);
  CHECK(f.values.back() == cplx(0.0));  // Dirichlet top
  double l1 = 0.0, imag_max = 0.0;
  for (int i = 0; i < grid.x.n(); ++i) {
    l1 += grid.x.w[i] * std::abs(f.values[i].real() -
                                 cir_transition_pdf(grid.x.x[i], 1.0, 0.5, 1.0,
                                                    1.0));
    imag_max = std::max(imag_max, std::abs(f.values[i].imag()));
  }
  CHECK(l1 < 2e-3);
  CHECK(imag_max < 1e-15);
}

TEST_CASE("sinh-clustered grid solves the same density") {
  const SpatialGrid grid = SpatialGrid::rate_sinh(7.0, 240, 1.0);
  const PDEField f = solve_qhat(kCir, 1.0, 0.0, 0.0, grid, 1.0 / 400);
  CHECK(std::abs(f.mass - 1.0) < 1e-4);
  double l1 = 0.0;
  for (int i = 0; i < grid.x.n(); ++i) {
    l1 += grid.x.w[i] * std::abs(f.values[i].real() -
                                 cir_transition_pdf(grid.x.x[i], 1.0, 0.5, 1.0,
                                                    1.0));
  }
  CHECK(l1 < 2e-3);
}

TEST_CASE("clock characteristic function matches the Riccati oracle") {
  const SpatialGrid grid = default_rate_grid(1.0);
  for (double xi : {0.5, 1.0, 2.0, 4.0}) {
    const PDEField f = solve_qhat(kCir, 1.0, xi, 0.0, grid, 1.0 / 400);
    const cplx want = clock_cf(kCir, 1.0, -xi);  // E e^{-i xi T}
    CHECK(std::abs(f.mass - want) < 2e-3);
  }
}

TEST_CASE("snapshots are recorded at exact time levels") {
  RateSolveOptions opts;
  opts.dt = 0.01;
  opts.snap_times = {0.0, 0.37, 1.0};
  const RateSolveResult r = solve_qhat_snapshots(kCir, 1.0, 0.0, 0.0, opts);
  REQUIRE(r.snapshots.size() == 3);
  CHECK(r.snapshots[0].time_level == 0.0);
  CHECK(std::abs(r.snapshots[0].mass - 1.0) < 1e-12);  // exact-hat start
  CHECK(r.snapshots[1].time_level == 0.37);
  CHECK(std::abs(r.snapshots[1].mass - 1.0) < 1e-4);
  CHECK(max_abs_diff(r.snapshots[2].values, r.final_field.values) == 0.0);

  RateSolveOptions bad = opts;
  bad.snap_times = {1.5};
  CHECK_THROWS_AS(solve_qhat_snapshots(kCir, 1.0, 0.0, 0.0, bad), DomainError);
}

TEST_CASE("tilted transform solver agrees with the Riccati oracle") {
  // pure density mode
  const PDEField d = solve_Ghat(kCir, 0.0, -0.5, 1.0, 0.0, 1.0 / 400);
  CHECK(std::abs(d.mass - 1.0) < 1e-4);
  // eta sweep at zero tilt: integral equals E e^{-i eta T}
  for (double eta : {0.5, 2.0}) {
    const PDEField f = solve_Ghat(kCir, 0.0, 0.3, 1.0, eta, 1.0 / 400);
    CHECK(std::abs(f.mass - clock_cf(kCir, 1.0, -eta)) < 2e-3);
  }
  // theta twin at theta=0 reproduces the r=0 field node-for-node
  const PDEField g0 = solve_Ghat(kCir, 0.0, -0.5, 1.0, 1.5, 1.0 / 300);
  const PDEField t0 = solve_Ghat_theta(kCir, 0.0, -0.5, 1.0, 1.5, 1.0 / 300);
  CHECK(max_abs_diff(g0.values, t0.values) < 1e-12);
}

TEST_CASE("joint rate-clock solver: oracle, tilt identities, mass") {
  const double t = 1.0;
  SUBCASE("untilted y-transform matches the Riccati oracle") {
    const SpatialGrid grid =
        SpatialGrid::rate_anchored(7.0, 7.0 / 300, 1.0).with_y(3.0, 720);
    const PDEField G = solve_G(kCir, 0.0, 0.0, 0.4, t, grid, t / 400);
    CHECK(std::abs(G.mass - 1.0) < 1e-3);
    const Axis& ax = G.axes[0];
    const Axis& ay = G.axes[1];
    for (double xi : {1.0, 2.0}) {
      cplx acc = 0.0;
      for (int i = 0; i < ax.n(); ++i) {
        cplx row = 0.0;
        for (int j = 0; j < ay.n(); ++j) {
          row += ay.w[j] * std::exp(cplx(0.0, -xi * ay.x[j])) *
                 G.values[static_cast<std::size_t>(i) * ay.n() + j];
        }
        acc += ax.w[i] * row;
      }
      CHECK(std::abs(acc - clock_cf(kCir, t, -xi)) < 2e-3);
    }
  }
  SUBCASE("rho=0 and r=0 produce the identical field") {
    const SpatialGrid grid =
        SpatialGrid::rate_anchored(7.0, 0.05, 1.0).with_y(3.0, 64);
    const PDEField a = solve_G(kCir, 1.3, 0.0, 0.3, 0.6, grid, 0.01);
    const PDEField b = solve_G(kCir, 0.0, 0.7, 0.3, 0.6, grid, 0.01);
    CHECK(max_abs_diff(a.values, b.values) < 1e-14);
  }
  SUBCASE("for t <= j the output does not depend on j") {
    const SpatialGrid grid =
        SpatialGrid::rate_anchored(7.0, 0.05, 1.0).with_y(2.0, 64);
    const PDEField a = solve_G(kCir, 1.0, -0.5, 0.6, 0.5, grid, 0.01);
    const PDEField b = solve_G(kCir, 1.0, -0.5, 7.5, 0.5, grid, 0.01);
    CHECK(max_abs_diff(a.values, b.values) == 0.0);
  }
  SUBCASE("tilted density conserves mass") {
    const SpatialGrid grid =
        SpatialGrid::rate_anchored(7.0, 7.0 / 150, 1.0).with_y(3.0, 240);
    const PDEField G = solve_G(kCir, 1.0, -0.5, 0.4, t, grid, t / 150);
    CHECK(std::abs(G.mass - 1.0) < 1e-3);
  }
  SUBCASE("grid shape errors") {
    const SpatialGrid no_y = SpatialGrid::rate_anchored(7.0, 0.05, 1.0);
    CHECK_THROWS_AS(solve_G(kCir, 1.0, -0.5, 0.4, 1.0, no_y, 0.01),
                    ConfigError);
    const SpatialGrid with_z = no_y.with_y(3.0, 64).with_z(2.0, 32);
    CHECK_THROWS_AS(solve_G(kCir, 1.0, -0.5, 0.4, 1.0, with_z, 0.01),
                    ConfigError);
  }
}

TEST_CASE("3-D solver cross-validates the Fourier-reduced solver") {
  const double t = 0.5;
  const SpatialGrid grid = SpatialGrid::rate_uniform(7.0, 48, 1.0)
                               .with_y(1.2, 48)
                               .with_z(4.0 * std::sqrt(t), 48);
  const PDEField q = solve_q3d(kCir, t, grid, t / 300);
  CHECK(std::abs(q.mass - 1.0) < 5e-3);

  const Axis& ax = q.axes[0];
  const Axis& ay = q.axes[1];
  const Axis& az = q.axes[2];
  const int nx = ax.n(), ny = ay.n(), nz = az.n();

  // z-marginal is the Brownian density N(0, t)
  std::vector<double> zmarg(nz, 0.0);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double wij = ax.w[i] * ay.w[j];
      const cplx* row = &q.values[(static_cast<std::size_t>(i) * ny + j) * nz];
      for (int k = 0; k < nz; ++k) zmarg[k] += wij * row[k].real();
    }
  }
  double zl1 = 0.0;
  for (int k = 0; k < nz; ++k) {
    const double gauss = std::exp(-az.x[k] * az.x[k] / (2.0 * t)) /
                         std::sqrt(2.0 * M_PI * t);
    zl1 += az.w[k] * std::abs(zmarg[k] - gauss);
  }
  CHECK(zl1 < 1e-2);

  // DFT in (y,z) against the 1-D solver on the shared x-grid. The 1-D side
  // runs the direct cross-advection discretization so both solvers apply
  // the same discrete x-operator and their truncation errors cancel in the
  // comparison.
  RateSolveOptions opts;
  opts.dt = t / 300;
  opts.rannacher = false;
  opts.grid = SpatialGrid::rate_uniform(7.0, 48, 1.0);
  opts.cross_scheme = CrossScheme::Direct;
  const std::pair<double, double> nodes[] = {
      {1.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}, {2.0, 1.0}};
  for (const auto& [xi, eta] : nodes) {
    std::vector<cplx> prof3(nx, 0.0);
    for (int i = 0; i < nx; ++i) {
      cplx acc = 0.0;
      for (int j = 0; j < ny; ++j) {
        const cplx wy = ay.w[j] * std::exp(cplx(0.0, -xi * ay.x[j]));
        const cplx* row =
            &q.values[(static_cast<std::size_t>(i) * ny + j) * nz];
        cplx zacc = 0.0;
        for (int k = 0; k < nz; ++k) {
          zacc += az.w[k] * std::exp(cplx(0.0, -eta * az.x[k])) * row[k];
        }
        acc += wy * zacc;
      }
      prof3[i] = acc;
    }
    const RateSolveResult r1 = solve_qhat_snapshots(kCir, t, xi, eta, opts);
    double l1 = 0.0;
    for (int i = 0; i < nx; ++i) {
      l1 += ax.w[i] * std::abs(prof3[i] - r1.final_field.values[i]);
    }
    CHECK(l1 < 2e-2);
  }
}

TEST_CASE("3-D solver guard rails") {
  const double t = 0.5;
  const SpatialGrid grid = SpatialGrid::rate_uniform(7.0, 48, 1.0)
                               .with_y(1.2, 48)
                               .with_z(2.83, 48);
  CHECK_THROWS_AS(solve_q3d(kCir, t, grid, t / 10), StabilityError);

  const SpatialGrid big = SpatialGrid::rate_uniform(7.0, 65, 1.0)
                              .with_y(1.5, 65)
                              .with_z(2.83, 65);
  CHECK_THROWS_AS(solve_q3d(kCir, t, big, t / 3000), DomainError);

  const SpatialGrid no_z = SpatialGrid::rate_uniform(7.0, 48, 1.0)
                               .with_y(1.2, 48);
  CHECK_THROWS_AS(solve_q3d(kCir, t, no_z, t / 300), ConfigError);

  const SpatialGrid sinh_grid = SpatialGrid::rate_sinh(7.0, 48, 1.0)
                                    .with_y(1.2, 48)
                                    .with_z(2.83, 48);
  CHECK_THROWS_AS(solve_q3d(kCir, t, sinh_grid, t / 300), ConfigError);
}

TEST_CASE("direct cross-advection scheme enforces its stability region") {
  // On a 48-cell uniform grid (h ~ 0.146, sigma(v0) = 0.5) the direct scheme
  // is admissible only up to |eta| ~ 1.7; beyond that the imaginary face
  // Peclet number exceeds 1 and the request must be refused. The gauged
  // default has no such bound and must accept the same frequency.
  RateSolveOptions opts;
  opts.dt = 0.5 / 300;
  opts.grid = SpatialGrid::rate_uniform(7.0, 48, 1.0);
  opts.cross_scheme = CrossScheme::Direct;
  CHECK_THROWS_AS(solve_qhat_snapshots(kCir, 0.5, 1.0, 30.0, opts),
                  StabilityError);

  opts.cross_scheme = CrossScheme::Auto;
  const RateSolveResult gauged = solve_qhat_snapshots(kCir, 0.5, 1.0, 30.0, opts);
  CHECK(std::abs(gauged.final_field.mass) <= 1.0 + 1e-6);
}

TEST_CASE("dx/dt halving shows near second-order convergence") {
  cplx vals[3];
  for (int lev = 0; lev < 3; ++lev) {
    const SpatialGrid grid =
        SpatialGrid::rate_anchored(7.0, 0.035 / (1 << lev), 1.0);
    const PDEField f =
        solve_qhat(kCir, 1.0, 1.0, 1.0, grid, 1.0 / (250 << lev));
    vals[lev] = f.mass;
  }
  const double d1 = std::abs(vals[0] - vals[1]);
  const double d2 = std::abs(vals[1] - vals[2]);
  CHECK(d1 / d2 >= 3.5);
}
