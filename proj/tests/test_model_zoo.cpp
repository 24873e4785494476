#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "tcl/activity.hpp"
#include "tcl/errors.hpp"
#include "tcl/levy.hpp"
#include "tcl/model_zoo.hpp"
#include "tcl/quadrature.hpp"
#include "tcl/subordinator.hpp"
#include "tcl/transforms.hpp"

using namespace tcl;

namespace {

double rel_err(double got, double want) {
  return std::abs(got - want) / std::abs(want);
}

// log E[e^{w T_t}] straight from the affine exponent, as an independent
// reference for the closed-form branches.
double log_mgf(const ActivityModel& clock, double t, double w) {
  if (clock.kind == ActivityKind::DeterministicUnit)
    return w * (1.0 + clock.eps_floor) * t;
  return conditional_exponent_general(clock, t, cplx(w, 0.0))
      .value(clock.v0, 0.0)
      .real();
}

}  // namespace

TEST_CASE("variant builder enforces each tag's pins") {
  // SV1 pins the jump clock to the deterministic unit rate.
  {
    TwoFactorParams p;
    p.kappa_j = 2.0;
    CHECK_THROWS_WITH_AS(build_sv_variant(SVVariant::SV1, p),
                         doctest::Contains("kappa_j"), ConfigError);
  }
  {
    TwoFactorParams p;
    p.sigma_j = 0.4;
    CHECK_THROWS_WITH_AS(build_sv_variant(SVVariant::SV1, p),
                         doctest::Contains("sigma_j"), ConfigError);
  }
  {
    TwoFactorParams p;
    p.v0_j = 1.3;
    CHECK_THROWS_WITH_AS(build_sv_variant(SVVariant::SV1, p),
                         doctest::Contains("v0_j"), ConfigError);
  }
  // SV4 pins only the clock coupling.
  {
    TwoFactorParams p;
    p.rho = 0.3;
    CHECK_THROWS_WITH_AS(build_sv_variant(SVVariant::SV4, p),
                         doctest::Contains("rho"), ConfigError);
  }
  // SV2 pins the continuous clock and the driver loading.
  {
    TwoFactorParams p;
    p.a_c2 = 0.1;
    CHECK_THROWS_WITH_AS(build_sv_variant(SVVariant::SV2, p),
                         doctest::Contains("a_c2"), ConfigError);
  }
  {
    TwoFactorParams p;
    p.kappa_c = 1.0;
    CHECK_THROWS_AS(build_sv_variant(SVVariant::SV2, p), ConfigError);
  }
  // SV3 pins the floor and forces the clocks equal.
  {
    TwoFactorParams p;
    p.eps_floor = 0.5;
    CHECK_THROWS_AS(build_sv_variant(SVVariant::SV3, p), ConfigError);
  }
  {
    TwoFactorParams p;
    p.kappa_c = 2.0;
    p.kappa_j = 3.0;
    CHECK_THROWS_WITH_AS(build_sv_variant(SVVariant::SV3, p),
                         doctest::Contains("kappa"), ConfigError);
  }
  // Restating the exact pin value is not a contradiction.
  {
    TwoFactorParams p;
    p.rho = 0.0;
    CHECK_NOTHROW(build_sv_variant(SVVariant::SV4, p));
  }
}

TEST_CASE("variant builder populates the pinned structure") {
  // SV1: deterministic jump clock, stochastic continuous clock.
  {
    const TwoFactorModel m = build_sv_variant(SVVariant::SV1, {});
    CHECK(m.rho == 0.0);
    CHECK(m.clock_j.kind == ActivityKind::DeterministicUnit);
    CHECK(m.clock_j.eps_floor == 0.0);
    CHECK(m.clock_c.kind == ActivityKind::CIR);
    CHECK(m.clock_c.kappa == 1.0);
    CHECK(m.clock_c.sigma_v == 0.5);
    CHECK(m.clock_c.v0 == 1.0);
  }
  // SV2: deterministic continuous clock (floor allowed), a_c2 = 0.
  {
    TwoFactorParams p;
    p.eps_floor = 0.25;
    const TwoFactorModel m = build_sv_variant(SVVariant::SV2, p);
    CHECK(m.rho == 0.0);
    CHECK(m.a_c[1] == 0.0);
    CHECK(m.clock_c.kind == ActivityKind::DeterministicUnit);
    CHECK(m.clock_c.eps_floor == 0.25);
    CHECK(m.clock_j.kind == ActivityKind::CIR);
  }
  // SV3: one shared clock on both sides, a parameter set on either side
  // lands on both.
  {
    TwoFactorParams p;
    p.kappa_j = 2.0;
    const TwoFactorModel m = build_sv_variant(SVVariant::SV3, p);
    CHECK(m.rho == 1.0);
    CHECK(m.a_c[1] == 0.0);
    CHECK(m.clock_c.kappa == 2.0);
    CHECK(m.clock_j.kappa == 2.0);
    CHECK(m.clock_c.sigma_v == m.clock_j.sigma_v);
    CHECK(m.clock_c.v0 == m.clock_j.v0);
    CHECK(m.shared_clock());
  }
  // SV4: two free clocks.
  {
    TwoFactorParams p;
    p.kappa_j = 1.5;
    p.sigma_j = 0.4;
    const TwoFactorModel m = build_sv_variant(SVVariant::SV4, p);
    CHECK(m.clock_c.kappa == 1.0);
    CHECK(m.clock_j.kappa == 1.5);
    CHECK(m.clock_j.sigma_v == 0.4);
    CHECK_FALSE(m.shared_clock());
  }
  // Mixed zero/nonzero rate parameters cannot form a clock.
  {
    TwoFactorParams p;
    p.kappa_c = 0.0;
    p.sigma_c = 0.5;
    CHECK_THROWS_AS(build_sv_variant(SVVariant::SV4, p), ConfigError);
  }
}

TEST_CASE("model validation guards the structural invariants") {
  TwoFactorModel m = build_sv_variant(SVVariant::SV4, {});
  m.rho = 1.5;
  CHECK_THROWS_WITH_AS(m.validate(), doctest::Contains("rho"), ConfigError);
  m.rho = 0.0;
  m.clock_j.eps_floor = 0.1;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m.clock_j.eps_floor = 0.0;
  m.clock_c.eps_floor = 0.1;
  m.a_c[3] = 0.0;
  CHECK_THROWS_WITH_AS(m.validate(), doctest::Contains("a_c4"), ConfigError);
  m.a_c[3] = 0.4;
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("driver decomposition reproduces the Gaussian split") {
  TwoFactorModel m = build_sv_variant(SVVariant::SV4, {});
  m.a_c = {0.05, 0.3, -0.2, 0.4};
  m.a_j = {-0.1, 0.5};
  // rho = 0: the driver loading is a_c2 and a_c3 is fully orthogonal.
  {
    const Sv14Decomposition d = sv14_decomposition(m, 1.0);
    CHECK(d.driver_beta == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(d.orthogonal == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(d.alpha_eff ==
          doctest::Approx(0.05 - 0.5 * (0.16 + 0.04)).epsilon(1e-12));
    CHECK(d.jump_theta == doctest::Approx(-0.1 - 0.125).epsilon(1e-12));
  }
  // General rho: the split preserves the total Gaussian variance.
  {
    m.rho = 0.5;
    const Sv14Decomposition d = sv14_decomposition(m, 0.7);
    const double c = std::sqrt(0.75);
    CHECK(d.driver_beta == doctest::Approx(0.3 * c + 0.5 * -0.2));
    CHECK(d.orthogonal == doctest::Approx(std::abs(0.5 * 0.3 - c * -0.2)));
    CHECK(d.driver_beta * d.driver_beta + d.orthogonal * d.orthogonal ==
          doctest::Approx(0.3 * 0.3 + 0.2 * 0.2).epsilon(1e-12));
    m.rho = 0.0;
  }
}

TEST_CASE("conditional jump factor matches the subordinator transform") {
  TwoFactorModel m = build_sv_variant(SVVariant::SV1, {});
  m.a_j = {1.0, 0.0};
  // Gamma clock with nu = 0.2: E e^{-J_1} = 1.2^{-5}.
  CHECK(jump_part_conditional_laplace(m, 1.0, 1.0) ==
        doctest::Approx(std::pow(1.2, -5.0)).epsilon(1e-12));
  CHECK(jump_part_conditional_laplace(m, 0.0, 1.0) == 1.0);
  CHECK(jump_part_conditional_laplace(m, 1.0, 0.0) == 1.0);
  CHECK_THROWS_AS(jump_part_conditional_laplace(m, 1.0, -0.5), DomainError);
  // The diffusive jump loading enters through the usual variance reduction.
  m.a_j = {1.0, 0.5};
  const double theta = 1.0 - 0.5 * 0.25;
  CHECK(jump_part_conditional_laplace(m, 1.0, 2.0) ==
        doctest::Approx(
            subordinator_laplace(SubordinatorSpec::gamma_clock(0.2),
                                 cplx(theta, 0.0), 2.0)
                .real())
            .epsilon(1e-12));
}

TEST_CASE("jump factor expectation closes through the affine exponent") {
  // Deterministic jump clock: the factor is evaluated at t.
  {
    const TwoFactorModel m = build_sv_variant(SVVariant::SV1, {});
    CHECK(jump_factor_expectation(m, 1.0, 1.0) ==
          doctest::Approx(jump_part_conditional_laplace(m, 1.0, 1.0))
              .epsilon(1e-12));
  }
  // Stochastic jump clock: cross-check the closed form against quadrature
  // of the conditional factor over the clock density.
  {
    const TwoFactorModel m = build_sv_variant(SVVariant::SV4, {});
    const double t = 1.0, r = 1.0;
    const double closed = jump_factor_expectation(m, t, r);
    const std::size_t n = 481;
    std::vector<double> yg(n);
    for (std::size_t i = 0; i < n; ++i)
      yg[i] = 0.05 + (3.4 - 0.05) * static_cast<double>(i) /
                         static_cast<double>(n - 1);
    const std::vector<double> dens = clock_density_values(m.clock_j, t, yg);
    const double h = yg[1] - yg[0];
    std::vector<double> terms(n), mass(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = (i == 0 || i == n - 1) ? 0.5 * h : h;
      mass[i] = w * dens[i];
      terms[i] = w * dens[i] * jump_part_conditional_laplace(m, r, yg[i]);
    }
    CHECK(pairwise_sum(mass) == doctest::Approx(1.0).epsilon(2e-3));
    CHECK(closed == doctest::Approx(pairwise_sum(terms)).epsilon(1e-3));
    CHECK(jump_factor_expectation(m, 1.0, 0.0) == 1.0);
  }
}

TEST_CASE("independent-clock transform guards its premises") {
  TwoFactorModel m = build_sv_variant(SVVariant::SV4, {});
  CHECK(laplace_Y_sv14(m, 1.0, 0.0) == 1.0);
  // rho != 0 breaks the product structure outright.
  m.rho = 0.5;
  CHECK_THROWS_AS(laplace_Y_sv14(m, 1.0, 1.0), ConfigError);
  m.rho = 0.0;
  // A stochastic jump clock whose driver loads the continuous part is not
  // a product model (default a_c3 = -0.3 with a stochastic jump clock).
  CHECK_THROWS_AS(laplace_Y_sv14(m, 1.0, 1.0), UnsupportedModelError);
  m.a_c[2] = 0.0;
  CHECK_NOTHROW(laplace_Y_sv14(m, 1.0, 1.0));
}

TEST_CASE("a loadings-free jump part reduces the product to the continuous "
          "factor") {
  TwoFactorParams p;
  p.a_j1 = 0.0;
  p.a_j2 = 0.0;
  p.a_c2 = 0.3;
  const TwoFactorModel m = build_sv_variant(SVVariant::SV1, p);
  const double t = 1.0, r = 0.8;
  const Sv14Decomposition d = sv14_decomposition(m, r);
  LevyComposition levy;
  levy.alpha = d.alpha_eff;
  levy.beta = d.driver_beta;
  levy.rho = 1.0;
  const double direct =
      laplace_Y(m.clock_c, levy, SubordinatorSpec::identity(), t, r);
  const double assembled = laplace_Y_sv14(m, t, r);
  CHECK(rel_err(assembled, direct) < 1e-3);
  // With jump loadings restored, the jump factor multiplies in exactly.
  TwoFactorModel full = m;
  full.a_j = {-0.1, 0.5};
  CHECK(laplace_Y_sv14(full, t, r) ==
        doctest::Approx(assembled * jump_factor_expectation(full, t, r))
            .epsilon(1e-12));
}

TEST_CASE("jump-side assembly agrees with the product machinery wherever "
          "both apply") {
  const double t = 1.0;
  // SV2 with no cross loading: both routes close through the same affine
  // exponents.
  {
    TwoFactorParams p;
    p.a_c3 = 0.0;
    const TwoFactorModel m = build_sv_variant(SVVariant::SV2, p);
    for (double r : {0.5, 1.0}) {
      const double via_sv2 = laplace_Y_sv2(m, t, r);
      const double via_sv14 = laplace_Y_sv14(m, t, r);
      CHECK(rel_err(via_sv2, via_sv14) < 1e-6);
    }
  }
  // SV2 with a cross loading but a deterministic jump clock: the driver
  // decouples and both routes stay defined.
  {
    TwoFactorParams p;
    p.kappa_j = 0.0;
    p.sigma_j = 0.0;
    p.eps_floor = 0.25;
    const TwoFactorModel m = build_sv_variant(SVVariant::SV2, p);
    for (double r : {0.5, 1.0}) {
      const double via_sv2 = laplace_Y_sv2(m, t, r);
      const double via_sv14 = laplace_Y_sv14(m, t, r);
      CHECK(rel_err(via_sv2, via_sv14) < 1e-6);
    }
  }
  // Same comparison on a stochastic continuous clock (a jump-side shape the
  // variant tags do not reach, but both assemblies support).
  {
    TwoFactorModel m = build_sv_variant(SVVariant::SV4, {});
    m.clock_j = ActivityModel::deterministic_unit(0.0);
    for (double r : {0.5, 1.0}) {
      const double via_sv2 = laplace_Y_sv2(m, t, r);
      const double via_sv14 = laplace_Y_sv14(m, t, r);
      CHECK(rel_err(via_sv2, via_sv14) < 1e-6);
    }
  }
}

TEST_CASE("jump-side assembly composes the closed kernel with the clock "
          "density") {
  // Stochastic continuous clock, deterministic jump clock: the engine closes
  // the outer average analytically; quadrature against the clock density
  // must land on the same value.
  TwoFactorModel m = build_sv_variant(SVVariant::SV4, {});
  m.clock_j = ActivityModel::deterministic_unit(0.0);
  const double t = 1.0, r = 1.0;
  const double closed = laplace_Y_sv2(m, t, r);
  const double a3 = m.a_c[2];
  const double alpha_c = m.a_c[0] - 0.5 * r * m.a_c[3] * m.a_c[3];
  const double lj = jump_part_conditional_laplace(m, r, t);
  const std::size_t n = 481;
  std::vector<double> yg(n);
  for (std::size_t i = 0; i < n; ++i)
    yg[i] = 0.05 + (3.4 - 0.05) * static_cast<double>(i) /
                       static_cast<double>(n - 1);
  const std::vector<double> dens = clock_density_values(m.clock_c, t, yg);
  const double h = yg[1] - yg[0];
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (i == 0 || i == n - 1) ? 0.5 * h : h;
    terms[i] = w * dens[i] * std::exp(-r * alpha_c * yg[i]) * lj *
               std::exp(0.5 * (r * a3) * (r * a3) * yg[i]);
  }
  CHECK(rel_err(closed, pairwise_sum(terms)) < 1e-3);
}

TEST_CASE("jump-side grid kernel reproduces the Gaussian driver transform") {
  // With both jump loadings zero the subordinator factor is identically one
  // and the grid kernel must integrate the tilted driver Gaussian exactly:
  // F(t, s) = e^{(r a3)^2 s / 2}.
  TwoFactorParams p;
  p.a_j1 = 0.0;
  p.a_j2 = 0.0;
  const TwoFactorModel m = build_sv_variant(SVVariant::SV2, p);
  const double t = 1.0, r = 1.0;
  const double s = t;  // deterministic continuous clock, zero floor
  const double a3 = m.a_c[2];
  const double alpha_c = m.a_c[0] - 0.5 * r * m.a_c[3] * m.a_c[3];
  const double want =
      std::exp(-r * alpha_c * s) * std::exp(0.5 * (r * a3) * (r * a3) * s);
  const double got = laplace_Y_sv2(m, t, r);
  CHECK(rel_err(got, want) < 2e-3);
}

TEST_CASE("shared-clock transform guards its premises and closed forms") {
  // Shape guards.
  {
    const TwoFactorModel m = build_sv_variant(SVVariant::SV4, {});
    CHECK_THROWS_WITH_AS(laplace_Y_sv3(m, 1.0, 1.0),
                         doctest::Contains("rho"), ConfigError);
  }
  {
    TwoFactorModel m = build_sv_variant(SVVariant::SV3, {});
    m.a_c[1] = 0.2;
    CHECK_THROWS_WITH_AS(laplace_Y_sv3(m, 1.0, 1.0),
                         doctest::Contains("a_c2"), ConfigError);
    m.a_c[1] = 0.0;
    m.clock_j = ActivityModel::cir(2.0, 0.5, 1.0);
    CHECK_THROWS_AS(laplace_Y_sv3(m, 1.0, 1.0), ConfigError);
  }
  {
    const TwoFactorModel m = build_sv_variant(SVVariant::SV3, {});
    CHECK(laplace_Y_sv3(m, 1.0, 0.0) == 1.0);
  }
  // Deterministic shared clock: closed Gaussian-times-subordinator form,
  // and the value coincides with the product machinery on the twin model
  // with two separate deterministic clocks.
  {
    TwoFactorParams p;
    p.kappa_c = 0.0;
    p.sigma_c = 0.0;
    const TwoFactorModel sv3 = build_sv_variant(SVVariant::SV3, p);
    const double t = 1.0, r = 1.0;
    const double alpha_c = sv3.a_c[0] - 0.5 * r * sv3.a_c[3] * sv3.a_c[3];
    const double want =
        std::exp(-r * alpha_c * t) *
        jump_part_conditional_laplace(sv3, r, t) *
        std::exp(0.5 * (r * sv3.a_c[2]) * (r * sv3.a_c[2]) * t);
    CHECK(laplace_Y_sv3(sv3, t, r) == doctest::Approx(want).epsilon(1e-12));
    TwoFactorParams q;
    q.kappa_c = 0.0;
    q.sigma_c = 0.0;
    q.kappa_j = 0.0;
    q.sigma_j = 0.0;
    q.a_c2 = 0.0;
    const TwoFactorModel sv4 = build_sv_variant(SVVariant::SV4, q);
    CHECK(rel_err(laplace_Y_sv3(sv3, t, r), laplace_Y_sv14(sv4, t, r)) <
          1e-6);
  }
  // a_c3 = 0: the closed exponential-moment form against an independent
  // quadrature of the same kernel over the clock density.
  {
    TwoFactorParams p;
    p.a_c3 = 0.0;
    const TwoFactorModel m = build_sv_variant(SVVariant::SV3, p);
    const double t = 1.0, r = 1.0;
    const double closed = laplace_Y_sv3(m, t, r);
    const double alpha_c = m.a_c[0] - 0.5 * r * m.a_c[3] * m.a_c[3];
    const double psi =
        laplace_cumulant(m.spec, r * m.a_j[0] -
                                     0.5 * r * r * m.a_j[1] * m.a_j[1]);
    CHECK(closed ==
          doctest::Approx(std::exp(log_mgf(m.clock_j, t, -r * alpha_c - psi)))
              .epsilon(1e-12));
    const std::size_t n = 481;
    std::vector<double> yg(n);
    for (std::size_t i = 0; i < n; ++i)
      yg[i] = 0.05 + (3.4 - 0.05) * static_cast<double>(i) /
                         static_cast<double>(n - 1);
    const std::vector<double> dens = clock_density_values(m.clock_j, t, yg);
    const double h = yg[1] - yg[0];
    std::vector<double> terms(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = (i == 0 || i == n - 1) ? 0.5 * h : h;
      terms[i] = w * dens[i] * std::exp(-r * alpha_c * yg[i]) *
                 jump_part_conditional_laplace(m, r, yg[i]);
    }
    CHECK(rel_err(closed, pairwise_sum(terms)) < 1e-3);
  }
}

TEST_CASE("shared-clock grid assembly degenerates to the closed form as the "
          "cross loading vanishes") {
  // A tiny a_c3 keeps the diagonal-grid path active while the value stays
  // within O(a_c3) of the closed a_c3 = 0 form, so the grid machinery is
  // checked against an analytic target.
  TwoFactorParams p;
  p.a_c3 = 1e-4;
  const TwoFactorModel tiny = build_sv_variant(SVVariant::SV3, p);
  TwoFactorParams q;
  q.a_c3 = 0.0;
  const TwoFactorModel flat = build_sv_variant(SVVariant::SV3, q);
  const double t = 1.0, r = 1.0;
  const double grid = laplace_Y_sv3(tiny, t, r);
  const double closed = laplace_Y_sv3(flat, t, r);
  CHECK(rel_err(grid, closed) < 2e-3);
}

TEST_CASE("shared-clock transform reproduces the reference values") {
  // Reference configuration: shared CIR clock (kappa 1, sigma 0.5, v0 1),
  // gamma subordinator nu = 0.2, loadings a_c = (0.05, 0, -0.3, 0.4),
  // a_j = (-0.1, 0.5), t = 1. Values pinned against a 10^6-path Monte Carlo
  // estimate of E e^{-r Y_t} (standard error well under the tolerance).
  const TwoFactorModel m = build_sv_variant(SVVariant::SV3, {});
  CHECK(rel_err(laplace_Y_sv3(m, 1.0, 0.5), 1.0992) < 2e-3);
  CHECK(rel_err(laplace_Y_sv3(m, 1.0, 1.0), 1.3916) < 2e-3);
}
