#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "tcl/errors.hpp"
#include "tcl/levy.hpp"
#include "tcl/quadrature.hpp"
#include "tcl/subordinator.hpp"

using namespace tcl;

namespace {

// Composite GL quadrature of fn over [lo, hi] with n_panels uniform panels.
template <typename F>
double integrate(F fn, double lo, double hi, int n_panels, int order = 12) {
  std::vector<double> edges;
  for (int k = 0; k <= n_panels; ++k)
    edges.push_back(lo + (hi - lo) * k / n_panels);
  PanelRule rule = panels(edges, order);
  std::vector<double> vals(rule.size());
  for (std::size_t k = 0; k < rule.size(); ++k)
    vals[k] = rule.w[k] * fn(rule.x[k]);
  return pairwise_sum(vals);
}

bool close(cplx a, cplx b, double tol) { return std::abs(a - b) < tol; }

}  // namespace

TEST_CASE("gamma clock density normalizes and has unit mean") {
  auto spec = SubordinatorSpec::gamma_clock(0.2);
  for (double y : {0.5, 1.0, 2.0}) {
    const double j_hi = y + 14.0 * std::sqrt(0.2 * y) + 6.0 * 0.2;
    const double mass = integrate(
        [&](double j) { return subordinator_density(spec, y, j); }, 1e-12, j_hi,
        400);
    const double mean = integrate(
        [&](double j) { return j * subordinator_density(spec, y, j); }, 1e-12,
        j_hi, 400);
    CHECK(std::abs(mass - 1.0) < 1e-8);
    CHECK(std::abs(mean - y) < 1e-6);
  }
}

TEST_CASE("inverse gaussian density matches the frozen closed form") {
  auto spec = SubordinatorSpec::inverse_gaussian(2.0);
  CHECK(std::abs(subordinator_density(spec, 1.0, 1.0) - 0.56418958354775629) <
        1e-13);
  const double j_hi = 1.0 + 14.0 * std::sqrt(0.5) + 3.0;
  const double mass = integrate(
      [&](double j) { return subordinator_density(spec, 1.0, j); }, 1e-12, j_hi,
      600);
  const double mean = integrate(
      [&](double j) { return j * subordinator_density(spec, 1.0, j); }, 1e-12,
      j_hi, 600);
  CHECK(std::abs(mass - 1.0) < 1e-7);
  CHECK(std::abs(mean - 1.0) < 1e-6);
}

TEST_CASE("drifted gamma clock keeps unit mean and truncated support") {
  auto spec = SubordinatorSpec::gamma_clock(0.2, 0.1);
  const double y = 1.5;
  CHECK(subordinator_density(spec, y, 0.5 * spec.drift * y) == 0.0);
  const double lo = spec.drift * y + 1e-12;
  const double j_hi = y + 14.0 * std::sqrt(0.2 * y) + 1.2;
  const double mass = integrate(
      [&](double j) { return subordinator_density(spec, y, j); }, lo, j_hi, 500);
  const double mean = integrate(
      [&](double j) { return j * subordinator_density(spec, y, j); }, lo, j_hi,
      500);
  CHECK(std::abs(mass - 1.0) < 1e-8);
  CHECK(std::abs(mean - y) < 1e-6);
}

TEST_CASE("laplace transform closed forms and strip handling") {
  auto gamma = SubordinatorSpec::gamma_clock(0.2);
  auto ig = SubordinatorSpec::inverse_gaussian(2.0);
  auto ident = SubordinatorSpec::identity();

  CHECK(close(subordinator_laplace(gamma, 0.0, 1.0), 1.0, 1e-15));
  CHECK(close(subordinator_laplace(ig, 0.0, 1.0), 1.0, 1e-15));
  CHECK(close(subordinator_laplace(ident, 0.0, 1.0), 1.0, 1e-15));

  CHECK(close(subordinator_laplace(gamma, 1.0, 1.0), 0.40187757201646091,
              1e-14));
  CHECK(close(subordinator_laplace(ident, 2.0, 0.5), std::exp(-1.0), 1e-14));

  // Inside the analytic strip negative arguments are fine; beyond it they
  // must throw.
  CHECK(close(subordinator_laplace(gamma, -4.0, 1.0), 3125.0, 1e-9));
  CHECK_THROWS_AS(subordinator_laplace(gamma, -6.0, 1.0), EngineError);
  CHECK_THROWS_AS(subordinator_laplace(ig, -1.5, 1.0), EngineError);

  // Laplace transform against direct quadrature of the density.
  for (double r : {0.5, 2.0}) {
    const double direct = integrate(
        [&](double j) {
          return std::exp(-r * j) * subordinator_density(ig, 1.0, j);
        },
        1e-12, 14.0, 600);
    CHECK(std::abs(subordinator_laplace(ig, r, 1.0).real() - direct) < 1e-7);
  }
}

TEST_CASE("laplace on the imaginary axis is a bounded characteristic function") {
  for (auto spec : {SubordinatorSpec::gamma_clock(0.2),
                    SubordinatorSpec::inverse_gaussian(2.0),
                    SubordinatorSpec::gamma_clock(0.3, 0.1)}) {
    for (double u : {-3.0, -1.0, 0.7, 2.0, 10.0})
      for (double t : {0.5, 2.0})
        CHECK(std::abs(subordinator_laplace(spec, cplx(0.0, u), t)) <=
              1.0 + 1e-12);
  }
}

TEST_CASE("laplace cumulant rate reproduces the transform") {
  auto gamma = SubordinatorSpec::gamma_clock(0.2, 0.1);
  auto ig = SubordinatorSpec::inverse_gaussian(2.0);
  for (double r : {-0.4, 0.3, 1.0, 2.5}) {
    CHECK(std::abs(std::exp(-1.7 * laplace_cumulant(gamma, r)) -
                   subordinator_laplace(gamma, r, 1.7).real()) < 1e-12);
    CHECK(std::abs(std::exp(-0.8 * laplace_cumulant(ig, r)) -
                   subordinator_laplace(ig, r, 0.8).real()) < 1e-12);
  }
  CHECK_THROWS_AS(laplace_cumulant(gamma, -6.0), EngineError);
  CHECK(laplace_cumulant(SubordinatorSpec::identity(), 1.3) ==
        doctest::Approx(1.3));
}

TEST_CASE("fourier-in-y of the gamma density matches frozen references") {
  auto spec = SubordinatorSpec::gamma_clock(0.2);
  struct Anchor {
    double xi, j;
    cplx value;
  };
  const Anchor anchors[] = {
      {2.0, 1.0, {-0.47205729121375184, 0.48081767263722666}},
      {0.0, 0.5, {1.0026502676526934, 0.0}},
      {0.0, 1.0, {1.0000943037190176, 0.0}},
      {0.0, 2.0, {1.0000002647607695, 0.0}},
      {5.0, 0.8, {-0.053656965202507791, -0.14963876295002123}},
      {1.0, 3.0, {-0.74101040368376195, -0.028503901738321271}},
  };
  for (const auto& a : anchors) {
    const cplx got = fourier_in_y_of_density(spec, a.xi, a.j);
    CHECK(close(got, a.value, 5e-9));
  }
}

TEST_CASE("fourier-in-y of the inverse gaussian density matches the frozen reference") {
  auto spec = SubordinatorSpec::inverse_gaussian(2.0);
  const cplx got = fourier_in_y_of_density(spec, 1.0, 1.0);
  CHECK(close(got, cplx(0.11323333776290351, 0.85314802897413777), 5e-9));
}

TEST_CASE("fourier-in-y structural properties") {
  auto spec = SubordinatorSpec::gamma_clock(0.2);
  // xi = 0 equals the table mass, real and nonnegative.
  FourierYTable table = make_fourier_y_table(spec, 1.0);
  const cplx at0 = table.eval(0.0);
  CHECK(at0.imag() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(at0.real() == doctest::Approx(table.mass));
  CHECK(table.mass > 0.0);
  // Conjugate symmetry and agreement between table reuse and one-shot calls.
  for (double xi : {0.7, 2.0, 13.0}) {
    const cplx plus = fourier_in_y_of_density(spec, xi, 1.0);
    const cplx minus = fourier_in_y_of_density(spec, -xi, 1.0);
    CHECK(close(minus, std::conj(plus), 1e-12));
    CHECK(close(table.eval(xi), plus, 1e-12));
  }
  // Identity clock: pure phase.
  auto ident = SubordinatorSpec::identity();
  CHECK(close(fourier_in_y_of_density(ident, 1.3, 0.7),
              std::exp(cplx(0.0, 1.3 * 0.7)), 1e-15));
}

TEST_CASE("cdf agrees with density quadrature") {
  auto gamma = SubordinatorSpec::gamma_clock(0.2);
  auto drifted = SubordinatorSpec::gamma_clock(0.2, 0.1);
  auto ig = SubordinatorSpec::inverse_gaussian(2.0);
  const double q_gamma = integrate(
      [&](double j) { return subordinator_density(gamma, 1.0, j); }, 1e-12, 1.0,
      300);
  CHECK(std::abs(subordinator_cdf(gamma, 1.0, 1.0) - q_gamma) < 1e-8);
  const double q_drift = integrate(
      [&](double j) { return subordinator_density(drifted, 1.0, j); },
      0.1 + 1e-12, 0.9, 300);
  CHECK(std::abs(subordinator_cdf(drifted, 1.0, 0.9) - q_drift) < 1e-8);
  const double q_ig = integrate(
      [&](double j) { return subordinator_density(ig, 1.0, j); }, 1e-12, 0.7,
      300);
  CHECK(std::abs(subordinator_cdf(ig, 1.0, 0.7) - q_ig) < 1e-8);
  CHECK(subordinator_cdf(SubordinatorSpec::identity(), 1.0, 0.5) == 0.0);
  CHECK(subordinator_cdf(SubordinatorSpec::identity(), 1.0, 1.5) == 1.0);
}

TEST_CASE("inverse clock characteristic function") {
  // Frozen reference for the drifted gamma clock.
  auto drifted = SubordinatorSpec::gamma_clock(0.2, 0.1);
  const cplx got = inverse_clock_cf(drifted, 1.2, 0.8);
  CHECK(close(got, cplx(0.44134278071139871, 0.79169954926731422), 5e-8));
  // chi(0, F_j) = 1 and conjugate symmetry.
  CHECK(close(inverse_clock_cf(drifted, 0.0, 0.8), 1.0, 1e-14));
  CHECK(close(inverse_clock_cf(drifted, -1.2, 0.8), std::conj(got), 1e-12));
  // Identity clock: deterministic inverse.
  CHECK(close(inverse_clock_cf(SubordinatorSpec::identity(), 2.0, 0.3),
              std::exp(cplx(0.0, 0.6)), 1e-15));
  // Driftless gamma paths are not treated as strictly increasing.
  CHECK_THROWS_AS(inverse_clock_cf(SubordinatorSpec::gamma_clock(0.2), 1.0, 1.0),
                  EngineError);
}

TEST_CASE("error taxonomy") {
  auto ident = SubordinatorSpec::identity();
  auto gamma = SubordinatorSpec::gamma_clock(0.2);
  CHECK_THROWS_WITH_AS(subordinator_density(ident, 1.0, 1.0),
                       doctest::Contains("AtomicLaw"), EngineError);
  CHECK_THROWS_AS(subordinator_density(gamma, -1.0, 1.0), EngineError);
  CHECK_THROWS_AS(subordinator_density(gamma, 1.0, 0.0), EngineError);
  CHECK_THROWS_AS(fourier_in_y_of_density(gamma, 1.0, -0.5), EngineError);
  CHECK_THROWS_AS(SubordinatorSpec::gamma_clock(-0.2), EngineError);
  CHECK_THROWS_AS(SubordinatorSpec::gamma_clock(0.2, 1.0), EngineError);
  CHECK_THROWS_AS(SubordinatorSpec::gamma_clock(0.2, -0.1), EngineError);
  CHECK_THROWS_AS(SubordinatorSpec::inverse_gaussian(0.0), EngineError);
  CHECK_THROWS_AS(subordinator_laplace(gamma, 1.0, -0.1), EngineError);
}

TEST_CASE("levy composition validation") {
  LevyComposition levy;
  levy.rho = 0.5;
  levy.validate();
  CHECK(levy.orthogonal_loading() == doctest::Approx(std::sqrt(0.75)));
  levy.rho = 1.2;
  CHECK_THROWS_AS(levy.validate(), EngineError);
}
