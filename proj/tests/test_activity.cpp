#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "tcl/activity.hpp"
#include "tcl/errors.hpp"

using namespace tcl;

namespace {

cplx cf_value(const ActivityModel& model, double t, double xi) {
  const AffineExponent e = conditional_cf_exponent(model, t, 0.0, xi);
  return std::exp(e.value(model.v0, 0.0));
}

cplx phi_at(const ActivityModel& model, double t, double xi) {
  const AffineExponent e = conditional_cf_exponent(model, t, 0.0, xi);
  return e.value(model.v0, 0.0);
}

struct McCf {
  cplx value;
  double stderr_re, stderr_im;
};

McCf mc_cf(const std::vector<double>& samples, double xi) {
  double sum_c = 0.0, sum_s = 0.0, sum_c2 = 0.0, sum_s2 = 0.0;
  for (double t : samples) {
    const double c = std::cos(xi * t), s = std::sin(xi * t);
    sum_c += c;
    sum_s += s;
    sum_c2 += c * c;
    sum_s2 += s * s;
  }
  const double n = static_cast<double>(samples.size());
  const double mc = sum_c / n, ms = sum_s / n;
  return {cplx(mc, ms), std::sqrt((sum_c2 / n - mc * mc) / n),
          std::sqrt((sum_s2 / n - ms * ms) / n)};
}

}  // namespace

TEST_CASE("riccati characteristic function matches the frozen table") {
  auto model = ActivityModel::cir(1.0, 0.5);
  struct Anchor {
    double xi, t;
    cplx value;
  };
  const Anchor anchors[] = {
      {0.5, 0.5, {0.9680321862032675, 0.2471746084123445}},
      {1.0, 0.5, {0.874411117702702, 0.4776525445983097}},
      {2.0, 0.5, {0.5327312884593236, 0.8291603933554393}},
      {4.0, 0.5, {-0.3906846993731923, 0.8588202371851409}},
      {0.5, 1.0, {0.873024739240748, 0.476843517142678}},
      {1.0, 1.0, {0.5296144179877782, 0.8236488685919503}},
      {2.0, 1.0, {-0.3783967877086767, 0.838253446744852}},
      {4.0, 1.0, {-0.4913667784478869, -0.5240040130658492}},
      {0.5, 2.0, {0.5283974562428887, 0.8212166317743437}},
      {1.0, 2.0, {-0.3723669072588961, 0.8301185787121703}},
      {2.0, 2.0, {-0.4813224044288286, -0.4951191931979739}},
      {4.0, 2.0, {0.07125932756962439, 0.2436166034737961}},
  };
  for (const auto& a : anchors)
    CHECK(std::abs(cf_value(model, a.t, a.xi) - a.value) < 2e-8);
}

TEST_CASE("exponent degenerate and structural identities") {
  auto model = ActivityModel::cir(1.0, 0.5);
  // s = t: phi = 0, psi = xi.
  const AffineExponent at_t = conditional_cf_exponent(model, 1.0, 1.0, 2.0);
  CHECK(std::abs(at_t.constant) == 0.0);
  CHECK(std::abs(at_t.x_coeff) == 0.0);
  CHECK(at_t.y_coeff == 2.0);
  CHECK(at_t.value(1.3, 0.7) == cplx(0.0, 1.4));
  // xi = 0: E[1] = 1.
  const AffineExponent at_0 = conditional_cf_exponent(model, 1.0, 0.0, 0.0);
  CHECK(std::abs(at_0.constant) == 0.0);
  CHECK(std::abs(at_0.x_coeff) == 0.0);
  // Vanishing volatility: clock becomes deterministic, Phi -> i xi tau.
  auto stiff = ActivityModel::cir(1.0, 1e-7);
  CHECK(std::abs(cf_value(stiff, 0.8, 1.5) - std::exp(cplx(0.0, 1.5 * 0.8))) <
        1e-8);
  // DeterministicUnit with a floor adds (1 + eps) tau.
  auto det = ActivityModel::deterministic_unit(0.25);
  const AffineExponent de = conditional_cf_exponent(det, 2.0, 0.5, 1.2);
  CHECK(std::abs(de.constant - cplx(0.0, 1.2 * 1.25 * 1.5)) < 1e-15);
  CHECK(std::abs(de.x_coeff) == 0.0);
  // Non-affine model refuses.
  auto ln = ActivityModel::lognormal_mean_reverting(1.0, 0.3);
  CHECK_THROWS_WITH_AS(conditional_cf_exponent(ln, 1.0, 0.0, 1.0),
                       doctest::Contains("UnsupportedModel"), EngineError);
  CHECK_THROWS_AS(conditional_cf_exponent(model, 1.0, 2.0, 1.0), EngineError);
}

TEST_CASE("riccati first two clock moments") {
  auto model = ActivityModel::cir(1.0, 0.5);
  const double h = 1e-4;
  for (double t : {0.5, 1.0, 2.0}) {
    const cplx dphi =
        (phi_at(model, t, h) - phi_at(model, t, -h)) / (2.0 * h);
    // -i * dPhi/dxi at 0 = E T_t = t.
    CHECK(std::abs((dphi / cplx(0.0, 1.0)).real() - t) < 1e-6);
    CHECK(std::abs(dphi.real()) < 1e-8);
  }
  // With a rate floor the mean scales to (1 + eps) t.
  auto floored = ActivityModel::cir(1.0, 0.5, 1.0, 0.3);
  const cplx dphi_f =
      (phi_at(floored, 1.0, h) - phi_at(floored, 1.0, -h)) / (2.0 * h);
  CHECK(std::abs((dphi_f / cplx(0.0, 1.0)).real() - 1.3) < 1e-6);

  // Frozen variances: Var T_t = -Phi''(0).
  const double h2 = 1e-3;
  const struct {
    double t, var;
  } vars[] = {{0.5, 0.007280399709886424},
              {1.0, 0.04202281018114459},
              {2.0, 0.1903781867572146}};
  for (const auto& [t, var] : vars) {
    const cplx second =
        (phi_at(model, t, h2) - 2.0 * phi_at(model, t, 0.0) +
         phi_at(model, t, -h2)) /
        (h2 * h2);
    CHECK(std::abs(-second.real() - var) < 1e-7);
  }
}

TEST_CASE("real exponential moments of the clock") {
  auto model = ActivityModel::cir(1.0, 0.5);
  const struct {
    double theta, value;
  } anchors[] = {{0.1265890399214495, 1.135334211688862},
                 {0.5268025782891314, 1.703577391785106},
                 {2.554128118829953, 14.92478897292359}};
  for (const auto& [theta, value] : anchors) {
    const AffineExponent e = conditional_exponent_general(model, 1.0, theta);
    const cplx got = std::exp(e.value(1.0, 0.0));
    CHECK(std::abs(got.imag()) < 1e-12);
    CHECK(std::abs(got.real() - value) < 1e-8 * value);
  }
}

TEST_CASE("deterministic clock paths are exact") {
  auto det = ActivityModel::deterministic_unit();
  PathBundle b = simulate_clock(det, 2.0, 0.01, 32, 1234, 8);
  for (std::size_t p = 0; p < b.n_paths; ++p) {
    CHECK(b.T_end[p] == 2.0);
    CHECK(b.v_end[p] == 1.0);
  }
  for (int k = 0; k <= b.n_steps; ++k) CHECK(b.path_at(b.v, 3, k) == 1.0);
}

TEST_CASE("simulated clock matches analytic moments") {
  auto model = ActivityModel::cir(1.0, 0.5);

  // Mean of T_2 within 3 standard errors of 2.
  {
    PathBundle b = simulate_clock(model, 2.0, 1e-3, 100000, 20260816, 4);
    double sum = 0.0, sum2 = 0.0;
    for (double t : b.T_end) {
      sum += t;
      sum2 += t * t;
    }
    const double n = static_cast<double>(b.n_paths);
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    CHECK(std::abs(mean - 2.0) < 3.0 * sd / std::sqrt(n));
  }

  // At t = 1: mean, variance against the Riccati values, and the simulated
  // characteristic function against exp(Phi) at several frequencies.
  {
    PathBundle b = simulate_clock(model, 1.0, 5e-4, 100000, 777, 4);
    const double n = static_cast<double>(b.n_paths);
    double sum = 0.0;
    for (double t : b.T_end) sum += t;
    const double mean = sum / n;
    double m2 = 0.0, m4 = 0.0;
    for (double t : b.T_end) {
      const double d = t - mean;
      m2 += d * d;
      m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    CHECK(std::abs(mean - 1.0) < 3.0 * std::sqrt(m2 / n));
    const double var_ref = 0.04202281018114459;
    const double se_var = std::sqrt((m4 - m2 * m2) / n);
    CHECK(std::abs(m2 - var_ref) < 3.0 * se_var + 1e-4);

    for (double xi : {0.5, 1.0, 2.0, 4.0}) {
      const McCf est = mc_cf(b.T_end, xi);
      const cplx exact = cf_value(model, 1.0, xi);
      CHECK(std::abs(est.value.real() - exact.real()) < 5.0 * est.stderr_re);
      CHECK(std::abs(est.value.imag() - exact.imag()) < 5.0 * est.stderr_im);
    }
  }
}

TEST_CASE("full truncation keeps reported rates nonnegative") {
  auto rough = ActivityModel::cir(0.5, 1.5);  // Feller violated
  CHECK(rough.feller_violated());
  CHECK_FALSE(ActivityModel::cir(1.0, 0.5).feller_violated());
  PathBundle b = simulate_clock(rough, 1.0, 1e-2, 256, 99, 256);
  for (double x : b.v) CHECK(x >= 0.0);
  for (double x : b.v_end) CHECK(x >= 0.0);
  for (std::size_t p = 0; p < b.n_paths; ++p) {
    // T is nondecreasing pathwise.
    for (int k = 0; k < b.n_steps; ++k)
      CHECK(b.path_at(b.T, p, k) <= b.path_at(b.T, p, k + 1));
  }
}

TEST_CASE("clock simulation is bitwise reproducible across worker counts") {
  auto model = ActivityModel::cir(1.0, 0.5);
  PathBundle a = simulate_clock(model, 0.5, 5e-3, 3000, 42, 16, 1);
  PathBundle b = simulate_clock(model, 0.5, 5e-3, 3000, 42, 16, 4);
  REQUIRE(a.T_end.size() == b.T_end.size());
  CHECK(std::memcmp(a.T_end.data(), b.T_end.data(),
                    a.T_end.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(a.B_end.data(), b.B_end.data(),
                    a.B_end.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(a.v.data(), b.v.data(), a.v.size() * sizeof(double)) == 0);
}

TEST_CASE("log-normal rate: euler against the exact path solution") {
  // Degenerate volatility: with sigma_v = 0 (zero Brownian path or not) the
  // exact solution collapses to the constant 1 for v0 = 1.
  {
    std::vector<double> zero(101, 0.0);
    const std::vector<double> v =
        closed_form_lognormal_path(zero, 0.01, 1.0, 0.0);
    for (double x : v) CHECK(std::abs(x - 1.0) < 1e-12);
  }
  // Seeded Euler path against the closed form at fine dt.
  auto ln = ActivityModel::lognormal_mean_reverting(1.0, 0.3);
  PathBundle b = simulate_clock(ln, 1.0, 1e-4, 1, 2024, 1);
  std::vector<double> B_path(b.n_steps + 1);
  for (int k = 0; k <= b.n_steps; ++k) B_path[k] = b.path_at(b.B, 0, k);
  const std::vector<double> exact =
      closed_form_lognormal_path(B_path, b.dt, 1.0, 0.3);
  double max_err = 0.0;
  for (int k = 0; k <= b.n_steps; ++k)
    max_err = std::max(max_err, std::abs(exact[k] - b.path_at(b.v, 0, k)));
  CHECK(max_err < 5e-3);
}

TEST_CASE("measure-changed drift switches off after the threshold") {
  auto model = ActivityModel::cir(1.0, 0.5);
  auto drift = measure_changed_drift(model, 1.0, -0.5, 0.4);
  CHECK(drift(0.2, 1.0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(drift(0.6, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  auto no_tilt = measure_changed_drift(model, 0.0, -0.5, 0.4);
  auto no_corr = measure_changed_drift(model, 1.0, 0.0, 0.4);
  for (double x : {0.3, 1.0, 2.5}) {
    CHECK(no_tilt(0.1, x) == model.drift(x));
    CHECK(no_corr(0.1, x) == model.drift(x));
  }
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(ActivityModel::cir(0.0, 0.5), EngineError);
  CHECK_THROWS_AS(ActivityModel::cir(1.0, -0.5), EngineError);
  CHECK_THROWS_AS(ActivityModel::cir(1.0, 0.5, 1.0, -0.1), EngineError);
  auto model = ActivityModel::cir(1.0, 0.5);
  CHECK_THROWS_AS(simulate_clock(model, 1.0, 2.0, 10, 1), EngineError);
  CHECK_THROWS_AS(simulate_clock(model, -1.0, 0.1, 10, 1), EngineError);
}
