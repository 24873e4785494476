#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "tcl/errors.hpp"
#include "tcl/quadrature.hpp"

using namespace tcl;

TEST_CASE("gauss-legendre nodes integrate polynomials exactly") {
  // Order n is exact through degree 2n-1.
  for (int n : {2, 3, 5, 8, 12, 16, 32}) {
    const auto& gl = GaussLegendre::get(n);
    double sum_w = 0.0;
    for (double w : gl.weights) sum_w += w;
    CHECK(std::abs(sum_w - 2.0) < 1e-14);
    int deg = 2 * n - 1;
    double val = 0.0;
    for (int i = 0; i < n; ++i) val += gl.weights[i] * std::pow(gl.nodes[i], deg);
    CHECK(std::abs(val) < 1e-13);  // odd power integrates to zero
    int deg2 = 2 * n - 2;
    double val2 = 0.0;
    for (int i = 0; i < n; ++i) val2 += gl.weights[i] * std::pow(gl.nodes[i], deg2);
    CHECK(std::abs(val2 - 2.0 / (deg2 + 1)) < 1e-12);
  }
  CHECK_THROWS_AS((void)GaussLegendre::get(0), DomainError);
  CHECK_THROWS_AS((void)GaussLegendre::get(65), DomainError);
}

TEST_CASE("panel rule reproduces smooth integrals") {
  // integral over [0,6] of exp(-x^2/2) = sqrt(pi/2) * erf(6/sqrt(2))
  PanelRule r = panels({0.0, 0.5, 1.0, 2.0, 3.5, 6.0}, 12);
  double s = 0.0;
  for (size_t i = 0; i < r.size(); ++i) s += r.w[i] * std::exp(-0.5 * r.x[i] * r.x[i]);
  double exact = std::sqrt(M_PI / 2.0) * std::erf(6.0 / std::sqrt(2.0));
  CHECK(std::abs(s - exact) < 1e-13);
  // sin over [0, pi] = 2
  PanelRule r2 = panels({0.0, M_PI / 3, M_PI}, 16);
  double s2 = 0.0;
  for (size_t i = 0; i < r2.size(); ++i) s2 += r2.w[i] * std::sin(r2.x[i]);
  CHECK(std::abs(s2 - 2.0) < 1e-14);
  CHECK_THROWS_AS((void)panels({1.0, 1.0, 2.0}, 8), DomainError);
}

TEST_CASE("pairwise summation is accurate and deterministic") {
  // Ill-conditioned alternating series where naive order loses digits.
  const int n = 1 << 20;
  std::vector<double> x(n);
  long double ref = 0.0L;
  for (int i = 0; i < n; ++i) {
    x[i] = (i % 2 ? 1.0 : -1.0) * (1.0 + 1e-12 * i) * 1e8 / (i + 1.0);
    ref += (long double)x[i];
  }
  double p = pairwise_sum(x);
  CHECK(std::abs((double)(p - ref)) < 1e-6 * std::abs((double)ref) + 1e-8);
  CHECK(pairwise_sum(x) == p);  // bitwise stable
  std::vector<std::complex<double>> xc(n);
  for (int i = 0; i < n; ++i) xc[i] = {x[i], -x[i]};
  auto pc = pairwise_sum(xc);
  CHECK(pc.real() == p);
  CHECK(pc.imag() == -p);
}
