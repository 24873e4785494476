#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <atomic>
#include <cmath>
#include <complex>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "tcl/errors.hpp"
#include "tcl/grid.hpp"
#include "tcl/parallel.hpp"
#include "tcl/rng.hpp"
#include "tcl/simd.hpp"
#include "tcl/tridiag.hpp"

using namespace tcl;

TEST_CASE("uniform grid: nodes, weights, total measure") {
  Grid1D g = Grid1D::uniform(0.0, 7.0, 141);
  CHECK(g.n == 141);
  CHECK(g.dx == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(g.x.front() == 0.0);
  CHECK(g.x.back() == 7.0);
  double w = 0.0;
  for (double v : g.w) w += v;
  CHECK(w == doctest::Approx(7.0).epsilon(1e-13));
  CHECK(g.w.front() == doctest::Approx(0.5 * g.dx));
  CHECK(g.w[1] == doctest::Approx(g.dx));
  CHECK_THROWS_AS(Grid1D::uniform(0.0, 1.0, 1), DomainError);
}

TEST_CASE("anchored grid puts the anchor on a node") {
  Grid1D g = Grid1D::anchored(7.0, 0.03, 1.0);
  int i = g.index_near(1.0);
  CHECK(std::abs(g.x[i] - 1.0) < 1e-12);
  CHECK(g.hi >= 7.0 - 1e-12);
  CHECK(std::abs(g.dx - 0.03) < 0.01);
  Grid1D g2 = Grid1D::anchored(5.0, 0.04, 0.37);
  int i2 = g2.index_near(0.37);
  CHECK(std::abs(g2.x[i2] - 0.37) < 1e-12);
}

TEST_CASE("delta hat: unit mass and exact mean") {
  Grid1D g = Grid1D::uniform(0.0, 4.0, 81);
  for (double x0 : {1.0, 1.013, 3.9999, 0.007}) {
    auto q = delta_hat(g, x0);
    double mass = 0.0, mean = 0.0;
    for (int i = 0; i < g.n; ++i) {
      mass += g.w[i] * q[i];
      mean += g.w[i] * q[i] * g.x[i];
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(mean == doctest::Approx(x0).epsilon(1e-10));
  }
  // On-node case collapses to a single node.
  auto q = delta_hat(g, g.x[10]);
  int nonzero = 0;
  for (double v : q) nonzero += (v != 0.0);
  CHECK(nonzero == 1);
}

namespace {
using cvec = std::vector<std::complex<double>>;

void dense_residual_check(const cvec& a, const cvec& b, const cvec& c,
                          const cvec& x, const cvec& rhs, double tol) {
  int n = (int)b.size();
  for (int i = 0; i < n; ++i) {
    std::complex<double> r = b[i] * x[i];
    if (i > 0) r += a[i] * x[i - 1];
    if (i + 1 < n) r += c[i] * x[i + 1];
    CHECK(std::abs(r - rhs[i]) < tol);
  }
}
}  // namespace

TEST_CASE("complex tridiagonal factorization solves to machine precision") {
  const int n = 257;
  RngStream s(5, 0, 1);
  cvec a(n), b(n), c(n - 1), rhs(n);
  for (int i = 0; i < n; ++i) {
    a[i] = {s.u01() - 0.5, s.u01() - 0.5};
    b[i] = {3.0 + s.u01(), s.u01()};  // diagonally dominant
    if (i + 1 < n) c[i] = {s.u01() - 0.5, s.u01() - 0.5};
    rhs[i] = {s.u01() * 2 - 1, s.u01() * 2 - 1};
  }
  TridiagFactor f(a, b, c);
  cvec x = rhs;
  f.solve(x);
  dense_residual_check(a, b, c, x, rhs, 1e-12);

  // Batched multi-RHS agrees with repeated single solves.
  const int m = 7;
  cvec batch(n * m), singles(n * m);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < n; ++i) {
      std::complex<double> v{s.u01() * 2 - 1, s.u01() * 2 - 1};
      batch[(size_t)i * m + k] = v;
      singles[(size_t)k * n + i] = v;
    }
  f.solve_batched(batch.data(), m);
  for (int k = 0; k < m; ++k) {
    f.solve(&singles[(size_t)k * n]);
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(batch[(size_t)i * m + k] - singles[(size_t)k * n + i]) < 1e-12);
    }
  }
  CHECK_THROWS_AS(TridiagFactor(a, cvec(n, {0.0, 0.0}), c), NumericsError);
}

TEST_CASE("scalar and avx2 kernels are bitwise identical") {
  const auto& sc = simd::scalar_kernels();
  const auto* av = simd::avx2_kernels();
  if (!av) {
    MESSAGE("avx2 not available on this host; dispatch check only");
    CHECK(std::strcmp(simd::active_kernels().name, "scalar") == 0);
    return;
  }
  RngStream s(17, 0, 1);
  const long n = 1037;  // odd tail on purpose
  std::vector<double> v1(n), v2(n), T1(n), T2(n), z(n);
  for (long i = 0; i < n; ++i) {
    v1[i] = v2[i] = s.u01() * 2.0 - 0.3;  // some negative entries
    T1[i] = T2[i] = s.u01();
    z[i] = s.normal();
  }
  sc.step_sqrt(v1.data(), T1.data(), z.data(), n, 0.01, 0.02, 1e-4, 0.005);
  av->step_sqrt(v2.data(), T2.data(), z.data(), n, 0.01, 0.02, 1e-4, 0.005);
  CHECK(std::memcmp(v1.data(), v2.data(), n * sizeof(double)) == 0);
  CHECK(std::memcmp(T1.data(), T2.data(), n * sizeof(double)) == 0);
  sc.step_linear(v1.data(), T1.data(), z.data(), n, 0.01, 0.02, 1e-4, 0.005);
  av->step_linear(v2.data(), T2.data(), z.data(), n, 0.01, 0.02, 1e-4, 0.005);
  CHECK(std::memcmp(v1.data(), v2.data(), n * sizeof(double)) == 0);
  CHECK(std::memcmp(T1.data(), T2.data(), n * sizeof(double)) == 0);

  std::vector<double> big(100003);
  for (auto& u : big) u = s.normal() * 1e6;
  double r1 = sc.reduce_sum(big.data(), (long)big.size());
  double r2 = av->reduce_sum(big.data(), (long)big.size());
  CHECK(std::memcmp(&r1, &r2, sizeof(double)) == 0);

  const int rows = 64, m = 13;  // odd batch tail
  cvec lower(rows), upper(rows - 1), invd(rows), rhs1(rows * m);
  for (int i = 0; i < rows; ++i) {
    lower[i] = {s.u01() - 0.5, s.u01() - 0.5};
    invd[i] = {0.5 + s.u01(), s.u01() - 0.5};
    if (i + 1 < rows) upper[i] = {s.u01() - 0.5, s.u01() - 0.5};
  }
  for (auto& u : rhs1) u = {s.u01() * 2 - 1, s.u01() * 2 - 1};
  cvec rhs2 = rhs1;
  sc.tridiag_forward(rhs1.data(), rows, m, lower.data());
  av->tridiag_forward(rhs2.data(), rows, m, lower.data());
  CHECK(std::memcmp(rhs1.data(), rhs2.data(), rhs1.size() * sizeof(rhs1[0])) == 0);
  sc.tridiag_backward(rhs1.data(), rows, m, upper.data(), invd.data());
  av->tridiag_backward(rhs2.data(), rows, m, upper.data(), invd.data());
  CHECK(std::memcmp(rhs1.data(), rhs2.data(), rhs1.size() * sizeof(rhs1[0])) == 0);
}

TEST_CASE("parallel_for covers the range once and propagates errors") {
  const int n = 1000;
  std::vector<std::atomic<int>> hits(n);
  for (auto& h : hits) h = 0;
  parallel_for(n, 4, [&](int i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(
      parallel_for(64, 4,
                   [&](int i) {
                     if (i == 17) throw DomainError("boom");
                   }),
      DomainError);
  CHECK(default_workers() >= 1);
}
