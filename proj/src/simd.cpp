#include "tcl/simd.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace tcl::simd {

namespace {

// Explicit complex multiply; the vector kernels replicate exactly these
// products and this add/sub order, keeping both paths bitwise identical.
inline cplx cmul(cplx a, cplx b) {
  return cplx(a.real() * b.real() - a.imag() * b.imag(),
              a.real() * b.imag() + a.imag() * b.real());
}

void step_sqrt_scalar(double* v, double* T, const double* z, long n,
                      double kappa_dt, double sig_sdt, double eps, double dt) {
  for (long i = 0; i < n; ++i) {
    double vp = v[i] > 0.0 ? v[i] : 0.0;
    T[i] = T[i] + (vp + eps) * dt;
    v[i] = (v[i] + kappa_dt * (1.0 - vp)) + sig_sdt * (std::sqrt(vp) * z[i]);
  }
}

void step_linear_scalar(double* v, double* T, const double* z, long n,
                        double kappa_dt, double sig_sdt, double eps, double dt) {
  for (long i = 0; i < n; ++i) {
    double vp = v[i] > 0.0 ? v[i] : 0.0;
    T[i] = T[i] + (vp + eps) * dt;
    v[i] = (v[i] + kappa_dt * (1.0 - vp)) + sig_sdt * (vp * z[i]);
  }
}

double reduce_sum_scalar(const double* x, long n) {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
  long i = 0;
  for (; i + 4 <= n; i += 4) {
    a0 += x[i];
    a1 += x[i + 1];
    a2 += x[i + 2];
    a3 += x[i + 3];
  }
  double s = (a0 + a2) + (a1 + a3);
  for (; i < n; ++i) s += x[i];
  return s;
}

void tridiag_forward_scalar(cplx* rhs, int n, int m, const cplx* lower) {
  for (int i = 1; i < n; ++i) {
    cplx* cur = rhs + (long)i * m;
    const cplx* prev = cur - m;
    const cplx l = lower[i];
    for (int k = 0; k < m; ++k) {
      cplx p = cmul(l, prev[k]);
      cur[k] = cplx(cur[k].real() - p.real(), cur[k].imag() - p.imag());
    }
  }
}

void tridiag_backward_scalar(cplx* rhs, int n, int m, const cplx* upper,
                             const cplx* inv_diag) {
  {
    cplx* last = rhs + (long)(n - 1) * m;
    const cplx d = inv_diag[n - 1];
    for (int k = 0; k < m; ++k) last[k] = cmul(d, last[k]);
  }
  for (int i = n - 2; i >= 0; --i) {
    cplx* cur = rhs + (long)i * m;
    const cplx* next = cur + m;
    const cplx u = upper[i];
    const cplx d = inv_diag[i];
    for (int k = 0; k < m; ++k) {
      cplx p = cmul(u, next[k]);
      cplx t(cur[k].real() - p.real(), cur[k].imag() - p.imag());
      cur[k] = cmul(d, t);
    }
  }
}

const Kernels kScalar = {
    step_sqrt_scalar,       step_linear_scalar,      reduce_sum_scalar,
    tridiag_forward_scalar, tridiag_backward_scalar, "scalar",
};

bool force_scalar_env() {
  const char* s = std::getenv("TCL_ENGINE_FORCE_SCALAR");
  return s && std::strcmp(s, "1") == 0;
}

}  // namespace

const Kernels& scalar_kernels() { return kScalar; }

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const Kernels& active_kernels() {
  static const Kernels* active = [] {
    if (!force_scalar_env()) {
      if (const Kernels* k = avx2_kernels()) return k;
    }
    return &kScalar;
  }();
  return *active;
}

}  // namespace tcl::simd
