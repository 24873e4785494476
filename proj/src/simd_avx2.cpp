// AVX2 implementations of the hot kernels. This translation unit is the only
// one compiled with -mavx2; callers reach it through runtime dispatch.
// Every kernel performs the same IEEE operations in the same order as its
// scalar twin (no FMA), so outputs are bitwise identical.
#include "tcl/simd.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

#include <cmath>

namespace tcl::simd {

namespace {

inline cplx cmul(cplx a, cplx b) {
  return cplx(a.real() * b.real() - a.imag() * b.imag(),
              a.real() * b.imag() + a.imag() * b.real());
}

// (ar + i*ai) * x for two packed complex doubles x = [xr0,xi0,xr1,xi1]:
// addsub(ar*x, ai*swap(x)) -> [ar*xr - ai*xi, ar*xi + ai*xr, ...]
inline __m256d cmul_vec(__m256d var, __m256d vai, __m256d x) {
  __m256d sw = _mm256_permute_pd(x, 0x5);
  return _mm256_addsub_pd(_mm256_mul_pd(var, x), _mm256_mul_pd(vai, sw));
}

void step_sqrt_avx2(double* v, double* T, const double* z, long n,
                    double kappa_dt, double sig_sdt, double eps, double dt) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d vdt = _mm256_set1_pd(dt);
  const __m256d vkdt = _mm256_set1_pd(kappa_dt);
  const __m256d vssdt = _mm256_set1_pd(sig_sdt);
  long i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vv = _mm256_loadu_pd(v + i);
    __m256d vp = _mm256_max_pd(vv, zero);
    __m256d vT = _mm256_loadu_pd(T + i);
    vT = _mm256_add_pd(vT, _mm256_mul_pd(_mm256_add_pd(vp, veps), vdt));
    _mm256_storeu_pd(T + i, vT);
    __m256d drift = _mm256_mul_pd(vkdt, _mm256_sub_pd(one, vp));
    __m256d diff =
        _mm256_mul_pd(vssdt, _mm256_mul_pd(_mm256_sqrt_pd(vp), _mm256_loadu_pd(z + i)));
    _mm256_storeu_pd(v + i, _mm256_add_pd(_mm256_add_pd(vv, drift), diff));
  }
  for (; i < n; ++i) {
    double vp = v[i] > 0.0 ? v[i] : 0.0;
    T[i] = T[i] + (vp + eps) * dt;
    v[i] = (v[i] + kappa_dt * (1.0 - vp)) + sig_sdt * (std::sqrt(vp) * z[i]);
  }
}

void step_linear_avx2(double* v, double* T, const double* z, long n,
                      double kappa_dt, double sig_sdt, double eps, double dt) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d vdt = _mm256_set1_pd(dt);
  const __m256d vkdt = _mm256_set1_pd(kappa_dt);
  const __m256d vssdt = _mm256_set1_pd(sig_sdt);
  long i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vv = _mm256_loadu_pd(v + i);
    __m256d vp = _mm256_max_pd(vv, zero);
    __m256d vT = _mm256_loadu_pd(T + i);
    vT = _mm256_add_pd(vT, _mm256_mul_pd(_mm256_add_pd(vp, veps), vdt));
    _mm256_storeu_pd(T + i, vT);
    __m256d drift = _mm256_mul_pd(vkdt, _mm256_sub_pd(one, vp));
    __m256d diff = _mm256_mul_pd(vssdt, _mm256_mul_pd(vp, _mm256_loadu_pd(z + i)));
    _mm256_storeu_pd(v + i, _mm256_add_pd(_mm256_add_pd(vv, drift), diff));
  }
  for (; i < n; ++i) {
    double vp = v[i] > 0.0 ? v[i] : 0.0;
    T[i] = T[i] + (vp + eps) * dt;
    v[i] = (v[i] + kappa_dt * (1.0 - vp)) + sig_sdt * (vp * z[i]);
  }
}

double reduce_sum_avx2(const double* x, long n) {
  __m256d acc = _mm256_setzero_pd();
  long i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  // Combine as (a0+a2) + (a1+a3), matching the scalar accumulator order.
  __m128d lo = _mm256_castpd256_pd128(acc);
  __m128d hi = _mm256_extractf128_pd(acc, 1);
  __m128d two = _mm_add_pd(lo, hi);  // [a0+a2, a1+a3]
  double s = _mm_cvtsd_f64(two) + _mm_cvtsd_f64(_mm_unpackhi_pd(two, two));
  for (; i < n; ++i) s += x[i];
  return s;
}

void tridiag_forward_avx2(cplx* rhs, int n, int m, const cplx* lower) {
  for (int i = 1; i < n; ++i) {
    double* cur = reinterpret_cast<double*>(rhs + (long)i * m);
    const double* prev = cur - 2 * m;
    const cplx l = lower[i];
    const __m256d lr = _mm256_set1_pd(l.real());
    const __m256d li = _mm256_set1_pd(l.imag());
    int k = 0;
    for (; k + 2 <= m; k += 2) {
      __m256d p = cmul_vec(lr, li, _mm256_loadu_pd(prev + 2 * k));
      _mm256_storeu_pd(cur + 2 * k, _mm256_sub_pd(_mm256_loadu_pd(cur + 2 * k), p));
    }
    for (; k < m; ++k) {
      cplx* c = rhs + (long)i * m + k;
      cplx p = cmul(l, *(c - m));
      *c = cplx(c->real() - p.real(), c->imag() - p.imag());
    }
  }
}

void tridiag_backward_avx2(cplx* rhs, int n, int m, const cplx* upper,
                           const cplx* inv_diag) {
  {
    double* last = reinterpret_cast<double*>(rhs + (long)(n - 1) * m);
    const cplx d = inv_diag[n - 1];
    const __m256d dr = _mm256_set1_pd(d.real());
    const __m256d di = _mm256_set1_pd(d.imag());
    int k = 0;
    for (; k + 2 <= m; k += 2) {
      _mm256_storeu_pd(last + 2 * k, cmul_vec(dr, di, _mm256_loadu_pd(last + 2 * k)));
    }
    for (; k < m; ++k) {
      cplx* c = rhs + (long)(n - 1) * m + k;
      *c = cmul(d, *c);
    }
  }
  for (int i = n - 2; i >= 0; --i) {
    double* cur = reinterpret_cast<double*>(rhs + (long)i * m);
    const double* next = cur + 2 * m;
    const cplx u = upper[i];
    const cplx d = inv_diag[i];
    const __m256d ur = _mm256_set1_pd(u.real());
    const __m256d ui = _mm256_set1_pd(u.imag());
    const __m256d dr = _mm256_set1_pd(d.real());
    const __m256d di = _mm256_set1_pd(d.imag());
    int k = 0;
    for (; k + 2 <= m; k += 2) {
      __m256d p = cmul_vec(ur, ui, _mm256_loadu_pd(next + 2 * k));
      __m256d t = _mm256_sub_pd(_mm256_loadu_pd(cur + 2 * k), p);
      _mm256_storeu_pd(cur + 2 * k, cmul_vec(dr, di, t));
    }
    for (; k < m; ++k) {
      cplx* c = rhs + (long)i * m + k;
      cplx p = cmul(u, *(c + m));
      cplx t(c->real() - p.real(), c->imag() - p.imag());
      *c = cmul(d, t);
    }
  }
}

const Kernels kAvx2 = {
    step_sqrt_avx2,       step_linear_avx2,      reduce_sum_avx2,
    tridiag_forward_avx2, tridiag_backward_avx2, "avx2",
};

}  // namespace

const Kernels* avx2_kernels() { return avx2_supported() ? &kAvx2 : nullptr; }

}  // namespace tcl::simd

#else

namespace tcl::simd {
const Kernels* avx2_kernels() { return nullptr; }
}  // namespace tcl::simd

#endif
