#pragma once
#include <complex>

namespace tcl::simd {

using cplx = std::complex<double>;

// Hot numerical kernels with interchangeable scalar and AVX2 implementations.
// Both implementations perform the same IEEE operations in the same order, so
// results are bitwise identical (the build disables FP contraction and the
// vector paths use separate mul/add, never FMA).
struct Kernels {
  // Full-truncation Euler step for a mean-reverting factor with square-root
  // diffusion, fused with the clock accumulation (left-endpoint rule):
  //   vp   = max(v[i], 0)
  //   T[i] = T[i] + (vp + eps) * dt
  //   v[i] = (v[i] + kappa_dt * (1 - vp)) + sig_sdt * (sqrt(vp) * z[i])
  void (*step_sqrt)(double* v, double* T, const double* z, long n,
                    double kappa_dt, double sig_sdt, double eps, double dt);
  // Same step with linear diffusion sigma * vp (log-normal-type factor):
  //   v[i] = (v[i] + kappa_dt * (1 - vp)) + sig_sdt * (vp * z[i])
  void (*step_linear)(double* v, double* T, const double* z, long n,
                      double kappa_dt, double sig_sdt, double eps, double dt);
  // Deterministic blocked sum: four stride-4 accumulators combined pairwise,
  // remainder added sequentially. Independent of implementation and of any
  // threading above it.
  double (*reduce_sum)(const double* x, long n);
  // Batched Thomas sweeps over m interleaved complex right-hand sides
  // (element (i,k) at rhs[i*m+k]); factors from TridiagFactor.
  void (*tridiag_forward)(cplx* rhs, int n, int m, const cplx* lower);
  void (*tridiag_backward)(cplx* rhs, int n, int m, const cplx* upper,
                           const cplx* inv_diag);
  const char* name;
};

const Kernels& scalar_kernels();
// nullptr when the CPU lacks AVX2.
const Kernels* avx2_kernels();
// Runtime-dispatched set: AVX2 when available unless TCL_ENGINE_FORCE_SCALAR=1.
const Kernels& active_kernels();
bool avx2_supported();

}  // namespace tcl::simd
