#pragma once
#include <complex>
#include <vector>

namespace tcl {

using cplx = std::complex<double>;

// Thomas factorization of a complex tridiagonal system, reusable across many
// right-hand sides (one factorization per matrix, O(n) per solve).
class TridiagFactor {
 public:
  TridiagFactor() = default;
  // lower a[1..n-1], diagonal b[0..n-1], upper c[0..n-2].
  TridiagFactor(const std::vector<cplx>& a, const std::vector<cplx>& b,
                const std::vector<cplx>& c);

  int size() const { return n_; }
  // Solve in place; rhs.size() == n.
  void solve(cplx* rhs) const;
  void solve(std::vector<cplx>& rhs) const { solve(rhs.data()); }

  // Batched solve over m interleaved right-hand sides: element (row i, rhs k)
  // lives at rhs[i*m + k]. Dispatches to the active SIMD kernel set.
  void solve_batched(cplx* rhs, int m) const;

  // Factor access for the batched sweep kernels.
  const std::vector<cplx>& lower() const { return lower_; }
  const std::vector<cplx>& upper() const { return upper_; }
  const std::vector<cplx>& inv_diag() const { return inv_diag_; }

 private:
  int n_ = 0;
  std::vector<cplx> inv_diag_;  // 1 / pivot_i
  std::vector<cplx> lower_;     // a_i * inv_diag_{i-1}
  std::vector<cplx> upper_;     // c_i
};

// One-shot real Thomas solve (used by the explicit-advection weight setup).
void solve_tridiag(const std::vector<double>& a, const std::vector<double>& b,
                   const std::vector<double>& c, std::vector<double>& rhs);

}  // namespace tcl
