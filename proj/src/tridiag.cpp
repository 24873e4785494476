#include "tcl/tridiag.hpp"

#include <cmath>

#include "tcl/errors.hpp"
#include "tcl/simd.hpp"

namespace tcl {

TridiagFactor::TridiagFactor(const std::vector<cplx>& a, const std::vector<cplx>& b,
                             const std::vector<cplx>& c) {
  n_ = (int)b.size();
  if ((int)a.size() != n_ || (int)c.size() != n_ - 1) {
    throw DomainError("TridiagFactor: band size mismatch");
  }
  inv_diag_.resize(n_);
  lower_.resize(n_);
  upper_ = c;
  cplx piv = b[0];
  if (std::abs(piv) == 0.0) throw NumericsError("TridiagFactor: zero pivot at row 0");
  inv_diag_[0] = 1.0 / piv;
  for (int i = 1; i < n_; ++i) {
    cplx m = a[i] * inv_diag_[i - 1];
    lower_[i] = m;
    piv = b[i] - m * upper_[i - 1];
    if (std::abs(piv) == 0.0) throw NumericsError("TridiagFactor: zero pivot");
    inv_diag_[i] = 1.0 / piv;
  }
}

void TridiagFactor::solve(cplx* rhs) const {
  for (int i = 1; i < n_; ++i) rhs[i] -= lower_[i] * rhs[i - 1];
  rhs[n_ - 1] *= inv_diag_[n_ - 1];
  for (int i = n_ - 2; i >= 0; --i) {
    rhs[i] = (rhs[i] - upper_[i] * rhs[i + 1]) * inv_diag_[i];
  }
}

void TridiagFactor::solve_batched(cplx* rhs, int m) const {
  const auto& k = simd::active_kernels();
  k.tridiag_forward(rhs, n_, m, lower_.data());
  k.tridiag_backward(rhs, n_, m, upper_.data(), inv_diag_.data());
}

void solve_tridiag(const std::vector<double>& a, const std::vector<double>& b,
                   const std::vector<double>& c, std::vector<double>& rhs) {
  int n = (int)b.size();
  std::vector<double> cp(n), dp(n);
  double piv = b[0];
  if (piv == 0.0) throw NumericsError("solve_tridiag: zero pivot at row 0");
  cp[0] = (n > 1 ? c[0] / piv : 0.0);
  dp[0] = rhs[0] / piv;
  for (int i = 1; i < n; ++i) {
    piv = b[i] - a[i] * cp[i - 1];
    if (piv == 0.0) throw NumericsError("solve_tridiag: zero pivot");
    if (i < n - 1) cp[i] = c[i] / piv;
    dp[i] = (rhs[i] - a[i] * dp[i - 1]) / piv;
  }
  rhs[n - 1] = dp[n - 1];
  for (int i = n - 2; i >= 0; --i) rhs[i] = dp[i] - cp[i] * rhs[i + 1];
}

}  // namespace tcl
