#pragma once
#include <complex>
#include <cstddef>
#include <vector>

namespace tcl {

// Gauss–Legendre rule on [-1,1]; nodes ascending, weights positive.
// Computed once per order by Newton iteration on the Legendre polynomial and
// cached (thread-safe initialization); accurate to ~1e-15.
struct GaussLegendre {
  std::vector<double> nodes, weights;
  static const GaussLegendre& get(int n);
};

// Flattened composite rule: a Gauss–Legendre panel of order `order` on every
// consecutive pair of `edges`.
struct PanelRule {
  std::vector<double> x, w;
  std::size_t size() const { return x.size(); }
};
PanelRule panels(const std::vector<double>& edges, int order);

// Deterministic pairwise (tree) summation: fixed association independent of
// chunking/threading, and more accurate than left-to-right on long sums.
double pairwise_sum(const double* v, std::size_t n);
std::complex<double> pairwise_sum(const std::complex<double>* v, std::size_t n);
inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.data(), v.size());
}
inline std::complex<double> pairwise_sum(
    const std::vector<std::complex<double>>& v) {
  return pairwise_sum(v.data(), v.size());
}

}  // namespace tcl
