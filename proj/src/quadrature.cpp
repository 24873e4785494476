#include "tcl/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "tcl/errors.hpp"

namespace tcl {

namespace {
GaussLegendre compute_gl(int n) {
  GaussLegendre r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-based initial guess for the i-th root (descending order).
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}
}  // namespace

const GaussLegendre& GaussLegendre::get(int n) {
  if (n < 1 || n > 64) throw DomainError("Gauss-Legendre order out of range");
  static std::map<int, GaussLegendre> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gl(n)).first;
  return it->second;
}

PanelRule panels(const std::vector<double>& edges, int order) {
  if (edges.size() < 2) throw DomainError("panel rule needs >= 2 edges");
  const auto& gl = GaussLegendre::get(order);
  PanelRule r;
  r.x.reserve((edges.size() - 1) * order);
  r.w.reserve((edges.size() - 1) * order);
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    double a = edges[p], b = edges[p + 1];
    if (!(b > a)) throw DomainError("panel edges must be strictly increasing");
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < order; ++i) {
      r.x.push_back(mid + half * gl.nodes[i]);
      r.w.push_back(half * gl.weights[i]);
    }
  }
  return r;
}

namespace {
template <class T>
T pairwise_impl(const T* v, std::size_t n) {
  if (n == 0) return T{};
  if (n <= 8) {
    T s = v[0];
    for (std::size_t i = 1; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_impl(v, h) + pairwise_impl(v + h, n - h);
}
}  // namespace

double pairwise_sum(const double* v, std::size_t n) {
  return pairwise_impl(v, n);
}
std::complex<double> pairwise_sum(const std::complex<double>* v,
                                  std::size_t n) {
  return pairwise_impl(v, n);
}

}  // namespace tcl
