#include "tcl/rng.hpp"

#include <cmath>

#include "tcl/errors.hpp"

namespace tcl {

namespace {
inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}
}  // namespace

std::array<std::uint32_t, 4> Philox4x32::block(std::array<std::uint32_t, 4> c,
                                               std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

std::uint64_t RngStream::next_u64() {
  if (have_words_ < 2) {
    buf_ = Philox4x32::block({path_, purpose_,
                              static_cast<std::uint32_t>(block_ & 0xFFFFFFFFu),
                              static_cast<std::uint32_t>(block_ >> 32)},
                             key_);
    ++block_;
    have_words_ = 4;
  }
  int base = 4 - have_words_;
  std::uint64_t w = (static_cast<std::uint64_t>(buf_[base]) << 32) |
                    buf_[base + 1];
  have_words_ -= 2;
  return w;
}

double RngStream::u01() {
  // Top 53 bits, centered in the cell: strictly inside (0,1).
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (have_normal_) {
    have_normal_ = false;
    return cached_normal_;
  }
  double u1 = u01();
  double u2 = u01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 6.283185307179586476925286766559 * u2;
  cached_normal_ = r * std::sin(a);
  have_normal_ = true;
  return r * std::cos(a);
}

double RngStream::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0))
    throw DomainError("gamma sampler needs shape>0 and scale>0");
  if (shape < 1.0) {
    // Boost: G(a) = G(a+1) * U^{1/a}.
    double u = u01();
    return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
  }
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = u01();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
      return d * v * scale;
  }
}

double RngStream::inverse_gaussian(double mu, double lambda) {
  if (!(mu > 0.0) || !(lambda > 0.0))
    throw DomainError("inverse-gaussian sampler needs mu>0 and lambda>0");
  double nu = normal();
  double y = nu * nu;
  // Michael-Schucany-Haas smaller root mu*(1 + w - sqrt(w^2 + 2w)) with
  // w = mu*y/(2*lambda), rationalized so the subtraction never cancels (the
  // subordinator draws windows with w up to ~1e9, where the textbook form
  // loses every significant digit).
  double w = mu * y / (2.0 * lambda);
  double x = mu / (1.0 + w + std::sqrt(w * (w + 2.0)));
  double u = u01();
  if (u <= mu / (mu + x)) return x;
  return mu * mu / x;
}

}  // namespace tcl
