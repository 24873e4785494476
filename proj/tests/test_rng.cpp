#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "tcl/errors.hpp"
#include "tcl/rng.hpp"

using tcl::Philox4x32;
using tcl::RngStream;

namespace {
struct Kat {
  std::array<std::uint32_t, 4> ctr;
  std::array<std::uint32_t, 2> key;
  std::array<std::uint32_t, 4> out;
};
}  // namespace

TEST_CASE("philox 4x32-10 known-answer vectors") {
  const Kat kats[] = {
      {{0u, 0u, 0u, 0u},
       {0u, 0u},
       {0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}},
      {{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
       {0xffffffffu, 0xffffffffu},
       {0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}},
      {{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
       {0xa4093822u, 0x299f31d0u},
       {0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}},
      {{1u, 2u, 3u, 4u},
       {5u, 6u},
       {0xc0c839bcu, 0x889c87c5u, 0x61986739u, 0x2d4623d0u}},
      {{0xdeadbeefu, 0u, 0u, 1u},
       {0xcafef00du, 0x12345678u},
       {0x65f45787u, 0x9f36b3f5u, 0x1c66072fu, 0xb720b08bu}},
  };
  for (const auto& k : kats) {
    auto out = Philox4x32::block(k.ctr, k.key);
    CHECK(out[0] == k.out[0]);
    CHECK(out[1] == k.out[1]);
    CHECK(out[2] == k.out[2]);
    CHECK(out[3] == k.out[3]);
  }
}

TEST_CASE("stream words come from the addressed counter blocks") {
  const std::uint64_t seed = 0x0123456789abcdefULL;
  RngStream s(seed, /*path=*/7, /*purpose=*/3);
  auto b0 = Philox4x32::block({7u, 3u, 0u, 0u},
                              {0x89abcdefu, 0x01234567u});
  auto b1 = Philox4x32::block({7u, 3u, 1u, 0u},
                              {0x89abcdefu, 0x01234567u});
  CHECK(s.next_u64() == ((std::uint64_t(b0[0]) << 32) | b0[1]));
  CHECK(s.next_u64() == ((std::uint64_t(b0[2]) << 32) | b0[3]));
  CHECK(s.next_u64() == ((std::uint64_t(b1[0]) << 32) | b1[1]));
}

TEST_CASE("streams are reproducible and purpose-separated") {
  RngStream a(42, 11, 2), b(42, 11, 2), c(42, 11, 3), d(42, 12, 2);
  bool all_equal = true, purpose_differs = false, path_differs = false;
  for (int i = 0; i < 64; ++i) {
    std::uint64_t wa = a.next_u64();
    if (wa != b.next_u64()) all_equal = false;
    if (wa != c.next_u64()) purpose_differs = true;
    if (wa != d.next_u64()) path_differs = true;
  }
  CHECK(all_equal);
  CHECK(purpose_differs);
  CHECK(path_differs);
}

TEST_CASE("u01 stays strictly inside (0,1)") {
  RngStream s(7, 0, 1);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    double u = s.u01();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(lo < 1e-3);  // coverage of both tails
  CHECK(hi > 1.0 - 1e-3);
}

namespace {
struct Moments {
  double mean, var, skew, kurt;
};
Moments moments(const std::vector<double>& x) {
  double n = (double)x.size(), m = 0;
  for (double v : x) m += v;
  m /= n;
  double s2 = 0, s3 = 0, s4 = 0;
  for (double v : x) {
    double d = v - m;
    s2 += d * d;
    s3 += d * d * d;
    s4 += d * d * d * d;
  }
  s2 /= n;
  s3 /= n;
  s4 /= n;
  return {m, s2, s3 / std::pow(s2, 1.5), s4 / (s2 * s2)};
}
}  // namespace

TEST_CASE("normal sampler moments") {
  RngStream s(123, 0, 1);
  std::vector<double> x(400000);
  for (auto& v : x) v = s.normal();
  auto mo = moments(x);
  CHECK(std::abs(mo.mean) < 8e-3);
  CHECK(std::abs(mo.var - 1.0) < 1.5e-2);
  CHECK(std::abs(mo.skew) < 2e-2);
  CHECK(std::abs(mo.kurt - 3.0) < 6e-2);
}

TEST_CASE("gamma sampler moments (both shape regimes)") {
  RngStream s(99, 1, 2);
  {
    std::vector<double> x(300000);
    for (auto& v : x) v = s.gamma(2.5, 0.8);
    auto mo = moments(x);
    CHECK(std::abs(mo.mean - 2.0) < 1.5e-2);    // shape*scale
    CHECK(std::abs(mo.var - 1.6) < 4e-2);       // shape*scale^2
  }
  {
    // Boost path: shape < 1 as in small subordinator windows.
    std::vector<double> x(300000);
    for (auto& v : x) v = s.gamma(0.3, 2.0);
    auto mo = moments(x);
    CHECK(std::abs(mo.mean - 0.6) < 1.5e-2);
    CHECK(std::abs(mo.var - 1.2) < 6e-2);
  }
  CHECK_THROWS_AS((void)s.gamma(-1.0, 1.0), tcl::DomainError);
  CHECK_THROWS_AS((void)s.gamma(1.0, 0.0), tcl::DomainError);
}

TEST_CASE("inverse gaussian sampler moments") {
  RngStream s(2024, 3, 2);
  std::vector<double> x(300000);
  for (auto& v : x) v = s.inverse_gaussian(1.3, 2.1);
  auto mo = moments(x);
  CHECK(std::abs(mo.mean - 1.3) < 1.5e-2);
  // var = mu^3 / lambda
  CHECK(std::abs(mo.var - 1.3 * 1.3 * 1.3 / 2.1) < 5e-2);
  CHECK_THROWS_AS((void)s.inverse_gaussian(0.0, 1.0), tcl::DomainError);
}
