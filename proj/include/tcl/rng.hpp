#pragma once
#include <array>
#include <cstdint>

namespace tcl {

// Counter-based block cipher RNG (Philox 4x32, 10 rounds). Stateless core:
// every 128-bit block is a pure function of (counter, key), so any variate of
// any logical stream can be regenerated in O(1) — the property the Monte
// Carlo module uses for reproducible parallel path partitioning and O(1)-memory
// Brownian-path replay.
struct Philox4x32 {
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key);
};

// One logical random stream, addressed by (seed, path, purpose). Consecutive
// draws advance an internal 64-bit block counter; identical addressing yields
// bitwise-identical sequences regardless of how work is partitioned across
// threads. Layout: key = seed split in two 32-bit words; counter words =
// (path, purpose, block_lo, block_hi).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint32_t path, std::uint32_t purpose)
      : key_{static_cast<std::uint32_t>(seed & 0xFFFFFFFFu),
             static_cast<std::uint32_t>(seed >> 32)},
        path_(path), purpose_(purpose) {}

  // Uniform on (0,1), 53-bit resolution, never exactly 0 or 1.
  double u01();

  // Standard normal via Box–Muller (pair-buffered).
  double normal();

  // Gamma(shape, scale), Marsaglia–Tsang squeeze with the shape<1 boost.
  double gamma(double shape, double scale);

  // Inverse Gaussian(mean mu, shape lambda), Michael–Schucany–Haas.
  double inverse_gaussian(double mu, double lambda);

  // Raw 64-bit word (two 32-bit cipher outputs).
  std::uint64_t next_u64();

  std::uint32_t path() const { return path_; }
  std::uint32_t purpose() const { return purpose_; }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t path_ = 0, purpose_ = 0;
  std::uint64_t block_ = 0;   // next block index to encrypt
  std::array<std::uint32_t, 4> buf_{};
  int have_words_ = 0;        // unread 32-bit words in buf_ (from the tail)
  double cached_normal_ = 0.0;
  bool have_normal_ = false;
};

// Stream purposes used by the Monte Carlo module; fixed numbering is part of
// the reproducibility contract (a given seed reproduces samples forever).
enum class StreamPurpose : std::uint32_t {
  kClockDriver = 1,      // dB increments driving the activity rate
  kSubordinator = 2,     // exact gamma/IG window increments
  kTerminalGaussian = 3, // W at the terminal subordinated time
  kBridge = 4,           // Brownian bridge/extension refinement draws
  kSecondFactor = 5,     // second clock driver (two-factor models)
  kOrthogonal = 6,       // loadings orthogonal to both drivers
};

inline RngStream make_stream(std::uint64_t seed, std::uint32_t path,
                             StreamPurpose p) {
  return RngStream(seed, path, static_cast<std::uint32_t>(p));
}

}  // namespace tcl
