#include "tcl/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>

#include "tcl/errors.hpp"
#include "tcl/parallel.hpp"
#include "tcl/quadrature.hpp"
#include "tcl/rng.hpp"
#include "tcl/simd.hpp"

namespace tcl {

namespace {

// ---------------------------------------------------------------------------
// Empirical-law helpers
// ---------------------------------------------------------------------------

double sample_sd(const std::vector<double>& x, double mean) {
  if (x.size() < 2) return 0.0;
  const auto& kern = simd::active_kernels();
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mean;
    sq[i] = d * d;
  }
  const double m2 = kern.reduce_sum(sq.data(), static_cast<long>(sq.size()));
  return std::sqrt(m2 / (static_cast<double>(x.size()) - 1.0));
}

// Standard normal CDF and upper tail, each computed from its own erfc so the
// log of either never cancels.
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double normal_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// ---------------------------------------------------------------------------
// Simulation helpers
// ---------------------------------------------------------------------------

// Exact subordinator increment over one clock window of length dT >= 0.
// Gamma and inverse-Gaussian windows are sampled from the family's exact
// increment law (both families are closed under convolution in the window
// length); the identity clock contributes the window itself.
double window_increment(RngStream& rng, const SubordinatorSpec& spec,
                        double dT) {
  if (dT <= 0.0) return 0.0;
  switch (spec.family) {
    case ClockFamily::IdentityClock:
      return dT;
    case ClockFamily::GammaClock: {
      const double shape = spec.mass_rate() * dT / spec.nu;
      const double stoch = shape > 0.0 ? rng.gamma(shape, spec.nu) : 0.0;
      return spec.drift * dT + stoch;
    }
    case ClockFamily::InverseGaussianClock: {
      const double m = spec.mass_rate() * dT;
      const double stoch =
          m > 0.0 ? rng.inverse_gaussian(m, spec.lambda * m * m) : 0.0;
      return spec.drift * dT + stoch;
    }
  }
  throw UnsupportedSpecError("unknown subordinator family");
}

// Reads the Brownian path at an arbitrary nonnegative time u: a Brownian
// bridge between the bracketing grid nodes inside the simulated horizon, an
// independent Gaussian extension beyond it. Consumes exactly one normal
// draw on every call, so the stream layout is independent of where u lands.
double brownian_at(const double* path, int n_steps, double dt_eff,
                   double horizon, double u, RngStream& rng) {
  const double z = rng.normal();
  if (u >= horizon) return path[n_steps] + std::sqrt(u - horizon) * z;
  const int k = std::min(static_cast<int>(u / dt_eff), n_steps - 1);
  const double t0 = k * dt_eff;
  const double t1 = (k + 1) * dt_eff;
  const double frac = (u - t0) / (t1 - t0);
  const double var = std::max((u - t0) * (t1 - u) / (t1 - t0), 0.0);
  return path[k] + frac * (path[k + 1] - path[k]) + std::sqrt(var) * z;
}

// Euler stepping coefficients of one activity factor, precomputed once.
struct FactorStep {
  double kappa_dt = 0.0;
  double sig_sdt = 0.0;
  double eps = 0.0;
  bool deterministic = false;
  bool sqrt_diffusion = false;

  FactorStep(const ActivityModel& m, double dt_eff, double eps_override) {
    kappa_dt = m.kappa * dt_eff;
    sig_sdt = m.sigma_v * std::sqrt(dt_eff);
    eps = eps_override;
    deterministic = m.kind == ActivityKind::DeterministicUnit;
    sqrt_diffusion = m.kind == ActivityKind::CIR;
  }

  // Advances (v, T) for a chunk with the shared kernels; the deterministic
  // factor keeps v at its (validated) unit start and writes the clock node
  // exactly, matching the one-factor clock simulator bitwise.
  void advance(const simd::Kernels& kern, double dt_eff, double horizon,
               int n_steps, int k, std::vector<double>& v,
               std::vector<double>& T, const std::vector<double>& z) const {
    const std::size_t m = v.size();
    if (deterministic) {
      const double node =
          (1.0 + eps) * (horizon * (static_cast<double>(k + 1) / n_steps));
      for (std::size_t i = 0; i < m; ++i) T[i] = node;
      return;
    }
    if (sqrt_diffusion)
      kern.step_sqrt(v.data(), T.data(), z.data(), static_cast<long>(m),
                     kappa_dt, sig_sdt, eps, dt_eff);
    else
      kern.step_linear(v.data(), T.data(), z.data(), static_cast<long>(m),
                       kappa_dt, sig_sdt, eps, dt_eff);
  }
};

struct StepGrid {
  int n_steps = 0;
  double dt_eff = 0.0;
};

StepGrid resolve_steps(double t, double dt, std::size_t n_paths) {
  if (!(t > 0.0) || !std::isfinite(t))
    throw DomainError("horizon t must be positive and finite");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw DomainError("dt must be positive and finite");
  if (dt > t) throw DomainError("dt must not exceed the horizon");
  if (n_paths < 1000)
    throw DomainError("the oracle needs at least 1000 paths");
  StepGrid g;
  g.n_steps = static_cast<int>(std::ceil(t / dt - 1e-9));
  g.dt_eff = t / g.n_steps;
  return g;
}

constexpr std::size_t kChunk = 1024;

}  // namespace

// ---------------------------------------------------------------------------
// EmpiricalDistribution
// ---------------------------------------------------------------------------

EmpiricalDistribution EmpiricalDistribution::from_samples(
    std::vector<double> raw) {
  if (raw.empty()) throw DomainError("empirical law needs a nonempty sample");
  for (double x : raw)
    if (!std::isfinite(x))
      throw DomainError("empirical law rejects non-finite samples");
  const std::size_t n = raw.size();
  const double dn = static_cast<double>(n);
  const auto& kern = simd::active_kernels();

  EmpiricalDistribution out;

  // Moments in original sample order (fixed-order reductions).
  out.mean = kern.reduce_sum(raw.data(), static_cast<long>(n)) / dn;
  std::vector<double> c2(n), c3(n), c4(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = raw[i] - out.mean;
    c2[i] = d * d;
    c3[i] = c2[i] * d;
    c4[i] = c2[i] * c2[i];
  }
  const double m2 = kern.reduce_sum(c2.data(), static_cast<long>(n)) / dn;
  const double m3 = kern.reduce_sum(c3.data(), static_cast<long>(n)) / dn;
  const double m4 = kern.reduce_sum(c4.data(), static_cast<long>(n)) / dn;
  out.variance = n > 1 ? m2 * dn / (dn - 1.0) : 0.0;
  out.mean_se = std::sqrt(out.variance / dn);
  out.variance_se =
      n > 1 ? std::sqrt(std::max(m4 - m2 * m2 * (dn - 3.0) / (dn - 1.0), 0.0) /
                        dn)
            : 0.0;
  out.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;

  // Skewness standard error: deterministic block resampling in original
  // order when the sample is large enough, the normal-theory closed form
  // otherwise.
  const std::size_t kBlocks = 64;
  if (n >= kBlocks * kBlocks && m2 > 0.0) {
    const std::size_t bs = n / kBlocks;
    std::vector<double> bskew;
    bskew.reserve(kBlocks);
    for (std::size_t b = 0; b < kBlocks; ++b) {
      const double* x = raw.data() + b * bs;
      double bm = 0.0;
      for (std::size_t i = 0; i < bs; ++i) bm += x[i];
      bm /= static_cast<double>(bs);
      double b2 = 0.0, b3 = 0.0;
      for (std::size_t i = 0; i < bs; ++i) {
        const double d = x[i] - bm;
        b2 += d * d;
        b3 += d * d * d;
      }
      b2 /= static_cast<double>(bs);
      b3 /= static_cast<double>(bs);
      if (b2 > 0.0) bskew.push_back(b3 / std::pow(b2, 1.5));
    }
    if (bskew.size() >= 8) {
      double gm = 0.0;
      for (double g : bskew) gm += g;
      gm /= static_cast<double>(bskew.size());
      double gv = 0.0;
      for (double g : bskew) gv += (g - gm) * (g - gm);
      gv /= static_cast<double>(bskew.size() - 1);
      out.skewness_se = std::sqrt(gv / static_cast<double>(bskew.size()));
    }
  }
  if (out.skewness_se == 0.0 && n > 3) {
    out.skewness_se = std::sqrt(6.0 * dn * (dn - 1.0) /
                                ((dn - 2.0) * (dn + 1.0) * (dn + 3.0)));
  }

  std::sort(raw.begin(), raw.end());
  out.samples = std::move(raw);

  // Histogram with Freedman-Diaconis bin width, clamped to [16, 512] bins.
  const double lo = out.samples.front();
  const double hi = out.samples.back();
  const double iqr = out.samples[(3 * n) / 4] - out.samples[n / 4];
  if (hi > lo) {
    const double fd = 2.0 * iqr * std::pow(dn, -1.0 / 3.0);
    std::size_t bins =
        fd > 0.0 ? static_cast<std::size_t>(std::ceil((hi - lo) / fd)) : 512;
    bins = std::min<std::size_t>(512, std::max<std::size_t>(16, bins));
    const double width = (hi - lo) / static_cast<double>(bins);
    out.bin_edges.resize(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k)
      out.bin_edges[k] = lo + width * static_cast<double>(k);
    out.bin_edges.back() = hi;
    std::vector<std::size_t> counts(bins, 0);
    for (double x : out.samples) {
      std::size_t idx = static_cast<std::size_t>((x - lo) / width);
      if (idx >= bins) idx = bins - 1;
      ++counts[idx];
    }
    out.bin_density.resize(bins);
    for (std::size_t k = 0; k < bins; ++k)
      out.bin_density[k] = static_cast<double>(counts[k]) / (dn * width);
  } else {
    out.bin_edges = {lo - 0.5, lo + 0.5};
    out.bin_density = {1.0};
  }

  const double sd = std::sqrt(out.variance);
  const double spread = std::min(sd, iqr / 1.34);
  out.kde_bandwidth = spread > 0.0 ? 0.9 * spread * std::pow(dn, -0.2) : 0.0;
  return out;
}

double EmpiricalDistribution::ecdf(double x) const {
  const auto it = std::upper_bound(samples.begin(), samples.end(), x);
  return static_cast<double>(it - samples.begin()) /
         static_cast<double>(samples.size());
}

double EmpiricalDistribution::histogram_density(double x) const {
  if (bin_density.empty() || x < bin_edges.front() || x > bin_edges.back())
    return 0.0;
  const double lo = bin_edges.front();
  const double width =
      (bin_edges.back() - lo) / static_cast<double>(bin_density.size());
  std::size_t idx = static_cast<std::size_t>((x - lo) / width);
  if (idx >= bin_density.size()) idx = bin_density.size() - 1;
  return bin_density[idx];
}

EmpiricalDistribution::CfPoint EmpiricalDistribution::cf(double theta) const {
  const std::size_t n = samples.size();
  const double dn = static_cast<double>(n);
  const auto& kern = simd::active_kernels();
  std::vector<double> c(n), s(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = std::cos(theta * samples[i]);
    s[i] = std::sin(theta * samples[i]);
  }
  CfPoint p;
  const double mc = kern.reduce_sum(c.data(), static_cast<long>(n)) / dn;
  const double ms = kern.reduce_sum(s.data(), static_cast<long>(n)) / dn;
  p.value = {mc, ms};
  p.se_real = sample_sd(c, mc) / std::sqrt(dn);
  p.se_imag = sample_sd(s, ms) / std::sqrt(dn);
  return p;
}

EmpiricalDistribution::LaplacePoint EmpiricalDistribution::laplace(
    double r) const {
  const std::size_t n = samples.size();
  const double dn = static_cast<double>(n);
  const auto& kern = simd::active_kernels();
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = std::exp(-r * samples[i]);
  LaplacePoint p;
  p.value = kern.reduce_sum(e.data(), static_cast<long>(n)) / dn;
  p.se = sample_sd(e, p.value) / std::sqrt(dn);
  return p;
}

double EmpiricalDistribution::ks_against(
    const std::function<double(double)>& cdf) const {
  const std::size_t n = samples.size();
  const double dn = static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i + 1) / dn));
    d = std::max(d, std::abs(f - static_cast<double>(i) / dn));
  }
  return d;
}

double ks_two_sample(const EmpiricalDistribution& a,
                     const EmpiricalDistribution& b) {
  const auto& x = a.samples;
  const auto& y = b.samples;
  if (x.empty() || y.empty())
    throw DomainError("two-sample KS needs nonempty samples");
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / x.size() -
                             static_cast<double>(j) / y.size()));
  }
  return d;
}

double anderson_darling_normal(const EmpiricalDistribution& emp) {
  const auto& s = emp.samples;
  const std::size_t n = s.size();
  if (n < 8) throw DomainError("Anderson-Darling needs at least 8 samples");
  const double dn = static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lf = std::log(normal_cdf(s[i]));
    const double lq = std::log(normal_tail(s[n - 1 - i]));
    acc += (2.0 * static_cast<double>(i) + 1.0) * (lf + lq);
  }
  return -dn - acc / dn;
}

// ---------------------------------------------------------------------------
// One-factor simulation
// ---------------------------------------------------------------------------

PathBundle simulate_Y_paths(const ActivityModel& model,
                            const LevyComposition& levy,
                            const SubordinatorSpec& spec, double t,
                            std::size_t n_paths, double dt, std::uint64_t seed,
                            std::size_t store_paths, int workers) {
  model.validate();
  levy.validate();
  spec.validate();
  const StepGrid g = resolve_steps(t, dt, n_paths);
  const int n_steps = g.n_steps;
  const double dt_eff = g.dt_eff;
  const bool identity = spec.family == ClockFamily::IdentityClock;

  PathBundle bundle;
  bundle.dt = dt_eff;
  bundle.n_steps = n_steps;
  bundle.n_paths = n_paths;
  bundle.seed = seed;
  bundle.stored_paths = std::min<std::size_t>(store_paths, n_paths);
  const std::size_t nodes = static_cast<std::size_t>(n_steps) + 1;
  bundle.B.assign(bundle.stored_paths * nodes, 0.0);
  bundle.v.assign(bundle.stored_paths * nodes, 0.0);
  bundle.T.assign(bundle.stored_paths * nodes, 0.0);
  bundle.J.assign(bundle.stored_paths * nodes, 0.0);
  bundle.B_end.assign(n_paths, 0.0);
  bundle.v_end.assign(n_paths, 0.0);
  bundle.T_end.assign(n_paths, 0.0);
  bundle.J_end.assign(n_paths, 0.0);
  bundle.Z_end.assign(n_paths, 0.0);
  bundle.Y_end.assign(n_paths, 0.0);
  bundle.B_eval_end.assign(n_paths, 0.0);
  bundle.W_end.assign(n_paths, 0.0);

  const auto& kern = simd::active_kernels();
  const FactorStep factor(model, dt_eff, model.eps_floor);
  const double sq = std::sqrt(dt_eff);
  const double orth = levy.orthogonal_loading();
  const int n_chunks = static_cast<int>((n_paths + kChunk - 1) / kChunk);
  if (workers == 0) workers = default_workers();

  parallel_for(n_chunks, workers, [&](int chunk) {
    const std::size_t p_lo = static_cast<std::size_t>(chunk) * kChunk;
    const std::size_t p_hi = std::min(n_paths, p_lo + kChunk);
    const std::size_t m = p_hi - p_lo;
    std::vector<RngStream> clk, sub, bri, term;
    clk.reserve(m);
    sub.reserve(m);
    bri.reserve(m);
    term.reserve(m);
    for (std::size_t p = p_lo; p < p_hi; ++p) {
      const auto pid = static_cast<std::uint32_t>(p);
      clk.push_back(make_stream(seed, pid, StreamPurpose::kClockDriver));
      sub.push_back(make_stream(seed, pid, StreamPurpose::kSubordinator));
      bri.push_back(make_stream(seed, pid, StreamPurpose::kBridge));
      term.push_back(make_stream(seed, pid, StreamPurpose::kTerminalGaussian));
    }
    std::vector<double> Bmat(m * nodes, 0.0);
    std::vector<double> v(m, model.v0), T(m, 0.0), Tprev(m, 0.0), J(m, 0.0),
        z(m);
    auto store_nodes = [&](int step) {
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t p = p_lo + i;
        if (p >= bundle.stored_paths) break;
        bundle.B[p * nodes + step] = Bmat[i * nodes + step];
        bundle.v[p * nodes + step] = std::max(v[i], 0.0);
        bundle.T[p * nodes + step] = T[i];
        bundle.J[p * nodes + step] = J[i];
      }
    };
    for (int k = 0; k < n_steps; ++k) {
      store_nodes(k);
      for (std::size_t i = 0; i < m; ++i) z[i] = clk[i].normal();
      factor.advance(kern, dt_eff, t, n_steps, k, v, T, z);
      for (std::size_t i = 0; i < m; ++i) {
        Bmat[i * nodes + k + 1] = Bmat[i * nodes + k] + sq * z[i];
        if (identity) {
          J[i] = T[i];
        } else {
          J[i] += window_increment(sub[i], spec, T[i] - Tprev[i]);
          Tprev[i] = T[i];
        }
      }
    }
    store_nodes(n_steps);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t p = p_lo + i;
      const double u = J[i];
      const double b_at =
          brownian_at(&Bmat[i * nodes], n_steps, dt_eff, t, u, bri[i]);
      const double w_at = std::sqrt(u) * term[i].normal();
      const double Z = levy.rho * b_at + orth * w_at;
      bundle.B_end[p] = Bmat[i * nodes + n_steps];
      bundle.v_end[p] = std::max(v[i], 0.0);
      bundle.T_end[p] = T[i];
      bundle.J_end[p] = u;
      bundle.B_eval_end[p] = b_at;
      bundle.W_end[p] = w_at;
      bundle.Z_end[p] = Z;
      bundle.Y_end[p] = levy.alpha * u + levy.beta * Z;
    }
  });
  return bundle;
}

EmpiricalDistribution simulate_Y(const ActivityModel& model,
                                 const LevyComposition& levy,
                                 const SubordinatorSpec& spec, double t,
                                 std::size_t n_paths, double dt,
                                 std::uint64_t seed, std::size_t store_paths,
                                 int workers) {
  return EmpiricalDistribution::from_samples(
      simulate_Y_paths(model, levy, spec, t, n_paths, dt, seed, store_paths,
                       workers)
          .Y_end);
}

// ---------------------------------------------------------------------------
// Two-factor simulation
// ---------------------------------------------------------------------------

PathBundle simulate_two_factor_paths(const TwoFactorModel& model, double t,
                                     std::size_t n_paths, double dt,
                                     std::uint64_t seed,
                                     std::size_t store_paths, int workers) {
  model.validate();
  const StepGrid g = resolve_steps(t, dt, n_paths);
  const int n_steps = g.n_steps;
  const double dt_eff = g.dt_eff;
  const bool identity = model.spec.family == ClockFamily::IdentityClock;

  PathBundle bundle;
  bundle.dt = dt_eff;
  bundle.n_steps = n_steps;
  bundle.n_paths = n_paths;
  bundle.seed = seed;
  bundle.stored_paths = std::min<std::size_t>(store_paths, n_paths);
  const std::size_t nodes = static_cast<std::size_t>(n_steps) + 1;
  bundle.B.assign(bundle.stored_paths * nodes, 0.0);
  bundle.v.assign(bundle.stored_paths * nodes, 0.0);
  bundle.T.assign(bundle.stored_paths * nodes, 0.0);
  bundle.B2.assign(bundle.stored_paths * nodes, 0.0);
  bundle.v2.assign(bundle.stored_paths * nodes, 0.0);
  bundle.T2.assign(bundle.stored_paths * nodes, 0.0);
  bundle.J.assign(bundle.stored_paths * nodes, 0.0);
  bundle.B_end.assign(n_paths, 0.0);
  bundle.v_end.assign(n_paths, 0.0);
  bundle.T_end.assign(n_paths, 0.0);
  bundle.B2_end.assign(n_paths, 0.0);
  bundle.v2_end.assign(n_paths, 0.0);
  bundle.T2_end.assign(n_paths, 0.0);
  bundle.J_end.assign(n_paths, 0.0);
  bundle.Y_end.assign(n_paths, 0.0);
  bundle.B_eval_end.assign(n_paths, 0.0);
  bundle.B2_eval_end.assign(n_paths, 0.0);
  bundle.W_end.assign(n_paths, 0.0);
  bundle.S_end.assign(n_paths, 0.0);

  const auto& kern = simd::active_kernels();
  const FactorStep fc(model.clock_c, dt_eff, model.clock_c.eps_floor);
  const FactorStep fj(model.clock_j, dt_eff, 0.0);
  const double sq = std::sqrt(dt_eff);
  const double rho = model.rho;
  const double orth_c = std::sqrt(std::max(1.0 - rho * rho, 0.0));
  const double carry = (model.r_int - model.delta_div) * t;
  const int n_chunks = static_cast<int>((n_paths + kChunk - 1) / kChunk);
  if (workers == 0) workers = default_workers();

  parallel_for(n_chunks, workers, [&](int chunk) {
    const std::size_t p_lo = static_cast<std::size_t>(chunk) * kChunk;
    const std::size_t p_hi = std::min(n_paths, p_lo + kChunk);
    const std::size_t m = p_hi - p_lo;
    std::vector<RngStream> drc, drj, sub, bri, wj, wc;
    drc.reserve(m);
    drj.reserve(m);
    sub.reserve(m);
    bri.reserve(m);
    wj.reserve(m);
    wc.reserve(m);
    for (std::size_t p = p_lo; p < p_hi; ++p) {
      const auto pid = static_cast<std::uint32_t>(p);
      drc.push_back(make_stream(seed, pid, StreamPurpose::kClockDriver));
      drj.push_back(make_stream(seed, pid, StreamPurpose::kSecondFactor));
      sub.push_back(make_stream(seed, pid, StreamPurpose::kSubordinator));
      bri.push_back(make_stream(seed, pid, StreamPurpose::kBridge));
      wj.push_back(make_stream(seed, pid, StreamPurpose::kTerminalGaussian));
      wc.push_back(make_stream(seed, pid, StreamPurpose::kOrthogonal));
    }
    std::vector<double> Bc(m * nodes, 0.0), Bj(m * nodes, 0.0);
    std::vector<double> vc(m, model.clock_c.v0), Tc(m, 0.0);
    std::vector<double> vj(m, model.clock_j.v0), Tj(m, 0.0);
    std::vector<double> Tjprev(m, 0.0), J(m, 0.0), zc(m), zj(m), zeff(m);
    auto store_nodes = [&](int step) {
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t p = p_lo + i;
        if (p >= bundle.stored_paths) break;
        bundle.B[p * nodes + step] = Bc[i * nodes + step];
        bundle.v[p * nodes + step] = std::max(vc[i], 0.0);
        bundle.T[p * nodes + step] = Tc[i];
        bundle.B2[p * nodes + step] = Bj[i * nodes + step];
        bundle.v2[p * nodes + step] = std::max(vj[i], 0.0);
        bundle.T2[p * nodes + step] = Tj[i];
        bundle.J[p * nodes + step] = J[i];
      }
    };
    for (int k = 0; k < n_steps; ++k) {
      store_nodes(k);
      for (std::size_t i = 0; i < m; ++i) {
        zc[i] = drc[i].normal();
        zj[i] = drj[i].normal();
        zeff[i] = orth_c * zc[i] + rho * zj[i];
      }
      fc.advance(kern, dt_eff, t, n_steps, k, vc, Tc, zeff);
      fj.advance(kern, dt_eff, t, n_steps, k, vj, Tj, zj);
      for (std::size_t i = 0; i < m; ++i) {
        Bc[i * nodes + k + 1] = Bc[i * nodes + k] + sq * zc[i];
        Bj[i * nodes + k + 1] = Bj[i * nodes + k] + sq * zj[i];
        if (identity) {
          J[i] = Tj[i];
        } else {
          J[i] += window_increment(sub[i], model.spec, Tj[i] - Tjprev[i]);
          Tjprev[i] = Tj[i];
        }
      }
    }
    store_nodes(n_steps);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t p = p_lo + i;
      const double uc = Tc[i];
      // Fixed draw order: B^c bridge, then B^j bridge, from one stream.
      const double bc_at =
          brownian_at(&Bc[i * nodes], n_steps, dt_eff, t, uc, bri[i]);
      const double bj_at =
          brownian_at(&Bj[i * nodes], n_steps, dt_eff, t, uc, bri[i]);
      const double wc_at = std::sqrt(uc) * wc[i].normal();
      const double xc = model.a_c[0] * uc + model.a_c[1] * bc_at +
                        model.a_c[2] * bj_at + model.a_c[3] * wc_at;
      const double wj_at = std::sqrt(J[i]) * wj[i].normal();
      const double xj = model.a_j[0] * J[i] + model.a_j[1] * wj_at;
      const double Y = xc + xj;
      bundle.B_end[p] = Bc[i * nodes + n_steps];
      bundle.v_end[p] = std::max(vc[i], 0.0);
      bundle.T_end[p] = Tc[i];
      bundle.B2_end[p] = Bj[i * nodes + n_steps];
      bundle.v2_end[p] = std::max(vj[i], 0.0);
      bundle.T2_end[p] = Tj[i];
      bundle.J_end[p] = J[i];
      bundle.B_eval_end[p] = bc_at;
      bundle.B2_eval_end[p] = bj_at;
      bundle.W_end[p] = wj_at;
      bundle.Y_end[p] = Y;
      bundle.S_end[p] = std::exp(carry + Y);
    }
  });
  return bundle;
}

EmpiricalDistribution simulate_two_factor(const TwoFactorModel& model,
                                          double t, std::size_t n_paths,
                                          double dt, std::uint64_t seed,
                                          std::size_t store_paths,
                                          int workers) {
  return EmpiricalDistribution::from_samples(
      simulate_two_factor_paths(model, t, n_paths, dt, seed, store_paths,
                                workers)
          .Y_end);
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

ComparisonReport compare(const EmpiricalDistribution& empirical,
                         const TransformResult& analytic) {
  const auto& arg = analytic.arguments;
  const auto& val = analytic.values;
  if (arg.empty() || arg.size() != val.size())
    throw ConfigError("transform result has no usable argument grid");
  ComparisonReport rep;

  if (analytic.kind == TransformKind::Cf) {
    double worst = 0.0;
    for (std::size_t k = 0; k < arg.size(); ++k)
      worst = std::max(worst, std::abs(empirical.cf(arg[k]).value - val[k]));
    rep.max_cf_error = worst;
    return rep;
  }
  if (analytic.kind == TransformKind::Laplace) {
    double worst = 0.0;
    for (std::size_t k = 0; k < arg.size(); ++k) {
      const double a = val[k].real();
      const double e = empirical.laplace(arg[k]).value;
      worst = std::max(worst, std::abs(e - a) / std::max(std::abs(a), 1e-300));
    }
    rep.max_laplace_rel_error = worst;
    return rep;
  }

  // Density comparison.
  if (arg.size() < 2)
    throw ConfigError("density comparison needs at least two grid nodes");
  for (std::size_t k = 1; k < arg.size(); ++k)
    if (!(arg[k] > arg[k - 1]))
      throw ConfigError("density argument grid must be strictly increasing");
  const double covered =
      empirical.ecdf(arg.back()) - empirical.ecdf(arg.front());
  if (covered < 0.5) {
    std::ostringstream msg;
    msg << "density grid [" << arg.front() << ", " << arg.back()
        << "] covers only " << covered * 100.0
        << "% of the sample; supports are incompatible";
    throw ConfigError(msg.str());
  }

  const std::size_t ng = arg.size();
  std::vector<double> F(ng, 0.0);
  for (std::size_t k = 1; k < ng; ++k)
    F[k] = F[k - 1] + 0.5 * (arg[k] - arg[k - 1]) *
                          (val[k].real() + val[k - 1].real());
  double ks = 0.0, l1 = 0.0, mass = 0.0, m1 = 0.0, msq = 0.0;
  for (std::size_t k = 0; k < ng; ++k) {
    ks = std::max(ks, std::abs(empirical.ecdf(arg[k]) - F[k]));
    const double wl = k > 0 ? arg[k] - arg[k - 1] : 0.0;
    const double wr = k + 1 < ng ? arg[k + 1] - arg[k] : 0.0;
    const double w = 0.5 * (wl + wr);
    const double f = val[k].real();
    l1 += w * std::abs(f - empirical.histogram_density(arg[k]));
    mass += w * f;
    m1 += w * arg[k] * f;
    msq += w * arg[k] * arg[k] * f;
  }
  rep.ks = ks;
  rep.l1_density = l1;
  if (mass > 0.0) {
    const double amean = m1 / mass;
    const double avar = std::max(msq / mass - amean * amean, 0.0);
    rep.mean_gap = empirical.mean - amean;
    rep.mean_gap_se = empirical.mean_se;
    rep.variance_gap = empirical.variance - avar;
    rep.variance_gap_se = empirical.variance_se;
  }
  return rep;
}

}  // namespace tcl
