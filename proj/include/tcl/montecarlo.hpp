#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "tcl/activity.hpp"
#include "tcl/levy.hpp"
#include "tcl/model_zoo.hpp"
#include "tcl/paths.hpp"
#include "tcl/subordinator.hpp"
#include "tcl/transforms.hpp"

namespace tcl {

// ---------------------------------------------------------------------------
// Empirical law of a scalar sample
// ---------------------------------------------------------------------------

// Sorted sample plus the summary statistics the comparison layer consumes.
// Moment standard errors are estimated before sorting (mean/variance by the
// usual closed forms, skewness by deterministic block resampling in original
// sample order), so the object is a pure function of the sample sequence.
struct EmpiricalDistribution {
  std::vector<double> samples;      // sorted ascending
  std::vector<double> bin_edges;    // histogram edges, bin_density.size() + 1
  std::vector<double> bin_density;  // normalized heights (integrates to <= 1)
  double kde_bandwidth = 0.0;       // Silverman rule-of-thumb bandwidth

  double mean = 0.0, mean_se = 0.0;
  double variance = 0.0, variance_se = 0.0;
  double skewness = 0.0, skewness_se = 0.0;

  // Builds every derived field from the raw (unsorted) sample sequence.
  static EmpiricalDistribution from_samples(std::vector<double> raw);

  std::size_t size() const { return samples.size(); }

  // Right-continuous empirical CDF, nondecreasing from 0 to 1.
  double ecdf(double x) const;

  // Piecewise-constant histogram density (0 outside the binned range).
  double histogram_density(double x) const;

  // Sample characteristic function at theta with per-component standard
  // errors of the real and imaginary parts.
  struct CfPoint {
    std::complex<double> value;
    double se_real = 0.0;
    double se_imag = 0.0;
  };
  CfPoint cf(double theta) const;

  // Sample Laplace transform E e^{-r X} with its standard error.
  struct LaplacePoint {
    double value = 0.0;
    double se = 0.0;
  };
  LaplacePoint laplace(double r) const;

  // Kolmogorov-Smirnov distance against a continuous CDF callable,
  // evaluated with both one-sided limits at every sample point.
  double ks_against(const std::function<double(double)>& cdf) const;
};

// Two-sample Kolmogorov-Smirnov distance between sorted samples.
double ks_two_sample(const EmpiricalDistribution& a,
                     const EmpiricalDistribution& b);

// Anderson-Darling statistic A^2 against the standard normal law with fully
// specified parameters (no fitting); the 5% critical value is 2.492.
double anderson_darling_normal(const EmpiricalDistribution& emp);

// ---------------------------------------------------------------------------
// Path simulation
// ---------------------------------------------------------------------------

// Jointly simulates (B, v, T, J, W, Y) for the one-factor composition
// Y_t = alpha J_{T_t} + beta Z_{J_{T_t}}, Z = rho B + sqrt(1-rho^2) W, where
// the SAME Brownian path B drives the activity rate and enters Z. Per path:
// full-truncation Euler for (B, v, T) to the horizon; exact subordinator
// increments over the dt windows aligned to the T-path; B read at the
// subordinated time J_{T_t} by a Brownian bridge inside [0, t] (independent
// Gaussian extension beyond t); W as one Gaussian draw of variance J_{T_t}.
// Identical (config, seed) gives bitwise-identical output for any worker
// count: every variate comes from a counter-based stream addressed by
// (seed, path, purpose) and reductions are fixed-order.
PathBundle simulate_Y_paths(const ActivityModel& model,
                            const LevyComposition& levy,
                            const SubordinatorSpec& spec, double t,
                            std::size_t n_paths, double dt, std::uint64_t seed,
                            std::size_t store_paths = 64, int workers = 0);

// Empirical law of Y_t from simulate_Y_paths.
EmpiricalDistribution simulate_Y(const ActivityModel& model,
                                 const LevyComposition& levy,
                                 const SubordinatorSpec& spec, double t,
                                 std::size_t n_paths, double dt,
                                 std::uint64_t seed,
                                 std::size_t store_paths = 64,
                                 int workers = 0);

// Two-factor generalization: Y_t = X^c_{T^c_t} + X^j_{T^j_t} with
//   X^c_s = a_c1 s + a_c2 B^c_s + a_c3 B^j_s + a_c4 W^c_s,
//   X^j_s = a_j1 J_s + a_j2 W^j_{J_s},
// the continuous clock driven by sqrt(1-rho^2) B^c + rho B^j with the
// eps floor, the jump clock driven by B^j alone without a floor. First-factor
// arrays hold the continuous system, second-factor arrays the jump system;
// J is aligned to T^j. B^c and B^j are read at T^c_t by the same
// bridge/extension rule as above; W^c and W^j are single Gaussian draws.
PathBundle simulate_two_factor_paths(const TwoFactorModel& model, double t,
                                     std::size_t n_paths, double dt,
                                     std::uint64_t seed,
                                     std::size_t store_paths = 64,
                                     int workers = 0);

// Empirical law of the two-factor log return Y_t (the price map is
// S_t = S_0 exp((r_int - delta_div) t + Y_t), recorded per path in S_end).
EmpiricalDistribution simulate_two_factor(const TwoFactorModel& model,
                                          double t, std::size_t n_paths,
                                          double dt, std::uint64_t seed,
                                          std::size_t store_paths = 64,
                                          int workers = 0);

// ---------------------------------------------------------------------------
// Comparison against the transform pipeline
// ---------------------------------------------------------------------------

// Metrics of one empirical-vs-analytic comparison; only the fields that make
// sense for the analytic result's kind are engaged. A density result fills
// the distribution metrics, a characteristic function fills max_cf_error,
// a Laplace batch fills max_laplace_rel_error.
struct ComparisonReport {
  std::optional<double> ks;          // sup over the grid of |ECDF - CDF|
  std::optional<double> l1_density;  // integrated |pdf - histogram density|
  std::optional<double> max_cf_error;           // absolute, over arguments
  std::optional<double> max_laplace_rel_error;  // relative, over arguments
  std::optional<double> mean_gap, mean_gap_se;
  std::optional<double> variance_gap, variance_gap_se;
};

// Deterministic comparison of an empirical law against one TransformResult.
// For densities the implied CDF is the cumulative trapezoid of the values
// over the argument grid and the KS sup runs over the grid nodes; the grid
// must be strictly increasing and overlap at least half of the sample mass
// (ConfigError otherwise). Moment gaps are empirical minus analytic with the
// empirical standard error attached.
ComparisonReport compare(const EmpiricalDistribution& empirical,
                         const TransformResult& analytic);

}  // namespace tcl
