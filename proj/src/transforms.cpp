#include "tcl/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "tcl/errors.hpp"
#include "tcl/parallel.hpp"

namespace tcl {
namespace {

using cplx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;
// Below this |rho| the correlated kernels are numerically singular and the
// conditional law factorizes through the clock to working precision.
constexpr double kRhoIndependentBand = 1e-3;
constexpr double kTimeGuard = 1e-12;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// exponent of E[e^{-i xi T_tau} | v_0 = x] = exp(constant + x_coeff * x)
AffineExponent minus_xi_exponent(const ActivityModel& model, double tau,
                                 double xi) {
  return conditional_cf_exponent(model, tau, 0.0, -xi);
}

cplx clock_cf_minus(const ActivityModel& model, double t, double xi) {
  return std::exp(minus_xi_exponent(model, t, xi).value(model.v0, 0.0));
}

// mean / variance of T_t from central differences of the log-CF
struct ClockMoments {
  double mean = 0.0;
  double var = 0.0;
};
ClockMoments clock_moments(const ActivityModel& model, double t) {
  const double h = 1e-3;
  const cplx ph = minus_xi_exponent(model, t, h).value(model.v0, 0.0);
  ClockMoments m;
  m.mean = -ph.imag() / h;
  m.var = std::max(-2.0 * ph.real() / (h * h), 0.0);
  return m;
}

std::vector<double> geomspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  const double ratio = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[i] = lo * std::exp(ratio * i);
  out.back() = hi;
  return out;
}

double normal_pdf(double z, double mean, double var) {
  const double d = z - mean;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * kPi * var);
}

std::vector<double> trapezoid_weights(const std::vector<double>& g) {
  const std::size_t n = g.size();
  std::vector<double> w(n, 0.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = 0.5 * (g[i + 1] - g[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

void require_increasing(const std::vector<double>& g, const char* what) {
  if (g.empty()) throw ConfigError( std::string(what) + " grid is empty");
  for (std::size_t i = 0; i + 1 < g.size(); ++i)
    if (!(g[i + 1] > g[i]))
      throw ConfigError(
                        std::string(what) + " grid must be strictly increasing");
}

// ---------------------------------------------------------------------------
// Window node layout
// ---------------------------------------------------------------------------

struct WindowNodes {
  std::vector<double> j, w;  // inner nodes first, then the tail nodes
  std::size_t n_inner = 0;
  double jmax = 0.0;
};

WindowNodes flatten_window(const WindowRule& wr) {
  WindowNodes wn;
  wn.j = wr.inner.x;
  wn.w = wr.inner.w;
  wn.n_inner = wr.inner.size();
  wn.j.insert(wn.j.end(), wr.outer.x.begin(), wr.outer.x.end());
  wn.w.insert(wn.w.end(), wr.outer.w.begin(), wr.outer.w.end());
  wn.jmax = wr.jmax;
  return wn;
}

// ---------------------------------------------------------------------------
// Fourier factor along the window: F(xi, j) = int e^{i xi y} f_{J_y}(j) dy,
// or the inverse-clock CF chi(xi, F_j) for the factored assembly. The
// identity clock is an atom in either reading: both reduce to e^{i xi j}.
// ---------------------------------------------------------------------------

class WindowFactor {
 public:
  enum class Mode { DensityFourier, InverseCf };

  WindowFactor(const SubordinatorSpec& spec, const WindowNodes& wn, Mode mode)
      : spec_(spec), j_(wn.j) {
    if (spec_.family == ClockFamily::IdentityClock) return;
    tables_.reserve(j_.size());
    for (double j : j_)
      tables_.push_back(mode == Mode::DensityFourier
                            ? make_fourier_y_table(spec_, j)
                            : make_inverse_cf_table(spec_, j));
  }

  cplx eval(std::size_t k, double xi) const {
    if (spec_.family == ClockFamily::IdentityClock)
      return std::exp(cplx(0.0, xi * j_[k]));
    return tables_[k].eval(xi);
  }

 private:
  // The inverse-clock route to the same Fourier-in-y factor. The level
  // passage identity P(F_j <= y) = P(J_y >= j) ties the inverse-clock CF
  // chi(xi, F_j) = 1 + i xi int e^{i xi y} P(J_y <= j) dy to the density
  // factor through a derivative in the level argument:
  //   int e^{i xi y} f_{J_y}(j) dy = (1/(i xi)) d/dj chi(xi, F_j).
  // A centered difference of the CDF in j realizes that derivative; the
  // constant 1 and the i xi prefactor cancel exactly, leaving a standard
  // e^{i xi y} quadrature table built from CDF values only -- a route fully
  // independent of the density formulas used by the direct factor.
  static FourierYTable make_inverse_cf_table(const SubordinatorSpec& spec,
                                             double j) {
    const double h = std::min(1e-3 * std::max(j, 0.25), 0.45 * j);
    const double mean_rate = spec.unit_mean ? 1.0 : 1.0 + spec.drift;
    const double vr = spec.variance_rate();
    const double hard_cap =
        spec.drift > 0.0 ? (j + h) / spec.drift
                         : std::numeric_limits<double>::infinity();
    double y_cut = std::min(
        hard_cap,
        (j + h) / mean_rate + 4.0 * std::sqrt(vr * std::max(j, vr)) + 1.0);
    while (y_cut < hard_cap &&
           subordinator_cdf(spec, y_cut, j + h) > 1e-14)
      y_cut = std::min(hard_cap, 1.3 * y_cut);
    const int n_panels =
        std::max(6, static_cast<int>(std::ceil(y_cut / 0.3)));
    std::vector<double> edges(n_panels + 1);
    for (int p = 0; p <= n_panels; ++p)
      edges[p] = y_cut * static_cast<double>(p) / n_panels;
    const PanelRule rule = panels(edges, 16);
    FourierYTable tb;
    tb.y = rule.x;
    tb.wf.resize(rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double hi = subordinator_cdf(spec, rule.x[q], j + h);
      const double lo = subordinator_cdf(spec, rule.x[q], j - h);
      tb.wf[q] = rule.w[q] * (hi - lo) / (2.0 * h);
    }
    tb.mass = pairwise_sum(tb.wf.data(), tb.wf.size());
    return tb;
  }

  SubordinatorSpec spec_;
  std::vector<double> j_;
  std::vector<FourierYTable> tables_;
};

// ---------------------------------------------------------------------------
// Tilted window CF table: vals[i * nj + k] = E[e^{-i xi_i T_t} M_{j_k}] where
// M is the exponential (real tilt) or complex-rotation (theta tilt) driver
// martingale stopped at min(j_k, t). One PDE solve per frequency serves every
// window node: snapshots below t are propagated with the closed-form affine
// exponent, nodes at or above t share the final-field integral.
// ---------------------------------------------------------------------------

enum class TiltVariant { RealTilt, ThetaTilt };

std::vector<cplx> window_cf_table(const ActivityModel& model, double t,
                                  double dt, const std::vector<double>& xis,
                                  const WindowNodes& wn, TiltVariant var,
                                  double level, double rho) {
  const std::size_t nx = xis.size();
  const std::size_t nj = wn.j.size();
  std::vector<cplx> vals(nx * nj);
  const std::vector<double> snaps(wn.j.begin(), wn.j.begin() + wn.n_inner);
  parallel_for(static_cast<int>(nx), default_workers(), [&](int task) {
    const std::size_t i = static_cast<std::size_t>(task);
    RateSolveOptions opts;
    opts.dt = dt;
    opts.snap_times = snaps;
    const double xi = xis[i];
    const RateSolveResult res =
        var == TiltVariant::ThetaTilt
            ? solve_Ghat_theta_snapshots(model, level, rho, t, xi, opts)
            : solve_Ghat_snapshots(model, level, rho, t, xi, opts);
    const Axis& ax = res.final_field.axes[0];
    const std::size_t n = ax.x.size();
    for (std::size_t k = 0; k < wn.n_inner; ++k) {
      const AffineExponent ex = minus_xi_exponent(model, t - wn.j[k], xi);
      const PDEField& s = res.snapshots[k];
      cplx acc{0.0, 0.0};
      for (std::size_t p = 0; p < n; ++p)
        acc += ax.w[p] * std::exp(ex.x_coeff * ax.x[p]) * s.values[p];
      vals[i * nj + k] = std::exp(ex.constant) * acc;
    }
    for (std::size_t k = wn.n_inner; k < nj; ++k)
      vals[i * nj + k] = res.final_field.mass;
  });
  return vals;
}

struct WindowAssembly {
  double value = 0.0;
  double last_panel_abs = 0.0;
};

// real-result assembly over the half line xi > 0 (conjugate symmetry folded
// into 2 Re): value = sum_k w_k jw(j_k) Re(sum_i wxi_i F(k) cf(i,k)) / pi
template <typename JWeight>
WindowAssembly assemble_real_window(const WindowNodes& wn,
                                    const PanelRule& xr,
                                    const std::vector<cplx>& vals,
                                    const WindowFactor& F, JWeight&& jw) {
  const std::size_t nx = xr.size();
  const std::size_t nj = wn.j.size();
  std::vector<cplx> terms(nx);
  std::vector<double> contrib(nj);
  for (std::size_t k = 0; k < nj; ++k) {
    for (std::size_t i = 0; i < nx; ++i)
      terms[i] = xr.w[i] * F.eval(k, xr.x[i]) * vals[i * nj + k];
    contrib[k] = wn.w[k] * jw(wn.j[k]) * pairwise_sum(terms).real() / kPi;
  }
  WindowAssembly out;
  out.value = pairwise_sum(contrib);
  out.last_panel_abs = std::abs(pairwise_sum(contrib.data() + (nj - 8), 8));
  return out;
}

void check_window_tail(const WindowAssembly& as, const char* op) {
  if (as.last_panel_abs >
      5e-3 * std::max(std::abs(as.value), std::numeric_limits<double>::min()))
    throw EngineError(
        "QuadratureError",
        std::string(op) +
            ": window integrand not resolved at the upper cutoff (last panel "
            "contributes " +
            fmt(as.last_panel_abs) + " against value " + fmt(as.value) + ")");
}

void validate_common(const ActivityModel& model, const LevyComposition& levy,
                     const SubordinatorSpec& spec, double t) {
  model.validate();
  levy.validate();
  spec.validate();
  if (!(t > 0.0))
    throw DomainError( "transform horizon t must be positive");
}

void require_z_composition(const LevyComposition& levy, const char* op) {
  if (levy.alpha != 0.0 || levy.beta != 1.0)
    throw ConfigError(
                      std::string(op) +
                          " addresses the pure diffusion composition; set "
                          "alpha = 0 and beta = 1 (use the Y-variant for "
                          "general loadings)");
}

LaplaceRoute resolve_route(LaplaceRoute route, double rho, const char* op) {
  if (route == LaplaceRoute::Auto)
    return std::abs(rho) < kRhoIndependentBand ? LaplaceRoute::Independent
                                               : LaplaceRoute::Fourier;
  if (route == LaplaceRoute::Independent &&
      std::abs(rho) >= kRhoIndependentBand)
    throw ConfigError(
                      std::string(op) +
                          ": the independent route is only valid in the "
                          "|rho| < 1e-3 crossover band");
  return route;
}

// two-stage conditioning: E[e^{m J_{T_t}}] through the subordinator cumulant
// and the exponential moment of the clock
double independent_two_stage(const ActivityModel& model,
                             const SubordinatorSpec& spec, double t,
                             double m) {
  const double theta_c = -laplace_cumulant(spec, -m);
  const AffineExponent ex = conditional_exponent_general(model, t, theta_c);
  return std::exp(ex.value(model.v0, 0.0)).real();
}

double laplace_windowed(const ActivityModel& model,
                        const LevyComposition& levy,
                        const SubordinatorSpec& spec, double t, double r,
                        LaplaceRoute route, const char* op) {
  validate_common(model, levy, spec, t);
  if (!std::isfinite(r))
    throw DomainError( "transform argument r must be finite");
  route = resolve_route(route, levy.rho, op);
  const double alpha = levy.alpha;
  const double beta = levy.beta;
  if (route == LaplaceRoute::Independent)
    return independent_two_stage(model, spec, t,
                                 0.5 * r * r * beta * beta - r * alpha);
  // Doubly degenerate composition: a deterministic clock and an identity
  // subordinator make Y_t = alpha*a + beta*Z_a with a = (1+eps)t, so the
  // transform is the plain Gaussian exponential. The closed form keeps the
  // reduction-coherence invariants exact instead of quadrature-limited.
  if (model.kind == ActivityKind::DeterministicUnit &&
      spec.family == ClockFamily::IdentityClock) {
    const double a = (1.0 + model.eps_floor) * t;
    return std::exp(a * (0.5 * r * r * beta * beta - r * alpha));
  }
  const double level = r * beta;  // tilt carried by the driver exponential
  const double tol_abs =
      1e-3 * std::exp(std::min(0.5 * level * level * t, 300.0));
  const double jmax = window_jmax(spec, std::abs(level), t, tol_abs);
  const WindowNodes wn = flatten_window(window_rule(t, jmax));
  const PanelRule xr = xi_panel_rule(42.0);
  const std::vector<cplx> vals = window_cf_table(
      model, t, t / 350.0, xr.x, wn, TiltVariant::RealTilt, level, levy.rho);
  const WindowFactor F(spec, wn, WindowFactor::Mode::DensityFourier);
  const WindowAssembly as =
      assemble_real_window(wn, xr, vals, F, [&](double j) {
        return std::exp(0.5 * level * level * j - r * alpha * j);
      });
  check_window_tail(as, op);
  return as.value;
}

}  // namespace

// ---------------------------------------------------------------------------
// Quadrature layout (public pieces)
// ---------------------------------------------------------------------------

PanelRule xi_panel_rule(double xi_max) {
  static const double kEdges[] = {0.0, 0.8, 1.6, 2.4, 3.2, 4.0,  5.0,  6.5,
                                  8.0, 10.0, 13.0, 17.0, 22.0, 28.0, 35.0, 42.0};
  if (!(xi_max > 0.0))
    throw DomainError( "frequency cutoff must be positive");
  std::vector<double> edges;
  for (double e : kEdges) {
    if (e < xi_max - 1e-9)
      edges.push_back(e);
    else
      break;
  }
  while (edges.back() + 7.0 < xi_max - 1e-9) edges.push_back(edges.back() + 7.0);
  edges.push_back(xi_max);
  return panels(edges, 12);
}

WindowRule window_rule(double t, double jmax) {
  if (!(t > 0.0))
    throw DomainError( "window split point t must be positive");
  if (!(jmax > t))
    throw DomainError(
                      "window upper cutoff must exceed the split point t");
  static const double kInnerFrac[] = {0.0, 0.02, 0.06, 0.14, 0.3, 0.55, 1.0};
  std::vector<double> ein;
  ein.reserve(7);
  for (double f : kInnerFrac) ein.push_back(f * t);
  WindowRule wr;
  wr.inner = panels(ein, 8);
  std::vector<double> eout{t};
  while (eout.back() < jmax - 1e-12)
    eout.push_back(std::min(eout.back() * 1.45 + 0.05, jmax));
  wr.outer = panels(eout, 8);
  wr.jmax = jmax;
  return wr;
}

double window_jmax(const SubordinatorSpec& spec, double r_level, double t,
                   double tol_abs, double noise_floor) {
  spec.validate();
  if (!(t > 0.0))
    throw DomainError( "window horizon t must be positive");
  double cap = std::numeric_limits<double>::infinity();
  if (r_level > 1e-9)
    cap = 2.0 / (r_level * r_level) *
          std::log(std::max(tol_abs, 1e-12) / noise_floor);
  double jm;
  if (spec.family == ClockFamily::IdentityClock) {
    // atomic law: no density envelope; the window only has to cover the
    // clock's reachable range
    jm = 4.0 * t + 1.0;
  } else {
    const std::vector<double> js = geomspace(0.05, 400.0, 600);
    const double ys[3] = {0.5 * t, t, 2.0 * t};
    std::vector<double> env(js.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < js.size(); ++i) {
      for (double y : ys) {
        const double dens = subordinator_density(spec, y, js[i]);
        if (dens > 0.0)
          env[i] = std::max(env[i],
                            0.5 * r_level * r_level * js[i] + std::log(dens));
      }
    }
    std::size_t peak = 0;
    for (std::size_t i = 1; i < env.size(); ++i)
      if (env[i] > env[peak]) peak = i;
    jm = js.back();
    const double cut = env[peak] + std::log(1e-9);
    for (std::size_t i = peak + 1; i < env.size(); ++i) {
      if (env[i] < cut) {
        jm = js[i];
        break;
      }
    }
  }
  jm = std::min(jm, cap);
  return std::max(jm, 1.05 * t);
}

// ---------------------------------------------------------------------------
// Joint law of (T_t, B_j)
// ---------------------------------------------------------------------------

cplx joint_cf_T_B(const ActivityModel& model, double t, double j, double xi,
                  double eta) {
  model.validate();
  if (!(t > 0.0))
    throw DomainError( "joint CF horizon t must be positive");
  if (j < 0.0)
    throw DomainError( "driver time j must be nonnegative");
  if (j <= kTimeGuard) return clock_cf_minus(model, t, xi);
  RateSolveOptions opts;
  opts.dt = t / 350.0;
  if (j >= t - kTimeGuard) {
    const RateSolveResult res = solve_qhat_snapshots(model, t, xi, eta, opts);
    return std::exp(-0.5 * eta * eta * std::max(0.0, j - t)) *
           res.final_field.mass;
  }
  const RateSolveResult res = solve_qhat_snapshots(model, j, xi, eta, opts);
  const AffineExponent ex = minus_xi_exponent(model, t - j, xi);
  const Axis& ax = res.final_field.axes[0];
  cplx acc{0.0, 0.0};
  for (std::size_t p = 0; p < ax.x.size(); ++p)
    acc += ax.w[p] * std::exp(ex.x_coeff * ax.x[p]) * res.final_field.values[p];
  return std::exp(ex.constant) * acc;
}

namespace {

struct FreqBox {
  double xi_max = 0.0, dxi = 0.0;
  int n_xi = 0;
  double eta_max = 0.0, deta = 0.0;
  int n_eta = 0;
  int n_t = 240;
};

// Envelope of |fhat| over the row set at one frequency node, evaluated with a
// coarse time step. Used to right-size the truncation box: the conditional
// spread of B_s given T_t is much smaller than s, so the joint CF decays far
// more slowly than the marginal estimates suggest, and only a direct probe of
// the assembled transform is trustworthy.
double probe_row_envelope(const ActivityModel& model, double t, bool diagonal,
                          double j_fixed, double s_lo, double xi, double eta) {
  RateSolveOptions opts;
  opts.dt = t / 240.0;
  const double horizon = diagonal ? t : std::min(j_fixed, t);
  std::vector<double> snaps;
  if (diagonal) {
    if (s_lo < t - kTimeGuard) snaps.push_back(s_lo);
    const double mid = 0.5 * (s_lo + t);
    if (mid > s_lo + kTimeGuard && mid < t - kTimeGuard) snaps.push_back(mid);
  }
  opts.snap_times = snaps;
  const RateSolveResult res =
      solve_qhat_snapshots(model, horizon, xi, eta, opts);
  const Axis& ax = res.final_field.axes[0];
  auto continued = [&](const PDEField& fld, double s) {
    const AffineExponent ex = minus_xi_exponent(model, t - s, xi);
    std::vector<cplx> terms(ax.x.size());
    for (std::size_t p = 0; p < ax.x.size(); ++p)
      terms[p] = ax.w[p] * std::exp(ex.x_coeff * ax.x[p]) * fld.values[p];
    return std::abs(std::exp(ex.constant) *
                    pairwise_sum(terms.data(), terms.size()));
  };
  double mag = std::abs(res.final_field.mass);
  if (!diagonal && j_fixed < t - kTimeGuard)
    mag = continued(res.final_field, j_fixed);
  for (std::size_t q = 0; q < snaps.size(); ++q)
    mag = std::max(mag, continued(res.snapshots[q], snaps[q]));
  return mag;
}

FreqBox joint_freq_box(const ActivityModel& model, double t, double y_hi_abs,
                       double z_hi_abs, double s_lo, double s_hi,
                       bool diagonal, double j_fixed) {
  FreqBox box;
  double xi_star = 60.0;
  for (double x = 2.0; x <= 60.0 + 1e-9; x += 2.0) {
    if (std::abs(clock_cf_minus(model, t, x)) < 2e-5) {
      xi_star = x;
      break;
    }
  }
  double xi_max = 1.25 * xi_star;
  const double s_floor = std::max(s_lo, 1e-3);
  double eta_max = 1.4 * std::sqrt(2.0 * std::log(1.0 / 5e-4) / s_floor);

  // grow both truncation edges until the probed envelope is cold there; the
  // probe tests +eta and -eta separately because the joint CF is only
  // conjugate-symmetric under a simultaneous sign flip of (xi, eta)
  const double bnd = 2e-6;
  auto probe = [&](double xi, double eta) {
    return probe_row_envelope(model, t, diagonal, j_fixed, s_lo, xi, eta);
  };
  auto eta_edge_hot = [&](double eb) {
    for (double f : {0.01, 0.08, 0.2, 0.4, 0.7}) {
      const double xp = std::max(0.4, f * xi_max);
      if (probe(xp, eb) > bnd || probe(xp, -eb) > bnd) return true;
    }
    return false;
  };
  auto xi_edge_hot = [&](double xb) {
    for (double f : {0.05, 0.2, 0.45, 0.75}) {
      const double ep = f * eta_max;
      if (probe(xb, ep) > bnd || probe(xb, -ep) > bnd) return true;
    }
    return false;
  };
  for (int pass = 0; pass < 3; ++pass) {
    while (eta_max < 60.0 && eta_edge_hot(eta_max)) eta_max *= 1.22;
    while (xi_max < 120.0 && xi_edge_hot(xi_max)) xi_max *= 1.18;
    if (!eta_edge_hot(eta_max)) break;
  }

  box.xi_max = xi_max;
  box.dxi = std::min(0.5, kPi / (1.2 * std::max(y_hi_abs, 1e-6)));
  box.n_xi = static_cast<int>(std::ceil(box.xi_max / box.dxi));
  // half period large enough that the signed periodic images in z sit at
  // least eight driver standard deviations beyond the evaluation window
  const double z_half = std::max(
      0.6 * z_hi_abs + 4.0 * std::sqrt(std::max(s_hi, 1e-3)), 4.0);
  box.deta = kPi / z_half;
  const int half = static_cast<int>(std::ceil(eta_max / box.deta));
  box.n_eta = 2 * half;
  box.eta_max = half * box.deta;
  box.n_t = std::max(240, static_cast<int>(std::ceil(7.0 * box.xi_max)));
  return box;
}

}  // namespace

JointGridDensity JointGridDensity::fixed_time(const ActivityModel& model,
                                              double t, double j,
                                              const std::vector<double>& y_grid,
                                              const std::vector<double>& z_grid) {
  if (!(j > 0.0))
    throw DomainError( "driver time j must be positive");
  return build(model, t, y_grid, z_grid, false, j);
}

JointGridDensity JointGridDensity::diagonal(const ActivityModel& model,
                                            double t,
                                            const std::vector<double>& y_grid,
                                            const std::vector<double>& z_grid) {
  return build(model, t, y_grid, z_grid, true, 0.0);
}

JointGridDensity JointGridDensity::build(const ActivityModel& model, double t,
                                         const std::vector<double>& y_grid,
                                         const std::vector<double>& z_grid,
                                         bool diagonal, double j_fixed) {
  model.validate();
  if (!(t > 0.0))
    throw DomainError( "joint density horizon t must be positive");
  require_increasing(y_grid, "clock (y)");
  require_increasing(z_grid, "driver (z)");
  if (diagonal && !(y_grid.front() > 0.0))
    throw DomainError(
                      "diagonal mode needs strictly positive clock values");
  JointGridDensity out;
  out.y_ = y_grid;
  out.z_ = z_grid;
  const std::size_t ny = y_grid.size();
  const std::size_t nz = z_grid.size();
  out.f_.assign(ny * nz, 0.0);

  if (model.kind == ActivityKind::DeterministicUnit) {
    // atomic clock: all mass at y* = (1 + eps) t, driver marginal exact
    const double ystar = (1.0 + model.eps_floor) * t;
    const std::vector<double> wy = trapezoid_weights(y_grid);
    for (std::size_t k = 0; k + 1 < ny; ++k) {
      if (y_grid[k] <= ystar && ystar <= y_grid[k + 1]) {
        const double span = y_grid[k + 1] - y_grid[k];
        const double hi = (ystar - y_grid[k]) / span;
        const double weights[2] = {1.0 - hi, hi};
        for (int q = 0; q < 2; ++q) {
          const std::size_t row = k + q;
          if (wy[row] <= 0.0) continue;
          const double s = diagonal ? y_grid[row] : j_fixed;
          for (std::size_t m = 0; m < nz; ++m)
            out.f_[row * nz + m] = weights[q] / wy[row] *
                                   normal_pdf(z_grid[m], 0.0, s);
        }
        break;
      }
    }
    return out;
  }

  const double y_hi_abs =
      std::max(std::abs(y_grid.front()), std::abs(y_grid.back()));
  const double z_hi_abs =
      std::max(std::abs(z_grid.front()), std::abs(z_grid.back()));
  const double s_lo = diagonal ? y_grid.front() : j_fixed;
  const double s_hi = diagonal ? y_grid.back() : j_fixed;
  const FreqBox box = joint_freq_box(model, t, y_hi_abs, z_hi_abs, s_lo, s_hi,
                                     diagonal, j_fixed);
  out.xi_cutoff_ = box.xi_max;
  out.eta_cutoff_ = box.eta_max;

  std::vector<double> xis(box.n_xi);
  for (int i = 0; i < box.n_xi; ++i) xis[i] = (i + 0.5) * box.dxi;
  std::vector<double> etas(box.n_eta);
  for (int m = 0; m < box.n_eta; ++m)
    etas[m] = (m + 0.5 - 0.5 * box.n_eta) * box.deta;

  // driver times per row and their propagation exponents (for rows below t)
  std::vector<double> snaps;
  std::vector<std::size_t> snap_row;  // rows with s_k < t needing a snapshot
  const bool fixed_early = !diagonal && j_fixed < t - kTimeGuard;
  if (diagonal) {
    for (std::size_t k = 0; k < ny; ++k)
      if (y_grid[k] < t - kTimeGuard) {
        snaps.push_back(y_grid[k]);
        snap_row.push_back(k);
      }
  }
  // Riccati exponents, precomputed serially: ex[i * n_tau + q]
  const std::size_t n_tau =
      diagonal ? snap_row.size() : (fixed_early ? 1 : 0);
  std::vector<AffineExponent> exps(static_cast<std::size_t>(box.n_xi) * n_tau);
  for (int i = 0; i < box.n_xi; ++i)
    for (std::size_t q = 0; q < n_tau; ++q) {
      const double s = diagonal ? snaps[q] : j_fixed;
      exps[i * n_tau + q] = minus_xi_exponent(model, t - s, xis[i]);
    }

  // one PDE solve per (xi, eta) pair
  const std::size_t n_rows_store = diagonal ? ny : 1;
  std::vector<cplx> fhat(static_cast<std::size_t>(box.n_xi) * box.n_eta *
                         n_rows_store);
  const double dt = t / box.n_t;
  const double horizon = diagonal ? t : std::min(j_fixed, t);
  parallel_for(box.n_xi * box.n_eta, default_workers(), [&](int task) {
    const int i = task / box.n_eta;
    const int m = task % box.n_eta;
    RateSolveOptions opts;
    opts.dt = dt;
    opts.snap_times = snaps;
    const RateSolveResult res =
        solve_qhat_snapshots(model, horizon, xis[i], etas[m], opts);
    const Axis& ax = res.final_field.axes[0];
    const std::size_t n = ax.x.size();
    cplx* slot = fhat.data() +
                 (static_cast<std::size_t>(i) * box.n_eta + m) * n_rows_store;
    if (!diagonal) {
      if (fixed_early) {
        const AffineExponent& ex = exps[i];
        cplx acc{0.0, 0.0};
        for (std::size_t p = 0; p < n; ++p)
          acc += ax.w[p] * std::exp(ex.x_coeff * ax.x[p]) *
                 res.final_field.values[p];
        slot[0] = std::exp(ex.constant) * acc;
      } else {
        slot[0] = std::exp(-0.5 * etas[m] * etas[m] *
                           std::max(0.0, j_fixed - t)) *
                  res.final_field.mass;
      }
      return;
    }
    for (std::size_t q = 0; q < snap_row.size(); ++q) {
      const AffineExponent& ex = exps[i * n_tau + q];
      const PDEField& s = res.snapshots[q];
      cplx acc{0.0, 0.0};
      for (std::size_t p = 0; p < n; ++p)
        acc += ax.w[p] * std::exp(ex.x_coeff * ax.x[p]) * s.values[p];
      slot[snap_row[q]] = std::exp(ex.constant) * acc;
    }
    for (std::size_t k = 0; k < ny; ++k) {
      if (y_grid[k] < t - kTimeGuard) continue;
      slot[k] = std::exp(-0.5 * etas[m] * etas[m] *
                         std::max(0.0, y_grid[k] - t)) *
                res.final_field.mass;
    }
  });

  // assembly: M_k(eta) = sum_xi dxi e^{i xi y_k} fhat, then the eta sum
  std::vector<cplx> mrow(box.n_eta);
  std::vector<cplx> terms_xi(box.n_xi);
  std::vector<cplx> terms_eta(box.n_eta);
  for (std::size_t k = 0; k < ny; ++k) {
    for (int m = 0; m < box.n_eta; ++m) {
      const std::size_t row_in_store = diagonal ? k : 0;
      for (int i = 0; i < box.n_xi; ++i)
        terms_xi[i] =
            box.dxi * std::exp(cplx(0.0, xis[i] * y_grid[k])) *
            fhat[(static_cast<std::size_t>(i) * box.n_eta + m) * n_rows_store +
                 row_in_store];
      mrow[m] = pairwise_sum(terms_xi);
    }
    for (std::size_t mzi = 0; mzi < nz; ++mzi) {
      for (int m = 0; m < box.n_eta; ++m)
        terms_eta[m] =
            box.deta * std::exp(cplx(0.0, etas[m] * z_grid[mzi])) * mrow[m];
      out.f_[k * nz + mzi] =
          pairwise_sum(terms_eta).real() / (2.0 * kPi * kPi);
    }
  }

  double fmin = 0.0;
  for (double v : out.f_) fmin = std::min(fmin, v);
  if (fmin < -1e-3)
    throw InversionError(
                      "joint density has a negative lobe of " + fmt(fmin) +
                          "; the frequency box is too small");
  return out;
}

double joint_density_T_B(const ActivityModel& model, double t, double j,
                         double y, double z) {
  model.validate();
  if (model.kind == ActivityKind::DeterministicUnit)
    throw AtomicLawError(
                      "the deterministic clock is atomic in y; evaluate the "
                      "joint density on a grid instead of pointwise");
  const JointGridDensity eng = JointGridDensity::fixed_time(
      model, t, j, std::vector<double>{y}, std::vector<double>{z});
  return std::max(0.0, eng.value(0, 0));
}

// ---------------------------------------------------------------------------
// Exponentially tilted clock CF
// ---------------------------------------------------------------------------

cplx cf_tilted_clock(const ActivityModel& model, double t, double j, double r,
                     double rho, double xi, ClockTiltRoute route) {
  model.validate();
  if (!(t > 0.0))
    throw DomainError( "tilted CF horizon t must be positive");
  if (!(j > 0.0))
    throw DomainError( "tilt window j must be positive");
  if (!(std::abs(rho) <= 1.0))
    throw ConfigError( "correlation must satisfy |rho| <= 1");
  if (route == ClockTiltRoute::Auto) {
    if (model.is_affine())
      route = ClockTiltRoute::Fourier1D;
    else if (t <= j + kTimeGuard)
      route = ClockTiltRoute::Joint2D;
    else
      throw UnsupportedModelError(
                        "tilted clock CF with t > j needs the closed-form "
                        "affine propagation; not available for this model");
  }
  if (route == ClockTiltRoute::Fourier1D) {
    if (!model.is_affine())
      throw UnsupportedModelError(
                        "the Fourier-side tilted CF route requires an affine "
                        "rate model");
    RateSolveOptions opts;
    opts.dt = t / 400.0;
    if (t <= j + kTimeGuard) {
      const RateSolveResult res =
          solve_Ghat_snapshots(model, r, rho, t, xi, opts);
      return res.final_field.mass;
    }
    const RateSolveResult res = solve_Ghat_snapshots(model, r, rho, j, xi, opts);
    const AffineExponent ex = minus_xi_exponent(model, t - j, xi);
    const Axis& ax = res.final_field.axes[0];
    cplx acc{0.0, 0.0};
    for (std::size_t p = 0; p < ax.x.size(); ++p)
      acc +=
          ax.w[p] * std::exp(ex.x_coeff * ax.x[p]) * res.final_field.values[p];
    return std::exp(ex.constant) * acc;
  }
  // joint 2-D route
  const double u_end = std::min(t, j);
  const double y_max = std::max(3.0 * u_end * (1.0 + model.eps_floor), 1.0);
  const int n_y = static_cast<int>(std::ceil(y_max * 240.0));
  const SpatialGrid grid =
      default_rate_grid(model.v0).with_y(y_max, n_y);
  const PDEField G = solve_G(model, r, rho, j, u_end, grid, u_end / 400.0);
  const Axis& axx = G.axes[0];
  const Axis& axy = G.axes[1];
  const std::size_t nyy = axy.x.size();
  cplx acc{0.0, 0.0};
  if (t <= j + kTimeGuard) {
    for (std::size_t ix = 0; ix < axx.x.size(); ++ix)
      for (std::size_t iy = 0; iy < nyy; ++iy)
        acc += axx.w[ix] * axy.w[iy] *
               std::exp(cplx(0.0, -xi * axy.x[iy])) * G.values[ix * nyy + iy];
    return acc;
  }
  const AffineExponent ex = minus_xi_exponent(model, t - j, xi);
  for (std::size_t ix = 0; ix < axx.x.size(); ++ix)
    for (std::size_t iy = 0; iy < nyy; ++iy)
      acc += axx.w[ix] * axy.w[iy] *
             std::exp(ex.value(axx.x[ix], axy.x[iy])) * G.values[ix * nyy + iy];
  return acc;
}

// ---------------------------------------------------------------------------
// Laplace transforms
// ---------------------------------------------------------------------------

double laplace_Z(const ActivityModel& model, const LevyComposition& levy,
                 const SubordinatorSpec& spec, double t, double r,
                 LaplaceRoute route) {
  require_z_composition(levy, "laplace transform of Z");
  return laplace_windowed(model, levy, spec, t, r, route,
                          "laplace transform of Z");
}

double laplace_Y(const ActivityModel& model, const LevyComposition& levy,
                 const SubordinatorSpec& spec, double t, double r,
                 LaplaceRoute route) {
  return laplace_windowed(model, levy, spec, t, r, route,
                          "laplace transform of Y");
}

double cf_factored(const ActivityModel& model, const LevyComposition& levy,
                   const SubordinatorSpec& spec, double t, double r) {
  validate_common(model, levy, spec, t);
  require_z_composition(levy, "factored transform");
  if (!spec.strictly_increasing())
    throw UnsupportedSpecError(
                      "the inverse-clock factorization needs strictly "
                      "increasing subordinator paths");
  if (!std::isfinite(r))
    throw DomainError( "transform argument r must be finite");
  if (model.kind == ActivityKind::DeterministicUnit &&
      spec.family == ClockFamily::IdentityClock)
    // Z_{(1+eps)t} is a plain centered Gaussian; see laplace_windowed.
    return std::exp(0.5 * r * r * (1.0 + model.eps_floor) * t);
  const double tol_abs = 1e-3 * std::exp(std::min(0.5 * r * r * t, 300.0));
  const double jmax = window_jmax(spec, std::abs(r), t, tol_abs);
  const WindowNodes wn = flatten_window(window_rule(t, jmax));
  const PanelRule xr = xi_panel_rule(42.0);
  const std::vector<cplx> vals = window_cf_table(
      model, t, t / 350.0, xr.x, wn, TiltVariant::RealTilt, r, levy.rho);
  const WindowFactor F(spec, wn, WindowFactor::Mode::InverseCf);
  const WindowAssembly as = assemble_real_window(
      wn, xr, vals, F, [&](double j) { return std::exp(0.5 * r * r * j); });
  check_window_tail(as, "factored transform");
  return as.value;
}

// ---------------------------------------------------------------------------
// Characteristic function of Z
// ---------------------------------------------------------------------------

cplx cf_Z(const ActivityModel& model, const LevyComposition& levy,
          const SubordinatorSpec& spec, double t, double theta,
          LaplaceRoute route) {
  validate_common(model, levy, spec, t);
  require_z_composition(levy, "characteristic function of Z");
  if (!std::isfinite(theta))
    throw DomainError( "CF argument theta must be finite");
  route = resolve_route(route, levy.rho, "characteristic function of Z");
  if (route == LaplaceRoute::Independent)
    return cplx(independent_two_stage(model, spec, t, -0.5 * theta * theta),
                0.0);
  if (model.kind == ActivityKind::DeterministicUnit &&
      spec.family == ClockFamily::IdentityClock) {
    // Z_{(1+eps)t} is a plain centered Gaussian; see laplace_windowed.
    const double a = (1.0 + model.eps_floor) * t;
    return cplx(std::exp(-0.5 * theta * theta * a), 0.0);
  }
  const double jmax = window_jmax(spec, 0.0, t, 1e-3);
  const WindowNodes wn = flatten_window(window_rule(t, jmax));
  const PanelRule half = xi_panel_rule(42.0);
  std::vector<double> xis = half.x;
  std::vector<double> wxi = half.w;
  for (std::size_t i = 0; i < half.size(); ++i) {
    xis.push_back(-half.x[i]);
    wxi.push_back(half.w[i]);
  }
  const std::vector<cplx> vals = window_cf_table(
      model, t, t / 350.0, xis, wn, TiltVariant::ThetaTilt, theta, levy.rho);
  const WindowFactor F(spec, wn, WindowFactor::Mode::DensityFourier);
  const std::size_t nj = wn.j.size();
  std::vector<cplx> terms(xis.size());
  std::vector<cplx> contrib(nj);
  for (std::size_t k = 0; k < nj; ++k) {
    for (std::size_t i = 0; i < xis.size(); ++i)
      terms[i] = wxi[i] * F.eval(k, xis[i]) * vals[i * nj + k];
    contrib[k] = wn.w[k] * std::exp(-0.5 * theta * theta * wn.j[k]) *
                 pairwise_sum(terms) / (2.0 * kPi);
  }
  const cplx val = pairwise_sum(contrib);
  const double last =
      std::abs(pairwise_sum(contrib.data() + (nj - 8), 8));
  if (last > 5e-3 * std::max(std::abs(val),
                             std::numeric_limits<double>::min()))
    throw QuadratureError(
                      "characteristic function of Z: window integrand not "
                      "resolved at the upper cutoff");
  return val;
}

// ---------------------------------------------------------------------------
// Densities
// ---------------------------------------------------------------------------

namespace {

TransformResult finalize_pdf(TransformResult res) {
  double fmin = 0.0;
  double imax = 0.0;
  for (const cplx& v : res.values) {
    fmin = std::min(fmin, v.real());
    imax = std::max(imax, std::abs(v.imag()));
  }
  if (fmin < -1e-3)
    throw InversionError(
                      "density has a negative lobe of " + fmt(fmin) +
                          "; the frequency box is too small");
  if (imax >= 1e-6)
    throw InversionError(
                      "density carries an imaginary residue of " + fmt(imax) +
                          " before discarding; inversion is unbalanced");
  return res;
}

// independent composition: Y | (J_{T_t} = j) ~ N(alpha j, beta^2 j)
TransformResult pdf_independent(const ActivityModel& model, double alpha,
                                double beta, const SubordinatorSpec& spec,
                                double t, const std::vector<double>& grid) {
  TransformResult res;
  res.kind = TransformKind::Pdf;
  res.arguments = grid;
  res.values.assign(grid.size(), cplx(0.0, 0.0));
  const double b2 = beta * beta;

  const bool det_clock = model.kind == ActivityKind::DeterministicUnit;
  if (det_clock && spec.family == ClockFamily::IdentityClock) {
    const double a = (1.0 + model.eps_floor) * t;
    for (std::size_t n = 0; n < grid.size(); ++n)
      res.values[n] = normal_pdf(grid[n], alpha * a, b2 * a);
    res.j_cutoff = a;
    return finalize_pdf(std::move(res));
  }

  // density of J_{T_t} sampled on window nodes (or read straight off the
  // clock density when the subordinator is the identity)
  std::vector<double> jn, jw, dens;
  double trunc_num = 0.0;
  if (spec.family == ClockFamily::IdentityClock) {
    const ClockMoments mom = clock_moments(model, t);
    const double sig = std::sqrt(std::max(mom.var, 1e-12));
    const double lo = std::max(1e-4, mom.mean - 10.0 * sig);
    const double hi = mom.mean + 10.0 * sig;
    std::vector<double> edges;
    for (int p = 0; p <= 14; ++p) edges.push_back(lo + (hi - lo) * p / 14.0);
    const PanelRule yr = panels(edges, 8);
    jn = yr.x;
    jw = yr.w;
    dens = clock_density_values(model, t, jn);
    res.j_cutoff = hi;
  } else {
    const double scale = det_clock ? (1.0 + model.eps_floor) * t : t;
    const double jmax = window_jmax(spec, 0.0, scale, 1e-3);
    const WindowNodes wn = flatten_window(window_rule(scale, jmax));
    jn = wn.j;
    jw = wn.w;
    dens.resize(jn.size());
    if (det_clock) {
      const double ybar = (1.0 + model.eps_floor) * t;
      for (std::size_t k = 0; k < jn.size(); ++k)
        dens[k] = subordinator_density(spec, ybar, jn[k]);
    } else {
      const ClockMoments mom = clock_moments(model, t);
      const double sig = std::sqrt(std::max(mom.var, 1e-12));
      const double lo = std::max(1e-4, mom.mean - 10.0 * sig);
      const double hi = mom.mean + 10.0 * sig;
      std::vector<double> edges;
      for (int p = 0; p <= 14; ++p) edges.push_back(lo + (hi - lo) * p / 14.0);
      const PanelRule yr = panels(edges, 8);
      const std::vector<double> ft = clock_density_values(model, t, yr.x);
      for (std::size_t k = 0; k < jn.size(); ++k) {
        double acc = 0.0;
        for (std::size_t q = 0; q < yr.size(); ++q)
          acc += yr.w[q] * ft[q] * subordinator_density(spec, yr.x[q], jn[k]);
        dens[k] = acc;
      }
    }
    res.j_cutoff = jmax;
    for (std::size_t k = jn.size() - 8; k < jn.size(); ++k)
      trunc_num += jw[k] * dens[k];
  }
  double mass = 0.0;
  for (std::size_t k = 0; k < jn.size(); ++k) mass += jw[k] * dens[k];
  res.truncation_estimate =
      mass > 0.0 ? std::abs(trunc_num) / mass : 0.0;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < jn.size(); ++k)
      acc += jw[k] * dens[k] * normal_pdf(grid[n], alpha * jn[k], b2 * jn[k]);
    res.values[n] = acc;
  }
  return finalize_pdf(std::move(res));
}

// correlated composition: double Fourier assembly with the driver frequency
// substituted as eta = rho * beta * u, which keeps the kernel regular for
// every rho != 0 including |rho| = 1 (where the orthogonal factor vanishes
// and the representation degenerates to the pure driver integral)
TransformResult pdf_fourier(const ActivityModel& model, double alpha,
                            double beta, double rho,
                            const SubordinatorSpec& spec, double t,
                            const std::vector<double>& grid) {
  const double orth2 = std::max(0.0, 1.0 - rho * rho);
  const double jmax = window_jmax(spec, 0.0, t, 1e-3);
  const WindowNodes wn = flatten_window(window_rule(t, jmax));
  const std::size_t nj = wn.j.size();
  const PanelRule half = xi_panel_rule(42.0);
  std::vector<double> xis = half.x;
  std::vector<double> wxi = half.w;
  for (std::size_t i = 0; i < half.size(); ++i) {
    xis.push_back(-half.x[i]);
    wxi.push_back(half.w[i]);
  }
  const std::size_t nx = xis.size();

  const double zabs =
      std::max(std::abs(grid.front()), std::abs(grid.back()));
  const double z_half = std::max(8.0, 1.1 * zabs);
  const double du = kPi / z_half;
  const int n_u =
      static_cast<int>(std::ceil(12.5 / (std::abs(beta) * du)));

  // window Fourier factor and propagation exponents are u-independent
  const WindowFactor F(spec, wn, WindowFactor::Mode::DensityFourier);
  std::vector<cplx> fmat(nx * nj);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t k = 0; k < nj; ++k) fmat[i * nj + k] = F.eval(k, xis[i]);
  std::vector<AffineExponent> exps(nx * wn.n_inner);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t k = 0; k < wn.n_inner; ++k)
      exps[i * wn.n_inner + k] = minus_xi_exponent(model, t - wn.j[k], xis[i]);

  const std::vector<double> snaps(wn.j.begin(), wn.j.begin() + wn.n_inner);
  std::vector<cplx> K(n_u + 1);
  double k0_last_panel = 0.0;
  std::vector<cplx> joint(nx * nj);
  std::vector<cplx> terms(nx);
  std::vector<cplx> contrib(nj);
  for (int ui = 0; ui <= n_u; ++ui) {
    const double u = ui * du;
    const double eta = rho * beta * u;
    parallel_for(static_cast<int>(nx), default_workers(), [&](int task) {
      const std::size_t i = static_cast<std::size_t>(task);
      RateSolveOptions opts;
      opts.dt = t / 350.0;
      opts.snap_times = snaps;
      const RateSolveResult res =
          solve_qhat_snapshots(model, t, xis[i], eta, opts);
      const Axis& ax = res.final_field.axes[0];
      const std::size_t n = ax.x.size();
      for (std::size_t k = 0; k < wn.n_inner; ++k) {
        const AffineExponent& ex = exps[i * wn.n_inner + k];
        const PDEField& s = res.snapshots[k];
        cplx acc{0.0, 0.0};
        for (std::size_t p = 0; p < n; ++p)
          acc += ax.w[p] * std::exp(ex.x_coeff * ax.x[p]) * s.values[p];
        joint[i * nj + k] = std::exp(ex.constant) * acc;
      }
      for (std::size_t k = wn.n_inner; k < nj; ++k)
        joint[i * nj + k] =
            std::exp(-0.5 * eta * eta * (wn.j[k] - t)) * res.final_field.mass;
    });
    for (std::size_t k = 0; k < nj; ++k) {
      for (std::size_t i = 0; i < nx; ++i)
        terms[i] = wxi[i] * fmat[i * nj + k] * joint[i * nj + k];
      const cplx s = pairwise_sum(terms);
      contrib[k] = wn.w[k] *
                   std::exp(-0.5 * orth2 * beta * beta * u * u * wn.j[k]) *
                   std::exp(cplx(0.0, -u * alpha * wn.j[k])) * s;
    }
    K[ui] = pairwise_sum(contrib);
    if (ui == 0)
      k0_last_panel = std::abs(pairwise_sum(contrib.data() + (nj - 8), 8));
  }

  TransformResult res;
  res.kind = TransformKind::Pdf;
  res.arguments = grid;
  res.values.assign(grid.size(), cplx(0.0, 0.0));
  res.xi_cutoff = 42.0;
  res.eta_cutoff = n_u * du;
  res.j_cutoff = jmax;
  res.truncation_estimate =
      k0_last_panel / std::max(std::abs(K[0]),
                               std::numeric_limits<double>::min());
  const double norm = du / (2.0 * kPi * kPi);
  const double residue = norm * 0.5 * K[0].imag();
  std::vector<double> uterm(n_u);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    for (int ui = 1; ui <= n_u; ++ui)
      uterm[ui - 1] =
          (std::exp(cplx(0.0, ui * du * grid[n])) * K[ui]).real();
    const double f =
        norm * (0.5 * K[0].real() + pairwise_sum(uterm.data(), n_u));
    res.values[n] = cplx(f, residue);
  }
  return finalize_pdf(std::move(res));
}

TransformResult pdf_composition(const ActivityModel& model, double alpha,
                                double beta, double rho,
                                const SubordinatorSpec& spec, double t,
                                const std::vector<double>& grid) {
  require_increasing(grid, "evaluation");
  if (std::abs(rho) < kRhoIndependentBand)
    return pdf_independent(model, alpha, beta, spec, t, grid);
  return pdf_fourier(model, alpha, beta, rho, spec, t, grid);
}

}  // namespace

TransformResult pdf_Z(const ActivityModel& model, const LevyComposition& levy,
                      const SubordinatorSpec& spec, double t,
                      const std::vector<double>& z_grid) {
  validate_common(model, levy, spec, t);
  require_z_composition(levy, "density of Z");
  return pdf_composition(model, 0.0, 1.0, levy.rho, spec, t, z_grid);
}

TransformResult pdf_Y(const ActivityModel& model, const LevyComposition& levy,
                      const SubordinatorSpec& spec, double t,
                      const std::vector<double>& y_grid) {
  validate_common(model, levy, spec, t);
  if (levy.beta == 0.0)
    throw DegenerateModelError(
                      "beta = 0 collapses the composition to the time-changed "
                      "drift alpha * J; no diffusion density exists");
  return pdf_composition(model, levy.alpha, levy.beta, levy.rho, spec, t,
                         y_grid);
}

// ---------------------------------------------------------------------------
// Clock marginal density
// ---------------------------------------------------------------------------

std::vector<double> clock_density_values(const ActivityModel& model, double t,
                                         const std::vector<double>& y) {
  model.validate();
  if (!(t > 0.0))
    throw DomainError( "clock density horizon must be positive");
  if (model.kind == ActivityKind::DeterministicUnit)
    throw AtomicLawError(
                      "the deterministic clock has an atomic law; no density");
  const ClockMoments mom = clock_moments(model, t);
  const double sig = std::sqrt(std::max(mom.var, 1e-12));
  double xi_max = 4.0 / sig;
  while (xi_max < 4e3 &&
         std::abs(clock_cf_minus(model, t, xi_max)) > 1e-8)
    xi_max *= 1.25;
  double ymax = 1.0;
  for (double v : y) ymax = std::max(ymax, std::abs(v));
  const double dxi = std::min(0.35, kPi / (1.2 * ymax + 1.0));
  const int n = static_cast<int>(std::ceil(xi_max / dxi));
  std::vector<cplx> cf(n);
  for (int i = 0; i < n; ++i)
    cf[i] = clock_cf_minus(model, t, (i + 0.5) * dxi);
  std::vector<double> out(y.size());
  std::vector<double> terms(n);
  for (std::size_t q = 0; q < y.size(); ++q) {
    for (int i = 0; i < n; ++i)
      terms[i] = (std::exp(cplx(0.0, (i + 0.5) * dxi * y[q])) * cf[i]).real();
    out[q] = dxi * pairwise_sum(terms.data(), terms.size()) / kPi;
  }
  return out;
}

}  // namespace tcl
