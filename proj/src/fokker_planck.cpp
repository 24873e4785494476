#include "tcl/fokker_planck.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <string>
#include <utility>

#include "tcl/errors.hpp"
#include "tcl/grid.hpp"
#include "tcl/quadrature.hpp"
#include "tcl/tridiag.hpp"

namespace tcl {

namespace {

constexpr double kTimeTol = 1e-12;

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Bernoulli weight
// ---------------------------------------------------------------------------

cplx bernoulli_B(cplx z) {
  const double az = std::abs(z);
  if (az < 1e-4) {
    // B(z) = 1 - z/2 + z^2/12 + O(z^4); the z^4 term is below 1.4e-19 here.
    return 1.0 - 0.5 * z + z * z / 12.0;
  }
  if (z.real() < 0.0) {
    return -z + bernoulli_B(-z);  // reflection; the recursive call sees Re >= 0
  }
  if (z.real() > 700.0) {
    return cplx(0.0, 0.0);  // e^z overflows; B -> 0
  }
  return z / (std::exp(z) - 1.0);
}

// ---------------------------------------------------------------------------
// Axes and grids
// ---------------------------------------------------------------------------

Axis Axis::uniform(double lo, double hi, int n) {
  if (n < 2 || !(hi > lo)) {
    throw ConfigError("axis needs at least 2 nodes and hi > lo");
  }
  Axis ax;
  ax.x.resize(n);
  const double dx = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) ax.x[i] = lo + i * dx;
  ax.x[n - 1] = hi;
  ax.w.assign(n, dx);
  ax.w[0] = ax.w[n - 1] = 0.5 * dx;
  return ax;
}

Axis Axis::from_nodes(std::vector<double> nodes) {
  const int n = static_cast<int>(nodes.size());
  if (n < 2) throw ConfigError("axis needs at least 2 nodes");
  for (int i = 0; i + 1 < n; ++i) {
    if (!(nodes[i + 1] > nodes[i])) {
      throw ConfigError("axis nodes must be strictly increasing");
    }
  }
  Axis ax;
  ax.x = std::move(nodes);
  ax.w.assign(n, 0.0);
  ax.w[0] = 0.5 * (ax.x[1] - ax.x[0]);
  for (int i = 1; i + 1 < n; ++i) ax.w[i] = 0.5 * (ax.x[i + 1] - ax.x[i - 1]);
  ax.w[n - 1] = 0.5 * (ax.x[n - 1] - ax.x[n - 2]);
  return ax;
}

SpatialGrid SpatialGrid::rate_anchored(double x_max, double dx_target,
                                       double v0) {
  Grid1D g = Grid1D::anchored(x_max, dx_target, v0);
  SpatialGrid grid;
  grid.x.x = g.x;
  grid.x.w = g.w;
  grid.stretching = GridStretch::Uniform;
  grid.anchor = g.index_near(v0);
  return grid;
}

SpatialGrid SpatialGrid::rate_uniform(double x_max, int n_x, double v0) {
  SpatialGrid grid;
  grid.x = Axis::uniform(0.0, x_max, n_x);
  grid.stretching = GridStretch::Uniform;
  const double dx = grid.x.x[1] - grid.x.x[0];
  grid.anchor = std::clamp<int>(static_cast<int>(std::lround(v0 / dx)), 0,
                                n_x - 1);
  return grid;
}

SpatialGrid SpatialGrid::rate_sinh(double x_max, int n_x, double v0) {
  if (!(v0 > 0.0) || !(x_max > v0)) {
    throw ConfigError("sinh-clustered grid needs 0 < v0 < x_max");
  }
  if (n_x < 2) throw ConfigError("axis needs at least 2 nodes");
  const double c = 4.0;
  const double ratio = (x_max - v0) / v0;  // sinh(c(1-s0))/sinh(c s0) target
  double lo = 1e-12, hi = 1.0 - 1e-12;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g = std::sinh(c * (1.0 - mid)) - ratio * std::sinh(c * mid);
    (g > 0.0 ? lo : hi) = mid;
  }
  const double s0 = 0.5 * (lo + hi);
  const double A = v0 / std::sinh(c * s0);
  std::vector<double> nodes(n_x);
  for (int i = 0; i < n_x; ++i) {
    const double s = static_cast<double>(i) / (n_x - 1);
    nodes[i] = v0 + A * std::sinh(c * (s - s0));
  }
  nodes.front() = 0.0;
  nodes.back() = x_max;
  int best = 0;
  for (int i = 1; i < n_x; ++i) {
    if (std::abs(nodes[i] - v0) < std::abs(nodes[best] - v0)) best = i;
  }
  nodes[best] = v0;  // snap so the initial delta occupies a single node
  SpatialGrid grid;
  grid.x = Axis::from_nodes(std::move(nodes));
  grid.stretching = GridStretch::SinhClustered;
  grid.anchor = best;
  return grid;
}

SpatialGrid SpatialGrid::with_y(double y_max, int n_y) const {
  SpatialGrid g = *this;
  g.y = Axis::uniform(0.0, y_max, n_y);
  return g;
}

SpatialGrid SpatialGrid::with_z(double z_half_width, int n_z) const {
  SpatialGrid g = *this;
  g.z = Axis::uniform(-z_half_width, z_half_width, n_z);
  return g;
}

namespace {

void validate_axis(const Axis& ax, const char* name) {
  if (ax.n() < 16) {
    throw ConfigError(std::string(name) + " axis needs at least 16 nodes");
  }
  double sum = 0.0;
  for (double w : ax.w) sum += w;
  const double len = ax.x.back() - ax.x.front();
  if (std::abs(sum - len) > 1e-9 * std::max(1.0, len)) {
    throw ConfigError(std::string(name) +
                      " axis weights do not sum to the domain length");
  }
}

}  // namespace

void SpatialGrid::validate(double v0) const {
  validate_axis(x, "rate");
  if (x.x.front() < -1e-12) {
    throw ConfigError("rate axis must start at x_min >= 0");
  }
  if (!(x.x.front() < v0 && v0 < x.x.back())) {
    throw ConfigError("rate axis must bracket the initial rate v0=" + fmt(v0));
  }
  if (has_y()) validate_axis(y, "clock");
  if (has_z()) validate_axis(z, "brownian");
}

SpatialGrid default_rate_grid(double v0) {
  return SpatialGrid::rate_anchored(7.0, 0.0175, v0);
}

// ---------------------------------------------------------------------------
// Shared discretization pieces
// ---------------------------------------------------------------------------

namespace {

// Discrete delta at x0 on a (possibly non-uniform) axis: two-node hat with
// exact unit mass and exact first moment.
std::vector<double> axis_delta_hat(const Axis& ax, double x0) {
  const int n = ax.n();
  if (!(x0 >= ax.x.front() && x0 <= ax.x.back())) {
    throw ConfigError("delta location outside the axis");
  }
  std::vector<double> q(n, 0.0);
  int i = static_cast<int>(std::upper_bound(ax.x.begin(), ax.x.end(), x0) -
                           ax.x.begin()) -
          1;
  i = std::clamp(i, 0, n - 2);
  const double lam = (x0 - ax.x[i]) / (ax.x[i + 1] - ax.x[i]);
  q[i] = (1.0 - lam) / ax.w[i];
  q[i + 1] = lam / ax.w[i + 1];
  return q;
}

struct SGRows {
  std::vector<cplx> lower, diag, upper;  // n entries each; last row zeroed
};

// Exponentially fitted (Scharfetter-Gummel) finite-volume rows for
//   d_t q = d_x[ D(x) d_x q - (mu(x) + extra(x) - D'(x)) q ] - reaction(x) q
// in conservation form with face flux F_{i+1/2} = a_i q_i - b_i q_{i+1}.
// Zero-flux at the bottom node, homogeneous Dirichlet at the top node.
SGRows build_rows(const Axis& ax, const std::function<double(double)>& mu,
                  const std::function<double(double)>& D,
                  const std::function<cplx(double)>& extra,
                  const std::function<cplx(double)>& reaction) {
  const int n = ax.n();
  SGRows R;
  R.lower.assign(n, cplx(0.0));
  R.diag.assign(n, cplx(0.0));
  R.upper.assign(n, cplx(0.0));
  std::vector<cplx> a(n - 1), b(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    const double h = ax.x[i + 1] - ax.x[i];
    const double xf = 0.5 * (ax.x[i] + ax.x[i + 1]);
    const double Df = std::max(D(xf), 1e-14);
    const double Dp = (D(ax.x[i + 1]) - D(ax.x[i])) / h;
    const cplx vf = mu(xf) + extra(xf) - Dp;
    const cplx Pe = vf * h / Df;
    a[i] = (Df / h) * bernoulli_B(-Pe);
    b[i] = (Df / h) * bernoulli_B(Pe);
  }
  R.diag[0] = -a[0] / ax.w[0];
  R.upper[0] = b[0] / ax.w[0];
  for (int i = 1; i + 1 < n; ++i) {
    R.lower[i] = a[i - 1] / ax.w[i];
    R.diag[i] = (-b[i - 1] - a[i]) / ax.w[i];
    R.upper[i] = b[i] / ax.w[i];
  }
  for (int i = 0; i + 1 < n; ++i) R.diag[i] -= reaction(ax.x[i]);
  // last row stays zero: homogeneous Dirichlet at x_max
  return R;
}

// One theta-step of dq/dt = L q on a single column:
// (I - dt theta L) q+ = q + dt (1-theta) L q, with the Dirichlet row pinned.
void step_theta(std::vector<cplx>& q, const SGRows& R, double dt, double theta,
                std::vector<cplx>& rhs) {
  const int n = static_cast<int>(q.size());
  rhs.resize(n);
  const double ex = dt * (1.0 - theta);
  if (ex == 0.0) {
    rhs = q;
  } else {
    rhs[0] = q[0] + ex * (R.diag[0] * q[0] + R.upper[0] * q[1]);
    for (int i = 1; i + 1 < n; ++i) {
      rhs[i] = q[i] + ex * (R.lower[i] * q[i - 1] + R.diag[i] * q[i] +
                            R.upper[i] * q[i + 1]);
    }
  }
  rhs[n - 1] = cplx(0.0);
  std::vector<cplx> av(n), bv(n), cv(n - 1);
  const double im = dt * theta;
  for (int i = 0; i < n; ++i) {
    av[i] = -im * R.lower[i];
    bv[i] = 1.0 - im * R.diag[i];
    if (i + 1 < n) cv[i] = -im * R.upper[i];
  }
  TridiagFactor F(av, bv, cv);
  F.solve(rhs.data());
  q.swap(rhs);
}

// Time mesh: uniform n_t intervals on [0,t] merged with mandatory nodes.
std::vector<double> time_mesh(double t, double dt,
                              const std::vector<double>& extra) {
  if (!(dt > 0.0)) throw ConfigError("solver time step dt must be positive");
  const int n_t = std::max<int>(1, static_cast<int>(std::llround(t / dt)));
  std::vector<double> mesh;
  mesh.reserve(n_t + 1 + extra.size());
  for (int k = 0; k <= n_t; ++k) mesh.push_back(t * k / n_t);
  for (double s : extra) {
    if (s > kTimeTol && s < t - kTimeTol) mesh.push_back(s);
  }
  std::sort(mesh.begin(), mesh.end());
  std::vector<double> out;
  out.reserve(mesh.size());
  for (double m : mesh) {
    if (out.empty() || m - out.back() > kTimeTol) out.push_back(m);
  }
  out.back() = t;
  return out;
}

cplx integrate_1d(const Axis& ax, const std::vector<cplx>& q) {
  std::vector<cplx> prod(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) prod[i] = ax.w[i] * q[i];
  return pairwise_sum(prod);
}

void check_finite(const std::vector<cplx>& q, const char* what) {
  for (const cplx& v : q) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw NumericsError(std::string(what) +
                          " produced a non-finite field value");
    }
  }
}

PDEField make_field_1d(const Axis& ax, std::vector<cplx> q, double time_level,
                       bool has_node, double xi, double eta) {
  PDEField f;
  f.axes = {ax};
  f.mass = integrate_1d(ax, q);
  f.values = std::move(q);
  f.time_level = time_level;
  f.has_fourier_node = has_node;
  f.xi = xi;
  f.eta = eta;
  return f;
}

// Restore a per-node phase e^{i psi} on a field that was solved in gauged
// variables, and replace the trapezoid mass with a cell-wise integral that
// is exact for a phase varying linearly inside each cell. Plain node
// weights alias badly once the restored phase winds faster than the grid
// resolves; the cell rule stays accurate because only the phase *increment*
// per cell enters.
void apply_node_phase(PDEField& f, const Axis& ax,
                      const std::vector<double>& psi) {
  const int n = ax.n();
  std::vector<cplx>& w = f.values;
  std::vector<cplx> cells(n > 1 ? static_cast<std::size_t>(n - 1) : 0);
  for (int i = 0; i + 1 < n; ++i) {
    const double h = ax.x[i + 1] - ax.x[i];
    const double th = psi[i + 1] - psi[i];
    cplx e0, e1;  // int_0^1 e^{i th s} ds and int_0^1 s e^{i th s} ds
    if (std::abs(th) < 1e-2) {
      const double t2 = th * th;
      e0 = cplx(1.0 - t2 / 6.0, th * (0.5 - t2 / 24.0));
      e1 = cplx(0.5 - t2 / 8.0, th * (1.0 / 3.0 - t2 / 30.0));
    } else {
      const cplx ith(0.0, th);
      const cplx eith = std::exp(ith);
      e0 = (eith - 1.0) / ith;
      e1 = (eith * (ith - 1.0) + 1.0) / (ith * ith);
    }
    cells[static_cast<std::size_t>(i)] =
        h * std::polar(1.0, psi[i]) * (w[i] * (e0 - e1) + w[i + 1] * e1);
  }
  f.mass = pairwise_sum(cells.data(), cells.size());
  for (int i = 0; i < n; ++i) w[i] *= std::polar(1.0, psi[i]);
}

// Generic Fourier-reduced 1-D driver shared by qhat / Ghat / Ghat_theta.
// When gauge_psi is set the PDE ran in phase-rotated variables; every
// recorded field is rotated back by e^{i gauge_psi(x)} before it is handed
// to the caller, with the mass rule from apply_node_phase.
RateSolveResult run_rate_solver(const ActivityModel& model, double t,
                                const std::function<cplx(double)>& extra,
                                const std::function<cplx(double)>& reaction,
                                const RateSolveOptions& opts,
                                bool density_mode, bool has_node, double xi,
                                double eta,
                                std::function<double(double)> gauge_psi = {}) {
  model.validate();
  if (t < 0.0) throw DomainError("solver horizon t must be >= 0");
  SpatialGrid grid = opts.grid ? *opts.grid : default_rate_grid(model.v0);
  grid.validate(model.v0);
  const Axis& ax = grid.x;
  const int n = ax.n();

  for (double s : opts.snap_times) {
    if (s < -kTimeTol || s > t + kTimeTol) {
      throw DomainError("snapshot time " + fmt(s) + " outside [0, t]");
    }
  }

  auto mu = [&model](double x) { return model.drift(x); };
  auto D = [&model](double x) {
    const double s = model.diffusion(x);
    return 0.5 * s * s;
  };
  const SGRows R = build_rows(ax, mu, D, extra, reaction);

  std::vector<double> hat = axis_delta_hat(ax, model.v0);
  std::vector<cplx> q(n);
  for (int i = 0; i < n; ++i) q[i] = hat[i];

  std::vector<double> psi;
  if (gauge_psi) {
    psi.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) psi[static_cast<std::size_t>(i)] = gauge_psi(ax.x[i]);
  }

  RateSolveResult out;
  out.snapshots.resize(opts.snap_times.size());
  auto record_snaps = [&](double time, const std::vector<cplx>& field) {
    for (std::size_t s = 0; s < opts.snap_times.size(); ++s) {
      if (std::abs(opts.snap_times[s] - time) <= kTimeTol) {
        out.snapshots[s] =
            make_field_1d(ax, field, opts.snap_times[s], has_node, xi, eta);
        if (!psi.empty()) apply_node_phase(out.snapshots[s], ax, psi);
      }
    }
  };
  record_snaps(0.0, q);

  if (t > kTimeTol) {
    const std::vector<double> mesh = time_mesh(t, opts.dt, opts.snap_times);
    std::vector<cplx> scratch(n);
    for (std::size_t k = 0; k + 1 < mesh.size(); ++k) {
      const double dt_k = mesh[k + 1] - mesh[k];
      if (dt_k <= kTimeTol) continue;
      if (opts.rannacher && k < 2) {
        step_theta(q, R, 0.5 * dt_k, 1.0, scratch);
        step_theta(q, R, 0.5 * dt_k, 1.0, scratch);
      } else {
        step_theta(q, R, dt_k, 0.5, scratch);
      }
      record_snaps(mesh[k + 1], q);
    }
  }
  out.final_field = make_field_1d(ax, std::move(q), t, has_node, xi, eta);
  if (!psi.empty()) apply_node_phase(out.final_field, ax, psi);

  auto audit = [&](const PDEField& f) {
    check_finite(f.values, "rate-axis solver");
    if (density_mode && std::abs(f.mass - 1.0) > 1e-3) {
      throw ConservationError(
          "rate-axis density mass drifted to " + fmt(std::abs(f.mass)) +
          " at time level " + fmt(f.time_level));
    }
  };
  audit(out.final_field);
  for (const PDEField& f : out.snapshots) audit(f);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// 1-D public solvers
// ---------------------------------------------------------------------------

RateSolveResult solve_qhat_snapshots(const ActivityModel& model, double t,
                                     double xi, double eta,
                                     const RateSolveOptions& opts) {
  const double eps = model.eps_floor;
  const bool density = xi == 0.0 && eta == 0.0;

  // Scheme selection for the Brownian-frequency cross term (see CrossScheme).
  // Auto takes the gauged form whenever the term exists: the direct
  // discretisation is dispersive (its per-cell phase error accumulates over
  // the whole axis, which shows up as ringing in downstream inversions even
  // well inside its stability region), while the gauge handles the phase
  // analytically at any frequency. Direct is honored on request for
  // operator-matched cross-validation against the physical-space solver,
  // guarded by the imaginary face Peclet bound 2|eta|h/sigma(v0) <= 1
  // (measured blow-up onset sits near 2).
  const bool has_cross =
      eta != 0.0 && model.kind != ActivityKind::DeterministicUnit;
  if (has_cross && opts.cross_scheme == CrossScheme::Direct) {
    const SpatialGrid& g = opts.grid ? *opts.grid : default_rate_grid(model.v0);
    double h_max = 0.0;
    for (int i = 0; i + 1 < g.x.n(); ++i)
      h_max = std::max(h_max, g.x.x[i + 1] - g.x.x[i]);
    if (2.0 * std::abs(eta) * h_max > model.diffusion(model.v0))
      throw StabilityError(
          "the direct cross-advection scheme needs 2|eta|h/sigma(v0) <= 1 on "
          "this grid; use the gauged scheme at this driver frequency");
  } else if (has_cross) {
    // The Brownian-frequency node couples in through a cross-advection
    // i*eta*d_x(sigma(x) q). Discretising that term directly is only
    // marginally stable and blows up once |eta| exceeds roughly
    // sigma(x)/dx. Substituting q = e^{-i eta (S(x) - S(v0))} w with
    // S'(x) = 1/sigma(x) removes the cross term and the eta^2/2 damping
    // exactly, leaving the eta-free operator plus the purely imaginary
    // reaction i*[xi*(x+eps) - eta*m(x)], m = drift/sigma - sigma'/2,
    // which the theta stepper handles at any frequency. The reflecting
    // bottom condition is unchanged because sigma vanishes there, and the
    // phase is restored on readout by the driver.
    RateSolveOptions local = opts;
    if (!local.grid) local.grid = default_rate_grid(model.v0);
    const Axis& gax = local.grid->x;
    if (gax.n() < 2) throw DomainError("rate grid needs at least two nodes");
    // m(x) is integrably singular at the reflecting edge; evaluating it at
    // the bottom node's half-cell midpoint keeps the row finite without
    // touching any node that carries mass.
    const double x_floor = std::max(0.25 * (gax.x[1] - gax.x[0]), 1e-12);
    const bool cir = model.kind == ActivityKind::CIR;
    const double kappa = model.kappa;
    const double sv = model.sigma_v;
    auto m = [cir, kappa, sv, x_floor](double x) {
      const double xe = std::max(x, x_floor);
      if (cir) return (kappa * (1.0 - x) - 0.25 * sv * sv) / (sv * std::sqrt(xe));
      return kappa * (1.0 - x) / (sv * xe) - 0.5 * sv;
    };
    auto S = [cir, sv, x_floor](double x) {
      const double xe = std::max(x, x_floor);
      return cir ? 2.0 * std::sqrt(std::max(x, 0.0)) / sv : std::log(xe) / sv;
    };
    const double s0 = S(model.v0);
    auto extra = [](double) { return cplx(0.0, 0.0); };
    auto reaction = [xi, eta, eps, m](double x) {
      return cplx(0.0, xi * (x + eps) - eta * m(x));
    };
    auto psi = [eta, S, s0](double x) { return -eta * (S(x) - s0); };
    return run_rate_solver(model, t, extra, reaction, local, density, true,
                           xi, eta, psi);
  }

  // Direct route: eta == 0, a rate with no Brownian component (the node
  // then decouples into the constant damping eta^2/2), or an explicitly
  // requested cross advection inside its stability region.
  auto extra = [&model, eta](double x) {
    return cplx(0.0, -eta * model.diffusion(x));
  };
  auto reaction = [xi, eta, eps](double x) {
    return cplx(0.5 * eta * eta, xi * (x + eps));
  };
  return run_rate_solver(model, t, extra, reaction, opts, density, true, xi,
                         eta);
}

RateSolveResult solve_Ghat_snapshots(const ActivityModel& model, double r,
                                     double rho, double t, double eta,
                                     const RateSolveOptions& opts) {
  auto extra = [&model, r, rho](double x) {
    return cplx(-r * rho * model.diffusion(x), 0.0);
  };
  const double eps = model.eps_floor;
  auto reaction = [eta, eps](double x) { return cplx(0.0, eta * (x + eps)); };
  const bool density = eta == 0.0 && r * rho == 0.0;
  return run_rate_solver(model, t, extra, reaction, opts, density, true, 0.0,
                         eta);
}

RateSolveResult solve_Ghat_theta_snapshots(const ActivityModel& model,
                                           double theta, double rho, double t,
                                           double eta,
                                           const RateSolveOptions& opts) {
  auto extra = [&model, theta, rho](double x) {
    return cplx(0.0, theta * rho * model.diffusion(x));
  };
  const double eps = model.eps_floor;
  auto reaction = [eta, eps](double x) { return cplx(0.0, eta * (x + eps)); };
  const bool density = eta == 0.0 && theta * rho == 0.0;
  return run_rate_solver(model, t, extra, reaction, opts, density, true, 0.0,
                         eta);
}

PDEField solve_qhat(const ActivityModel& model, double t, double xi, double eta,
                    const SpatialGrid& grid, double dt) {
  RateSolveOptions opts;
  opts.dt = dt;
  opts.grid = grid;
  return solve_qhat_snapshots(model, t, xi, eta, opts).final_field;
}

PDEField solve_Ghat(const ActivityModel& model, double r, double rho, double t,
                    double eta, double dt) {
  RateSolveOptions opts;
  opts.dt = dt;
  return solve_Ghat_snapshots(model, r, rho, t, eta, opts).final_field;
}

PDEField solve_Ghat_theta(const ActivityModel& model, double theta, double rho,
                          double t, double eta, double dt) {
  RateSolveOptions opts;
  opts.dt = dt;
  return solve_Ghat_theta_snapshots(model, theta, rho, t, eta, opts)
      .final_field;
}

// ---------------------------------------------------------------------------
// MUSCL y-advection (shared by the 2-D and 3-D joint solvers)
// ---------------------------------------------------------------------------

namespace {

// Conservative van Leer advection along y at speed vel >= 0 for one x-slab.
// base points at ny rows of `inner` contiguous entries each (inner = 1 for
// the 2-D solver, n_z for the 3-D solver). Zero inflow at y=0, first-order
// outflow at y_max. dq: (ny-1)*inner scratch; F: (ny+1)*inner scratch.
void muscl_y_slab(double* base, int ny, int inner, const double* wy, double vel,
                  double dt, double* dq, double* F) {
  for (int j = 0; j + 1 < ny; ++j) {
    const double* q0 = base + static_cast<std::size_t>(j) * inner;
    const double* q1 = q0 + inner;
    double* d = dq + static_cast<std::size_t>(j) * inner;
    for (int p = 0; p < inner; ++p) d[p] = q1[p] - q0[p];
  }
  // faces m = 0..ny: F[0] = 0 (no inflow), F[ny] = vel*q[ny-1] (outflow)
  for (int p = 0; p < inner; ++p) F[p] = 0.0;
  for (int m = 1; m < ny; ++m) {
    const int j = m - 1;  // donor cell
    const double* qj = base + static_cast<std::size_t>(j) * inner;
    const double* dj = dq + static_cast<std::size_t>(j) * inner;
    const double* djm = j > 0 ? dj - inner : nullptr;
    double* f = F + static_cast<std::size_t>(m) * inner;
    if (j == 0) {
      for (int p = 0; p < inner; ++p) f[p] = vel * qj[p];
    } else {
      for (int p = 0; p < inner; ++p) {
        const double den = dj[p];
        const double r = den != 0.0 ? djm[p] / den : 0.0;
        const double phi = (r + std::abs(r)) / (1.0 + std::abs(r));
        f[p] = vel * (qj[p] + 0.5 * phi * den);
      }
    }
  }
  {
    const double* qtop = base + static_cast<std::size_t>(ny - 1) * inner;
    double* f = F + static_cast<std::size_t>(ny) * inner;
    for (int p = 0; p < inner; ++p) f[p] = vel * qtop[p];
  }
  for (int j = 0; j < ny; ++j) {
    double* qj = base + static_cast<std::size_t>(j) * inner;
    const double* fl = F + static_cast<std::size_t>(j) * inner;
    const double* fu = fl + inner;
    const double s = dt / wy[j];
    for (int p = 0; p < inner; ++p) qj[p] -= s * (fu[p] - fl[p]);
  }
}

// Crank-Nicolson / implicit-Euler sweep along the leading index of a
// row-major block with m trailing columns; Dirichlet top row pinned to 0.
void sweep_theta_batched(std::vector<cplx>& q, int n, int m, const SGRows& R,
                         double dt, double theta, std::vector<cplx>& rhs) {
  rhs.resize(q.size());
  const double ex = dt * (1.0 - theta);
  for (int i = 0; i < n; ++i) {
    const cplx di = 1.0 + ex * R.diag[i];
    const cplx li = ex * R.lower[i];
    const cplx ui = ex * R.upper[i];
    const cplx* qi = &q[static_cast<std::size_t>(i) * m];
    cplx* ri = &rhs[static_cast<std::size_t>(i) * m];
    for (int p = 0; p < m; ++p) ri[p] = di * qi[p];
    if (i > 0 && li != cplx(0.0)) {
      const cplx* ql = qi - m;
      for (int p = 0; p < m; ++p) ri[p] += li * ql[p];
    }
    if (i + 1 < n && ui != cplx(0.0)) {
      const cplx* qu = qi + m;
      for (int p = 0; p < m; ++p) ri[p] += ui * qu[p];
    }
  }
  for (int p = 0; p < m; ++p) rhs[static_cast<std::size_t>(n - 1) * m + p] = 0.0;
  const double im = dt * theta;
  std::vector<cplx> av(n), bv(n), cv(n - 1);
  for (int i = 0; i < n; ++i) {
    av[i] = -im * R.lower[i];
    bv[i] = 1.0 - im * R.diag[i];
    if (i + 1 < n) cv[i] = -im * R.upper[i];
  }
  TridiagFactor F(av, bv, cv);
  F.solve_batched(rhs.data(), m);
  q.swap(rhs);
}

}  // namespace

// ---------------------------------------------------------------------------
// 2-D joint solver (tilted rate-and-clock density)
// ---------------------------------------------------------------------------

PDEField solve_G(const ActivityModel& model, double r, double rho, double j,
                 double t, const SpatialGrid& grid, double dt) {
  model.validate();
  if (j < 0.0) throw DomainError("tilt horizon j must be >= 0");
  if (t < 0.0) throw DomainError("solver horizon t must be >= 0");
  grid.validate(model.v0);
  if (!grid.has_y()) {
    throw ConfigError("joint rate-clock solver requires a y axis");
  }
  if (grid.has_z()) {
    throw ConfigError("joint rate-clock solver is 2-D; detach the z axis");
  }
  const Axis& ax = grid.x;
  const Axis& ay = grid.y;
  const int nx = ax.n(), ny = ay.n();

  auto mu = [&model](double x) { return model.drift(x); };
  auto D = [&model](double x) {
    const double s = model.diffusion(x);
    return 0.5 * s * s;
  };
  auto zero_c = [](double) { return cplx(0.0); };
  auto tilt = [&model, r, rho](double x) {
    return cplx(-r * rho * model.diffusion(x), 0.0);
  };
  const SGRows rows_on = build_rows(ax, mu, D, tilt, zero_c);
  const SGRows rows_off = build_rows(ax, mu, D, zero_c, zero_c);

  std::vector<double> G(static_cast<std::size_t>(nx) * ny, 0.0);
  {
    const std::vector<double> hat = axis_delta_hat(ax, model.v0);
    for (int i = 0; i < nx; ++i) {
      G[static_cast<std::size_t>(i) * ny] = hat[i] / ay.w[0];
    }
  }

  const double u_switch = std::min(j, t);
  std::vector<double> vel(nx);
  for (int i = 0; i < nx; ++i) vel[i] = ax.x[i] + model.eps_floor;
  const double vel_max = *std::max_element(vel.begin(), vel.end());
  const double wy_min = *std::min_element(ay.w.begin(), ay.w.end());

  if (t > kTimeTol) {
    const std::vector<double> mesh = time_mesh(t, dt, {u_switch});
    std::vector<double> dq(static_cast<std::size_t>(ny - 1));
    std::vector<double> F(static_cast<std::size_t>(ny + 1));
    std::vector<cplx> qc(G.size()), rhs(G.size());
    for (std::size_t k = 0; k + 1 < mesh.size(); ++k) {
      const double dt_k = mesh[k + 1] - mesh[k];
      if (dt_k <= kTimeTol) continue;
      const SGRows& R = mesh[k] < u_switch - kTimeTol ? rows_on : rows_off;
      const int nsub = std::max<int>(
          1, static_cast<int>(std::ceil(dt_k * vel_max / (0.9 * wy_min))));
      for (int s = 0; s < nsub; ++s) {
        for (int i = 0; i < nx; ++i) {
          muscl_y_slab(&G[static_cast<std::size_t>(i) * ny], ny, 1, ay.w.data(),
                       vel[i], dt_k / nsub, dq.data(), F.data());
        }
      }
      const double theta = k < 2 ? 1.0 : 0.5;
      for (std::size_t p = 0; p < G.size(); ++p) qc[p] = G[p];
      sweep_theta_batched(qc, nx, ny, R, dt_k, theta, rhs);
      for (std::size_t p = 0; p < G.size(); ++p) G[p] = qc[p].real();
    }
  }

  PDEField f;
  f.axes = {ax, ay};
  f.values.resize(G.size());
  for (std::size_t p = 0; p < G.size(); ++p) f.values[p] = G[p];
  f.time_level = t;
  f.has_fourier_node = false;
  check_finite(f.values, "joint rate-clock solver");
  // mass = sum_i wx_i sum_j wy_j G_ij
  std::vector<cplx> row_int(nx);
  for (int i = 0; i < nx; ++i) {
    std::vector<cplx> prod(ny);
    for (int jj = 0; jj < ny; ++jj) {
      prod[jj] = ay.w[jj] * G[static_cast<std::size_t>(i) * ny + jj];
    }
    row_int[i] = ax.w[i] * pairwise_sum(prod);
  }
  f.mass = pairwise_sum(row_int);
  if (std::abs(f.mass - 1.0) > 1e-3) {
    throw ConservationError("joint rate-clock density mass drifted to " +
                            fmt(std::abs(f.mass)));
  }
  return f;
}

// ---------------------------------------------------------------------------
// 3-D density solver (rate, clock, Brownian driver)
// ---------------------------------------------------------------------------

namespace {

// 4th-order first derivative along the leading index of a row-major block
// with P trailing columns (2nd-order one-sided/centered in the two layers at
// each end). n >= 5.
void deriv_leading(const double* f, double* df, int n, std::size_t P,
                   double h) {
  const double c2 = 1.0 / (2.0 * h);
  const double c12 = 1.0 / (12.0 * h);
  auto row = [&](int i) { return f + static_cast<std::size_t>(i) * P; };
  auto drow = [&](int i) { return df + static_cast<std::size_t>(i) * P; };
  {
    const double *f0 = row(0), *f1 = row(1), *f2 = row(2);
    double* d = drow(0);
    for (std::size_t p = 0; p < P; ++p)
      d[p] = (-3.0 * f0[p] + 4.0 * f1[p] - f2[p]) * c2;
  }
  {
    const double *f0 = row(0), *f2 = row(2);
    double* d = drow(1);
    for (std::size_t p = 0; p < P; ++p) d[p] = (f2[p] - f0[p]) * c2;
  }
  for (int i = 2; i + 2 < n; ++i) {
    const double *fm2 = row(i - 2), *fm1 = row(i - 1), *fp1 = row(i + 1),
                 *fp2 = row(i + 2);
    double* d = drow(i);
    for (std::size_t p = 0; p < P; ++p) {
      d[p] = (-fp2[p] + 8.0 * fp1[p] - 8.0 * fm1[p] + fm2[p]) * c12;
    }
  }
  {
    const double *fa = row(n - 1), *fb = row(n - 3);
    double* d = drow(n - 2);
    for (std::size_t p = 0; p < P; ++p) d[p] = (fa[p] - fb[p]) * c2;
  }
  {
    const double *fa = row(n - 1), *fb = row(n - 2), *fc = row(n - 3);
    double* d = drow(n - 1);
    for (std::size_t p = 0; p < P; ++p)
      d[p] = (3.0 * fa[p] - 4.0 * fb[p] + fc[p]) * c2;
  }
}

// Same stencils along a contiguous row (stride 1).
void deriv_contig(const double* f, double* df, int n, double h) {
  const double c2 = 1.0 / (2.0 * h);
  const double c12 = 1.0 / (12.0 * h);
  df[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * c2;
  df[1] = (f[2] - f[0]) * c2;
  for (int i = 2; i + 2 < n; ++i) {
    df[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) * c12;
  }
  df[n - 2] = (f[n - 1] - f[n - 3]) * c2;
  df[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * c2;
}

}  // namespace

PDEField solve_q3d(const ActivityModel& model, double t,
                   const SpatialGrid& grid, double dt) {
  model.validate();
  if (t < 0.0) throw DomainError("solver horizon t must be >= 0");
  grid.validate(model.v0);
  if (!grid.has_y() || !grid.has_z()) {
    throw ConfigError("3-D solver requires y and z axes");
  }
  if (grid.stretching != GridStretch::Uniform) {
    throw ConfigError("3-D solver supports uniform rate axes only");
  }
  const Axis& ax = grid.x;
  const Axis& ay = grid.y;
  const Axis& az = grid.z;
  const int nx = ax.n(), ny = ay.n(), nz = az.n();
  const std::size_t P = static_cast<std::size_t>(ny) * nz;  // x-plane size
  const std::size_t N = static_cast<std::size_t>(nx) * P;
  if (N > 262144) {
    throw DomainError(
        "3-D solver is for cross-validation scale (total nodes <= 64^3)");
  }
  const double dx = ax.x[1] - ax.x[0];
  const double dz = az.x[1] - az.x[0];
  const int n_t = std::max<int>(1, static_cast<int>(std::llround(t / dt)));
  const double dt_eff = t / n_t;
  const double sig_max = model.diffusion(ax.x.back());
  const double cfl_mixed = dt_eff * sig_max / (2.0 * dx * dz);
  if (!(cfl_mixed < 0.5)) {
    throw StabilityError("explicit mixed-term CFL number " + fmt(cfl_mixed) +
                         " >= 0.5; reduce dt or coarsen the grid");
  }

  auto mu = [&model](double x) { return model.drift(x); };
  auto Dx = [&model](double x) {
    const double s = model.diffusion(x);
    return 0.5 * s * s;
  };
  auto zero_r = [](double) { return 0.0; };
  auto zero_c = [](double) { return cplx(0.0); };
  auto half = [](double) { return 0.5; };
  const SGRows rows_x = build_rows(ax, mu, Dx, zero_c, zero_c);
  const SGRows rows_z = build_rows(az, zero_r, half, zero_c, zero_c);

  std::vector<double> q(N, 0.0);
  {
    const std::vector<double> hx = axis_delta_hat(ax, model.v0);
    const std::vector<double> hz = axis_delta_hat(az, 0.0);
    for (int i = 0; i < nx; ++i) {
      if (hx[i] == 0.0) continue;
      double* plane = &q[static_cast<std::size_t>(i) * P];
      const double qy0 = 1.0 / ay.w[0];
      for (int kz = 0; kz < nz; ++kz) plane[kz] = hx[i] * qy0 * hz[kz];
    }
  }

  std::vector<double> sigx(nx), vel(nx);
  for (int i = 0; i < nx; ++i) {
    sigx[i] = model.diffusion(ax.x[i]);
    vel[i] = ax.x[i] + model.eps_floor;
  }
  const double vel_max = *std::max_element(vel.begin(), vel.end());
  const double wy_min = *std::min_element(ay.w.begin(), ay.w.end());

  std::vector<double> H(N), dHdz(N), dHdx(N);
  std::vector<double> Fx(static_cast<std::size_t>(nx + 1) * P);
  std::vector<double> Fz(nz + 1);
  std::vector<double> dqy(static_cast<std::size_t>(ny - 1) * nz);
  std::vector<double> Fy(static_cast<std::size_t>(ny + 1) * nz);
  std::vector<cplx> qc(N), rhs(N);
  std::vector<cplx> zrow(nz), zrhs(nz);

  // z-sweep factor is shared by every (x,y) row and every step
  std::vector<cplx> zav(nz), zbv(nz), zcv(nz - 1);
  for (int i = 0; i < nz; ++i) {
    zav[i] = -0.5 * dt_eff * rows_z.lower[i];
    zbv[i] = 1.0 - 0.5 * dt_eff * rows_z.diag[i];
    if (i + 1 < nz) zcv[i] = -0.5 * dt_eff * rows_z.upper[i];
  }
  const TridiagFactor Fzfac(zav, zbv, zcv);

  for (int k = 0; k < n_t; ++k) {
    // --- explicit mixed d_xz[sigma q], conservative half/half split.
    // Deferred for the first two steps while the implicit sweeps smooth the
    // initial point mass (its raw cross-derivatives are oscillatory).
    if (k >= 2) {
      for (int i = 0; i < nx; ++i) {
        const double s = sigx[i];
        const double* qp = &q[static_cast<std::size_t>(i) * P];
        double* hp = &H[static_cast<std::size_t>(i) * P];
        for (std::size_t p = 0; p < P; ++p) hp[p] = s * qp[p];
      }
      for (std::size_t row = 0; row < static_cast<std::size_t>(nx) * ny;
           ++row) {
        deriv_contig(&H[row * nz], &dHdz[row * nz], nz, dz);
      }
      deriv_leading(H.data(), dHdx.data(), nx, P, dx);
      // x-face fluxes from the z-derivative
      std::fill(Fx.begin(), Fx.begin() + P, 0.0);
      std::fill(Fx.end() - P, Fx.end(), 0.0);
      for (int f = 1; f < nx; ++f) {
        const double* a = &dHdz[static_cast<std::size_t>(f - 1) * P];
        const double* b = &dHdz[static_cast<std::size_t>(f) * P];
        double* fx = &Fx[static_cast<std::size_t>(f) * P];
        for (std::size_t p = 0; p < P; ++p) fx[p] = -0.25 * (a[p] + b[p]);
      }
      for (int i = 0; i < nx; ++i) {
        const double s = dt_eff / ax.w[i];
        const double* lo = &Fx[static_cast<std::size_t>(i) * P];
        const double* hi = lo + P;
        double* qp = &q[static_cast<std::size_t>(i) * P];
        for (std::size_t p = 0; p < P; ++p) qp[p] -= s * (hi[p] - lo[p]);
      }
      // z-face fluxes from the x-derivative, one contiguous row at a time
      for (std::size_t row = 0; row < static_cast<std::size_t>(nx) * ny;
           ++row) {
        const double* dh = &dHdx[row * nz];
        double* qp = &q[row * nz];
        Fz[0] = Fz[nz] = 0.0;
        for (int m = 1; m < nz; ++m) Fz[m] = -0.25 * (dh[m - 1] + dh[m]);
        for (int m = 0; m < nz; ++m) {
          qp[m] -= dt_eff * (Fz[m + 1] - Fz[m]) / az.w[m];
        }
      }
    }
    // --- explicit y-advection (subcycled MUSCL)
    const int nsub = std::max<int>(
        1, static_cast<int>(std::ceil(dt_eff * vel_max / (0.9 * wy_min))));
    for (int s = 0; s < nsub; ++s) {
      for (int i = 0; i < nx; ++i) {
        muscl_y_slab(&q[static_cast<std::size_t>(i) * P], ny, nz, ay.w.data(),
                     vel[i], dt_eff / nsub, dqy.data(), Fy.data());
      }
    }
    // --- implicit x sweep (Crank-Nicolson, batched over the (y,z) plane)
    for (std::size_t p = 0; p < N; ++p) qc[p] = q[p];
    sweep_theta_batched(qc, nx, static_cast<int>(P), rows_x, dt_eff, 0.5, rhs);
    for (std::size_t p = 0; p < N; ++p) q[p] = qc[p].real();
    // --- implicit z sweep (Crank-Nicolson, one contiguous row at a time)
    for (std::size_t row = 0; row < static_cast<std::size_t>(nx) * ny; ++row) {
      double* qp = &q[row * nz];
      for (int m = 0; m < nz; ++m) {
        cplx v = (1.0 + 0.5 * dt_eff * rows_z.diag[m]) * qp[m];
        if (m > 0) v += 0.5 * dt_eff * rows_z.lower[m] * qp[m - 1];
        if (m + 1 < nz) v += 0.5 * dt_eff * rows_z.upper[m] * qp[m + 1];
        zrhs[m] = v;
      }
      zrhs[nz - 1] = 0.0;
      Fzfac.solve(zrhs.data());
      for (int m = 0; m < nz; ++m) qp[m] = zrhs[m].real();
    }
  }

  PDEField f;
  f.axes = {ax, ay, az};
  f.values.resize(N);
  for (std::size_t p = 0; p < N; ++p) f.values[p] = q[p];
  f.time_level = t;
  f.has_fourier_node = false;
  check_finite(f.values, "3-D density solver");
  std::vector<cplx> xint(nx);
  for (int i = 0; i < nx; ++i) {
    std::vector<cplx> yint(ny);
    for (int jy = 0; jy < ny; ++jy) {
      std::vector<cplx> zint(nz);
      const double* qp = &q[(static_cast<std::size_t>(i) * ny + jy) * nz];
      for (int m = 0; m < nz; ++m) zint[m] = az.w[m] * qp[m];
      yint[jy] = ay.w[jy] * pairwise_sum(zint);
    }
    xint[i] = ax.w[i] * pairwise_sum(yint);
  }
  f.mass = pairwise_sum(xint);
  if (std::abs(f.mass - 1.0) > 5e-3) {
    throw ConservationError("3-D density mass drifted to " +
                            fmt(std::abs(f.mass)));
  }
  return f;
}

}  // namespace tcl
