#include "tcl/activity.hpp"

#include <algorithm>
#include <cmath>

#include "tcl/errors.hpp"
#include "tcl/parallel.hpp"
#include "tcl/rng.hpp"
#include "tcl/simd.hpp"

namespace tcl {

namespace {

struct RiccatiState {
  cplx C{0.0, 0.0};
  cplx A{0.0, 0.0};
};

// Dormand-Prince 5(4) adaptive step on the Riccati system
//   C' = w - kappa C + (sigma^2/2) C^2,   A' = kappa C + w eps,
// integrated in time-to-maturity from 0 to tau. A is integrated directly
// (never recovered as a logarithm), so no branch cuts arise.
RiccatiState integrate_riccati(double tau, cplx w, double kappa,
                               double half_sig2, double eps) {
  auto rhs = [&](const RiccatiState& s) {
    RiccatiState d;
    d.C = w - kappa * s.C + half_sig2 * s.C * s.C;
    d.A = kappa * s.C + w * eps;
    return d;
  };
  constexpr double kA21 = 1.0 / 5.0;
  constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
  constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
  constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0,
                   kA53 = 64448.0 / 6561.0, kA54 = -212.0 / 729.0;
  constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0,
                   kA63 = 46732.0 / 5247.0, kA64 = 49.0 / 176.0,
                   kA65 = -5103.0 / 18656.0;
  constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0,
                   kB4 = 125.0 / 192.0, kB5 = -2187.0 / 6784.0,
                   kB6 = 11.0 / 84.0;
  constexpr double kE1 = 35.0 / 384.0 - 5179.0 / 57600.0;
  constexpr double kE3 = 500.0 / 1113.0 - 7571.0 / 16695.0;
  constexpr double kE4 = 125.0 / 192.0 - 393.0 / 640.0;
  constexpr double kE5 = -2187.0 / 6784.0 + 92097.0 / 339200.0;
  constexpr double kE6 = 11.0 / 84.0 - 187.0 / 2100.0;
  constexpr double kE7 = -1.0 / 40.0;
  constexpr double kTol = 1e-10;

  RiccatiState y;
  double t = 0.0;
  double h = tau / 100.0;
  auto axpy = [](const RiccatiState& base, double hh,
                 std::initializer_list<std::pair<double, const RiccatiState*>>
                     terms) {
    RiccatiState out = base;
    for (const auto& [c, k] : terms) {
      out.C += hh * c * k->C;
      out.A += hh * c * k->A;
    }
    return out;
  };
  int n_steps = 0;
  while (t < tau) {
    if (++n_steps > 200000)
      throw NumericsError( "Riccati integration failed to advance");
    h = std::min(h, tau - t);
    const RiccatiState k1 = rhs(y);
    const RiccatiState k2 = rhs(axpy(y, h, {{kA21, &k1}}));
    const RiccatiState k3 = rhs(axpy(y, h, {{kA31, &k1}, {kA32, &k2}}));
    const RiccatiState k4 =
        rhs(axpy(y, h, {{kA41, &k1}, {kA42, &k2}, {kA43, &k3}}));
    const RiccatiState k5 = rhs(
        axpy(y, h, {{kA51, &k1}, {kA52, &k2}, {kA53, &k3}, {kA54, &k4}}));
    const RiccatiState k6 = rhs(axpy(
        y, h,
        {{kA61, &k1}, {kA62, &k2}, {kA63, &k3}, {kA64, &k4}, {kA65, &k5}}));
    const RiccatiState y_new = axpy(
        y, h, {{kB1, &k1}, {kB3, &k3}, {kB4, &k4}, {kB5, &k5}, {kB6, &k6}});
    const RiccatiState k7 = rhs(y_new);
    const cplx err_c = h * (kE1 * k1.C + kE3 * k3.C + kE4 * k4.C +
                            kE5 * k5.C + kE6 * k6.C + kE7 * k7.C);
    const cplx err_a = h * (kE1 * k1.A + kE3 * k3.A + kE4 * k4.A +
                            kE5 * k5.A + kE6 * k6.A + kE7 * k7.A);
    auto comp = [&](double e, double ynew) {
      return std::abs(e) / (kTol + kTol * std::abs(ynew));
    };
    const double err = std::max(
        std::max(comp(err_c.real(), y_new.C.real()),
                 comp(err_c.imag(), y_new.C.imag())),
        std::max(comp(err_a.real(), y_new.A.real()),
                 comp(err_a.imag(), y_new.A.imag())));
    if (!std::isfinite(err))
      throw NumericsError( "Riccati flow left the finite domain");
    if (err <= 1.0) {
      t += h;
      y = y_new;
    }
    const double scale =
        err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    h *= std::clamp(scale, 0.2, 5.0);
    if (!(h > 0.0) || !std::isfinite(h))
      throw NumericsError( "Riccati step size collapsed");
  }
  return y;
}

}  // namespace

ActivityModel ActivityModel::cir(double kappa, double sigma_v, double v0,
                                 double eps_floor) {
  ActivityModel m{ActivityKind::CIR, kappa, sigma_v, v0, eps_floor};
  m.validate();
  return m;
}

ActivityModel ActivityModel::lognormal_mean_reverting(double kappa,
                                                      double sigma_v, double v0,
                                                      double eps_floor) {
  ActivityModel m{ActivityKind::LogNormalMeanReverting, kappa, sigma_v, v0,
                  eps_floor};
  m.validate();
  return m;
}

ActivityModel ActivityModel::deterministic_unit(double eps_floor) {
  ActivityModel m{ActivityKind::DeterministicUnit, 0.0, 0.0, 1.0, eps_floor};
  m.validate();
  return m;
}

double ActivityModel::drift(double x) const {
  switch (kind) {
    case ActivityKind::CIR:
    case ActivityKind::LogNormalMeanReverting:
      return kappa * (1.0 - x);
    case ActivityKind::DeterministicUnit:
      return 0.0;
  }
  return 0.0;
}

double ActivityModel::diffusion(double x) const {
  switch (kind) {
    case ActivityKind::CIR:
      return sigma_v * std::sqrt(std::max(x, 0.0));
    case ActivityKind::LogNormalMeanReverting:
      return sigma_v * x;
    case ActivityKind::DeterministicUnit:
      return 0.0;
  }
  return 0.0;
}

bool ActivityModel::is_affine() const {
  return kind == ActivityKind::CIR || kind == ActivityKind::DeterministicUnit;
}

bool ActivityModel::feller_violated() const {
  return kind == ActivityKind::CIR && 2.0 * kappa <= sigma_v * sigma_v;
}

void ActivityModel::validate() const {
  if (kind == ActivityKind::DeterministicUnit) {
    if (eps_floor < 0.0)
      throw ConfigError( "eps_floor must be >= 0");
    return;
  }
  if (!(kappa > 0.0)) throw ConfigError( "kappa must be > 0");
  if (!(sigma_v > 0.0)) throw ConfigError( "sigma_v must be > 0");
  if (!(v0 > 0.0)) throw ConfigError( "v0 must be > 0");
  if (eps_floor < 0.0) throw ConfigError( "eps_floor must be >= 0");
}

AffineExponent conditional_exponent_general(const ActivityModel& model,
                                            double tau, cplx w) {
  if (tau < 0.0)
    throw DomainError( "exponent window length must be >= 0");
  AffineExponent out;
  if (tau == 0.0 || w == cplx(0.0, 0.0)) return out;
  switch (model.kind) {
    case ActivityKind::DeterministicUnit:
      out.constant = w * (1.0 + model.eps_floor) * tau;
      return out;
    case ActivityKind::CIR: {
      const RiccatiState s =
          integrate_riccati(tau, w, model.kappa,
                            0.5 * model.sigma_v * model.sigma_v,
                            model.eps_floor);
      out.constant = s.A;
      out.x_coeff = s.C;
      return out;
    }
    case ActivityKind::LogNormalMeanReverting:
      throw UnsupportedModelError(
                        "log-normal mean-reverting rate has no affine "
                        "conditional exponent");
  }
  throw UnsupportedModelError( "unknown activity kind");
}

AffineExponent conditional_cf_exponent(const ActivityModel& model, double t,
                                       double s, double xi) {
  if (s > t)
    throw DomainError( "conditioning time must not exceed t");
  AffineExponent out = conditional_exponent_general(model, t - s, cplx(0.0, xi));
  out.y_coeff = xi;
  return out;
}

PathBundle simulate_clock(const ActivityModel& model, double horizon, double dt,
                          std::size_t n_paths, std::uint64_t seed,
                          std::size_t store_paths, int workers) {
  model.validate();
  if (!(horizon > 0.0) || !(dt > 0.0))
    throw DomainError( "horizon and dt must be positive");
  if (dt > horizon)
    throw DomainError( "dt must not exceed the horizon");
  if (n_paths < 1) throw DomainError( "need at least one path");

  const int n_steps = static_cast<int>(std::ceil(horizon / dt - 1e-9));
  const double dt_eff = horizon / n_steps;

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
  bundle.B_end.assign(n_paths, 0.0);
  bundle.v_end.assign(n_paths, 0.0);
  bundle.T_end.assign(n_paths, 0.0);

  const auto& kernels = simd::active_kernels();
  const double sq = std::sqrt(dt_eff);
  const double kappa_dt = model.kappa * dt_eff;
  const double sig_sdt = model.sigma_v * sq;
  const bool deterministic = model.kind == ActivityKind::DeterministicUnit;
  const bool sqrt_diffusion = model.kind == ActivityKind::CIR;

  constexpr std::size_t kChunk = 4096;
  const int n_chunks = static_cast<int>((n_paths + kChunk - 1) / kChunk);
  if (workers == 0) workers = default_workers();

  parallel_for(n_chunks, workers, [&](int chunk) {
    const std::size_t p_lo = static_cast<std::size_t>(chunk) * kChunk;
    const std::size_t p_hi = std::min(n_paths, p_lo + kChunk);
    const std::size_t m = p_hi - p_lo;
    std::vector<RngStream> streams;
    streams.reserve(m);
    for (std::size_t p = p_lo; p < p_hi; ++p)
      streams.push_back(make_stream(seed, static_cast<std::uint32_t>(p),
                                    StreamPurpose::kClockDriver));
    std::vector<double> v(m, model.v0), T(m, 0.0), B(m, 0.0), z(m);
    auto store_nodes = [&](int step) {
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t p = p_lo + i;
        if (p >= bundle.stored_paths) break;
        bundle.B[p * nodes + step] = B[i];
        bundle.v[p * nodes + step] = std::max(v[i], 0.0);
        bundle.T[p * nodes + step] = T[i];
      }
    };
    for (int k = 0; k < n_steps; ++k) {
      store_nodes(k);
      if (deterministic) {
        for (std::size_t i = 0; i < m; ++i) {
          z[i] = streams[i].normal();
          B[i] += sq * z[i];
          T[i] = (1.0 + model.eps_floor) *
                 (horizon * (static_cast<double>(k + 1) / n_steps));
        }
        continue;
      }
      for (std::size_t i = 0; i < m; ++i) z[i] = streams[i].normal();
      if (sqrt_diffusion)
        kernels.step_sqrt(v.data(), T.data(), z.data(), static_cast<long>(m),
                          kappa_dt, sig_sdt, model.eps_floor, dt_eff);
      else
        kernels.step_linear(v.data(), T.data(), z.data(), static_cast<long>(m),
                            kappa_dt, sig_sdt, model.eps_floor, dt_eff);
      for (std::size_t i = 0; i < m; ++i) B[i] += sq * z[i];
    }
    store_nodes(n_steps);
    for (std::size_t i = 0; i < m; ++i) {
      bundle.B_end[p_lo + i] = B[i];
      bundle.v_end[p_lo + i] = std::max(v[i], 0.0);
      bundle.T_end[p_lo + i] = T[i];
    }
  });
  return bundle;
}

std::vector<double> closed_form_lognormal_path(const std::vector<double>& B_path,
                                               double dt, double kappa,
                                               double sigma_v) {
  if (B_path.empty()) throw DomainError( "empty Brownian path");
  if (!(dt > 0.0)) throw DomainError( "dt must be positive");
  const double half_sig2 = 0.5 * sigma_v * sigma_v;
  std::vector<double> v(B_path.size());
  v[0] = std::exp(sigma_v * B_path[0]);
  // The inner integral of exp(kappa s + sigma^2 s / 2 - sigma B_s) is taken
  // exactly on each interval under linear interpolation of B, so degenerate
  // parameter limits are reproduced to roundoff.
  double integral = 0.0;
  for (std::size_t k = 1; k < B_path.size(); ++k) {
    const double t_prev = (k - 1) * dt;
    const double t = k * dt;
    const double slope = (B_path[k] - B_path[k - 1]) / dt;
    const double c = kappa + half_sig2 - sigma_v * slope;
    const double g_prev =
        std::exp(kappa * t_prev + half_sig2 * t_prev - sigma_v * B_path[k - 1]);
    const double grow =
        std::abs(c * dt) > 1e-8 ? (std::expm1(c * dt) / c)
                                : dt * (1.0 + 0.5 * c * dt);
    integral += g_prev * grow;
    v[k] = std::exp(-kappa * t - half_sig2 * t + sigma_v * B_path[k]) *
           (1.0 + kappa * integral);
  }
  return v;
}

std::function<double(double, double)> measure_changed_drift(
    const ActivityModel& model, double r, double rho, double j) {
  return [model, r, rho, j](double u, double x) {
    double mu = model.drift(x);
    if (u <= j) mu -= r * rho * model.diffusion(x);
    return mu;
  };
}

}  // namespace tcl
