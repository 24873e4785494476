#include "tcl/subordinator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tcl/errors.hpp"
#include "tcl/quadrature.hpp"

namespace tcl {

namespace {

// Regularized lower incomplete gamma P(a, x): series expansion for
// x < a + 1, Lentz continued fraction for the upper tail otherwise.
double reg_lower_gamma(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (!(a > 0.0)) throw DomainError( "incomplete gamma needs a > 0");
  const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 1000; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return std::min(1.0, sum * std::exp(log_prefix));
  }
  double b = x + 1.0 - a;
  double c = 1e300;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::max(0.0, 1.0 - std::exp(log_prefix) * h);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

void require_positive_times(double y, double j) {
  if (!(y > 0.0) || !(j > 0.0))
    throw DomainError( "subordinator times must be positive");
}

// Panel edges over [lo, hi] with panels of width at most `width`; when
// `refine_hi` is set the final panel is split geometrically toward hi to
// resolve a vanishing density at a support edge.
std::vector<double> panel_edges(double lo, double hi, double width,
                                bool refine_hi) {
  std::vector<double> edges{lo};
  double yc = lo;
  while (yc < hi) {
    yc = std::min(yc + width, hi);
    edges.push_back(yc);
  }
  if (refine_hi && edges.size() >= 2) {
    const double a = edges[edges.size() - 2];
    edges.pop_back();
    double w = hi - a;
    for (int k = 0; k < 4; ++k) {
      w *= 0.5;
      edges.push_back(hi - w);
    }
    edges.push_back(hi);
  }
  return edges;
}

}  // namespace

SubordinatorSpec SubordinatorSpec::gamma_clock(double nu, double drift,
                                               bool unit_mean) {
  SubordinatorSpec s;
  s.family = ClockFamily::GammaClock;
  s.nu = nu;
  s.drift = drift;
  s.unit_mean = unit_mean;
  s.validate();
  return s;
}

SubordinatorSpec SubordinatorSpec::inverse_gaussian(double lambda, double drift,
                                                    bool unit_mean) {
  SubordinatorSpec s;
  s.family = ClockFamily::InverseGaussianClock;
  s.lambda = lambda;
  s.drift = drift;
  s.unit_mean = unit_mean;
  s.validate();
  return s;
}

SubordinatorSpec SubordinatorSpec::identity() {
  SubordinatorSpec s;
  s.family = ClockFamily::IdentityClock;
  s.drift = 0.0;
  s.validate();
  return s;
}

double SubordinatorSpec::mass_rate() const {
  if (family == ClockFamily::IdentityClock) return 0.0;
  return unit_mean ? 1.0 - drift : 1.0;
}

double SubordinatorSpec::variance_rate() const {
  const double m = mass_rate();
  switch (family) {
    case ClockFamily::GammaClock:
      return m * nu;
    case ClockFamily::InverseGaussianClock:
      return m / lambda;
    case ClockFamily::IdentityClock:
      return 0.0;
  }
  return 0.0;
}

bool SubordinatorSpec::strictly_increasing() const {
  if (family == ClockFamily::IdentityClock) return true;
  return drift > 0.0;
}

void SubordinatorSpec::validate() const {
  if (family == ClockFamily::IdentityClock) {
    if (drift != 0.0)
      throw ConfigError( "IdentityClock takes no drift");
    return;
  }
  if (family == ClockFamily::GammaClock && !(nu > 0.0))
    throw ConfigError( "GammaClock requires nu > 0");
  if (family == ClockFamily::InverseGaussianClock && !(lambda > 0.0))
    throw ConfigError( "InverseGaussianClock requires lambda > 0");
  if (drift < 0.0) throw ConfigError( "clock drift must be >= 0");
  if (unit_mean && drift >= 1.0)
    throw ConfigError(
                      "unit-mean clock needs drift < 1 to keep a stochastic part");
}

double subordinator_density(const SubordinatorSpec& spec, double y, double j) {
  require_positive_times(y, j);
  if (spec.family == ClockFamily::IdentityClock)
    throw AtomicLawError(
                      "IdentityClock carries a point mass at j = y; integrate "
                      "against the atom instead of a density");
  const double m = spec.mass_rate();
  const double x = j - spec.drift * y;
  if (x <= 0.0) return 0.0;
  if (spec.family == ClockFamily::GammaClock) {
    const double a = m * y / spec.nu;
    const double logpdf = (a - 1.0) * std::log(x) - x / spec.nu -
                          std::lgamma(a) - a * std::log(spec.nu);
    return std::exp(logpdf);
  }
  const double mu = m * y;
  const double lam = spec.lambda;
  return mu * std::sqrt(lam / (2.0 * std::numbers::pi * x * x * x)) *
         std::exp(-lam * (x - mu) * (x - mu) / (2.0 * x));
}

double subordinator_cdf(const SubordinatorSpec& spec, double y, double j) {
  if (!(y > 0.0)) throw DomainError( "cdf needs y > 0");
  if (spec.family == ClockFamily::IdentityClock) return j >= y ? 1.0 : 0.0;
  const double x = j - spec.drift * y;
  if (x <= 0.0) return 0.0;
  const double m = spec.mass_rate();
  if (spec.family == ClockFamily::GammaClock)
    return reg_lower_gamma(m * y / spec.nu, x / spec.nu);
  const double mu = m * y;
  const double lam_sh = spec.lambda * mu * mu;
  const double s = std::sqrt(lam_sh / x);
  return normal_cdf(s * (x / mu - 1.0)) +
         std::exp(2.0 * lam_sh / mu) * normal_cdf(-s * (x / mu + 1.0));
}

cplx subordinator_laplace(const SubordinatorSpec& spec, cplx r, double t) {
  if (t < 0.0) throw DomainError( "laplace transform needs t >= 0");
  if (spec.family == ClockFamily::IdentityClock) return std::exp(-r * t);
  const double m = spec.mass_rate();
  const cplx drift_part = std::exp(-spec.drift * t * r);
  if (spec.family == ClockFamily::GammaClock) {
    const cplx z = 1.0 + spec.nu * r;
    if (!(z.real() > 0.0))
      throw DomainError(
                        "gamma clock Laplace argument outside Re r > -1/nu");
    return std::exp(-(m * t / spec.nu) * std::log(z)) * drift_part;
  }
  const cplx z = 1.0 + 2.0 * r / spec.lambda;
  if (!(z.real() > 0.0))
    throw DomainError(
                      "IG clock Laplace argument outside Re r > -lambda/2");
  return std::exp(spec.lambda * m * t * (1.0 - std::sqrt(z))) * drift_part;
}

double laplace_cumulant(const SubordinatorSpec& spec, double r) {
  if (spec.family == ClockFamily::IdentityClock) return r;
  const double m = spec.mass_rate();
  if (spec.family == ClockFamily::GammaClock) {
    const double z = 1.0 + spec.nu * r;
    if (!(z > 0.0))
      throw DomainError(
                        "gamma clock cumulant outside strip r > -1/nu");
    return (m / spec.nu) * std::log(z) + spec.drift * r;
  }
  const double z = 1.0 + 2.0 * r / spec.lambda;
  if (!(z > 0.0))
    throw DomainError(
                      "IG clock cumulant outside strip r > -lambda/2");
  return spec.lambda * m * (std::sqrt(z) - 1.0) + spec.drift * r;
}

cplx FourierYTable::eval(double xi) const {
  std::vector<cplx> terms(y.size());
  for (std::size_t k = 0; k < y.size(); ++k)
    terms[k] = wf[k] * std::exp(cplx(0.0, xi * y[k]));
  return pairwise_sum(terms.data(), terms.size());
}

FourierYTable make_fourier_y_table(const SubordinatorSpec& spec, double j) {
  if (!(j > 0.0)) throw DomainError( "fourier table needs j > 0");
  if (spec.family == ClockFamily::IdentityClock)
    throw AtomicLawError(
                      "IdentityClock has no density table; use e^{i xi j}");
  const double vr = spec.variance_rate();
  const double sig_y = std::sqrt(vr * std::max(j, vr)) + 0.1 * vr;
  const double width = std::min(0.35, std::max(0.05, sig_y));
  double y_hi = j + 12.0 * sig_y + 6.0 * vr;
  bool capped = false;
  if (spec.drift > 0.0 && j / spec.drift < y_hi) {
    y_hi = j / spec.drift;
    capped = true;
  }
  FourierYTable table;
  PanelRule rule = panels(panel_edges(1e-12, y_hi, width, capped), 16);
  table.y = std::move(rule.x);
  table.wf.resize(table.y.size());
  for (std::size_t k = 0; k < table.y.size(); ++k)
    table.wf[k] = rule.w[k] * subordinator_density(spec, table.y[k], j);
  table.mass = pairwise_sum(table.wf.data(), table.wf.size());
  if (!capped) {
    // Tail-truncation estimate: the mass carried by the last full panel must
    // be negligible relative to the whole integral.
    double tail = 0.0;
    const std::size_t per_panel = 16;
    for (std::size_t k = table.wf.size() - std::min(per_panel, table.wf.size());
         k < table.wf.size(); ++k)
      tail += std::abs(table.wf[k]);
    if (tail > 1e-9 * std::max(std::abs(table.mass), 1e-30) + 1e-300)
      throw QuadratureError(
                        "y-integral tail not negligible at the truncation point");
  }
  return table;
}

cplx fourier_in_y_of_density(const SubordinatorSpec& spec, double xi, double j) {
  if (!(j > 0.0)) throw DomainError( "fourier-in-y needs j > 0");
  if (spec.family == ClockFamily::IdentityClock)
    return std::exp(cplx(0.0, xi * j));
  return make_fourier_y_table(spec, j).eval(xi);
}

cplx inverse_clock_cf(const SubordinatorSpec& spec, double xi, double j) {
  if (!(j > 0.0)) throw DomainError( "inverse clock cf needs j > 0");
  if (spec.family == ClockFamily::IdentityClock)
    return std::exp(cplx(0.0, xi * j));
  if (!spec.strictly_increasing())
    throw UnsupportedSpecError(
                      "inverse-clock factorization needs strictly increasing "
                      "paths (gamma/IG with positive drift)");
  const double y_hi = j / spec.drift;
  const double vr = spec.variance_rate();
  const double sig_y = std::sqrt(vr * std::max(j, vr)) + 0.1 * vr;
  const double width = std::min(0.35, std::max(0.05, sig_y));
  const PanelRule rule = panels(panel_edges(0.0, y_hi, width, true), 16);
  std::vector<cplx> terms(rule.size());
  for (std::size_t k = 0; k < rule.size(); ++k)
    terms[k] = rule.w[k] * subordinator_cdf(spec, rule.x[k], j) *
               std::exp(cplx(0.0, xi * rule.x[k]));
  const cplx integral = pairwise_sum(terms.data(), terms.size());
  return 1.0 + cplx(0.0, xi) * integral;
}

}  // namespace tcl
