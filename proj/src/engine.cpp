#include "tcl/engine.hpp"

#include <cmath>
#include <complex>
#include <filesystem>
#include <string>
#include <vector>

#include "tcl/errors.hpp"
#include "tcl/fokker_planck.hpp"
#include "tcl/io.hpp"
#include "tcl/model_zoo.hpp"
#include "tcl/montecarlo.hpp"
#include "tcl/transforms.hpp"

namespace tcl {

namespace {

using nlohmann::json;

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

int resolved_mc_steps(const NumericsSection& n) {
  return static_cast<int>(std::ceil(n.t / n.dt - 1e-9));
}

double resolved_pde_dt(const NumericsSection& n) {
  return n.pde_dt > 0.0 ? n.pde_dt : n.t / 400.0;
}

SpatialGrid resolved_rate_grid(const NumericsSection& n, double v0) {
  if (n.n_x > 0) {
    return SpatialGrid::rate_anchored(n.x_max, n.x_max / n.n_x, v0);
  }
  return default_rate_grid(v0);
}

json subordinator_echo(const SubordinatorSpec& spec) {
  json j;
  switch (spec.family) {
    case ClockFamily::GammaClock:
      j["family"] = "gamma";
      j["nu"] = spec.nu;
      break;
    case ClockFamily::InverseGaussianClock:
      j["family"] = "inverse-gaussian";
      j["lambda"] = spec.lambda;
      break;
    case ClockFamily::IdentityClock:
      j["family"] = "identity";
      break;
  }
  if (spec.family != ClockFamily::IdentityClock) {
    j["drift"] = spec.drift;
    j["unit_mean"] = spec.unit_mean;
  }
  return j;
}

json config_echo(const RunConfig& cfg) {
  json j;
  j["model"] = cfg.model_label;
  j["t"] = cfg.numerics.t;
  j["seed"] = cfg.numerics.seed;
  j["subordinator"] = subordinator_echo(cfg.spec);
  if (!cfg.two_factor) {
    j["levy"] = {{"alpha", cfg.levy.alpha},
                 {"beta", cfg.levy.beta},
                 {"rho", cfg.levy.rho}};
  }
  return j;
}

json moment_echo(const EmpiricalDistribution& emp) {
  return json{{"mean", emp.mean},
              {"mean_se", emp.mean_se},
              {"variance", emp.variance},
              {"sd", std::sqrt(emp.variance)},
              {"skewness", emp.skewness}};
}

double sv_laplace(const RunConfig& cfg, double t, double r) {
  switch (*cfg.variant) {
    case SVVariant::SV1:
    case SVVariant::SV4:
      return laplace_Y_sv14(cfg.tf, t, r);
    case SVVariant::SV2:
      return laplace_Y_sv2(cfg.tf, t, r);
    case SVVariant::SV3:
      return laplace_Y_sv3(cfg.tf, t, r);
  }
  throw ConfigError("unreachable sv variant");
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

TaskArtifacts run_simulate(const RunConfig& cfg, int workers) {
  const NumericsSection& n = cfg.numerics;
  TaskArtifacts art;
  const std::string& dir = cfg.output.directory;

  PathBundle b =
      cfg.two_factor
          ? simulate_two_factor_paths(cfg.tf, n.t, n.n_paths, n.dt, n.seed,
                                      n.store_paths, workers)
          : simulate_Y_paths(cfg.model, cfg.levy, cfg.spec, n.t, n.n_paths,
                             n.dt, n.seed, n.store_paths, workers);

  const std::size_t m = b.stored_paths;
  const std::size_t nodes = static_cast<std::size_t>(b.n_steps) + 1;
  std::vector<double> time(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    time[i] = n.t * static_cast<double>(i) / static_cast<double>(b.n_steps);
  }

  auto stored_column = [&](const std::vector<double>& arr, std::size_t path) {
    std::vector<double> col(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
      col[i] = b.path_at(arr, path, static_cast<int>(i));
    }
    return col;
  };

  if (cfg.output.csv) {
    std::vector<std::string> v_header{"t"};
    std::vector<std::vector<double>> v_cols{time};
    std::vector<std::string> t_header{"t"};
    std::vector<std::vector<double>> t_cols{time};
    for (std::size_t p = 0; p < m; ++p) {
      const std::string tag = std::to_string(p + 1);
      if (cfg.two_factor) {
        v_header.push_back("v_c" + tag);
        v_cols.push_back(stored_column(b.v, p));
        v_header.push_back("v_j" + tag);
        v_cols.push_back(stored_column(b.v2, p));
        t_header.push_back("T_c" + tag);
        t_cols.push_back(stored_column(b.T, p));
        t_header.push_back("T_j" + tag);
        t_cols.push_back(stored_column(b.T2, p));
      } else {
        v_header.push_back("v" + tag);
        v_cols.push_back(stored_column(b.v, p));
        t_header.push_back("T" + tag);
        t_cols.push_back(stored_column(b.T, p));
      }
    }
    t_header.push_back("reference");
    t_cols.push_back(time);  // the calendar line T = t

    const std::string v_path = join(dir, "paths_v.csv");
    const std::string t_path = join(dir, "paths_T.csv");
    write_csv(v_path, v_header, v_cols);
    write_csv(t_path, t_header, t_cols);
    art.files.push_back(v_path);
    art.files.push_back(t_path);
  }

  json summary;
  summary["task"] = "simulate";
  summary["config"] = config_echo(cfg);
  summary["n_paths"] = b.n_paths;
  summary["n_steps"] = b.n_steps;
  summary["dt"] = b.dt;
  summary["stored_paths"] = b.stored_paths;
  summary["terminal"]["T"] = moment_echo(
      EmpiricalDistribution::from_samples(b.T_end));
  summary["terminal"]["Y"] = moment_echo(
      EmpiricalDistribution::from_samples(b.Y_end));
  if (cfg.two_factor) {
    summary["terminal"]["T_jump"] = moment_echo(
        EmpiricalDistribution::from_samples(b.T2_end));
    summary["terminal"]["price_ratio"] = moment_echo(
        EmpiricalDistribution::from_samples(b.S_end));
  } else {
    summary["terminal"]["J"] = moment_echo(
        EmpiricalDistribution::from_samples(b.J_end));
  }
  if (cfg.output.json) {
    const std::string s_path = join(dir, "summary.json");
    write_json_file(s_path, summary);
    art.files.push_back(s_path);
  }
  art.summary = std::move(summary);
  return art;
}

// ---------------------------------------------------------------------------
// density / laplace / cf
// ---------------------------------------------------------------------------

double trapezoid_mass(const std::vector<double>& x,
                      const std::vector<std::complex<double>>& f) {
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    mass += 0.5 * (f[i].real() + f[i + 1].real()) * (x[i + 1] - x[i]);
  }
  return mass;
}

json transform_metadata(const TransformResult& res) {
  return json{{"xi_cutoff", res.xi_cutoff},
              {"eta_cutoff", res.eta_cutoff},
              {"j_cutoff", res.j_cutoff},
              {"truncation_estimate", res.truncation_estimate}};
}

TaskArtifacts run_density(const RunConfig& cfg) {
  const ZGrid& zg = cfg.task.z_grid;
  const std::vector<double> grid = linspace(zg.lo, zg.hi, zg.n);
  const bool normalized = cfg.levy.alpha == 0.0 && cfg.levy.beta == 1.0;
  const TransformResult res =
      normalized
          ? pdf_Z(cfg.model, cfg.levy, cfg.spec, cfg.numerics.t, grid)
          : pdf_Y(cfg.model, cfg.levy, cfg.spec, cfg.numerics.t, grid);

  TaskArtifacts art;
  const std::string& dir = cfg.output.directory;
  if (cfg.output.csv) {
    std::vector<double> re(grid.size()), im(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      re[i] = res.values[i].real();
      im[i] = res.values[i].imag();
    }
    const std::string path = join(dir, "density.csv");
    write_csv(path, {"z", "density", "imag_residue"},
              {res.arguments, re, im});
    art.files.push_back(path);
  }
  json summary;
  summary["task"] = "density";
  summary["config"] = config_echo(cfg);
  summary["composition"] = normalized ? "Z" : "Y";
  summary["n_nodes"] = grid.size();
  summary["mass"] = trapezoid_mass(res.arguments, res.values);
  summary["resolution"] = transform_metadata(res);
  if (cfg.output.json) {
    const std::string path = join(dir, "density.json");
    write_json_file(path, summary);
    art.files.push_back(path);
  }
  art.summary = std::move(summary);
  return art;
}

TransformResult laplace_batch(const RunConfig& cfg) {
  TransformResult res;
  res.kind = TransformKind::Laplace;
  res.arguments = cfg.task.r_grid;
  for (double r : cfg.task.r_grid) {
    const double v =
        cfg.two_factor
            ? sv_laplace(cfg, cfg.numerics.t, r)
            : laplace_Y(cfg.model, cfg.levy, cfg.spec, cfg.numerics.t, r);
    res.values.emplace_back(v, 0.0);
  }
  return res;
}

TaskArtifacts run_laplace(const RunConfig& cfg) {
  const TransformResult res = laplace_batch(cfg);
  TaskArtifacts art;
  const std::string& dir = cfg.output.directory;
  if (cfg.output.csv) {
    std::vector<double> vals(res.values.size());
    for (std::size_t i = 0; i < vals.size(); ++i) {
      vals[i] = res.values[i].real();
    }
    const std::string path = join(dir, "laplace.csv");
    write_csv(path, {"r", "value"}, {res.arguments, vals});
    art.files.push_back(path);
  }
  json summary;
  summary["task"] = "laplace";
  summary["config"] = config_echo(cfg);
  summary["r_grid"] = res.arguments;
  json vals = json::array();
  for (const auto& v : res.values) vals.push_back(v.real());
  summary["values"] = vals;
  if (cfg.output.json) {
    const std::string path = join(dir, "laplace.json");
    write_json_file(path, summary);
    art.files.push_back(path);
  }
  art.summary = std::move(summary);
  return art;
}

TransformResult cf_batch(const RunConfig& cfg) {
  TransformResult res;
  res.kind = TransformKind::Cf;
  res.arguments = cfg.task.theta_grid;
  for (double theta : cfg.task.theta_grid) {
    res.values.push_back(
        cf_Z(cfg.model, cfg.levy, cfg.spec, cfg.numerics.t, theta));
  }
  return res;
}

TaskArtifacts run_cf(const RunConfig& cfg) {
  const TransformResult res = cf_batch(cfg);
  TaskArtifacts art;
  const std::string& dir = cfg.output.directory;
  if (cfg.output.csv) {
    std::vector<double> re(res.values.size()), im(res.values.size());
    for (std::size_t i = 0; i < res.values.size(); ++i) {
      re[i] = res.values[i].real();
      im[i] = res.values[i].imag();
    }
    const std::string path = join(dir, "cf.csv");
    write_csv(path, {"theta", "re", "im"}, {res.arguments, re, im});
    art.files.push_back(path);
  }
  json summary;
  summary["task"] = "cf";
  summary["config"] = config_echo(cfg);
  summary["theta_grid"] = res.arguments;
  json re = json::array(), im = json::array();
  for (const auto& v : res.values) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  summary["values_re"] = re;
  summary["values_im"] = im;
  if (cfg.output.json) {
    const std::string path = join(dir, "cf.json");
    write_json_file(path, summary);
    art.files.push_back(path);
  }
  art.summary = std::move(summary);
  return art;
}

// ---------------------------------------------------------------------------
// fp-solve
// ---------------------------------------------------------------------------

const char* resolved_scheme(const RunConfig& cfg) {
  const bool stochastic = cfg.model.kind != ActivityKind::DeterministicUnit;
  return (cfg.task.eta != 0.0 && stochastic) ? "gauge" : "direct";
}

TaskArtifacts run_fp_solve(const RunConfig& cfg) {
  const NumericsSection& n = cfg.numerics;
  RateSolveOptions opts;
  opts.dt = resolved_pde_dt(n);
  opts.grid = resolved_rate_grid(n, cfg.model.v0);
  const RateSolveResult res = solve_qhat_snapshots(
      cfg.model, n.t, cfg.task.xi, cfg.task.eta, opts);
  const PDEField& f = res.final_field;
  const Axis& ax = f.axes.front();

  TaskArtifacts art;
  const std::string& dir = cfg.output.directory;
  std::vector<double> re(f.values.size()), im(f.values.size());
  std::vector<double> interleaved(2 * f.values.size());
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    re[i] = f.values[i].real();
    im[i] = f.values[i].imag();
    interleaved[2 * i] = re[i];
    interleaved[2 * i + 1] = im[i];
  }
  if (cfg.output.csv) {
    const std::string path = join(dir, "field.csv");
    write_csv(path, {"x", "weight", "re", "im"}, {ax.x, ax.w, re, im});
    art.files.push_back(path);
  }
  json manifest;
  manifest["layout"] = "interleaved complex (re, im) over the rate axis";
  manifest["n_x"] = ax.n();
  manifest["xi"] = cfg.task.xi;
  manifest["eta"] = cfg.task.eta;
  manifest["t"] = n.t;
  manifest["dt"] = opts.dt;
  manifest["scheme"] = resolved_scheme(cfg);
  manifest["mass_re"] = f.mass.real();
  manifest["mass_im"] = f.mass.imag();
  auto [data_path, manifest_path] =
      write_binary_with_manifest(dir, "field", interleaved, manifest);
  art.files.push_back(data_path);
  art.files.push_back(manifest_path);

  json summary;
  summary["task"] = "fp-solve";
  summary["config"] = config_echo(cfg);
  summary["xi"] = cfg.task.xi;
  summary["eta"] = cfg.task.eta;
  summary["n_x"] = ax.n();
  summary["dt"] = opts.dt;
  summary["scheme"] = resolved_scheme(cfg);
  summary["mass_re"] = f.mass.real();
  summary["mass_im"] = f.mass.imag();
  if (cfg.output.json) {
    const std::string path = join(dir, "fp_solve.json");
    write_json_file(path, summary);
    art.files.push_back(path);
  }
  art.summary = std::move(summary);
  return art;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

TaskArtifacts run_validate(const RunConfig& cfg, int workers) {
  const NumericsSection& n = cfg.numerics;
  const TaskSection& ts = cfg.task;
  TaskArtifacts art;

  const EmpiricalDistribution emp =
      cfg.two_factor
          ? simulate_two_factor(cfg.tf, n.t, n.n_paths, n.dt, n.seed,
                                n.store_paths, workers)
          : simulate_Y(cfg.model, cfg.levy, cfg.spec, n.t, n.n_paths, n.dt,
                       n.seed, n.store_paths, workers);

  json report;
  report["task"] = "validate";
  report["config"] = config_echo(cfg);
  report["n_paths"] = n.n_paths;
  report["sample"] = moment_echo(emp);
  json checks = json::array();
  bool all_pass = true;

  auto gate = [&](const std::string& name, double value, double tolerance) {
    const bool pass = value < tolerance;
    checks.push_back(json{{"name", name},
                          {"value", value},
                          {"tolerance", tolerance},
                          {"pass", pass}});
    all_pass = all_pass && pass;
  };

  const bool run_pdf =
      !cfg.two_factor &&
      (ts.z_grid_given || (ts.r_grid.empty() && ts.theta_grid.empty()));
  if (run_pdf) {
    const std::vector<double> grid =
        linspace(ts.z_grid.lo, ts.z_grid.hi, ts.z_grid.n);
    const bool normalized = cfg.levy.alpha == 0.0 && cfg.levy.beta == 1.0;
    const TransformResult pdf =
        normalized ? pdf_Z(cfg.model, cfg.levy, cfg.spec, n.t, grid)
                   : pdf_Y(cfg.model, cfg.levy, cfg.spec, n.t, grid);
    const ComparisonReport rep = compare(emp, pdf);
    report["kolmogorov_smirnov"] = rep.ks.value();
    report["l1_density"] = rep.l1_density.value();
    report["mean_gap"] = rep.mean_gap.value();
    report["mean_gap_se"] = rep.mean_gap_se.value();
    report["variance_gap"] = rep.variance_gap.value();
    report["variance_gap_se"] = rep.variance_gap_se.value();
    report["density_resolution"] = transform_metadata(pdf);
    gate("kolmogorov_smirnov", rep.ks.value(), ts.tolerances.ks);
  }
  if (!ts.theta_grid.empty()) {
    const TransformResult cfres = cf_batch(cfg);
    const ComparisonReport rep = compare(emp, cfres);
    report["max_cf_error"] = rep.max_cf_error.value();
    gate("max_cf_error", rep.max_cf_error.value(), ts.tolerances.cf_abs);
  }
  if (!ts.r_grid.empty()) {
    const TransformResult lap = laplace_batch(cfg);
    const ComparisonReport rep = compare(emp, lap);
    report["max_laplace_rel_error"] = rep.max_laplace_rel_error.value();
    json vals = json::array();
    for (const auto& v : lap.values) vals.push_back(v.real());
    report["laplace_r_grid"] = lap.arguments;
    report["laplace_values"] = vals;
    gate("max_laplace_rel_error", rep.max_laplace_rel_error.value(),
         ts.tolerances.laplace_rel);
  }

  report["checks"] = checks;
  report["passed"] = all_pass;

  const std::string path = join(cfg.output.directory, "report.json");
  write_json_file(path, report);
  art.files.push_back(path);
  art.summary = std::move(report);
  art.passed = all_pass;
  return art;
}

}  // namespace

// ---------------------------------------------------------------------------
// plan resolution (--dry-run)
// ---------------------------------------------------------------------------

json resolve_plan(const RunConfig& cfg) {
  const NumericsSection& n = cfg.numerics;
  const TaskSection& ts = cfg.task;
  json plan;
  plan["task"] = task_kind_name(ts.kind);
  plan["model"] = cfg.model_label;
  plan["t"] = n.t;

  const bool monte_carlo =
      ts.kind == TaskKind::Simulate || ts.kind == TaskKind::Validate;
  if (monte_carlo) {
    const int steps = resolved_mc_steps(n);
    plan["monte_carlo"] = json{{"n_paths", n.n_paths},
                               {"n_steps", steps},
                               {"dt", n.t / steps},
                               {"stored_paths", n.store_paths},
                               {"seed", n.seed}};
  }

  const bool pde_backed =
      !cfg.two_factor && cfg.model.kind != ActivityKind::DeterministicUnit &&
      (ts.kind == TaskKind::FpSolve || ts.kind == TaskKind::Density ||
       ts.kind == TaskKind::Laplace || ts.kind == TaskKind::Cf ||
       ts.kind == TaskKind::Validate);
  if (pde_backed) {
    const SpatialGrid grid = resolved_rate_grid(n, cfg.model.v0);
    const double dt = resolved_pde_dt(n);
    plan["rate_grid"] = json{{"n_x", grid.x.n()},
                             {"x_max", grid.x.x.back()},
                             {"dt", dt},
                             {"n_t", static_cast<int>(std::ceil(n.t / dt))}};
  }

  if (ts.kind == TaskKind::FpSolve) {
    plan["frequency_node"] = json{{"xi", ts.xi}, {"eta", ts.eta}};
    plan["scheme"] = resolved_scheme(cfg);
  }
  if (ts.kind == TaskKind::Density ||
      (ts.kind == TaskKind::Validate && !cfg.two_factor)) {
    plan["z_grid"] = json{{"lo", ts.z_grid.lo},
                          {"hi", ts.z_grid.hi},
                          {"n", ts.z_grid.n}};
    plan["frequency_box"] = "grown adaptively from the clock-transform decay";
  }
  if (!ts.r_grid.empty()) {
    plan["r_grid"] = ts.r_grid;
    // Window truncation for the largest requested argument: the integrand
    // tilt grows like e^{r^2 j / 2}, so this is the widest window.
    double r_max = 0.0;
    for (double r : ts.r_grid) r_max = std::max(r_max, r);
    const double level =
        r_max * (cfg.two_factor ? 1.0 : std::abs(cfg.levy.beta));
    if (cfg.spec.family != ClockFamily::IdentityClock) {
      const double jmax = window_jmax(cfg.spec, level, n.t, 1e-10);
      const WindowRule rule = window_rule(n.t, jmax);
      plan["subordinator_window"] =
          json{{"j_max", jmax},
               {"nodes", rule.inner.size() + rule.outer.size()}};
    }
  }
  if (!ts.theta_grid.empty()) plan["theta_grid"] = ts.theta_grid;
  if (ts.kind == TaskKind::Validate) {
    plan["tolerances"] = json{{"ks", ts.tolerances.ks},
                              {"cf_abs", ts.tolerances.cf_abs},
                              {"laplace_rel", ts.tolerances.laplace_rel}};
  }
  plan["output_directory"] = cfg.output.directory;
  return plan;
}

TaskArtifacts run_task(const RunConfig& cfg, int workers) {
  switch (cfg.task.kind) {
    case TaskKind::Simulate:
      return run_simulate(cfg, workers);
    case TaskKind::Density:
      return run_density(cfg);
    case TaskKind::Laplace:
      return run_laplace(cfg);
    case TaskKind::Cf:
      return run_cf(cfg);
    case TaskKind::FpSolve:
      return run_fp_solve(cfg);
    case TaskKind::Validate:
      return run_validate(cfg, workers);
  }
  throw ConfigError("unreachable task kind");
}

}  // namespace tcl
