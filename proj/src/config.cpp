#include "tcl/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "tcl/errors.hpp"

namespace tcl {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path.empty() ? what : path + ": " + what);
}

// Checked read-only view of one JSON object. Every accessor marks its key as
// consumed; finish() rejects whatever was never consumed, so each section
// tolerates exactly the keys its active branch reads.
class Obj {
 public:
  Obj(const json* node, std::string path)
      : node_(node), path_(std::move(path)) {
    if (node_ && !node_->is_object()) fail(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string sub(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  bool has(const std::string& key) const {
    return node_ && node_->contains(key);
  }

  double number(const std::string& key, double dflt) {
    const json* v = take(key);
    if (!v) return dflt;
    if (!v->is_number()) fail(sub(key), "expected a number");
    return v->get<double>();
  }

  std::uint64_t uinteger(const std::string& key, std::uint64_t dflt) {
    const json* v = take(key);
    if (!v) return dflt;
    if (!v->is_number_integer() ||
        (v->is_number_integer() && !v->is_number_unsigned() &&
         v->get<std::int64_t>() < 0)) {
      fail(sub(key), "expected a nonnegative integer");
    }
    return v->get<std::uint64_t>();
  }

  int integer(const std::string& key, int dflt) {
    const json* v = take(key);
    if (!v) return dflt;
    if (!v->is_number_integer()) fail(sub(key), "expected an integer");
    return v->get<int>();
  }

  bool flag(const std::string& key, bool dflt) {
    const json* v = take(key);
    if (!v) return dflt;
    if (!v->is_boolean()) fail(sub(key), "expected true or false");
    return v->get<bool>();
  }

  std::string text(const std::string& key, const std::string& dflt) {
    const json* v = take(key);
    if (!v) return dflt;
    if (!v->is_string()) fail(sub(key), "expected a string");
    return v->get<std::string>();
  }

  std::string require_text(const std::string& key) {
    if (!has(key)) fail(sub(key), "required key is missing");
    return text(key, "");
  }

  std::optional<double> opt_number(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) fail(sub(key), "expected a number");
    return v->get<double>();
  }

  // Distinguishes "absent" (nullopt) from "present" so callers can apply
  // defaults only when the key is missing.
  std::optional<std::vector<std::string>> string_array(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    if (!v->is_array()) fail(sub(key), "expected an array of strings");
    std::vector<std::string> out;
    out.reserve(v->size());
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& e = (*v)[i];
      if (!e.is_string()) {
        fail(sub(key) + "[" + std::to_string(i) + "]", "expected a string");
      }
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  std::vector<double> number_array(const std::string& key) {
    const json* v = take(key);
    if (!v) return {};
    if (!v->is_array()) fail(sub(key), "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v->size());
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& e = (*v)[i];
      if (!e.is_number()) {
        fail(sub(key) + "[" + std::to_string(i) + "]", "expected a number");
      }
      out.push_back(e.get<double>());
      if (!std::isfinite(out.back())) {
        fail(sub(key) + "[" + std::to_string(i) + "]", "must be finite");
      }
    }
    return out;
  }

  // Child object view; a missing key yields an empty view so defaults apply.
  Obj object(const std::string& key) {
    const json* v = take(key);
    return Obj(v, sub(key));
  }

  void finish() {
    if (!node_) return;
    for (auto it = node_->begin(); it != node_->end(); ++it) {
      if (!used_.count(it.key())) fail("", "unknown key \"" + sub(it.key()) + "\"");
    }
  }

 private:
  const json* take(const std::string& key) {
    if (!node_) return nullptr;
    auto it = node_->find(key);
    if (it == node_->end()) return nullptr;
    used_.insert(key);
    return &*it;
  }

  const json* node_;
  std::string path_;
  std::set<std::string> used_;
};

void check_finite(double v, const std::string& path) {
  if (!std::isfinite(v)) fail(path, "must be finite");
}

void check_positive(double v, const std::string& path) {
  check_finite(v, path);
  if (v <= 0.0) fail(path, "must be > 0");
}

void check_nonnegative(double v, const std::string& path) {
  check_finite(v, path);
  if (v < 0.0) fail(path, "must be >= 0");
}

SubordinatorSpec parse_subordinator(Obj& levy) {
  if (!levy.has("subordinator")) return SubordinatorSpec::gamma_clock(0.2);
  Obj sub = levy.object("subordinator");
  const std::string family = sub.text("family", "gamma");
  SubordinatorSpec spec;
  if (family == "gamma") {
    spec = SubordinatorSpec::gamma_clock(sub.number("nu", 0.2),
                                         sub.number("drift", 0.0),
                                         sub.flag("unit_mean", true));
  } else if (family == "inverse-gaussian") {
    spec = SubordinatorSpec::inverse_gaussian(sub.number("lambda", 2.0),
                                              sub.number("drift", 0.0),
                                              sub.flag("unit_mean", true));
  } else if (family == "identity") {
    spec = SubordinatorSpec::identity();
  } else {
    fail(sub.sub("family"), "unknown family \"" + family +
                                "\" (expected gamma, inverse-gaussian, "
                                "identity)");
  }
  sub.finish();
  return spec;
}

ActivityModel parse_clock(Obj& model, const char* suffix,
                          double default_eps) {
  const std::string kappa_key = std::string("kappa_") + suffix;
  const std::string sigma_key = std::string("sigma_") + suffix;
  const std::string v0_key = std::string("v0_") + suffix;
  const double kappa = model.number(kappa_key, 1.0);
  const double sigma = model.number(sigma_key, 0.5);
  const double v0 = model.number(v0_key, 1.0);
  if (kappa == 0.0 && sigma == 0.0) {
    if (v0 != 1.0) {
      fail(model.sub(v0_key), "a deterministic clock runs at unit rate; v0 "
                              "must be 1");
    }
    return ActivityModel::deterministic_unit(default_eps);
  }
  if (kappa == 0.0 || sigma == 0.0) {
    fail(model.sub(kappa_key),
         "set " + kappa_key + " and " + sigma_key +
             " both to zero (deterministic clock) or both nonzero");
  }
  return ActivityModel::cir(kappa, sigma, v0, default_eps);
}

TaskKind parse_task_kind(Obj& task) {
  const std::string kind = task.require_text("kind");
  if (kind == "simulate") return TaskKind::Simulate;
  if (kind == "fp-solve") return TaskKind::FpSolve;
  if (kind == "density") return TaskKind::Density;
  if (kind == "laplace") return TaskKind::Laplace;
  if (kind == "cf") return TaskKind::Cf;
  if (kind == "validate") return TaskKind::Validate;
  fail(task.sub("kind"), "unknown task \"" + kind +
                             "\" (expected simulate, fp-solve, density, "
                             "laplace, cf, validate)");
}

}  // namespace

const char* task_kind_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::Simulate: return "simulate";
    case TaskKind::FpSolve: return "fp-solve";
    case TaskKind::Density: return "density";
    case TaskKind::Laplace: return "laplace";
    case TaskKind::Cf: return "cf";
    case TaskKind::Validate: return "validate";
  }
  return "?";
}

RunConfig parse_config(const nlohmann::json& doc) {
  RunConfig cfg;
  Obj root(&doc, "");

  // --- model -----------------------------------------------------------
  if (!root.has("model")) fail("model", "required section is missing");
  Obj model = root.object("model");
  const std::string type = model.require_text("type");
  cfg.model_label = type;

  const bool one_factor = type == "cir" || type == "lognormal" ||
                          type == "deterministic-unit";
  const bool generic_two = type == "two-factor";
  std::optional<SVVariant> variant;
  if (type == "sv1") variant = SVVariant::SV1;
  if (type == "sv2") variant = SVVariant::SV2;
  if (type == "sv3") variant = SVVariant::SV3;
  if (type == "sv4") variant = SVVariant::SV4;
  if (!one_factor && !generic_two && !variant) {
    fail(model.sub("type"), "unknown model \"" + type +
                                "\" (expected cir, lognormal, "
                                "deterministic-unit, two-factor, sv1..sv4)");
  }
  cfg.two_factor = !one_factor;
  cfg.variant = variant;

  Obj levy = root.object("levy");
  cfg.spec = parse_subordinator(levy);

  if (one_factor) {
    const double eps = model.number("eps_floor", 0.0);
    check_nonnegative(eps, model.sub("eps_floor"));
    if (type == "deterministic-unit") {
      for (const char* k : {"kappa", "sigma_v", "v0"}) {
        if (model.has(k)) {
          fail(model.sub(k), "the deterministic unit rate has no dynamics");
        }
      }
      cfg.model = ActivityModel::deterministic_unit(eps);
    } else {
      const double kappa = model.number("kappa", 1.0);
      const double sigma = model.number("sigma_v", 0.5);
      const double v0 = model.number("v0", 1.0);
      cfg.model = type == "cir"
                      ? ActivityModel::cir(kappa, sigma, v0, eps)
                      : ActivityModel::lognormal_mean_reverting(kappa, sigma,
                                                                v0, eps);
    }
    cfg.levy.alpha = levy.number("alpha", 0.0);
    cfg.levy.beta = levy.number("beta", 1.0);
    cfg.levy.rho = levy.number("rho", 0.0);
    check_finite(cfg.levy.alpha, levy.sub("alpha"));
    check_finite(cfg.levy.beta, levy.sub("beta"));
    check_finite(cfg.levy.rho, levy.sub("rho"));
    cfg.levy.validate();
  } else {
    for (const char* k : {"alpha", "beta", "rho"}) {
      if (levy.has(k)) {
        fail(levy.sub(k), "two-factor models define their loadings in the "
                          "model section; the levy section carries only the "
                          "subordinator");
      }
    }
    if (generic_two) {
      TwoFactorModel tf;
      tf.a_c = {model.number("a_c1", tf.a_c[0]),
                model.number("a_c2", tf.a_c[1]),
                model.number("a_c3", tf.a_c[2]),
                model.number("a_c4", tf.a_c[3])};
      tf.a_j = {model.number("a_j1", tf.a_j[0]),
                model.number("a_j2", tf.a_j[1])};
      const double eps = model.number("eps_floor", 0.0);
      check_nonnegative(eps, model.sub("eps_floor"));
      tf.clock_c = parse_clock(model, "c", eps);
      tf.clock_j = parse_clock(model, "j", 0.0);
      tf.rho = model.number("rho", 0.0);
      tf.r_int = model.number("r_int", 0.0);
      tf.delta_div = model.number("delta_div", 0.0);
      tf.spec = cfg.spec;
      tf.validate();
      cfg.tf = tf;
    } else {
      TwoFactorParams p;
      p.a_c1 = model.number("a_c1", p.a_c1);
      p.a_c3 = model.number("a_c3", p.a_c3);
      p.a_c4 = model.number("a_c4", p.a_c4);
      p.a_j1 = model.number("a_j1", p.a_j1);
      p.a_j2 = model.number("a_j2", p.a_j2);
      p.a_c2 = model.opt_number("a_c2");
      p.kappa_c = model.opt_number("kappa_c");
      p.sigma_c = model.opt_number("sigma_c");
      p.v0_c = model.opt_number("v0_c");
      p.kappa_j = model.opt_number("kappa_j");
      p.sigma_j = model.opt_number("sigma_j");
      p.v0_j = model.opt_number("v0_j");
      p.rho = model.opt_number("rho");
      p.eps_floor = model.opt_number("eps_floor");
      p.spec = cfg.spec;
      p.r_int = model.number("r_int", 0.0);
      p.delta_div = model.number("delta_div", 0.0);
      cfg.tf = build_sv_variant(*variant, p);
    }
  }
  model.finish();
  levy.finish();

  // --- numerics ---------------------------------------------------------
  Obj num = root.object("numerics");
  NumericsSection& n = cfg.numerics;
  n.t = num.number("t", n.t);
  check_positive(n.t, num.sub("t"));
  n.dt = num.number("dt", n.dt);
  check_positive(n.dt, num.sub("dt"));
  if (n.dt > n.t) fail(num.sub("dt"), "the step cannot exceed the horizon t");
  n.n_paths = static_cast<std::size_t>(num.uinteger("n_paths", n.n_paths));
  if (n.n_paths < 1000) fail(num.sub("n_paths"), "must be >= 1000");
  n.seed = num.uinteger("seed", n.seed);
  n.store_paths =
      static_cast<std::size_t>(num.uinteger("store_paths", n.store_paths));
  if (n.store_paths < 1) fail(num.sub("store_paths"), "must be >= 1");
  if (n.store_paths > n.n_paths) n.store_paths = n.n_paths;
  n.pde_dt = num.number("pde_dt", 0.0);
  check_nonnegative(n.pde_dt, num.sub("pde_dt"));
  if (n.pde_dt > n.t) {
    fail(num.sub("pde_dt"), "the step cannot exceed the horizon t");
  }
  n.x_max = num.number("x_max", 0.0);
  check_nonnegative(n.x_max, num.sub("x_max"));
  n.n_x = num.integer("n_x", 0);
  if (n.n_x < 0) fail(num.sub("n_x"), "must be >= 0");
  if ((n.x_max > 0.0) != (n.n_x > 0)) {
    fail(num.sub("x_max"), "override x_max and n_x together or not at all");
  }
  if (n.n_x > 0 && n.n_x < 8) fail(num.sub("n_x"), "must be >= 8");
  num.finish();

  // --- task -------------------------------------------------------------
  if (!root.has("task")) fail("task", "required section is missing");
  Obj task = root.object("task");
  TaskSection& ts = cfg.task;
  ts.kind = parse_task_kind(task);

  const bool wants_r = ts.kind == TaskKind::Laplace ||
                       ts.kind == TaskKind::Validate;
  const bool wants_theta =
      (ts.kind == TaskKind::Cf || ts.kind == TaskKind::Validate) &&
      !cfg.two_factor;
  const bool wants_z =
      (ts.kind == TaskKind::Density || ts.kind == TaskKind::Validate) &&
      !cfg.two_factor;

  if (wants_r) {
    ts.r_grid = task.number_array("r_grid");
    for (std::size_t i = 0; i < ts.r_grid.size(); ++i) {
      if (ts.r_grid[i] < 0.0) {
        fail(task.sub("r_grid") + "[" + std::to_string(i) + "]",
             "Laplace arguments must be >= 0");
      }
    }
    if (ts.kind == TaskKind::Laplace && ts.r_grid.empty()) {
      fail(task.sub("r_grid"), "a laplace task needs at least one argument");
    }
    if (cfg.two_factor && ts.kind == TaskKind::Validate && ts.r_grid.empty()) {
      fail(task.sub("r_grid"),
           "two-factor validation compares Laplace transforms; supply r_grid");
    }
  }
  if (wants_theta) {
    ts.theta_grid = task.number_array("theta_grid");
    if (ts.kind == TaskKind::Cf && ts.theta_grid.empty()) {
      fail(task.sub("theta_grid"), "a cf task needs at least one argument");
    }
    if (ts.kind == TaskKind::Validate && !ts.theta_grid.empty() &&
        (cfg.levy.alpha != 0.0 || cfg.levy.beta != 1.0)) {
      fail(task.sub("theta_grid"),
           "the characteristic-function check targets the normalized "
           "composition; it needs levy.alpha = 0 and levy.beta = 1");
    }
  }
  if (wants_z && task.has("z_grid")) {
    ts.z_grid_given = true;
    Obj zg = task.object("z_grid");
    ts.z_grid.lo = zg.number("lo", ts.z_grid.lo);
    ts.z_grid.hi = zg.number("hi", ts.z_grid.hi);
    ts.z_grid.n = zg.integer("n", ts.z_grid.n);
    zg.finish();
    check_finite(ts.z_grid.lo, zg.sub("lo"));
    check_finite(ts.z_grid.hi, zg.sub("hi"));
    if (!(ts.z_grid.lo < ts.z_grid.hi)) {
      fail(zg.sub("lo"), "the evaluation interval must satisfy lo < hi");
    }
    if (ts.z_grid.n < 2 || ts.z_grid.n > 2000000) {
      fail(zg.sub("n"), "must lie in [2, 2000000]");
    }
  }
  if (ts.kind == TaskKind::FpSolve) {
    if (cfg.two_factor) {
      fail(task.sub("kind"),
           "fp-solve targets the one-factor rate equation; pick a one-factor "
           "model");
    }
    ts.xi = task.number("xi", ts.xi);
    ts.eta = task.number("eta", ts.eta);
    check_finite(ts.xi, task.sub("xi"));
    check_finite(ts.eta, task.sub("eta"));
  }
  if (ts.kind == TaskKind::Validate && task.has("tolerances")) {
    Obj tol = task.object("tolerances");
    ts.tolerances.ks = tol.number("ks", ts.tolerances.ks);
    ts.tolerances.cf_abs = tol.number("cf_abs", ts.tolerances.cf_abs);
    ts.tolerances.laplace_rel =
        tol.number("laplace_rel", ts.tolerances.laplace_rel);
    tol.finish();
    check_positive(ts.tolerances.ks, tol.sub("ks"));
    check_positive(ts.tolerances.cf_abs, tol.sub("cf_abs"));
    check_positive(ts.tolerances.laplace_rel, tol.sub("laplace_rel"));
  }
  if (cfg.two_factor &&
      (ts.kind == TaskKind::Density || ts.kind == TaskKind::Cf)) {
    fail(task.sub("kind"),
         std::string(task_kind_name(ts.kind)) +
             " is assembled for the one-factor composition only");
  }
  if (cfg.two_factor && ts.kind == TaskKind::Laplace && !cfg.variant) {
    fail(model.sub("type"),
         "laplace on a generic two-factor model has no assembled route; use "
         "one of the sv1..sv4 reductions");
  }
  if (cfg.two_factor && ts.kind == TaskKind::Validate && !cfg.variant) {
    fail(model.sub("type"),
         "two-factor validation needs a transform route; use one of the "
         "sv1..sv4 reductions");
  }
  task.finish();

  // --- output -----------------------------------------------------------
  Obj out = root.object("output");
  cfg.output.directory = out.text("directory", cfg.output.directory);
  if (cfg.output.directory.empty()) {
    fail(out.sub("directory"), "must be a nonempty path");
  }
  if (auto fmts = out.string_array("formats")) {
    if (fmts->empty()) {
      fail(out.sub("formats"), "expected a nonempty array of format names");
    }
    cfg.output.csv = false;
    cfg.output.json = false;
    for (std::size_t i = 0; i < fmts->size(); ++i) {
      const std::string& f = (*fmts)[i];
      if (f == "csv") {
        cfg.output.csv = true;
      } else if (f == "json") {
        cfg.output.json = true;
      } else {
        fail(out.sub("formats") + "[" + std::to_string(i) + "]",
             "unknown format \"" + f + "\" (expected csv, json)");
      }
    }
  }
  out.finish();

  root.finish();
  return cfg;
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file \"" + path + "\"");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    throw ConfigError("config file \"" + path + "\" is not valid JSON");
  }
  return doc;
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override \"" + assignment +
                      "\" is not of the form dotted.path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key =
        path.substr(start, dot == std::string::npos ? std::string::npos
                                                    : dot - start);
    if (key.empty()) {
      throw ConfigError("override path \"" + path + "\" has an empty segment");
    }
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    json& next = (*node)[key];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) {
      throw ConfigError("override path \"" + path +
                        "\" descends through the non-object key \"" + key +
                        "\"");
    }
    node = &next;
    start = dot + 1;
  }
}

namespace {

const char* kPresetCirFigure1 = R"json({
  "model": {"type": "cir", "kappa": 1.0, "sigma_v": 0.5, "v0": 1.0},
  "levy": {"alpha": 0.0, "beta": 1.0, "rho": -0.5,
           "subordinator": {"family": "gamma", "nu": 0.2}},
  "numerics": {"t": 2.0, "dt": 0.001, "n_paths": 4096,
               "seed": 20260816, "store_paths": 8},
  "task": {"kind": "simulate"},
  "output": {"directory": "out/cir-figure1"}
})json";

const char* kPresetSv1 = R"json({
  "model": {"type": "sv1", "a_c2": 0.3},
  "levy": {"subordinator": {"family": "gamma", "nu": 0.2}},
  "numerics": {"t": 1.0, "dt": 0.001, "n_paths": 1000000, "seed": 20260816},
  "task": {"kind": "validate", "r_grid": [0.5, 1.0],
           "tolerances": {"laplace_rel": 0.01}},
  "output": {"directory": "out/sv1"}
})json";

const char* kPresetSv2 = R"json({
  "model": {"type": "sv2"},
  "levy": {"subordinator": {"family": "gamma", "nu": 0.2}},
  "numerics": {"t": 1.0, "dt": 0.001, "n_paths": 1000000, "seed": 20260816},
  "task": {"kind": "validate", "r_grid": [0.5, 1.0],
           "tolerances": {"laplace_rel": 0.01}},
  "output": {"directory": "out/sv2"}
})json";

const char* kPresetSv3 = R"json({
  "model": {"type": "sv3"},
  "levy": {"subordinator": {"family": "gamma", "nu": 0.2}},
  "numerics": {"t": 1.0, "dt": 0.001, "n_paths": 1000000, "seed": 20260816},
  "task": {"kind": "validate", "r_grid": [0.5, 1.0],
           "tolerances": {"laplace_rel": 0.01}},
  "output": {"directory": "out/sv3"}
})json";

const char* kPresetSv4 = R"json({
  "model": {"type": "sv4", "a_c2": 0.3, "a_c3": 0.0,
            "kappa_j": 1.5, "sigma_j": 0.4, "v0_j": 1.0},
  "levy": {"subordinator": {"family": "gamma", "nu": 0.2}},
  "numerics": {"t": 1.0, "dt": 0.001, "n_paths": 1000000, "seed": 20260816},
  "task": {"kind": "validate", "r_grid": [0.5, 1.0],
           "tolerances": {"laplace_rel": 0.01}},
  "output": {"directory": "out/sv4"}
})json";

struct PresetRow {
  const char* name;
  const char* text;
};

const PresetRow kPresets[] = {
    {"cir-figure1", kPresetCirFigure1}, {"sv1", kPresetSv1},
    {"sv2", kPresetSv2},                {"sv3", kPresetSv3},
    {"sv4", kPresetSv4},
};

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& row : kPresets) out.emplace_back(row.name);
  return out;
}

nlohmann::json preset_config(const std::string& name) {
  for (const auto& row : kPresets) {
    if (name == row.name) return json::parse(row.text);
  }
  throw ConfigError("unknown preset \"" + name +
                    "\"; list-presets shows the shipped names");
}

}  // namespace tcl
