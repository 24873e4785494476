#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tcl/config.hpp"
#include "tcl/engine.hpp"
#include "tcl/errors.hpp"
#include "tcl/io.hpp"

namespace {

// Exit contract: 0 success, 2 configuration/schema violation, 3 numerical
// failure. Infeasible-model requests are configuration-level: they are
// decidable from the document alone, before any numerics run.
int exit_code_for(const tcl::EngineError& e) {
  const std::string& k = e.kind();
  if (k == "ConfigError" || k == "DomainError" || k == "UnsupportedModel" ||
      k == "UnsupportedSpec" || k == "DegenerateModel" || k == "AtomicLaw") {
    return 2;
  }
  return 3;
}

const char* preset_blurb(const std::string& name) {
  if (name == "cir-figure1") {
    return "mean-reverting clock simulation demo (paths + summary)";
  }
  if (name == "sv1") return "stochastic continuous clock, pinned jump clock";
  if (name == "sv2") return "stochastic jump clock, pinned continuous clock";
  if (name == "sv3") return "one shared clock on both return components";
  if (name == "sv4") return "independent clocks on the two components";
  return "";
}

struct InputFlags {
  std::string config_path;
  std::string preset;
  std::vector<std::string> overrides;
};

void add_input_flags(CLI::App* cmd, InputFlags& in) {
  cmd->add_option("--config", in.config_path,
                  "JSON run-configuration file");
  cmd->add_option("--preset", in.preset,
                  "shipped configuration (see list-presets)");
  cmd->add_option("--set", in.overrides,
                  "dotted-path override, key.path=value (repeatable)");
}

nlohmann::json resolve_document(const InputFlags& in) {
  if (in.config_path.empty() == in.preset.empty()) {
    throw tcl::ConfigError(
        "supply exactly one of --config PATH or --preset NAME");
  }
  nlohmann::json doc = in.config_path.empty()
                           ? tcl::preset_config(in.preset)
                           : tcl::load_json_file(in.config_path);
  for (const std::string& s : in.overrides) tcl::apply_override(doc, s);
  return doc;
}

void print_headline(const tcl::TaskArtifacts& art) {
  const nlohmann::json& s = art.summary;
  const std::string task = s.value("task", "");
  if (task == "laplace") {
    const auto& rs = s.at("r_grid");
    const auto& vs = s.at("values");
    for (std::size_t i = 0; i < rs.size(); ++i) {
      std::printf("L(%s) = %s\n", tcl::format_g17(rs[i].get<double>()).c_str(),
                  tcl::format_g17(vs[i].get<double>()).c_str());
    }
  } else if (task == "cf") {
    const auto& th = s.at("theta_grid");
    const auto& re = s.at("values_re");
    const auto& im = s.at("values_im");
    for (std::size_t i = 0; i < th.size(); ++i) {
      std::printf("cf(%s) = %s + %si\n",
                  tcl::format_g17(th[i].get<double>()).c_str(),
                  tcl::format_g17(re[i].get<double>()).c_str(),
                  tcl::format_g17(im[i].get<double>()).c_str());
    }
  } else if (task == "density") {
    std::printf("mass = %s\n",
                tcl::format_g17(s.at("mass").get<double>()).c_str());
  } else if (task == "fp-solve") {
    std::printf("mass = %s + %si  [%s scheme]\n",
                tcl::format_g17(s.at("mass_re").get<double>()).c_str(),
                tcl::format_g17(s.at("mass_im").get<double>()).c_str(),
                s.at("scheme").get<std::string>().c_str());
  } else if (task == "simulate") {
    const auto& tm = s.at("terminal").at("T");
    std::printf("T_end mean = %s (sd %s)\n",
                tcl::format_g17(tm.at("mean").get<double>()).c_str(),
                tcl::format_g17(tm.at("sd").get<double>()).c_str());
  } else if (task == "validate") {
    for (const auto& c : s.at("checks")) {
      std::printf("%s = %s (tolerance %s) %s\n",
                  c.at("name").get<std::string>().c_str(),
                  tcl::format_g17(c.at("value").get<double>()).c_str(),
                  tcl::format_g17(c.at("tolerance").get<double>()).c_str(),
                  c.at("pass").get<bool>() ? "PASS" : "FAIL");
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transform engine for correlated time-changed processes"};
  app.require_subcommand(1);

  InputFlags run_in, check_in;
  std::string out_dir;
  int workers = 0;
  std::uint64_t seed = 0;
  bool dry_run = false;

  CLI::App* run = app.add_subcommand("run", "execute the configured task");
  add_input_flags(run, run_in);
  run->add_option("--out", out_dir,
                  "artifact directory (overrides output.directory)");
  run->add_option("--workers", workers,
                  "worker threads (default: TCL_ENGINE_WORKERS, then "
                  "hardware)");
  CLI::Option* seed_opt =
      run->add_option("--seed", seed, "override numerics.seed");
  run->add_flag("--dry-run", dry_run,
                "validate and print the resolved numeric plan, compute "
                "nothing");

  CLI::App* check = app.add_subcommand(
      "validate-config", "parse and schema-check a configuration");
  add_input_flags(check, check_in);

  app.add_subcommand("list-presets", "list shipped configurations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("list-presets")) {
      for (const std::string& name : tcl::preset_names()) {
        std::printf("%-12s %s\n", name.c_str(), preset_blurb(name));
      }
      return 0;
    }

    if (app.got_subcommand("validate-config")) {
      const nlohmann::json doc = resolve_document(check_in);
      const tcl::RunConfig cfg = tcl::parse_config(doc);
      std::printf("configuration OK: task %s, model %s\n",
                  tcl::task_kind_name(cfg.task.kind),
                  cfg.model_label.c_str());
      return 0;
    }

    // run
    const nlohmann::json doc = resolve_document(run_in);
    tcl::RunConfig cfg = tcl::parse_config(doc);
    if (seed_opt->count() > 0) cfg.numerics.seed = seed;
    if (!out_dir.empty()) cfg.output.directory = out_dir;
    if (workers > 0) {
      setenv("TCL_ENGINE_WORKERS", std::to_string(workers).c_str(), 1);
    }

    if (dry_run) {
      std::printf("%s\n", tcl::resolve_plan(cfg).dump(2).c_str());
      return 0;
    }

    const tcl::TaskArtifacts art = tcl::run_task(cfg, workers);
    for (const std::string& f : art.files) {
      std::printf("wrote %s\n", f.c_str());
    }
    print_headline(art);
    if (!art.passed) {
      std::fprintf(stderr,
                   "validation gates failed; see the checks in the report\n");
      return 3;
    }
    return 0;
  } catch (const tcl::EngineError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
