// Command-line front end: evolve spiking pole balancers, evaluate and
// stress-test saved genotypes, and run the information analysis.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <evospike/evospike.hpp>

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int workers = 0;
  CLI::Option* out_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* workers_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config_path,
                  "JSON experiment configuration (defaults apply if omitted)")
      ->check(CLI::ExistingFile);
  opts.out_opt =
      cmd->add_option("-o,--out", opts.out_dir, "output directory override");
  opts.seed_opt =
      cmd->add_option("-s,--seed", opts.seed, "master seed override");
  opts.workers_opt = cmd->add_option("-w,--workers", opts.workers,
                                     "worker thread count override");
}

evospike::ExperimentConfig resolve_config(const CommonOptions& opts) {
  evospike::ExperimentConfig cfg;
  if (!opts.config_path.empty()) {
    cfg = evospike::load_config(opts.config_path);
  }
  if (opts.seed_opt->count() > 0) {
    cfg.seed = opts.seed;
    cfg.ea.master_seed = opts.seed;
  }
  if (opts.workers_opt->count() > 0) {
    cfg.workers = opts.workers;
    cfg.ea.workers = opts.workers;
  }
  if (opts.out_opt->count() > 0) cfg.out_dir = opts.out_dir;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evospike: evolve recurrent spiking pole balancers and "
               "quantify the information their elements carry"};
  app.set_version_flag("--version", evospike::kVersionString);
  app.require_subcommand(1);

  CommonOptions evolve_opts, evaluate_opts, generalize_opts, analyze_opts,
      report_opts;
  std::string evaluate_genotype, generalize_genotype, analyze_traces;
  bool evaluate_record = false;
  evospike::pipeline::CustomTrialSpec custom_spec;

  CLI::App* evolve = app.add_subcommand(
      "evolve", "run the evolutionary optimization and save checkpoints");
  add_common(evolve, evolve_opts);

  CLI::App* evaluate = app.add_subcommand(
      "evaluate",
      "score a saved genotype on the canonical trials (or one custom "
      "condition)");
  add_common(evaluate, evaluate_opts);
  evaluate->add_option("-g,--genotype", evaluate_genotype,
                       "genotype JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_flag("-r,--record", evaluate_record,
                     "write per-timestep traces");
  CLI::Option* theta_opt = evaluate->add_option(
      "--theta0-deg", custom_spec.theta0_deg,
      "custom single-trial initial pole angle (degrees)");
  CLI::Option* omega_opt = evaluate->add_option(
      "--omega0", custom_spec.omega0,
      "custom single-trial initial angular velocity");
  theta_opt->needs(omega_opt);
  omega_opt->needs(theta_opt);

  CLI::App* generalize = app.add_subcommand(
      "generalize", "sweep a grid of unseen initial conditions");
  add_common(generalize, generalize_opts);
  generalize
      ->add_option("-g,--genotype", generalize_genotype, "genotype JSON file")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* analyze = app.add_subcommand(
      "analyze", "mutual information between network and environment, "
                 "computed from recorded traces");
  add_common(analyze, analyze_opts);
  analyze->add_option("-t,--traces", analyze_traces,
                      "directory of trace CSVs (default: <out>/traces)");

  CLI::App* report = app.add_subcommand(
      "report", "render analysis outputs into a markdown report");
  add_common(report, report_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(evospike::ErrorCategory::config);
  }

  try {
    if (evolve->parsed()) {
      evospike::pipeline::cmd_evolve(resolve_config(evolve_opts));
    } else if (evaluate->parsed()) {
      std::optional<evospike::pipeline::CustomTrialSpec> custom;
      if (theta_opt->count() > 0) custom = custom_spec;
      evospike::pipeline::cmd_evaluate(resolve_config(evaluate_opts),
                                       evaluate_genotype, evaluate_record,
                                       custom);
    } else if (generalize->parsed()) {
      evospike::pipeline::cmd_generalize(resolve_config(generalize_opts),
                                         generalize_genotype);
    } else if (analyze->parsed()) {
      const evospike::ExperimentConfig cfg = resolve_config(analyze_opts);
      const std::string traces =
          analyze_traces.empty()
              ? (std::filesystem::path(cfg.out_dir) / "traces").string()
              : analyze_traces;
      evospike::pipeline::cmd_analyze(cfg, traces);
    } else if (report->parsed()) {
      evospike::pipeline::cmd_report(resolve_config(report_opts));
    }
  } catch (const evospike::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return static_cast<int>(evospike::ErrorCategory::other);
  }
  return 0;
}
