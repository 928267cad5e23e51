#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "evospike/config.hpp"
#include "evospike/csv.hpp"
#include "evospike/errors.hpp"
#include "evospike/evolution.hpp"
#include "evospike/infotheory.hpp"
#include "evospike/manifest.hpp"
#include "evospike/network.hpp"
#include "evospike/parallel.hpp"
#include "evospike/rng.hpp"
#include "evospike/stats.hpp"
#include "evospike/trace_io.hpp"
#include "evospike/trial.hpp"
#include "evospike/version.hpp"

namespace evospike {
namespace pipeline {

namespace fs = std::filesystem;

namespace detail {

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create directory '" + dir.string() +
                  "': " + ec.message());
  }
}

inline void write_json_file(const fs::path& path, const nlohmann::json& root,
                            int indent = 2) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << root.dump(indent) << "\n";
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline FitnessFunction make_fitness(const ExperimentConfig& cfg) {
  return [cfg](const Genotype& genotype) {
    const NetworkParams np = decode(genotype);
    return evaluate_fitness(np, cfg.physics, cfg.rays, cfg.trial_duration);
  };
}

inline Genotype load_checked_genotype(const ExperimentConfig& cfg,
                                      const std::string& path) {
  Genotype genotype = load_genotype(path);
  if (genotype.layout.num_interneurons != cfg.num_interneurons) {
    throw ConfigError(
        "genotype '" + path + "' encodes " +
        std::to_string(genotype.layout.num_interneurons) +
        " interneurons but the config expects " +
        std::to_string(cfg.num_interneurons));
  }
  return genotype;
}

// Each command records its outputs here; repeated commands against the
// same config union their output lists.
inline void merge_manifest(const fs::path& out_dir, const std::string& command,
                           const ExperimentConfig& cfg,
                           std::vector<std::string> outputs) {
  const std::string hash = config_hash_hex(cfg);
  RunManifest manifest;
  const fs::path path = out_dir / "manifest.json";
  if (fs::exists(path)) {
    RunManifest previous = load_manifest(path.string());
    if (previous.config_hash == hash) {
      manifest.outputs = std::move(previous.outputs);
    }
  }
  manifest.command = command;
  manifest.config_hash = hash;
  manifest.config = config_to_json(cfg);
  for (auto& o : outputs) manifest.outputs.push_back(std::move(o));
  std::sort(manifest.outputs.begin(), manifest.outputs.end());
  manifest.outputs.erase(
      std::unique(manifest.outputs.begin(), manifest.outputs.end()),
      manifest.outputs.end());
  manifest.save(path.string());
}

// ------------------------------------------------------------------
// Evolution bookkeeping: per-run history CSV, checkpoints, and a resume
// state that is validated against the config hash before reuse.
// ------------------------------------------------------------------

inline void write_history_csv(const fs::path& path,
                              const std::vector<GenerationStats>& rows,
                              const std::string& hash) {
  csv::Writer writer(path.string());
  writer.comment("config_hash=" + hash);
  writer.row(
      {"generation", "best", "mean", "std", "evaluations", "diverged"});
  for (const GenerationStats& s : rows) {
    writer.row({std::to_string(s.generation), csv::format_double(s.best),
                csv::format_double(s.mean), csv::format_double(s.stddev),
                std::to_string(s.evaluations), std::to_string(s.diverged)});
  }
  writer.close();
}

inline std::vector<GenerationStats> load_history_csv(const fs::path& path) {
  const csv::Table table = csv::read_table(path.string());
  const std::size_t c_gen = table.column("generation");
  const std::size_t c_best = table.column("best");
  const std::size_t c_mean = table.column("mean");
  const std::size_t c_std = table.column("std");
  const std::size_t c_evals = table.column("evaluations");
  const std::size_t c_div = table.column("diverged");
  std::vector<GenerationStats> rows;
  rows.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    GenerationStats s;
    s.generation = static_cast<int>(csv::parse_int(r[c_gen]));
    s.best = csv::parse_double(r[c_best]);
    s.mean = csv::parse_double(r[c_mean]);
    s.stddev = csv::parse_double(r[c_std]);
    s.evaluations = static_cast<int>(csv::parse_int(r[c_evals]));
    s.diverged = static_cast<int>(csv::parse_int(r[c_div]));
    rows.push_back(s);
  }
  return rows;
}

inline void save_state(const fs::path& path, const Population& pop,
                       int generation, bool complete,
                       const std::string& hash) {
  nlohmann::json root;
  root["schema"] = kStateSchema;
  root["config_hash"] = hash;
  root["generation"] = generation;
  root["complete"] = complete;
  nlohmann::json individuals = nlohmann::json::array();
  for (const Individual& ind : pop) {
    individuals.push_back({{"genes", ind.genotype.genes},
                           {"fitness", ind.fitness},
                           {"evaluated", ind.evaluated}});
  }
  root["population"] = std::move(individuals);
  write_json_file(path, root, -1);
}

struct LoadedState {
  EvolutionState state;
  bool complete = false;
};

inline LoadedState load_state(const fs::path& path,
                              const std::string& expected_hash,
                              const GenotypeLayout& layout) {
  const nlohmann::json root = load_json_file(path.string());
  const auto schema = root.find("schema");
  if (schema == root.end() || !schema->is_string() ||
      schema->get<std::string>() != kStateSchema) {
    throw IoError(std::string("state file: schema must be '") + kStateSchema +
                  "'");
  }
  const std::string hash = root.value("config_hash", std::string{});
  if (hash != expected_hash) {
    throw ConfigError("state file '" + path.string() +
                      "' was produced by a different configuration "
                      "(hash " + hash + ", expected " + expected_hash + ")");
  }
  LoadedState loaded;
  loaded.complete = root.value("complete", false);
  loaded.state.generation = root.value("generation", 0);
  const auto individuals = root.find("population");
  if (individuals == root.end() || !individuals->is_array()) {
    throw IoError("state file: missing 'population' array");
  }
  for (const auto& entry : *individuals) {
    Individual ind;
    ind.genotype.layout = layout;
    ind.genotype.genes = entry.at("genes").get<std::vector<double>>();
    ind.genotype.validate();
    ind.fitness = entry.at("fitness").get<double>();
    ind.evaluated = entry.at("evaluated").get<bool>();
    loaded.state.population.push_back(std::move(ind));
  }
  return loaded;
}

struct RunOutcome {
  Individual best;
  std::vector<GenerationStats> history;
};

// One independent evolutionary run with its own derived seed. Interrupted
// runs resume from state.json; finished runs are skipped, which makes
// `evolve` idempotent for a fixed config.
inline RunOutcome execute_run(const ExperimentConfig& cfg, int run_index,
                              const fs::path& run_dir, std::ostream& log) {
  const std::string hash = config_hash_hex(cfg);
  const fs::path checkpoints = run_dir / "checkpoints";
  ensure_dir(checkpoints);
  const fs::path state_path = run_dir / "state.json";
  const fs::path history_path = run_dir / "history.csv";
  const fs::path best_path = run_dir / "best_genotype.json";

  EAConfig ea = cfg.ea;
  ea.master_seed = derive_seed(
      cfg.seed, {rng_stream::run, static_cast<std::uint64_t>(run_index)});
  ea.workers = cfg.workers;

  std::optional<EvolutionState> resume;
  std::vector<GenerationStats> history;
  if (fs::exists(state_path)) {
    LoadedState loaded = load_state(state_path, hash, cfg.layout());
    if (loaded.complete) {
      log << "run " << run_index << ": already complete, skipping\n";
      RunOutcome outcome;
      outcome.history = load_history_csv(history_path);
      const nlohmann::json best_json = load_json_file(best_path.string());
      outcome.best.genotype = genotype_from_json(best_json);
      outcome.best.fitness = best_json.value("fitness", 0.0);
      outcome.best.evaluated = true;
      return outcome;
    }
    log << "run " << run_index << ": resuming at generation "
        << loaded.state.generation << "\n";
    for (const GenerationStats& s : load_history_csv(history_path)) {
      if (s.generation < loaded.state.generation) history.push_back(s);
    }
    resume = std::move(loaded.state);
  }

  const auto on_generation = [&](const GenerationStats& stats,
                                 const Individual& best,
                                 const Population& pop) {
    history.push_back(stats);
    write_history_csv(history_path, history, hash);
    // Checkpoint: the best genotype so far plus the generation's stats.
    // Extra keys do not disturb genotype loading.
    nlohmann::json checkpoint = genotype_to_json(best.genotype, best.fitness);
    checkpoint["generation"] = stats.generation;
    checkpoint["best"] = stats.best;
    checkpoint["mean"] = stats.mean;
    checkpoint["std"] = stats.stddev;
    write_json_file(
        checkpoints / ("gen_" + std::to_string(stats.generation) + ".json"),
        checkpoint);
    save_state(state_path, pop, stats.generation, false, hash);
    log << "run " << run_index << " gen " << stats.generation
        << " best=" << csv::format_double(stats.best)
        << " mean=" << csv::format_double(stats.mean)
        << " diverged=" << stats.diverged << "\n";
  };

  EvolutionResult result = run_evolution(ea, cfg.layout(), make_fitness(cfg),
                                         on_generation, resume);
  save_genotype(result.best.genotype, best_path.string(), result.best.fitness);
  save_state(state_path, result.final_population,
             history.back().generation, true, hash);
  return RunOutcome{std::move(result.best), std::move(history)};
}

inline std::string format_p(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", p);
  return std::string(buf);
}

inline std::string format_fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return std::string(buf);
}

}  // namespace detail

// ------------------------------------------------------------------
// evolve: independent evolutionary runs, per-generation checkpointing,
// combined best-fitness history across runs.
// ------------------------------------------------------------------
inline void cmd_evolve(const ExperimentConfig& cfg,
                       std::ostream& log = std::cout) {
  cfg.validate();
  const fs::path out = cfg.out_dir;
  detail::ensure_dir(out);
  detail::write_json_file(out / "config.json", config_to_json(cfg));

  std::vector<detail::RunOutcome> outcomes;
  outcomes.reserve(static_cast<std::size_t>(cfg.num_runs));
  for (int r = 0; r < cfg.num_runs; ++r) {
    outcomes.push_back(detail::execute_run(
        cfg, r, out / ("run_" + std::to_string(r)), log));
  }

  // Combined wide-format history. Runs that stopped early (target reached)
  // are padded with their final best so every column spans every row.
  std::size_t max_rows = 0;
  for (const auto& o : outcomes) max_rows = std::max(max_rows, o.history.size());
  {
    csv::Writer writer((out / "fitness_history.csv").string());
    writer.comment("config_hash=" + config_hash_hex(cfg));
    std::vector<std::string> header = {"generation"};
    for (int r = 0; r < cfg.num_runs; ++r) {
      header.push_back("best_run_" + std::to_string(r));
    }
    writer.row(header);
    std::vector<double> best_so_far(outcomes.size(), 0.0);
    for (std::size_t g = 0; g < max_rows; ++g) {
      std::vector<std::string> row = {std::to_string(g)};
      for (std::size_t r = 0; r < outcomes.size(); ++r) {
        const auto& h = outcomes[r].history;
        if (g < h.size()) {
          best_so_far[r] = (g == 0) ? h[g].best
                                    : std::max(best_so_far[r], h[g].best);
        }
        row.push_back(csv::format_double(best_so_far[r]));
      }
      writer.row(row);
    }
    writer.close();
  }

  // Rank the runs' champions; ties break toward the earlier run.
  std::vector<std::size_t> ranking(outcomes.size());
  std::iota(ranking.begin(), ranking.end(), std::size_t{0});
  std::sort(ranking.begin(), ranking.end(),
            [&](std::size_t a, std::size_t b) {
              if (outcomes[a].best.fitness != outcomes[b].best.fitness) {
                return outcomes[a].best.fitness > outcomes[b].best.fitness;
              }
              return a < b;
            });
  {
    csv::Writer writer((out / "agents.csv").string());
    writer.comment("config_hash=" + config_hash_hex(cfg));
    writer.row({"rank", "run", "fitness", "genotype"});
    for (std::size_t i = 0; i < ranking.size(); ++i) {
      const std::size_t r = ranking[i];
      writer.row({std::to_string(i), std::to_string(r),
                  csv::format_double(outcomes[r].best.fitness),
                  "run_" + std::to_string(r) + "/best_genotype.json"});
    }
    writer.close();
  }
  const std::size_t best_run = ranking.front();
  save_genotype(outcomes[best_run].best.genotype,
                (out / "best_genotype.json").string(),
                outcomes[best_run].best.fitness);

  std::vector<std::string> outputs = {"config.json", "fitness_history.csv",
                                      "agents.csv", "best_genotype.json"};
  for (int r = 0; r < cfg.num_runs; ++r) {
    const std::string dir = "run_" + std::to_string(r) + "/";
    outputs.push_back(dir + "history.csv");
    outputs.push_back(dir + "best_genotype.json");
    outputs.push_back(dir + "state.json");
    outputs.push_back(dir + "checkpoints/");
  }
  detail::merge_manifest(out, "evolve", cfg, std::move(outputs));

  log << "best_run=" << best_run << "\n";
  log << "best_fitness="
      << csv::format_double(outcomes[best_run].best.fitness) << "\n";
}

// A custom single-condition override for `evaluate` (the canonical 16
// trials run when absent).
struct CustomTrialSpec {
  double theta0_deg = 0.0;
  double omega0 = 0.0;
};

// ------------------------------------------------------------------
// evaluate: the canonical 16 trials (or one custom condition) for one
// genotype, optionally recording full traces.
// ------------------------------------------------------------------
inline void cmd_evaluate(const ExperimentConfig& cfg,
                         const std::string& genotype_path, bool record,
                         const std::optional<CustomTrialSpec>& custom = {},
                         std::ostream& log = std::cout) {
  cfg.validate();
  const std::string hash = config_hash_hex(cfg);
  const Genotype genotype = detail::load_checked_genotype(cfg, genotype_path);
  const NetworkParams np = decode(genotype);

  std::vector<TrialConfig> trials;
  if (custom) {
    trials.push_back(TrialConfig::from_degrees(
        custom->theta0_deg, custom->omega0, cfg.trial_duration, record));
  } else {
    trials = canonical_trials(cfg.trial_duration, record);
  }
  std::vector<TrialResult> results(trials.size());
  parallel_for(trials.size(), cfg.workers, [&](std::size_t k) {
    results[k] = run_trial(np, trials[k], cfg.physics, cfg.rays);
  });

  const fs::path out = cfg.out_dir;
  detail::ensure_dir(out);
  std::vector<std::string> outputs = {"evaluation.csv"};
  {
    csv::Writer writer((out / "evaluation.csv").string());
    writer.comment("config_hash=" + hash);
    writer.row({"trial", "theta0_deg", "omega0", "fitness", "steps",
                "terminated_early"});
    for (std::size_t k = 0; k < trials.size(); ++k) {
      writer.row({std::to_string(k),
                  csv::format_double(rad_to_deg(trials[k].theta0)),
                  csv::format_double(trials[k].omega0),
                  csv::format_double(results[k].fitness),
                  std::to_string(results[k].steps_executed),
                  results[k].terminated_early ? "1" : "0"});
    }
    writer.close();
  }

  if (record) {
    detail::ensure_dir(out / "traces");
    const nlohmann::json meta = {{"seed", cfg.seed},
                                 {"config", config_to_json(cfg)}};
    for (std::size_t k = 0; k < results.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof(name), "trial_%02zu.csv", k);
      save_trace(*results[k].trace, (out / "traces" / name).string(), hash,
                 meta);
      outputs.push_back(std::string("traces/") + name);
      outputs.push_back(std::string("traces/") + name + ".json");
    }
  }
  detail::merge_manifest(out, "evaluate", cfg, std::move(outputs));

  double sum = 0.0;
  for (const TrialResult& r : results) sum += r.fitness;
  log << "mean_fitness="
      << csv::format_double(sum / static_cast<double>(results.size()))
      << "\n";
}

// ------------------------------------------------------------------
// generalize: single-trial fitness over a grid of unseen initial
// conditions, flagging the cells that coincide with training conditions.
// ------------------------------------------------------------------
inline void cmd_generalize(const ExperimentConfig& cfg,
                           const std::string& genotype_path,
                           std::ostream& log = std::cout) {
  cfg.validate();
  const std::string hash = config_hash_hex(cfg);
  const Genotype genotype = detail::load_checked_genotype(cfg, genotype_path);
  const NetworkParams np = decode(genotype);

  const std::vector<double> thetas = linspace(
      cfg.grid.theta_min_deg, cfg.grid.theta_max_deg, cfg.grid.theta_resolution);
  const std::vector<double> omegas =
      linspace(cfg.grid.omega_min, cfg.grid.omega_max, cfg.grid.omega_resolution);
  const std::size_t cells = thetas.size() * omegas.size();
  std::vector<double> fitness(cells, 0.0);
  parallel_for(cells, cfg.workers, [&](std::size_t i) {
    const std::size_t ti = i / omegas.size();
    const std::size_t oi = i % omegas.size();
    const TrialConfig tc = TrialConfig::from_degrees(
        thetas[ti], omegas[oi], cfg.trial_duration);
    fitness[i] = run_trial(np, tc, cfg.physics, cfg.rays).fitness;
  });

  const fs::path out = cfg.out_dir;
  detail::ensure_dir(out);
  {
    csv::Writer writer((out / "grid.csv").string());
    writer.comment("config_hash=" + hash);
    writer.row({"theta0_deg", "omega0", "fitness", "trained"});
    for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
      for (std::size_t oi = 0; oi < omegas.size(); ++oi) {
        writer.row({csv::format_double(thetas[ti]),
                    csv::format_double(omegas[oi]),
                    csv::format_double(fitness[ti * omegas.size() + oi]),
                    is_training_condition(thetas[ti], omegas[oi]) ? "1" : "0"});
      }
    }
    writer.close();
  }
  {
    csv::Writer writer((out / "grid_matrix.csv").string());
    writer.comment("config_hash=" + hash);
    writer.comment("rows: theta0_deg, columns: omega0");
    std::vector<std::string> header = {"theta0_deg"};
    for (double w : omegas) header.push_back(csv::format_double(w));
    writer.row(header);
    for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
      std::vector<std::string> row = {csv::format_double(thetas[ti])};
      for (std::size_t oi = 0; oi < omegas.size(); ++oi) {
        row.push_back(csv::format_double(fitness[ti * omegas.size() + oi]));
      }
      writer.row(row);
    }
    writer.close();
  }
  detail::merge_manifest(out, "generalize", cfg,
                         {"grid.csv", "grid_matrix.csv"});

  double total = 0.0, trained = 0.0, untrained = 0.0;
  std::size_t trained_n = 0;
  for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
    for (std::size_t oi = 0; oi < omegas.size(); ++oi) {
      const double f = fitness[ti * omegas.size() + oi];
      total += f;
      if (is_training_condition(thetas[ti], omegas[oi])) {
        trained += f;
        ++trained_n;
      } else {
        untrained += f;
      }
    }
  }
  log << "grid_mean="
      << csv::format_double(total / static_cast<double>(cells)) << "\n";
  if (trained_n > 0) {
    log << "trained_mean="
        << csv::format_double(trained / static_cast<double>(trained_n))
        << "\n";
  }
  log << "untrained_mean="
      << csv::format_double(untrained /
                            static_cast<double>(cells - trained_n))
      << "\n";
}

namespace detail {

inline std::string class_of(const std::string& element) {
  if (element.rfind("spike", 0) == 0) return "spike";
  return element.substr(0, 1);
}

inline const std::vector<std::string>& element_classes() {
  static const std::vector<std::string> classes = {"S", "V", "spike", "R",
                                                   "M"};
  return classes;
}

inline const std::vector<std::string>& environment_variables() {
  static const std::vector<std::string> vars = {"theta", "omega", "x", "v"};
  return vars;
}

}  // namespace detail

// ------------------------------------------------------------------
// analyze: reads recorded traces, computes per-trial and pooled MI
// between every network element and environment variable, aggregates by
// element class, and runs the hypothesis tests. Traces are read-only
// inputs; `evaluate --record` is the usual producer.
// ------------------------------------------------------------------
inline void cmd_analyze(const ExperimentConfig& cfg,
                        const std::string& traces_dir,
                        std::ostream& log = std::cout) {
  cfg.validate();
  const std::string hash = config_hash_hex(cfg);

  if (!fs::is_directory(traces_dir)) {
    throw IoError("trace directory '" + traces_dir + "' does not exist");
  }
  std::vector<std::string> trace_paths;
  for (const auto& entry : fs::directory_iterator(traces_dir)) {
    if (entry.path().extension() == ".csv") {
      trace_paths.push_back(entry.path().string());
    }
  }
  std::sort(trace_paths.begin(), trace_paths.end());
  if (trace_paths.empty()) {
    throw IoError("no trace CSV files found in '" + traces_dir + "'");
  }

  std::vector<Trace> traces;
  traces.reserve(trace_paths.size());
  for (const std::string& path : trace_paths) {
    traces.push_back(load_trace(path));
  }
  for (std::size_t k = 1; k < traces.size(); ++k) {
    if (traces[k].channels != traces[0].channels) {
      throw IoError("trace '" + trace_paths[k] +
                    "' does not share the recording schema of '" +
                    trace_paths[0] + "'");
    }
  }

  const std::vector<std::string>& env = detail::environment_variables();
  std::vector<std::string> element_names;
  for (const std::string& ch : traces[0].channels) {
    if (ch == "force" ||
        std::find(env.begin(), env.end(), ch) != env.end()) {
      continue;
    }
    element_names.push_back(ch);
  }
  // Fails with the name of the first missing environment channel.
  for (const std::string& name : env) traces[0].channel(name);

  const fs::path out = cfg.out_dir;
  detail::ensure_dir(out);
  std::vector<std::string> outputs = {"mi_matrix.csv", "mi_classes.csv",
                                      "ttests.csv"};

  auto series_of = [](const Trace& trace,
                      const std::vector<std::string>& names) {
    std::vector<LabeledSeries> series;
    series.reserve(names.size());
    for (const std::string& name : names) {
      series.push_back({name, trace.channel(name)});
    }
    return series;
  };

  // Per-trial matrices plus the pooled matrix over concatenated trials.
  std::vector<MIMatrix> per_trial(traces.size());
  parallel_for(traces.size(), cfg.workers, [&](std::size_t k) {
    per_trial[k] = mi_matrix(series_of(traces[k], element_names),
                             series_of(traces[k], env), cfg.analysis.bins);
  });
  std::vector<LabeledSeries> pooled_elements, pooled_env;
  for (const std::string& name : element_names) {
    LabeledSeries s{name, {}};
    for (const Trace& trace : traces) {
      const auto& v = trace.channel(name);
      s.values.insert(s.values.end(), v.begin(), v.end());
    }
    pooled_elements.push_back(std::move(s));
  }
  for (const std::string& name : env) {
    LabeledSeries s{name, {}};
    for (const Trace& trace : traces) {
      const auto& v = trace.channel(name);
      s.values.insert(s.values.end(), v.begin(), v.end());
    }
    pooled_env.push_back(std::move(s));
  }
  const MIMatrix pooled =
      mi_matrix(pooled_elements, pooled_env, cfg.analysis.bins);

  {
    csv::Writer writer((out / "mi_matrix.csv").string());
    writer.comment("config_hash=" + hash);
    writer.row({"element", "variable", "trial", "mi_bits"});
    for (std::size_t k = 0; k < per_trial.size(); ++k) {
      const MIMatrix& m = per_trial[k];
      for (std::size_t i = 0; i < m.elements.size(); ++i) {
        for (std::size_t j = 0; j < m.variables.size(); ++j) {
          writer.row({m.elements[i], m.variables[j], std::to_string(k),
                      csv::format_double(m.at(i, j))});
        }
      }
    }
    for (std::size_t i = 0; i < pooled.elements.size(); ++i) {
      for (std::size_t j = 0; j < pooled.variables.size(); ++j) {
        writer.row({pooled.elements[i], pooled.variables[j], "pooled",
                    csv::format_double(pooled.at(i, j))});
      }
    }
    writer.close();
  }

  // Class summaries: aggregate the member elements of S, V, spike, R, M.
  const std::vector<std::string>& classes = detail::element_classes();
  auto class_value = [&](const MIMatrix& m, const std::string& cls,
                         std::size_t var) {
    std::vector<double> members;
    for (std::size_t i = 0; i < m.elements.size(); ++i) {
      if (detail::class_of(m.elements[i]) == cls) {
        members.push_back(m.at(i, var));
      }
    }
    return aggregate(members, cfg.analysis.aggregator);
  };

  // class -> variable -> per-trial values, plus the pooled value.
  std::map<std::string, std::map<std::string, std::vector<double>>> trial_values;
  std::map<std::string, std::map<std::string, double>> pooled_values;
  {
    csv::Writer writer((out / "mi_classes.csv").string());
    writer.comment("config_hash=" + hash);
    writer.comment(std::string("aggregator=") +
                   (cfg.analysis.aggregator == Aggregator::max ? "max"
                                                               : "mean"));
    writer.row({"class", "variable", "trial", "mi_bits"});
    for (std::size_t k = 0; k < per_trial.size(); ++k) {
      for (const std::string& cls : classes) {
        for (std::size_t j = 0; j < env.size(); ++j) {
          const double value = class_value(per_trial[k], cls, j);
          trial_values[cls][env[j]].push_back(value);
          writer.row({cls, env[j], std::to_string(k),
                      csv::format_double(value)});
        }
      }
    }
    for (const std::string& cls : classes) {
      for (std::size_t j = 0; j < env.size(); ++j) {
        const double value = class_value(pooled, cls, j);
        pooled_values[cls][env[j]] = value;
        writer.row({cls, env[j], "pooled", csv::format_double(value)});
      }
    }
    writer.close();
  }

  // Hypothesis tests. Paired tests contrast the information in membrane
  // potentials, firing rates, and motor units trial by trial; one-sample
  // tests ask whether trial-wise MI differs from the pooled estimate.
  // With fewer than two trials there are no paired samples: MI tables are
  // still emitted, the statistics are replaced by a single warning row.
  {
    csv::Writer writer((out / "ttests.csv").string());
    writer.comment("config_hash=" + hash);
    writer.row({"comparison", "t", "df", "p", "degenerate", "mean_diff"});
    if (traces.size() < 2) {
      log << "warning: only " << traces.size()
          << " trace(s); statistics skipped\n";
      writer.row({"warning_insufficient_trials", "0", "0", "1", "1", "0"});
    } else {
      auto emit = [&](const std::string& name, const stats::TTestResult& r) {
        writer.row({name, csv::format_double(r.t), csv::format_double(r.df),
                    csv::format_double(r.p), r.degenerate ? "1" : "0",
                    csv::format_double(r.mean_diff)});
      };
      for (const std::string& var : env) {
        emit("V_vs_R:" + var,
             stats::paired_t_test(trial_values["V"][var],
                                  trial_values["R"][var]));
        emit("R_vs_M:" + var,
             stats::paired_t_test(trial_values["R"][var],
                                  trial_values["M"][var]));
      }
      for (const std::string& cls : classes) {
        for (const std::string& var : env) {
          emit("trials_vs_pooled:" + cls + ":" + var,
               stats::one_sample_t_test(trial_values[cls][var],
                                        pooled_values[cls][var]));
        }
      }
    }
    writer.close();
  }

  detail::merge_manifest(out, "analyze", cfg, std::move(outputs));
  log << "mi_pairs=" << element_names.size() * env.size() << "\n";
  log << "trials=" << traces.size() << "\n";
}

// ------------------------------------------------------------------
// report: renders the analysis CSVs into a human-readable markdown
// summary with directional findings.
// ------------------------------------------------------------------
inline void cmd_report(const ExperimentConfig& cfg,
                       std::ostream& log = std::cout) {
  cfg.validate();
  const fs::path out = cfg.out_dir;

  std::string missing;
  for (const char* required :
       {"mi_matrix.csv", "mi_classes.csv", "ttests.csv"}) {
    if (!fs::exists(out / required)) {
      if (!missing.empty()) missing += ", ";
      missing += required;
    }
  }
  if (!missing.empty()) {
    throw IoError("report: missing analyze outputs in '" + out.string() +
                  "': " + missing);
  }

  const csv::Table classes = csv::read_table((out / "mi_classes.csv").string());
  const csv::Table ttests = csv::read_table((out / "ttests.csv").string());

  const std::vector<std::string>& env = detail::environment_variables();
  const std::vector<std::string>& class_names = detail::element_classes();

  // Pooled class MI table.
  std::map<std::string, std::map<std::string, double>> pooled;
  {
    const std::size_t c_cls = classes.column("class");
    const std::size_t c_var = classes.column("variable");
    const std::size_t c_trial = classes.column("trial");
    const std::size_t c_mi = classes.column("mi_bits");
    for (const auto& row : classes.rows) {
      if (row[c_trial] == "pooled") {
        pooled[row[c_cls]][row[c_var]] = csv::parse_double(row[c_mi]);
      }
    }
  }

  struct TestRow {
    double t, df, p, mean_diff;
    bool degenerate;
  };
  std::map<std::string, TestRow> tests;
  {
    const std::size_t c_name = ttests.column("comparison");
    const std::size_t c_t = ttests.column("t");
    const std::size_t c_df = ttests.column("df");
    const std::size_t c_p = ttests.column("p");
    const std::size_t c_diff = ttests.column("mean_diff");
    const std::size_t c_deg = ttests.column("degenerate");
    for (const auto& row : ttests.rows) {
      tests[row[c_name]] = TestRow{csv::parse_double(row[c_t]),
                                   csv::parse_double(row[c_df]),
                                   csv::parse_double(row[c_p]),
                                   csv::parse_double(row[c_diff]),
                                   row[c_deg] == "1"};
    }
  }

  const fs::path report_path = out / "report.md";
  std::ofstream md(report_path);
  if (!md) {
    throw IoError("cannot open '" + report_path.string() + "' for writing");
  }

  md << "# Analysis report\n\n";
  md << "- tool version: " << kVersionString << "\n";
  md << "- config hash: `" << config_hash_hex(cfg) << "`\n";
  if (fs::exists(out / "manifest.json")) {
    const RunManifest manifest =
        load_manifest((out / "manifest.json").string());
    md << "- produced by: `" << manifest.command << "` ("
       << manifest.outputs.size() << " artifacts on record)\n";
  }
  md << "\n";

  if (fs::exists(out / "evaluation.csv")) {
    const csv::Table eval = csv::read_table((out / "evaluation.csv").string());
    const std::size_t c_fit = eval.column("fitness");
    const std::size_t c_early = eval.column("terminated_early");
    double sum = 0.0;
    int early = 0;
    for (const auto& row : eval.rows) {
      sum += csv::parse_double(row[c_fit]);
      early += row[c_early] == "1" ? 1 : 0;
    }
    md << "## Balancing performance\n\n";
    md << "Mean fitness over the " << eval.rows.size()
       << " canonical trials: **"
       << detail::format_fixed(sum / static_cast<double>(eval.rows.size()))
       << "**";
    if (early > 0) {
      md << " (" << early << " trial" << (early == 1 ? "" : "s")
         << " ended early)";
    }
    md << ".\n\n";
  }

  if (fs::exists(out / "grid.csv")) {
    const csv::Table grid = csv::read_table((out / "grid.csv").string());
    const std::size_t c_fit = grid.column("fitness");
    const std::size_t c_trained = grid.column("trained");
    double total = 0.0, trained = 0.0, untrained = 0.0;
    std::size_t trained_n = 0;
    for (const auto& row : grid.rows) {
      const double f = csv::parse_double(row[c_fit]);
      total += f;
      if (row[c_trained] == "1") {
        trained += f;
        ++trained_n;
      } else {
        untrained += f;
      }
    }
    md << "## Generalization\n\n";
    md << "Across " << grid.rows.size() << " grid conditions the mean "
       << "fitness is "
       << detail::format_fixed(total / static_cast<double>(grid.rows.size()));
    if (trained_n > 0) {
      md << " (" << detail::format_fixed(trained / static_cast<double>(trained_n))
         << " on the " << trained_n << " training conditions, "
         << detail::format_fixed(
                untrained / static_cast<double>(grid.rows.size() - trained_n))
         << " elsewhere)";
    }
    md << ".\n\n";
  }

  md << "## Pooled mutual information by element class (bits)\n\n";
  md << "| class |";
  for (const std::string& var : env) md << " " << var << " |";
  md << "\n|---|";
  for (std::size_t j = 0; j < env.size(); ++j) md << "---|";
  md << "\n";
  for (const std::string& cls : class_names) {
    md << "| " << cls << " |";
    for (const std::string& var : env) {
      md << " " << detail::format_fixed(pooled[cls][var]) << " |";
    }
    md << "\n";
  }
  md << "\n";

  const bool stats_skipped =
      tests.find("warning_insufficient_trials") != tests.end();

  md << "## Where information concentrates\n\n";
  if (stats_skipped) {
    md << "Statistics were skipped: fewer than two recorded trials.\n\n";
  }
  const auto describe_pair = [&](const std::string& a, const std::string& b,
                                 const std::string& var) {
    const auto it = tests.find(a + "_vs_" + b + ":" + var);
    if (it == tests.end()) return;
    const TestRow& r = it->second;
    md << "- About `" << var << "`: ";
    if (r.degenerate && r.p >= 0.5) {
      md << a << " and " << b << " carry identical information in every "
         << "trial.\n";
      return;
    }
    if (r.p < 0.05) {
      md << "`" << (r.mean_diff > 0 ? a : b) << "` carries "
         << detail::format_fixed(std::abs(r.mean_diff))
         << " bits more than `" << (r.mean_diff > 0 ? b : a)
         << "` on average (t(" << static_cast<int>(r.df)
         << ")=" << detail::format_fixed(r.t)
         << ", p=" << detail::format_p(r.p) << ").\n";
    } else {
      md << "no reliable difference between `" << a << "` and `" << b
         << "` (t(" << static_cast<int>(r.df)
         << ")=" << detail::format_fixed(r.t)
         << ", p=" << detail::format_p(r.p) << ").\n";
    }
  };
  for (const std::string& var : env) describe_pair("V", "R", var);
  for (const std::string& var : env) describe_pair("R", "M", var);
  md << "\n";

  md << "## Trial-wise versus pooled estimates\n\n";
  if (stats_skipped) {
    md << "Statistics were skipped: fewer than two recorded trials.\n";
  } else {
    int significant = 0, counted = 0;
    for (const std::string& cls : class_names) {
      for (const std::string& var : env) {
        const auto it = tests.find("trials_vs_pooled:" + cls + ":" + var);
        if (it == tests.end()) continue;
        ++counted;
        if (it->second.p < 0.05) ++significant;
      }
    }
    md << "Trial-wise MI differs from the pooled estimate at p<0.05 in "
       << significant << " of " << counted << " class/variable pairs. "
       << "Large counts indicate trial-specific encodings that pooling "
       << "would blur together.\n";
  }
  md.flush();
  if (!md) throw IoError("write failed for '" + report_path.string() + "'");
  md.close();

  detail::merge_manifest(out, "report", cfg, {"report.md"});
  log << "report=" << report_path.string() << "\n";
}

}  // namespace pipeline
}  // namespace evospike
