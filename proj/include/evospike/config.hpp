#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <string>
#include <string_view>

#include <json.hpp>

#include "evospike/cartpole.hpp"
#include "evospike/csv.hpp"
#include "evospike/errors.hpp"
#include "evospike/evolution.hpp"
#include "evospike/infotheory.hpp"
#include "evospike/sensing.hpp"
#include "evospike/trial.hpp"
#include "evospike/version.hpp"

namespace evospike {

struct AnalysisConfig {
  BinSpec bins;
  Aggregator aggregator = Aggregator::max;

  void validate() const { bins.validate(); }
};

// Everything one experiment needs, resolvable from a JSON file plus CLI
// overrides. `workers` and `out_dir` affect scheduling and placement only,
// never results, so they stay out of the config hash.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out_dir = "out";

  int num_runs = 1;          // independent evolutionary runs
  int num_interneurons = 2;
  double trial_duration = 500.0;
  PhysicsParams physics;
  RayConfig rays;
  EAConfig ea;               // master_seed / workers mirrored from above
  GridSpec grid;
  AnalysisConfig analysis;

  GenotypeLayout layout() const {
    GenotypeLayout layout;
    layout.num_interneurons = num_interneurons;
    return layout;
  }

  void validate() const {
    if (workers < 1) throw ConfigError("config: workers must be >= 1");
    if (num_runs < 1) throw ConfigError("config: runs must be >= 1");
    if (num_interneurons < 1) {
      throw ConfigError("config: network.num_interneurons must be >= 1");
    }
    if (!(trial_duration > 0.0)) {
      throw ConfigError("config: trial duration must be positive");
    }
    physics.validate();
    rays.validate();
    ea.validate();
    grid.validate();
    analysis.validate();
  }
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& where,
                           std::initializer_list<const char*> known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool found = false;
    for (const char* k : known) {
      if (it.key() == k) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw ConfigError("config: unknown field '" + where + it.key() + "'");
    }
  }
}

inline const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline void read_double(const json& obj, const std::string& where,
                        const char* key, double& target) {
  if (const json* v = find(obj, key)) {
    if (!v->is_number()) {
      throw ConfigError("config: field '" + where + key + "' must be a number");
    }
    target = v->get<double>();
  }
}

inline void read_int(const json& obj, const std::string& where,
                     const char* key, int& target) {
  if (const json* v = find(obj, key)) {
    if (!v->is_number_integer()) {
      throw ConfigError("config: field '" + where + key +
                        "' must be an integer");
    }
    target = v->get<int>();
  }
}

inline void read_uint64(const json& obj, const std::string& where,
                        const char* key, std::uint64_t& target) {
  if (const json* v = find(obj, key)) {
    if (!v->is_number_unsigned() && !v->is_number_integer()) {
      throw ConfigError("config: field '" + where + key +
                        "' must be a non-negative integer");
    }
    if (v->is_number_integer() && v->get<long long>() < 0) {
      throw ConfigError("config: field '" + where + key +
                        "' must be a non-negative integer");
    }
    target = v->get<std::uint64_t>();
  }
}

inline void read_string(const json& obj, const std::string& where,
                        const char* key, std::string& target) {
  if (const json* v = find(obj, key)) {
    if (!v->is_string()) {
      throw ConfigError("config: field '" + where + key + "' must be a string");
    }
    target = v->get<std::string>();
  }
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& root) {
  using detail::find;
  if (!root.is_object()) {
    throw ConfigError("config: document root must be an object");
  }
  detail::reject_unknown(root, "",
                         {"schema", "seed", "workers", "out_dir", "runs",
                          "network", "trial", "physics", "ea", "grid",
                          "analysis"});
  if (const auto* schema = find(root, "schema")) {
    if (!schema->is_string() ||
        schema->get<std::string>() != kConfigSchema) {
      throw ConfigError(std::string("config: schema must be '") +
                        kConfigSchema + "'");
    }
  }

  ExperimentConfig cfg;
  detail::read_uint64(root, "", "seed", cfg.seed);
  detail::read_int(root, "", "workers", cfg.workers);
  detail::read_string(root, "", "out_dir", cfg.out_dir);
  detail::read_int(root, "", "runs", cfg.num_runs);

  if (const auto* network = find(root, "network")) {
    detail::reject_unknown(*network, "network.", {"num_interneurons"});
    detail::read_int(*network, "network.", "num_interneurons",
                     cfg.num_interneurons);
  }
  cfg.ea.master_seed = cfg.seed;

  if (const auto* trial = find(root, "trial")) {
    detail::reject_unknown(*trial, "trial.", {"duration"});
    detail::read_double(*trial, "trial.", "duration", cfg.trial_duration);
  }

  if (const auto* physics = find(root, "physics")) {
    detail::reject_unknown(*physics, "physics.",
                           {"dt", "f_max", "track_length"});
    detail::read_double(*physics, "physics.", "dt", cfg.physics.dt);
    detail::read_double(*physics, "physics.", "f_max", cfg.physics.f_max);
    detail::read_double(*physics, "physics.", "track_length",
                        cfg.physics.track_length);
  }

  if (const auto* ea = find(root, "ea")) {
    detail::reject_unknown(
        *ea, "ea.",
        {"population", "generations", "elite_fraction", "tournament_size",
         "crossover_prob", "mutation_stddev", "mutation_prob",
         "flag_redraw_prob", "target_fitness"});
    detail::read_int(*ea, "ea.", "population", cfg.ea.population_size);
    detail::read_int(*ea, "ea.", "generations", cfg.ea.generations);
    detail::read_double(*ea, "ea.", "elite_fraction", cfg.ea.elite_fraction);
    detail::read_int(*ea, "ea.", "tournament_size", cfg.ea.tournament_size);
    detail::read_double(*ea, "ea.", "crossover_prob", cfg.ea.crossover_prob);
    detail::read_double(*ea, "ea.", "mutation_stddev", cfg.ea.mutation_stddev);
    detail::read_double(*ea, "ea.", "mutation_prob", cfg.ea.mutation_prob);
    detail::read_double(*ea, "ea.", "flag_redraw_prob",
                        cfg.ea.flag_redraw_prob);
    if (const auto* target = find(*ea, "target_fitness")) {
      if (target->is_null()) {
        cfg.ea.target_fitness = std::numeric_limits<double>::infinity();
      } else if (target->is_number()) {
        cfg.ea.target_fitness = target->get<double>();
      } else {
        throw ConfigError(
            "config: field 'ea.target_fitness' must be a number or null");
      }
    }
  }

  if (const auto* grid = find(root, "grid")) {
    detail::reject_unknown(*grid, "grid.",
                           {"theta_min_deg", "theta_max_deg",
                            "theta_resolution", "omega_min", "omega_max",
                            "omega_resolution"});
    detail::read_double(*grid, "grid.", "theta_min_deg", cfg.grid.theta_min_deg);
    detail::read_double(*grid, "grid.", "theta_max_deg", cfg.grid.theta_max_deg);
    detail::read_int(*grid, "grid.", "theta_resolution",
                     cfg.grid.theta_resolution);
    detail::read_double(*grid, "grid.", "omega_min", cfg.grid.omega_min);
    detail::read_double(*grid, "grid.", "omega_max", cfg.grid.omega_max);
    detail::read_int(*grid, "grid.", "omega_resolution",
                     cfg.grid.omega_resolution);
  }

  if (const auto* analysis = find(root, "analysis")) {
    detail::reject_unknown(*analysis, "analysis.",
                           {"bin_width", "bin_origin", "aggregator"});
    detail::read_double(*analysis, "analysis.", "bin_width",
                        cfg.analysis.bins.width);
    detail::read_double(*analysis, "analysis.", "bin_origin",
                        cfg.analysis.bins.origin);
    std::string agg = "max";
    detail::read_string(*analysis, "analysis.", "aggregator", agg);
    if (agg == "max") {
      cfg.analysis.aggregator = Aggregator::max;
    } else if (agg == "mean") {
      cfg.analysis.aggregator = Aggregator::mean;
    } else {
      throw ConfigError(
          "config: field 'analysis.aggregator' must be 'max' or 'mean'");
    }
  }

  cfg.ea.workers = cfg.workers;
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: invalid JSON in '" + path + "': " + e.what());
  }
  return config_from_json(root);
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json root;
  root["schema"] = kConfigSchema;
  root["seed"] = cfg.seed;
  root["workers"] = cfg.workers;
  root["out_dir"] = cfg.out_dir;
  root["runs"] = cfg.num_runs;
  root["network"] = {{"num_interneurons", cfg.num_interneurons}};
  root["trial"] = {{"duration", cfg.trial_duration}};
  root["physics"] = {{"dt", cfg.physics.dt},
                     {"f_max", cfg.physics.f_max},
                     {"track_length", cfg.physics.track_length}};
  nlohmann::json ea = {{"population", cfg.ea.population_size},
                       {"generations", cfg.ea.generations},
                       {"elite_fraction", cfg.ea.elite_fraction},
                       {"tournament_size", cfg.ea.tournament_size},
                       {"crossover_prob", cfg.ea.crossover_prob},
                       {"mutation_stddev", cfg.ea.mutation_stddev},
                       {"mutation_prob", cfg.ea.mutation_prob},
                       {"flag_redraw_prob", cfg.ea.flag_redraw_prob}};
  if (std::isfinite(cfg.ea.target_fitness)) {
    ea["target_fitness"] = cfg.ea.target_fitness;
  } else {
    ea["target_fitness"] = nullptr;
  }
  root["ea"] = ea;
  root["grid"] = {{"theta_min_deg", cfg.grid.theta_min_deg},
                  {"theta_max_deg", cfg.grid.theta_max_deg},
                  {"theta_resolution", cfg.grid.theta_resolution},
                  {"omega_min", cfg.grid.omega_min},
                  {"omega_max", cfg.grid.omega_max},
                  {"omega_resolution", cfg.grid.omega_resolution}};
  root["analysis"] = {
      {"bin_width", cfg.analysis.bins.width},
      {"bin_origin", cfg.analysis.bins.origin},
      {"aggregator",
       cfg.analysis.aggregator == Aggregator::max ? "max" : "mean"}};
  return root;
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Canonical text form of every result-affecting field, in a fixed order.
// Scheduling fields (workers) and placement fields (out_dir) are omitted:
// identical hashes promise identical outputs.
inline std::string canonical_config_text(const ExperimentConfig& cfg) {
  std::string text;
  auto put = [&text](const char* key, const std::string& value) {
    text += key;
    text += '=';
    text += value;
    text += '\n';
  };
  auto putd = [&](const char* key, double v) { put(key, csv::format_double(v)); };
  put("schema", kConfigSchema);
  put("seed", std::to_string(cfg.seed));
  put("runs", std::to_string(cfg.num_runs));
  put("network.num_interneurons", std::to_string(cfg.num_interneurons));
  putd("trial.duration", cfg.trial_duration);
  putd("physics.cart_mass", cfg.physics.cart_mass);
  putd("physics.pole_mass", cfg.physics.pole_mass);
  putd("physics.pole_half_length", cfg.physics.pole_half_length);
  putd("physics.gravity", cfg.physics.gravity);
  putd("physics.cart_friction", cfg.physics.cart_friction);
  putd("physics.pivot_friction", cfg.physics.pivot_friction);
  putd("physics.f_max", cfg.physics.f_max);
  putd("physics.track_length", cfg.physics.track_length);
  putd("physics.dt", cfg.physics.dt);
  putd("rays.spacing_deg", cfg.rays.spacing_deg);
  putd("rays.half_width_deg", cfg.rays.half_width_deg);
  put("ea.population", std::to_string(cfg.ea.population_size));
  put("ea.generations", std::to_string(cfg.ea.generations));
  putd("ea.elite_fraction", cfg.ea.elite_fraction);
  put("ea.tournament_size", std::to_string(cfg.ea.tournament_size));
  putd("ea.crossover_prob", cfg.ea.crossover_prob);
  putd("ea.mutation_stddev", cfg.ea.mutation_stddev);
  putd("ea.mutation_prob", cfg.ea.mutation_prob);
  putd("ea.flag_redraw_prob", cfg.ea.flag_redraw_prob);
  putd("ea.target_fitness", cfg.ea.target_fitness);
  putd("grid.theta_min_deg", cfg.grid.theta_min_deg);
  putd("grid.theta_max_deg", cfg.grid.theta_max_deg);
  put("grid.theta_resolution", std::to_string(cfg.grid.theta_resolution));
  putd("grid.omega_min", cfg.grid.omega_min);
  putd("grid.omega_max", cfg.grid.omega_max);
  put("grid.omega_resolution", std::to_string(cfg.grid.omega_resolution));
  putd("analysis.bin_width", cfg.analysis.bins.width);
  putd("analysis.bin_origin", cfg.analysis.bins.origin);
  put("analysis.aggregator",
      cfg.analysis.aggregator == Aggregator::max ? "max" : "mean");
  return text;
}

inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
  return fnv1a64(canonical_config_text(cfg));
}

inline std::string config_hash_hex(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  return std::string(buf);
}

}  // namespace evospike
