#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evospike/csv.hpp"
#include "evospike/errors.hpp"
#include "evospike/genotype.hpp"
#include "evospike/trial.hpp"
#include "evospike/version.hpp"

namespace evospike {

// ---------------------------------------------------------------------
// Genotype files. Gene values are written as JSON numbers; the shortest
// round-trip representation reproduces every double bit for bit.
// ---------------------------------------------------------------------

inline nlohmann::json genotype_to_json(const Genotype& genotype,
                                       std::optional<double> fitness = {}) {
  nlohmann::json root;
  root["schema"] = kGenotypeSchema;
  root["num_interneurons"] = genotype.layout.num_interneurons;
  root["genes"] = genotype.genes;
  if (fitness) root["fitness"] = *fitness;
  return root;
}

inline Genotype genotype_from_json(const nlohmann::json& root) {
  if (!root.is_object()) {
    throw EncodingError("genotype: document root must be an object");
  }
  const auto schema = root.find("schema");
  if (schema == root.end() || !schema->is_string() ||
      schema->get<std::string>() != kGenotypeSchema) {
    throw EncodingError(std::string("genotype: schema must be '") +
                        kGenotypeSchema + "'");
  }
  const auto neurons = root.find("num_interneurons");
  if (neurons == root.end() || !neurons->is_number_integer()) {
    throw EncodingError("genotype: missing integer 'num_interneurons'");
  }
  const auto genes = root.find("genes");
  if (genes == root.end() || !genes->is_array()) {
    throw EncodingError("genotype: missing 'genes' array");
  }
  Genotype genotype;
  genotype.layout.num_interneurons = neurons->get<int>();
  genotype.genes.reserve(genes->size());
  for (const auto& g : *genes) {
    if (!g.is_number()) {
      throw EncodingError("genotype: genes must all be numbers");
    }
    genotype.genes.push_back(g.get<double>());
  }
  genotype.validate();
  return genotype;
}

inline void save_genotype(const Genotype& genotype, const std::string& path,
                          std::optional<double> fitness = {}) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << genotype_to_json(genotype, fitness).dump(2) << "\n";
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("invalid JSON in '" + path + "': " + e.what());
  }
  return root;
}

inline Genotype load_genotype(const std::string& path) {
  return genotype_from_json(load_json_file(path));
}

// ---------------------------------------------------------------------
// Trace files: one CSV with a row per timestep and a column per channel,
// plus a JSON sidecar carrying the trial metadata.
// ---------------------------------------------------------------------

inline std::string trace_sidecar_path(const std::string& csv_path) {
  return csv_path + ".json";
}

// `extra_metadata` (typically the resolved config and seed) is merged into
// the sidecar so a trace is interpretable on its own.
inline void save_trace(const Trace& trace, const std::string& csv_path,
                       const std::string& config_hash_hex = "",
                       const nlohmann::json& extra_metadata = {}) {
  csv::Writer writer(csv_path);
  if (!config_hash_hex.empty()) {
    writer.comment("config_hash=" + config_hash_hex);
  }
  writer.row(trace.channels);
  const std::size_t rows = trace.rows();
  std::vector<std::string> fields(trace.channels.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < trace.channels.size(); ++c) {
      fields[c] = csv::format_double(trace.data[c][r]);
    }
    writer.row(fields);
  }
  writer.close();

  nlohmann::json meta;
  meta["schema"] = kTraceSchema;
  meta["theta0"] = trace.theta0;
  meta["omega0"] = trace.omega0;
  meta["duration"] = trace.duration;
  meta["dt"] = trace.dt;
  meta["fitness"] = trace.fitness;
  meta["rows"] = rows;
  meta["channels"] = trace.channels;
  if (!config_hash_hex.empty()) meta["config_hash"] = config_hash_hex;
  if (extra_metadata.is_object()) {
    for (auto it = extra_metadata.begin(); it != extra_metadata.end(); ++it) {
      meta[it.key()] = it.value();
    }
  }
  const std::string sidecar = trace_sidecar_path(csv_path);
  std::ofstream out(sidecar);
  if (!out) throw IoError("cannot open '" + sidecar + "' for writing");
  out << meta.dump(2) << "\n";
  if (!out) throw IoError("write failed for '" + sidecar + "'");
}

inline Trace load_trace(const std::string& csv_path) {
  const csv::Table table = csv::read_table(csv_path);
  Trace trace;
  trace.channels = table.header;
  trace.data.assign(trace.channels.size(), {});
  for (auto& column : trace.data) column.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != trace.channels.size()) {
      throw IoError("trace '" + csv_path + "': row " + std::to_string(r + 1) +
                    " has " + std::to_string(row.size()) + " fields, expected " +
                    std::to_string(trace.channels.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      trace.data[c].push_back(csv::parse_double(row[c]));
    }
  }

  const nlohmann::json meta = load_json_file(trace_sidecar_path(csv_path));
  const auto schema = meta.find("schema");
  if (schema == meta.end() || !schema->is_string() ||
      schema->get<std::string>() != kTraceSchema) {
    throw IoError(std::string("trace sidecar: schema must be '") +
                  kTraceSchema + "'");
  }
  auto number = [&](const char* key) {
    const auto it = meta.find(key);
    if (it == meta.end() || !it->is_number()) {
      throw IoError(std::string("trace sidecar: missing number '") + key + "'");
    }
    return it->get<double>();
  };
  trace.theta0 = number("theta0");
  trace.omega0 = number("omega0");
  trace.duration = number("duration");
  trace.dt = number("dt");
  trace.fitness = number("fitness");
  return trace;
}

}  // namespace evospike
