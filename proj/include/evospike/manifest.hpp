#pragma once

#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "evospike/errors.hpp"
#include "evospike/version.hpp"

namespace evospike {

// Records what a command produced and under which configuration. The
// manifest is fully deterministic (no timestamps, sorted output list) so
// reruns of the same config are byte-identical too.
struct RunManifest {
  std::string command;
  std::string config_hash;
  nlohmann::json config;
  std::vector<std::string> outputs;  // paths relative to the output dir

  nlohmann::json to_json() const {
    std::vector<std::string> sorted = outputs;
    std::sort(sorted.begin(), sorted.end());
    nlohmann::json root;
    root["schema"] = kManifestSchema;
    root["tool_version"] = kVersionString;
    root["command"] = command;
    root["config_hash"] = config_hash;
    root["config"] = config;
    root["outputs"] = sorted;
    return root;
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << to_json().dump(2) << "\n";
    if (!out) throw IoError("write failed for '" + path + "'");
  }
};

inline RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("invalid JSON in '" + path + "': " + e.what());
  }
  const auto schema = root.find("schema");
  if (schema == root.end() || !schema->is_string() ||
      schema->get<std::string>() != kManifestSchema) {
    throw IoError(std::string("manifest: schema must be '") + kManifestSchema +
                  "'");
  }
  RunManifest manifest;
  manifest.command = root.value("command", std::string{});
  manifest.config_hash = root.value("config_hash", std::string{});
  if (root.contains("config")) manifest.config = root["config"];
  if (root.contains("outputs")) {
    for (const auto& o : root["outputs"]) {
      manifest.outputs.push_back(o.get<std::string>());
    }
  }
  return manifest;
}

}  // namespace evospike
