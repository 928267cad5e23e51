#pragma once

namespace evospike {

inline constexpr int kVersionMajor = 0;
inline constexpr int kVersionMinor = 1;
inline constexpr int kVersionPatch = 0;
inline constexpr const char* kVersionString = "0.1.0";

// File-format tags. Bump these when a format changes incompatibly.
inline constexpr const char* kConfigSchema = "evospike-config-v1";
inline constexpr const char* kGenotypeSchema = "evospike-genotype-v1";
inline constexpr const char* kTraceSchema = "evospike-trace-v1";
inline constexpr const char* kManifestSchema = "evospike-manifest-v1";
inline constexpr const char* kStateSchema = "evospike-state-v1";

}  // namespace evospike
