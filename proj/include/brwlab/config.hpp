#pragma once

// JSON configuration, canonical hashing and result writers.

#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "brwlab/experiments.hpp"

namespace brwlab {

inline constexpr const char* kVersion = "0.1.0";

/// Fixed CSV header of every scan file.
inline constexpr const char* kCsvHeader =
    "experiment,n,beta,statistic,mean,stderr,ci_lo,ci_hi,count,seed,config_hash";

/// Malformed or inconsistent configuration (CLI exit code 1).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Builds a config from a JSON object. Unknown keys are rejected.
///
///   d, n | n_list, beta | beta_list, replicas, seed, workers, a, alpha, n0,
///   n0_list, n1, ci_level, growth_threshold, override, m,
///   survival: "raw" | "conditioned",
///   offspring: {"kind": "deterministic"|"poisson"|"geometric"|"binomial"|"table", ...},
///   profile: "constant" | "linear" | "table:<csv path>" | {"table": {"t": [...], "f": [...]}}
///            | {"grid": [...]},
///   crem: {"x": [...], "A": [...], "a_prime_0": v} or "identity".
ExperimentConfig config_from_json(const nlohmann::json& j);

/// FNV-1a 64 of the compact dump with sorted keys; "workers" does not enter.
std::uint64_t config_hash(const nlohmann::json& j);

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t v);

/// Shortest round-trip decimal form ("inf", "-inf", "nan" for non-finite).
std::string format_double(double v);

void write_scan_csv(std::ostream& os, const ScanResult& r, bool header = true);

/// One JSON object per replica; -inf log weights become null.
nlohmann::json outcome_json(const ReplicaOutcome& o, std::uint64_t config_hash);

struct RunManifest {
  nlohmann::json config;
  std::uint64_t config_hash = 0;
  std::string version = kVersion;
  std::string subcommand;
  double wall_seconds = 0.0;
  std::string timestamp;
  std::map<std::string, std::uint64_t> row_counts;
  std::map<std::string, double> scalars;

  nlohmann::json to_json() const;
};

}  // namespace brwlab
