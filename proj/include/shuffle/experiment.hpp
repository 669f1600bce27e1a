#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace shuffle {

// Invalid configuration; what() lists every violated field, one per line.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct ParameterSchema {
  std::string name;
  std::string type;
  bool required = false;
  std::string constraint;
};

struct ExperimentInfo {
  std::string name;
  std::string description;
  std::vector<ParameterSchema> parameters;
};

std::vector<ExperimentInfo> list_experiments();
// Throws std::invalid_argument naming the valid kinds.
const ExperimentInfo& experiment_info(const std::string& name);
nlohmann::json catalog_json();

// A time-grid entry: an integer, or a string "c*nlogn" (floor(c n ln n)),
// "c*n" (floor(c n)) or a plain integer.
std::uint64_t evaluate_time_expression(const nlohmann::json& entry, std::size_t n);

struct ExperimentConfig {
  std::string kind;
  std::vector<std::size_t> n;
  std::string rule = "cyclic";
  int branch = 1;
  nlohmann::json times = nlohmann::json::array();
  std::size_t replicas = 0;
  std::uint64_t seed = 1;
  std::string output = "out";
  double tol = 1e-12;
  int max_iterations = 200;
  double threshold = 0;  // 0 means 1/(2e)
  std::optional<std::uint64_t> horizon;
  std::vector<std::uint64_t> dump_times;
  std::uint32_t card_i = 0;
  std::uint32_t card_j = 1;
  std::optional<std::uint64_t> t;
  std::uint64_t cap = 0;  // 0 means 50 n ln n (at least n)
  bool write_eigenfunction = false;

  // Parses and validates; collects every problem before throwing ConfigError.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  std::uint64_t hash() const;  // FNV-1a over the canonical JSON dump
};

struct OutputFile {
  std::string path;  // relative to the output directory
  bool complete = false;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Manifest {
  std::string experiment;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::vector<OutputFile> outputs;
  std::vector<CheckResult> checks;
  bool complete = false;
  std::string error;
  double wall_seconds = 0;

  bool checks_passed() const;
  nlohmann::json to_json() const;
};

// Runs the configured experiment, writing CSV/JSON files and manifest.json into
// `out_dir`. Numeric outputs depend only on the config (seed included), never
// on `threads`. On a runtime failure the manifest is still written with
// complete = false and the exception is rethrown.
Manifest run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir, unsigned threads = 1);

}  // namespace shuffle
