#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gcph/hydro.hpp"
#include "gcph/kernel.hpp"
#include "json.hpp"

namespace gcph::experiments {

/// Experiments with acceptance thresholds, followed by auxiliary commands.
const std::vector<std::string>& experiment_names();
const std::vector<std::string>& auxiliary_names();
bool is_known_experiment(std::string_view name);

struct KernelConfig {
  std::string type = "cosine";
  double value = 1.0;
  double scale = 2.0;
  double beta = 0.5;
  double amplitude = 1.0;
  double width = 0.1;
  std::string path;
};

struct ProfileConfig {
  std::string type = "cosine";
  std::vector<double> base;
  std::vector<double> amplitude;
  int mode = 1;
  double epsilon = 1e-3;
};

struct ExperimentConfig {
  std::string experiment;
  int d = 1;
  int k = 2;
  double a = 1.0;
  KernelConfig kernel;
  ProfileConfig profile;
  std::vector<int> n;
  std::optional<int> n_ref;
  std::vector<double> times;
  int replicas = 0;
  std::uint64_t seed = 20240601;
  /// 0 selects the integrator default.
  double step = 0.0;
  std::vector<std::string> test_functions;
  std::string output = "out";
  /// 0 uses the hardware concurrency.
  int workers = 0;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);

  KernelSpec kernel_spec(int side) const;
  InitialProfile initial_profile() const;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::vector<std::string>& violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Acceptance-scale defaults for each experiment.
ExperimentConfig default_config(std::string_view experiment);

/// Merges a JSON object onto the defaults of its experiment; unknown keys are rejected.
ExperimentConfig parse_config(const nlohmann::json& j, std::string_view experiment = {});
ExperimentConfig load_config(const std::string& path, std::string_view experiment = {});

/// Applies `dotted.key=value`; the value is read as JSON when it parses, otherwise as a string.
void apply_override(nlohmann::json& j, std::string_view assignment);
/// GCP_HYDRO_SEED and GCP_HYDRO_WORKERS.
void apply_environment(ExperimentConfig& config);

/// Every violation found, each prefixed by the offending field.
std::vector<std::string> validate(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical JSON dump.
std::uint64_t config_hash(const ExperimentConfig& config);

int minimum_replicas(std::string_view experiment);

}  // namespace gcph::experiments
