#include <chrono>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "experiments/config.hpp"
#include "experiments/experiments.hpp"

namespace ex = gcph::experiments;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string command_list() {
  std::string s;
  for (const auto* list : {&ex::experiment_names(), &ex::auxiliary_names()})
    for (const auto& n : *list) s += "  " + n + "\n";
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized contact process: hydrodynamic limit and fluctuation experiments"};
  app.footer("Experiments:\n" + command_list() +
             "\nExit status: 0 pass, 1 threshold failure, 2 configuration error, 3 runtime or I/O error.\n"
             "Environment: GCP_HYDRO_SEED, GCP_HYDRO_WORKERS override seed and worker count.");
  std::string experiment;
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  bool validate_only = false;
  bool print_config = false;
  app.add_option("experiment", experiment, "Experiment name")->required();
  app.add_option("-c,--config", config_path, "JSON config file (defaults are used when omitted)");
  app.add_option("--set", overrides, "Override a config key, e.g. --set kernel.beta=0.3")->take_all();
  app.add_option("-o,--out", out_dir, "Output directory (overrides the config's output key)");
  app.add_flag("--validate", validate_only, "Only validate the configuration");
  app.add_flag("--print-config", print_config, "Print the resolved configuration and exit");
  CLI11_PARSE(app, argc, argv);

  ex::ExperimentConfig config;
  try {
    if (!ex::is_known_experiment(experiment))
      throw ex::ConfigError({"experiment: unknown experiment '" + experiment + "'"});
    nlohmann::json j = config_path.empty() ? nlohmann::json::object() : ex::load_config(config_path, experiment).to_json();
    for (const auto& o : overrides) ex::apply_override(j, o);
    config = ex::parse_config(j, experiment);
    ex::apply_environment(config);
    if (!out_dir.empty()) config.output = out_dir;
    const auto violations = ex::validate(config);
    if (!violations.empty()) throw ex::ConfigError(violations);
  } catch (const ex::ConfigError& e) {
    for (const auto& v : e.violations()) std::cerr << "config error: " << v << "\n";
    return kExitConfig;
  }
  if (print_config) {
    std::cout << config.to_json().dump(2) << "\n";
    return 0;
  }
  if (validate_only) {
    std::cout << "ok\n";
    return 0;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    const auto result = ex::run(config);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto files = ex::write_outputs(result, config, config.output, wall);
    for (const auto& ch : result.checks)
      std::cout << (ch.pass() ? "PASS " : "FAIL ") << ch.name << ": " << ex::format_double(ch.value) << "\n";
    for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
    std::cout << "status: " << (result.has_thresholds() ? (result.passed() ? "pass" : "fail") : "no-thresholds")
              << " (" << ex::format_double(wall) << " s)\n";
    return result.exit_code();
  } catch (const ex::ConfigError& e) {
    for (const auto& v : e.violations()) std::cerr << "config error: " << v << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
