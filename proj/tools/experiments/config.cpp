#include "config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gcph/entropy.hpp"
#include "gcph/fields.hpp"

namespace gcph::experiments {

using nlohmann::json;

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"hydro-converge", "lln-rate",      "clt-check",    "qv-check",
                                              "init-cov",       "entropy-exact", "concentration"};
  return names;
}

const std::vector<std::string>& auxiliary_names() {
  static const std::vector<std::string> names{"simulate", "trajectory", "master-check"};
  return names;
}

bool is_known_experiment(std::string_view name) {
  for (const auto* list : {&experiment_names(), &auxiliary_names()})
    for (const auto& n : *list)
      if (n == name) return true;
  return false;
}

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

}  // namespace

ConfigError::ConfigError(const std::vector<std::string>& violations)
    : std::runtime_error("invalid configuration: " + join(violations)), violations_(violations) {}

int minimum_replicas(std::string_view experiment) {
  if (experiment == "lln-rate") return 200;
  if (experiment == "clt-check") return 2000;
  if (experiment == "init-cov") return 1000;
  if (experiment == "concentration") return 10000;
  if (experiment == "entropy-exact") return 1;
  if (experiment == "simulate" || experiment == "master-check") return 1;
  return 0;
}

ExperimentConfig default_config(std::string_view experiment) {
  ExperimentConfig c;
  c.experiment = std::string(experiment);
  const ProfileConfig k2{"cosine", {1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.15, 0.0, -0.15}, 1, 1e-3};
  const ProfileConfig k1{"cosine", {0.5, 0.5}, {0.2, -0.2}, 1, 1e-3};
  c.profile = k2;
  c.times = {1.0};
  if (experiment == "hydro-converge") {
    c.n = {16, 32, 64, 128};
    c.n_ref = 512;
  } else if (experiment == "lln-rate") {
    c.n = {64, 128, 256, 512};
    c.replicas = 200;
    c.test_functions = {"one", "cos1"};
  } else if (experiment == "clt-check") {
    c.k = 1;
    c.profile = k1;
    c.n = {256};
    c.times = {0.5};
    c.replicas = 4000;
    c.test_functions = {"one"};
  } else if (experiment == "qv-check") {
    c.k = 1;
    c.profile = k1;
    c.n = {4};
    c.times = {0.0, 0.5};
    c.test_functions = {"one", "cos1", "sin1"};
  } else if (experiment == "init-cov") {
    c.n = {256};
    c.times = {0.0};
    c.replicas = 5000;
    c.test_functions = {"one", "cos1", "sin1"};
  } else if (experiment == "entropy-exact") {
    c.k = 1;
    c.kernel.type = "constant";
    c.kernel.value = 1.0;
    c.profile = ProfileConfig{"constant", {0.5, 0.5}, {0.0, 0.0}, 1, 1e-3};
    c.n = {4};
    c.step = 1e-3;
    c.replicas = 100;
  } else if (experiment == "concentration") {
    c.n = {1};
    c.replicas = 50000;
  } else if (experiment == "simulate" || experiment == "trajectory") {
    c.n = {64};
    c.times = {0.0, 0.5, 1.0};
    c.replicas = 1;
    c.test_functions = {"one", "cos1"};
  } else if (experiment == "master-check") {
    c.k = 1;
    c.profile = k1;
    c.n = {3};
    c.times = {0.25, 0.5, 1.0};
    c.replicas = 100000;
  }
  return c;
}

json ExperimentConfig::to_json() const {
  json j;
  j["experiment"] = experiment;
  j["d"] = d;
  j["k"] = k;
  j["a"] = a;
  j["kernel"] = {{"type", kernel.type},   {"value", kernel.value},         {"scale", kernel.scale},
                 {"beta", kernel.beta},   {"amplitude", kernel.amplitude}, {"width", kernel.width},
                 {"path", kernel.path}};
  j["profile"] = {{"type", profile.type},
                  {"base", profile.base},
                  {"amplitude", profile.amplitude},
                  {"mode", profile.mode},
                  {"epsilon", profile.epsilon}};
  j["n"] = n;
  j["n_ref"] = n_ref ? json(*n_ref) : json(nullptr);
  j["times"] = times;
  j["replicas"] = replicas;
  j["seed"] = seed;
  j["step"] = step;
  j["test_functions"] = test_functions;
  j["output"] = output;
  j["workers"] = workers;
  return j;
}

namespace {

template <class T>
void read(const json& j, const char* key, T& out, const std::string& prefix, std::vector<std::string>& errors) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    errors.push_back(prefix + key + ": wrong type (" + j.at(key).dump() + ")");
  }
}

void check_keys(const json& j, const json& allowed, const std::string& prefix, std::vector<std::string>& errors) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      errors.push_back(prefix + key + ": unknown key");
    } else if (value.is_object() && allowed.at(key).is_object()) {
      check_keys(value, allowed.at(key), prefix + key + ".", errors);
    }
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError({"config: expected a JSON object"});
  std::string name;
  std::vector<std::string> errors;
  read(j, "experiment", name, "", errors);
  if (!errors.empty()) throw ConfigError(errors);
  ExperimentConfig c = default_config(name);
  json allowed = c.to_json();
  allowed["profile"]["values"] = nullptr;
  check_keys(j, allowed, "", errors);

  read(j, "d", c.d, "", errors);
  read(j, "k", c.k, "", errors);
  read(j, "a", c.a, "", errors);
  if (j.contains("kernel")) {
    const auto& kj = j.at("kernel");
    if (!kj.is_object()) {
      errors.push_back("kernel: expected an object");
    } else {
      read(kj, "type", c.kernel.type, "kernel.", errors);
      read(kj, "value", c.kernel.value, "kernel.", errors);
      read(kj, "scale", c.kernel.scale, "kernel.", errors);
      read(kj, "beta", c.kernel.beta, "kernel.", errors);
      read(kj, "amplitude", c.kernel.amplitude, "kernel.", errors);
      read(kj, "width", c.kernel.width, "kernel.", errors);
      read(kj, "path", c.kernel.path, "kernel.", errors);
    }
  }
  if (j.contains("profile")) {
    const auto& pj = j.at("profile");
    if (!pj.is_object()) {
      errors.push_back("profile: expected an object");
    } else {
      read(pj, "type", c.profile.type, "profile.", errors);
      read(pj, "base", c.profile.base, "profile.", errors);
      read(pj, "values", c.profile.base, "profile.", errors);
      read(pj, "amplitude", c.profile.amplitude, "profile.", errors);
      read(pj, "mode", c.profile.mode, "profile.", errors);
      read(pj, "epsilon", c.profile.epsilon, "profile.", errors);
      if (c.profile.type == "constant" && !pj.contains("amplitude"))
        c.profile.amplitude.assign(c.profile.base.size(), 0.0);
    }
  }
  read(j, "n", c.n, "", errors);
  if (j.contains("n_ref")) {
    if (j.at("n_ref").is_null()) {
      c.n_ref.reset();
    } else {
      int v = 0;
      read(j, "n_ref", v, "", errors);
      c.n_ref = v;
    }
  }
  read(j, "times", c.times, "", errors);
  read(j, "replicas", c.replicas, "", errors);
  read(j, "seed", c.seed, "", errors);
  read(j, "step", c.step, "", errors);
  read(j, "test_functions", c.test_functions, "", errors);
  read(j, "output", c.output, "", errors);
  read(j, "workers", c.workers, "", errors);
  if (!errors.empty()) throw ConfigError(errors);
  return c;
}

KernelSpec ExperimentConfig::kernel_spec(int side) const {
  if (kernel.type == "constant") return KernelSpec::constant(kernel.value);
  if (kernel.type == "cosine") return KernelSpec::cosine(kernel.scale, kernel.beta);
  if (kernel.type == "gaussian") return KernelSpec::gaussian(kernel.amplitude, kernel.width);
  if (kernel.type == "csv") return KernelSpec::load_csv(kernel.path, TorusLattice(d, side));
  throw std::invalid_argument("unknown kernel type '" + kernel.type + "'");
}

InitialProfile ExperimentConfig::initial_profile() const {
  if (profile.type == "constant") return InitialProfile::constant(profile.base);
  if (profile.type == "cosine") return InitialProfile::cosine(profile.base, profile.amplitude, profile.mode);
  throw std::invalid_argument("unknown profile type '" + profile.type + "'");
}

ExperimentConfig parse_config(const json& j, std::string_view experiment) {
  json merged = j.is_null() ? json::object() : j;
  if (!experiment.empty()) {
    if (merged.contains("experiment") && merged["experiment"] != std::string(experiment))
      throw ConfigError({"experiment: config names '" + merged["experiment"].dump() + "' but the command is '" +
                         std::string(experiment) + "'"});
    merged["experiment"] = std::string(experiment);
  }
  return ExperimentConfig::from_json(merged);
}

ExperimentConfig load_config(const std::string& path, std::string_view experiment) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"config: cannot open '" + path + "'"});
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("config: ") + e.what()});
  }
  return parse_config(j, experiment);
}

void apply_override(json& j, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) throw ConfigError({"--set: expected key=value, got '" + std::string(assignment) + "'"});
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError({"--set: empty path component in '" + key + "'"});
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

void apply_environment(ExperimentConfig& config) {
  std::vector<std::string> errors;
  if (const char* s = std::getenv("GCP_HYDRO_SEED"); s && *s) {
    char* end = nullptr;
    const auto v = std::strtoull(s, &end, 10);
    if (*end != '\0') {
      errors.push_back("GCP_HYDRO_SEED: not an unsigned integer");
    } else {
      config.seed = v;
    }
  }
  if (const char* s = std::getenv("GCP_HYDRO_WORKERS"); s && *s) {
    char* end = nullptr;
    const auto v = std::strtol(s, &end, 10);
    if (*end != '\0' || v < 0) {
      errors.push_back("GCP_HYDRO_WORKERS: not a nonnegative integer");
    } else {
      config.workers = static_cast<int>(v);
    }
  }
  if (!errors.empty()) throw ConfigError(errors);
}

std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> v;
  const auto& e = c.experiment;
  if (!is_known_experiment(e)) v.push_back("experiment: unknown experiment '" + e + "'");
  if (c.d < 1 || c.d > 3) v.push_back("d: must be 1, 2 or 3");
  if (c.k < 1) v.push_back("k: must be >= 1");
  if (!(c.a > 0.0) || !std::isfinite(c.a)) v.push_back("a: recovery rate must be > 0");

  if (e != "concentration") {
    try {
      if (c.kernel.type != "csv") (void)c.kernel_spec(1);
    } catch (const std::exception& ex) {
      v.push_back(std::string("kernel: ") + ex.what());
    }
    if (c.kernel.type == "csv" && c.kernel.path.empty()) v.push_back("kernel.path: required for csv kernels");

    if (c.profile.base.size() != static_cast<std::size_t>(c.k + 1)) {
      v.push_back("profile.base: expected k+1 = " + std::to_string(c.k + 1) + " values");
    } else if (c.profile.type == "cosine" && c.profile.amplitude.size() != c.profile.base.size()) {
      v.push_back("profile.amplitude: expected k+1 = " + std::to_string(c.k + 1) + " values");
    } else {
      try {
        const auto p = c.initial_profile();
        const double eps = c.profile.epsilon;
        if (!(eps > 0.0) || !(eps < 0.5)) {
          v.push_back("profile.epsilon: (H1) needs 0 < epsilon < 1/2");
        } else if (p.min_component() < eps || p.max_component() > 1.0 - eps) {
          v.push_back("profile: (H1) violated, components must lie in [epsilon, 1 - epsilon] with epsilon = " +
                      std::to_string(eps));
        }
      } catch (const std::exception& ex) {
        v.push_back(std::string("profile: ") + ex.what());
      }
    }
  }

  if (c.n.empty()) v.push_back("n: must not be empty");
  for (int n : c.n)
    if (n < 1) v.push_back("n: every lattice side must be >= 1");
  if ((e == "hydro-converge" || e == "lln-rate") && c.n.size() < 3) v.push_back("n: at least 3 lattice sizes are needed for a rate fit");
  if (e == "hydro-converge" && !c.n.empty()) {
    const int n_max = *std::max_element(c.n.begin(), c.n.end());
    if (c.n_ref) {
      if (*c.n_ref < 4 * n_max) v.push_back("n_ref: must be >= 4 max(n)");
      for (int n : c.n)
        if (n >= 1 && *c.n_ref % n != 0) v.push_back("n_ref: every n must divide n_ref");
    }
  }
  if (e == "entropy-exact" || e == "qv-check" || e == "master-check") {
    for (int n : c.n) {
      double states = std::pow(static_cast<double>(c.k + 1), std::pow(static_cast<double>(n), c.d));
      if (states > static_cast<double>(StateSpace::kMaxStates))
        v.push_back("n: exact enumeration of (k+1)^(n^d) configurations exceeds the 2^20 state cap");
    }
  }

  if (c.times.empty()) v.push_back("times: must not be empty");
  for (std::size_t i = 0; i < c.times.size(); ++i) {
    if (!std::isfinite(c.times[i]) || c.times[i] < 0.0) v.push_back("times: must be finite and >= 0");
    if (i > 0 && !(c.times[i] > c.times[i - 1])) {
      v.push_back("times: must be strictly increasing");
      break;
    }
  }
  if ((e == "hydro-converge" || e == "entropy-exact" || e == "lln-rate" || e == "clt-check") && !c.times.empty() &&
      !(c.times.back() > 0.0))
    v.push_back("times: the final time must be > 0");

  const int min_rep = minimum_replicas(e);
  if (min_rep > 0) {
    if (c.replicas <= 0) {
      v.push_back("replicas: must be > 0");
    } else if (c.replicas < min_rep) {
      v.push_back("replicas: " + e + " needs at least " + std::to_string(min_rep));
    }
  }
  if (!(c.step >= 0.0) || !std::isfinite(c.step)) v.push_back("step: must be >= 0");
  if (c.workers < 0) v.push_back("workers: must be >= 0");
  for (const auto& name : c.test_functions) {
    try {
      (void)TestFunction::parse(name);
    } catch (const std::exception& ex) {
      v.push_back(std::string("test_functions: ") + ex.what());
    }
  }
  if ((e == "lln-rate" || e == "clt-check" || e == "qv-check" || e == "init-cov") && c.test_functions.empty())
    v.push_back("test_functions: must not be empty");
  return v;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  json j = config.to_json();
  j.erase("output");
  j.erase("workers");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace gcph::experiments
