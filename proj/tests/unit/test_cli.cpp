#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "experiments/config.hpp"
#include "experiments/experiments.hpp"
#include "experiments/output.hpp"

using namespace gcph::experiments;
using nlohmann::json;

namespace {

bool mentions(const std::vector<std::string>& violations, const std::string& field) {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const std::string& v) { return v.rfind(field, 0) == 0; });
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small(const std::string& name) {
  auto c = default_config(name);
  if (name == "lln-rate") c.n = {8, 16, 32};
  if (name == "clt-check") c.n = {16};
  if (name == "init-cov") c.n = {16};
  if (name == "hydro-converge") {
    c.n = {8, 16, 32};
    c.n_ref = 128;
  }
  if (name == "master-check") c.replicas = 2000;
  if (name == "simulate" || name == "trajectory") c.n = {8};
  return c;
}

}  // namespace

TEST(Config, DefaultsValidate) {
  for (const auto* list : {&experiment_names(), &auxiliary_names()})
    for (const auto& name : *list) {
      const auto v = validate(default_config(name));
      EXPECT_TRUE(v.empty()) << name << ": " << (v.empty() ? "" : v.front());
    }
}

TEST(Config, ShippedExamplesValidate) {
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(GCPH_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    const auto c = load_config(entry.path().string());
    EXPECT_EQ(entry.path().stem().string(), c.experiment);
    EXPECT_EQ(c.to_json(), [&] {
      auto d = default_config(c.experiment);
      d.output = c.output;
      return d.to_json();
    }()) << entry.path();
    const auto v = validate(c);
    EXPECT_TRUE(v.empty()) << entry.path() << ": " << (v.empty() ? "" : v.front());
    ++count;
  }
  EXPECT_EQ(count, experiment_names().size() + auxiliary_names().size());
}

TEST(Config, ZeroReplicasNamesTheField) {
  auto c = default_config("lln-rate");
  c.replicas = 0;
  EXPECT_TRUE(mentions(validate(c), "replicas"));
  try {
    (void)run(c);
    FAIL() << "expected a ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_TRUE(mentions(e.violations(), "replicas"));
    EXPECT_NE(std::string(e.what()).find("replicas"), std::string::npos);
  }
}

TEST(Config, ReplicaMinimums) {
  auto c = default_config("clt-check");
  c.replicas = 1999;
  EXPECT_TRUE(mentions(validate(c), "replicas"));
  c.replicas = 2000;
  EXPECT_TRUE(validate(c).empty());
}

TEST(Config, TimesChecks) {
  auto c = default_config("clt-check");
  c.times.clear();
  EXPECT_TRUE(mentions(validate(c), "times"));
  c.times = {0.5, 0.5};
  EXPECT_TRUE(mentions(validate(c), "times"));
  c.times = {-0.1, 0.5};
  EXPECT_TRUE(mentions(validate(c), "times"));
}

TEST(Config, ZeroComponentViolatesH1) {
  auto c = default_config("clt-check");
  c.profile.type = "constant";
  c.profile.base = {0.0, 1.0};
  c.profile.amplitude = {0.0, 0.0};
  const auto v = validate(c);
  ASSERT_TRUE(mentions(v, "profile"));
  EXPECT_NE(v.front().find("(H1)"), std::string::npos);
}

TEST(Config, ViolationsAreReportedTogether) {
  auto c = default_config("lln-rate");
  c.replicas = 0;
  c.times.clear();
  c.a = -1.0;
  const auto v = validate(c);
  EXPECT_TRUE(mentions(v, "replicas"));
  EXPECT_TRUE(mentions(v, "times"));
  EXPECT_TRUE(mentions(v, "a"));
}

TEST(Config, StateCap) {
  auto c = default_config("entropy-exact");
  c.n = {21};
  EXPECT_TRUE(mentions(validate(c), "n"));
  c.n = {20};
  EXPECT_TRUE(validate(c).empty());
}

TEST(Config, ReferenceSideMustBeDivisible) {
  auto c = default_config("hydro-converge");
  c.n_ref = 500;
  EXPECT_TRUE(mentions(validate(c), "n_ref"));
}

TEST(Config, UnknownKeysAndTypesRejected) {
  EXPECT_THROW(parse_config(json{{"replica", 5}}, "lln-rate"), ConfigError);
  EXPECT_THROW(parse_config(json{{"kernel", {{"bta", 0.1}}}}, "lln-rate"), ConfigError);
  try {
    (void)parse_config(json{{"replicas", "many"}}, "lln-rate");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_TRUE(mentions(e.violations(), "replicas"));
  }
  EXPECT_THROW(parse_config(json{{"experiment", "clt-check"}}, "lln-rate"), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  auto c = default_config("hydro-converge");
  c.kernel.beta = 0.25;
  c.seed = 7;
  const auto back = parse_config(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Config, Overrides) {
  json j = json::object();
  apply_override(j, "kernel.beta=0.3");
  apply_override(j, "n=[8,16,32]");
  apply_override(j, "test_functions=[\"one\"]");
  apply_override(j, "output=results/run1");
  const auto c = parse_config(j, "lln-rate");
  EXPECT_DOUBLE_EQ(c.kernel.beta, 0.3);
  EXPECT_EQ(c.n, (std::vector<int>{8, 16, 32}));
  EXPECT_EQ(c.test_functions, std::vector<std::string>{"one"});
  EXPECT_EQ(c.output, "results/run1");
  EXPECT_THROW(apply_override(j, "novalue"), ConfigError);
}

TEST(Config, ConstantProfileValuesAlias) {
  const auto c = parse_config(json{{"profile", {{"type", "constant"}, {"values", {0.3, 0.7}}}}, {"k", 1}},
                              "master-check");
  EXPECT_EQ(c.profile.base, (std::vector<double>{0.3, 0.7}));
  EXPECT_EQ(c.profile.amplitude, (std::vector<double>{0.0, 0.0}));
  EXPECT_TRUE(validate(c).empty());
}

TEST(Config, EnvironmentOverrides) {
  auto c = default_config("simulate");
  ::setenv("GCP_HYDRO_SEED", "99", 1);
  ::setenv("GCP_HYDRO_WORKERS", "3", 1);
  apply_environment(c);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.workers, 3);
  ::setenv("GCP_HYDRO_SEED", "x", 1);
  EXPECT_THROW(apply_environment(c), ConfigError);
  ::unsetenv("GCP_HYDRO_SEED");
  ::unsetenv("GCP_HYDRO_WORKERS");
}

TEST(Config, HashIgnoresOutputLocation) {
  auto a = default_config("simulate");
  auto b = a;
  b.output = "elsewhere";
  b.workers = 4;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed += 1;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Csv, FormattingAndQuoting) {
  CsvTable t({"name", "n", "x"});
  t.add_row({std::string("a,b"), std::int64_t{3}, 0.1});
  t.add_row({std::string("q\"t"), std::int64_t{-1}, 1e-300});
  EXPECT_EQ(t.str(), "name,n,x\n\"a,b\",3,0.1\n\"q\"\"t\",-1,1e-300\n");
  EXPECT_THROW(t.add_row({1.0}), std::invalid_argument);
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Parallel, ExceptionsPropagate) {
  EXPECT_THROW(parallel_for(100, 4,
                            [](std::size_t i) {
                              if (i == 37) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), 3, [&](std::size_t i) { hit[i] += 1; });
  EXPECT_TRUE(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
}

TEST(Run, DeterministicAcrossWorkerCounts) {
  for (const std::string name : {"simulate", "init-cov", "master-check"}) {
    auto c = small(name);
    c.workers = 1;
    const auto a = run(c);
    c.workers = 3;
    const auto b = run(c);
    ASSERT_EQ(a.tables.size(), b.tables.size());
    for (std::size_t t = 0; t < a.tables.size(); ++t) EXPECT_EQ(a.tables[t].second.str(), b.tables[t].second.str()) << name;
  }
}

TEST(Run, SeedChangesOutput) {
  auto c = small("simulate");
  const auto a = run(c);
  c.seed += 1;
  const auto b = run(c);
  EXPECT_NE(a.tables[0].second.str(), b.tables[0].second.str());
}

TEST(Run, GoldenHeaders) {
  const std::map<std::string, std::string> golden{
      {"hydro-converge", "n,n_ref,time,step,sup_error"},
      {"hydro-converge_fit", "slope,slope_se,intercept,target_lower,target_upper,status"},
      {"lln-rate", "time,function,state,n,mean_square_error,standard_error"},
      {"lln-rate_fit", "time,function,state,slope,slope_se,status"},
      {"init-cov", "n,f,g,i,j,predicted,empirical,standard_error,z,status"},
      {"clt-check",
       "n,time,function,state,predicted_initial,predicted_martingale,predicted,empirical_variance,standard_error,z,"
       "mean,skewness,skewness_se,excess_kurtosis,kurtosis_se,status"},
      {"qv-check", "n,time,function,i,j,carre_du_champ_mean,gamma_sum,abs_gap"},
      {"entropy-exact", "time,entropy,derivative,production,excess,envelope"},
      {"entropy-exact_summary",
       "step,tolerance,max_excess,closed_form_gap,envelope_constant,fit_time,fit_constant,fit_envelope_dominates"},
      {"entropy-exact_identity", "n,k,profiles,configurations,max_gap"},
      {"concentration", "check,sampler,replicas,parameter,empirical,standard_error,bound,slack,status"},
      {"concentration_donsker_varadhan", "gamma,lhs,rhs,status"},
      {"master-check", "n,time,site,state,exact,empirical,standard_error,z,status"},
      {"simulate", "n,replica,time,state,count,density,hydro_density"},
      {"trajectory", "n,time,site,position,state,density"},
  };
  std::size_t seen = 0;
  for (const auto* list : {&experiment_names(), &auxiliary_names()})
    for (const auto& name : *list) {
      const auto r = run(small(name));
      for (const auto& [stem, table] : r.tables) {
        const auto it = golden.find(stem);
        ASSERT_NE(it, golden.end()) << stem;
        const auto text = table.str();
        EXPECT_EQ(text.substr(0, text.find('\n')), it->second) << stem;
        ++seen;
      }
    }
  EXPECT_EQ(seen, golden.size());
}

TEST(Run, ExitCodeReflectsThresholds) {
  RunResult r{"x", {}, {}};
  EXPECT_EQ(r.exit_code(), 0);
  r.checks.push_back({"ok", 1.0, 0.0, 2.0});
  EXPECT_EQ(r.exit_code(), 0);
  r.checks.push_back({"bad", 3.0, 0.0, 2.0});
  EXPECT_EQ(r.exit_code(), 1);
}

TEST(Run, OutputsWrittenAtomicallyWithSidecar) {
  const auto dir = std::filesystem::temp_directory_path() / "gcph_cli_outputs";
  std::filesystem::remove_all(dir);
  auto c = small("master-check");
  const auto r = run(c);
  const auto files = write_outputs(r, c, dir, 0.5);
  ASSERT_EQ(files.size(), 2u);
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    EXPECT_NE(entry.path().extension(), ".tmp");
  const auto first = read_file(dir / "master-check.csv");
  EXPECT_EQ(first, r.tables[0].second.str());
  const auto meta = json::parse(read_file(dir / "master-check.json"));
  EXPECT_EQ(meta["schema_version"], kSchemaVersion);
  EXPECT_EQ(meta["seed"], c.seed);
  EXPECT_EQ(meta["config"], c.to_json());
  EXPECT_EQ(meta["config_hash"].get<std::string>().size(), 16u);
  EXPECT_EQ(meta["status"], r.passed() ? "pass" : "fail");
  EXPECT_TRUE(meta.contains("wall_time_seconds"));
  EXPECT_TRUE(meta["module_versions"].contains("entropy_oracle"));

  (void)write_outputs(run(c), c, dir, 0.7);
  EXPECT_EQ(read_file(dir / "master-check.csv"), first);
  std::filesystem::remove_all(dir);
}
