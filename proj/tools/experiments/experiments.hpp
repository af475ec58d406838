#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "gcph/concentration.hpp"
#include "gcph/entropy.hpp"
#include "gcph/hydro.hpp"
#include "gcph/stats.hpp"
#include "output.hpp"

namespace gcph::experiments {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

/// Calls fn(i) for i in [0, count) on a bounded pool; the first exception is rethrown.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);
int resolve_workers(int requested);

/// Random stream id of one replica: ((size_index + 1) << 32) | replica.
std::uint64_t replica_stream(std::size_t size_index, std::size_t replica);

struct HydroConvergeResult {
  ConvergenceStudy study;
  double time = 0.0;
};
HydroConvergeResult hydro_converge(const ExperimentConfig& c);

struct LlnRow {
  double time = 0.0;
  std::string function;
  int state = 0;
  int side = 0;
  Estimate mean_square;
};
struct LlnFit {
  double time = 0.0;
  std::string function;
  int state = 0;
  RateFit fit;
};
struct LlnRateResult {
  std::vector<LlnRow> rows;
  std::vector<LlnFit> fits;
};
LlnRateResult lln_rate(const ExperimentConfig& c);

struct InitCovRow {
  std::string f;
  std::string g;
  int i = 0;
  int j = 0;
  double predicted = 0.0;
  Estimate empirical;
};
struct InitCovResult {
  int side = 0;
  std::vector<InitCovRow> rows;
};
InitCovResult init_cov(const ExperimentConfig& c);

struct CltRow {
  double time = 0.0;
  std::string function;
  int state = 0;
  MildVariance predicted;
  Estimate empirical;
  McSummary summary;
};
struct CltResult {
  int side = 0;
  std::vector<CltRow> rows;
};
CltResult clt_check(const ExperimentConfig& c);

struct QvRow {
  double time = 0.0;
  std::string function;
  int i = 0;
  int j = 0;
  double average = 0.0;
  double predicted = 0.0;
};
struct QvResult {
  int side = 0;
  std::vector<QvRow> rows;
  double max_gap() const;
};
QvResult qv_check(const ExperimentConfig& c);

struct FIdentityRow {
  int side = 0;
  int threshold = 0;
  int profiles = 0;
  std::size_t configurations = 0;
  double max_gap = 0.0;
};
struct EntropyResult {
  EntropyReport report;
  std::vector<FIdentityRow> identity;
  double max_identity_gap() const;
};
EntropyResult entropy_exact(const ExperimentConfig& c);

struct DvRow {
  double gamma = 0.0;
  DonskerVaradhan value;
};
struct ConcentrationResult {
  std::vector<InequalityReport> reports;
  std::vector<DvRow> donsker_varadhan;
};
ConcentrationResult concentration(const ExperimentConfig& c);

struct MarginalRow {
  double time = 0.0;
  std::size_t site = 0;
  int state = 0;
  double exact = 0.0;
  double empirical = 0.0;
  double standard_error = 0.0;
};
struct MasterCheckResult {
  int side = 0;
  std::vector<MarginalRow> rows;
};
MasterCheckResult master_check(const ExperimentConfig& c);

/// One threshold: pass iff lower <= value <= upper.
struct Check {
  std::string name;
  double value = 0.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool pass() const { return value >= lower && value <= upper; }
};

struct RunResult {
  std::string experiment;
  /// (file stem, table), written as <stem>.csv.
  std::vector<std::pair<std::string, CsvTable>> tables;
  std::vector<Check> checks;

  bool has_thresholds() const { return !checks.empty(); }
  bool passed() const;
  /// 0 pass (or no thresholds), 1 threshold failure.
  int exit_code() const { return passed() ? 0 : 1; }
};

/// Validates, then dispatches; throws ConfigError on violations.
RunResult run(const ExperimentConfig& c);

/// CSV tables plus <experiment>.json, all written atomically. Returns the written paths.
std::vector<std::filesystem::path> write_outputs(const RunResult& result, const ExperimentConfig& c,
                                                 const std::filesystem::path& dir, double wall_seconds);

}  // namespace gcph::experiments
