#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gcph/hydro.hpp"
#include "gcph/lattice.hpp"
#include "gcph/random.hpp"

namespace gcph {

/// One state in {0, ..., k} per lattice site.
class SpinConfig {
 public:
  SpinConfig(TorusLattice lattice, int threshold);
  SpinConfig(TorusLattice lattice, int threshold, std::vector<int> states);

  const TorusLattice& lattice() const { return lattice_; }
  int threshold() const { return threshold_; }
  std::size_t size() const { return states_.size(); }
  int operator[](std::size_t x) const { return states_[x]; }
  const std::vector<int>& states() const { return states_; }
  void set(std::size_t x, int state);

  std::size_t count(int state) const;
  /// Number of sites in each state 0..k.
  std::vector<std::size_t> counts() const;
  std::size_t active_count() const { return count(threshold_); }
  std::vector<std::size_t> active_sites() const;

  bool operator==(const SpinConfig&) const = default;

 private:
  TorusLattice lattice_;
  int threshold_;
  std::vector<int> states_;
};

/// Independent categorical draw at every site with probabilities u0_x.
SpinConfig sample_initial(const DensityField& u0, RandomStream& rng);

/// I_x = (J^n * 1(sigma = k))_x.
std::vector<double> incoming_intensity(const SpinConfig& sigma, const DiscreteKernel& kernel);
/// c_x(sigma) = a 1(sigma_x = k) + I_x 1(sigma_x != k).
std::vector<double> site_rates(const SpinConfig& sigma, const ModelParams& p);

/// Binary indexed tree over nonnegative weights.
class FenwickTree {
 public:
  FenwickTree() = default;
  explicit FenwickTree(std::span<const double> weights) { build(weights); }

  /// O(N) construction.
  void build(std::span<const double> weights);
  void add(std::size_t i, double delta);
  void set(std::size_t i, double value);

  std::size_t size() const { return values_.size(); }
  double value(std::size_t i) const { return values_[i]; }
  double total() const;
  /// Sum of weights [0, i).
  double prefix(std::size_t i) const;
  /// Smallest i with prefix(i + 1) > target, skipping zero-weight sites.
  /// Requires 0 <= target < total().
  std::size_t find(double target) const;

 private:
  std::vector<double> tree_;
  std::vector<double> values_;
  std::size_t top_bit_ = 0;
};

struct RateState {
  std::vector<double> intensity;
  std::vector<double> rates;
  double total = 0.0;
};

RateState compute_rate_state(const SpinConfig& sigma, const ModelParams& p);

struct StepResult {
  std::optional<std::size_t> site;
  double holding_time = 0.0;
  /// No active site: the process is frozen.
  bool absorbed = false;
};

enum class SnapshotMode { counts, full };

struct Snapshot {
  double time = 0.0;
  std::vector<std::size_t> counts;
  std::optional<SpinConfig> config;
};

struct SimulatorOptions {
  /// For constant J the intensity depends only on the active count; sample
  /// from active/passive site lists instead of the tree.
  bool constant_kernel_fast_path = true;
  /// Recompute intensities from scratch after this many events.
  std::uint64_t rebuild_interval = std::uint64_t{1} << 20;
  SnapshotMode mode = SnapshotMode::full;
};

/// Gillespie simulation of the generalized contact process.
///
/// The next holding time is drawn before the firing site, and a drawn but
/// unfired event survives a call to simulate_until. Stopping at t and then
/// continuing therefore consumes the random stream exactly like a single run.
class Simulator {
 public:
  Simulator(ModelParams params, SpinConfig initial, RandomStream rng, SimulatorOptions options = {});

  const ModelParams& params() const { return params_; }
  const SpinConfig& config() const { return config_; }
  double time() const { return time_; }
  std::uint64_t events() const { return events_; }
  bool absorbed() const { return config_.active_count() == 0; }
  bool uses_fast_path() const { return fast_path_; }

  double total_rate() const;
  /// Maintained (I, r, R); for the fast path they are expanded from the active count.
  RateState rate_state() const;

  StepResult step();
  /// Exact state at each requested time. Times must be strictly increasing and >= time().
  std::vector<Snapshot> simulate_until(std::span<const double> times);
  Snapshot snapshot() const;

  /// Discards incremental state and recomputes I, r and the tree.
  void recompute_from_scratch();

 private:
  void fire(std::size_t site);
  std::size_t select_site();
  void on_activation_change(std::size_t site, double sign);
  void move_to_list(std::size_t site, bool active);

  ModelParams params_;
  SpinConfig config_;
  RandomStream rng_;
  SimulatorOptions options_;
  bool fast_path_ = false;
  double time_ = 0.0;
  std::uint64_t events_ = 0;
  std::optional<double> pending_;

  std::vector<double> intensity_;
  std::vector<double> rates_;
  FenwickTree tree_;

  std::vector<std::size_t> active_;
  std::vector<std::size_t> passive_;
  std::vector<std::size_t> position_;
};

}  // namespace gcph
