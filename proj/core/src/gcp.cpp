#include "gcph/gcp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gcph {

SpinConfig::SpinConfig(TorusLattice lattice, int threshold)
    : SpinConfig(lattice, threshold, std::vector<int>(lattice.size(), 0)) {}

SpinConfig::SpinConfig(TorusLattice lattice, int threshold, std::vector<int> states)
    : lattice_(lattice), threshold_(threshold), states_(std::move(states)) {
  if (threshold < 1) throw std::invalid_argument("SpinConfig: threshold must be >= 1");
  if (states_.size() != lattice_.size()) throw std::invalid_argument("SpinConfig: one state per site required");
  for (int s : states_)
    if (s < 0 || s > threshold_) throw std::invalid_argument("SpinConfig: state outside {0, ..., k}");
}

void SpinConfig::set(std::size_t x, int state) {
  if (state < 0 || state > threshold_) throw std::invalid_argument("SpinConfig: state outside {0, ..., k}");
  states_.at(x) = state;
}

std::size_t SpinConfig::count(int state) const {
  return static_cast<std::size_t>(std::count(states_.begin(), states_.end(), state));
}

std::vector<std::size_t> SpinConfig::counts() const {
  std::vector<std::size_t> out(static_cast<std::size_t>(threshold_ + 1), 0);
  for (int s : states_) ++out[static_cast<std::size_t>(s)];
  return out;
}

std::vector<std::size_t> SpinConfig::active_sites() const {
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x < states_.size(); ++x)
    if (states_[x] == threshold_) out.push_back(x);
  return out;
}

SpinConfig sample_initial(const DensityField& u0, RandomStream& rng) {
  u0.check_simplex();
  const int k = u0.threshold();
  std::vector<int> states(u0.sites(), 0);
  for (std::size_t x = 0; x < u0.sites(); ++x) {
    const auto p = u0.site(x);
    const double r = rng.uniform();
    double acc = 0.0;
    int s = k;
    for (int i = 0; i < k; ++i) {
      acc += p[static_cast<std::size_t>(i)];
      if (r < acc) {
        s = i;
        break;
      }
    }
    // Rounding can leave r above the running sum; fall back to the last state with mass.
    while (s > 0 && p[static_cast<std::size_t>(s)] <= 0.0) --s;
    states[x] = s;
  }
  return SpinConfig(u0.lattice(), k, std::move(states));
}

std::vector<double> incoming_intensity(const SpinConfig& sigma, const DiscreteKernel& kernel) {
  if (!(sigma.lattice() == kernel.lattice())) throw std::invalid_argument("configuration and kernel lattices differ");
  std::vector<double> active(sigma.size(), 0.0);
  for (std::size_t x = 0; x < sigma.size(); ++x) active[x] = sigma[x] == sigma.threshold() ? 1.0 : 0.0;
  return kernel.conv(active);
}

std::vector<double> site_rates(const SpinConfig& sigma, const ModelParams& p) {
  return compute_rate_state(sigma, p).rates;
}

RateState compute_rate_state(const SpinConfig& sigma, const ModelParams& p) {
  p.validate();
  if (sigma.threshold() != p.threshold) throw std::invalid_argument("configuration threshold differs from the model");
  RateState st;
  st.intensity = incoming_intensity(sigma, *p.kernel);
  st.rates.resize(sigma.size());
  for (std::size_t x = 0; x < sigma.size(); ++x) {
    st.rates[x] = sigma[x] == p.threshold ? p.recovery_rate : st.intensity[x];
    st.total += st.rates[x];
  }
  return st;
}

// --- FenwickTree -----------------------------------------------------------

void FenwickTree::build(std::span<const double> weights) {
  const std::size_t n = weights.size();
  values_.assign(weights.begin(), weights.end());
  tree_.assign(n + 1, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    if (!(weights[i - 1] >= 0.0)) throw std::invalid_argument("FenwickTree: weights must be >= 0");
    tree_[i] += weights[i - 1];
    const std::size_t parent = i + (i & (~i + 1));
    if (parent <= n) tree_[parent] += tree_[i];
  }
  top_bit_ = n == 0 ? 0 : std::bit_floor(n);
}

void FenwickTree::add(std::size_t i, double delta) {
  values_.at(i) += delta;
  for (std::size_t j = i + 1; j < tree_.size(); j += j & (~j + 1)) tree_[j] += delta;
}

void FenwickTree::set(std::size_t i, double value) {
  if (!(value >= 0.0)) throw std::invalid_argument("FenwickTree: weights must be >= 0");
  add(i, value - values_.at(i));
}

double FenwickTree::prefix(std::size_t i) const {
  double s = 0.0;
  for (std::size_t j = std::min(i, values_.size()); j > 0; j -= j & (~j + 1)) s += tree_[j];
  return s;
}

double FenwickTree::total() const { return prefix(values_.size()); }

std::size_t FenwickTree::find(double target) const {
  const std::size_t n = values_.size();
  if (n == 0) throw std::logic_error("FenwickTree::find on an empty tree");
  std::size_t pos = 0;
  for (std::size_t step = top_bit_; step > 0; step >>= 1) {
    if (pos + step <= n && tree_[pos + step] <= target) {
      pos += step;
      target -= tree_[pos];
    }
  }
  if (pos < n && values_[pos] > 0.0) return pos;
  for (std::size_t j = pos; j < n; ++j)
    if (values_[j] > 0.0) return j;
  for (std::size_t j = std::min(pos, n); j-- > 0;)
    if (values_[j] > 0.0) return j;
  throw std::logic_error("FenwickTree::find: all weights are zero");
}

// --- Simulator -------------------------------------------------------------

Simulator::Simulator(ModelParams params, SpinConfig initial, RandomStream rng, SimulatorOptions options)
    : params_(std::move(params)), config_(std::move(initial)), rng_(rng), options_(options) {
  params_.validate();
  if (!(config_.lattice() == params_.lattice())) throw std::invalid_argument("Simulator: lattice mismatch");
  if (config_.threshold() != params_.threshold) throw std::invalid_argument("Simulator: threshold mismatch");
  if (options_.rebuild_interval == 0) throw std::invalid_argument("Simulator: rebuild interval must be > 0");
  fast_path_ = options_.constant_kernel_fast_path && params_.kernel->constant_value().has_value();
  recompute_from_scratch();
}

void Simulator::recompute_from_scratch() {
  const std::size_t n = config_.size();
  if (fast_path_) {
    active_.clear();
    passive_.clear();
    position_.assign(n, 0);
    for (std::size_t x = 0; x < n; ++x) {
      auto& list = config_[x] == params_.threshold ? active_ : passive_;
      position_[x] = list.size();
      list.push_back(x);
    }
    return;
  }
  auto st = compute_rate_state(config_, params_);
  intensity_ = std::move(st.intensity);
  rates_ = std::move(st.rates);
  tree_.build(rates_);
}

double Simulator::total_rate() const {
  if (fast_path_) {
    const double na = static_cast<double>(active_.size());
    const double passive_rate = *params_.kernel->constant_value() * na / static_cast<double>(config_.size());
    return params_.recovery_rate * na + passive_rate * static_cast<double>(passive_.size());
  }
  return config_.active_count() == 0 ? 0.0 : tree_.total();
}

RateState Simulator::rate_state() const {
  if (!fast_path_) return RateState{intensity_, rates_, tree_.total()};
  RateState st;
  const std::size_t n = config_.size();
  const double c = *params_.kernel->constant_value();
  const double na = static_cast<double>(active_.size());
  st.intensity.resize(n);
  st.rates.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    const bool active = config_[x] == params_.threshold;
    st.intensity[x] = c * (active ? na - 1.0 : na) / static_cast<double>(n);
    st.rates[x] = active ? params_.recovery_rate : st.intensity[x];
  }
  st.total = total_rate();
  return st;
}

void Simulator::move_to_list(std::size_t site, bool active) {
  auto& from = active ? passive_ : active_;
  auto& to = active ? active_ : passive_;
  const std::size_t pos = position_[site];
  const std::size_t last = from.back();
  from[pos] = last;
  position_[last] = pos;
  from.pop_back();
  position_[site] = to.size();
  to.push_back(site);
}

void Simulator::on_activation_change(std::size_t site, double sign) {
  if (fast_path_) {
    move_to_list(site, sign > 0.0);
    return;
  }
  if (config_.active_count() == 0) {
    std::fill(intensity_.begin(), intensity_.end(), 0.0);
  } else {
    params_.kernel->add_column(site, sign, intensity_);
  }
  for (std::size_t x = 0; x < rates_.size(); ++x)
    rates_[x] = config_[x] == params_.threshold ? params_.recovery_rate : std::max(0.0, intensity_[x]);
  tree_.build(rates_);
}

std::size_t Simulator::select_site() {
  const double total = total_rate();
  const double target = rng_.uniform() * total;
  if (!fast_path_) return tree_.find(target);
  const double a_mass = params_.recovery_rate * static_cast<double>(active_.size());
  if (target < a_mass || passive_.empty()) {
    auto i = static_cast<std::size_t>(target / params_.recovery_rate);
    return active_[std::min(i, active_.size() - 1)];
  }
  const double passive_rate = (total - a_mass) / static_cast<double>(passive_.size());
  auto i = static_cast<std::size_t>((target - a_mass) / passive_rate);
  return passive_[std::min(i, passive_.size() - 1)];
}

void Simulator::fire(std::size_t site) {
  const int k = params_.threshold;
  const int before = config_[site];
  const int after = before == k ? 0 : before + 1;
  config_.set(site, after);
  ++events_;
  if (before == k) {
    on_activation_change(site, -1.0);
  } else if (after == k) {
    on_activation_change(site, +1.0);
  }
  if (events_ % options_.rebuild_interval == 0) recompute_from_scratch();
}

StepResult Simulator::step() {
  StepResult result;
  const double total = total_rate();
  if (absorbed() || !(total > 0.0)) {
    pending_.reset();
    result.absorbed = true;
    result.holding_time = std::numeric_limits<double>::infinity();
    return result;
  }
  if (!pending_) pending_ = time_ + rng_.exponential(total);
  result.holding_time = *pending_ - time_;
  time_ = *pending_;
  pending_.reset();
  const std::size_t site = select_site();
  fire(site);
  result.site = site;
  return result;
}

Snapshot Simulator::snapshot() const {
  Snapshot s;
  s.time = time_;
  s.counts = config_.counts();
  if (options_.mode == SnapshotMode::full) s.config = config_;
  return s;
}

std::vector<Snapshot> Simulator::simulate_until(std::span<const double> times) {
  double prev = time_;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || times[i] < prev || (i > 0 && times[i] <= times[i - 1]))
      throw std::invalid_argument("simulate_until: times must be strictly increasing and >= current time");
    prev = times[i];
  }
  std::vector<Snapshot> out;
  out.reserve(times.size());
  for (double t : times) {
    while (!absorbed()) {
      if (!pending_) {
        const double total = total_rate();
        if (!(total > 0.0)) break;
        pending_ = time_ + rng_.exponential(total);
      }
      if (*pending_ > t) break;
      step();
    }
    time_ = t;
    out.push_back(snapshot());
  }
  return out;
}

}  // namespace gcph
