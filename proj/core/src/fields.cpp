#include "gcph/fields.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gcph {

namespace {

std::vector<int> parse_modes(std::string_view text) {
  std::vector<int> modes;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto token = text.substr(0, comma);
    int m = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), m);
    if (ec != std::errc() || ptr != token.data() + token.size())
      throw std::invalid_argument("test function: bad mode list");
    modes.push_back(m);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (modes.empty()) throw std::invalid_argument("test function: empty mode list");
  return modes;
}

std::string mode_name(std::string_view prefix, const std::vector<int>& modes) {
  std::string name(prefix);
  if (modes.size() == 1) return name + std::to_string(modes[0]);
  name += ':';
  for (std::size_t j = 0; j < modes.size(); ++j) name += (j ? "," : "") + std::to_string(modes[j]);
  return name;
}

}  // namespace

TestFunction TestFunction::one() { return TestFunction(Kind::one, "one"); }

TestFunction TestFunction::cosine(std::vector<int> modes) {
  if (modes.empty()) throw std::invalid_argument("test function: empty mode list");
  TestFunction f(Kind::cosine, mode_name("cos", modes));
  f.modes_ = std::move(modes);
  return f;
}

TestFunction TestFunction::sine(std::vector<int> modes) {
  if (modes.empty()) throw std::invalid_argument("test function: empty mode list");
  TestFunction f(Kind::sine, mode_name("sin", modes));
  f.modes_ = std::move(modes);
  return f;
}

TestFunction TestFunction::bump(double radius) {
  if (!(radius > 0.0 && radius <= 0.5)) throw std::invalid_argument("test function: bump radius must be in (0, 1/2]");
  TestFunction f(Kind::bump, "bump");
  f.radius_ = radius;
  return f;
}

TestFunction TestFunction::tabulated(std::string name, TorusLattice lattice, std::vector<double> values) {
  if (values.size() != lattice.size()) throw std::invalid_argument("test function: table size != lattice size");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("test function: non-finite table entry");
  TestFunction f(Kind::tabulated, std::move(name));
  f.table_ = std::move(values);
  f.table_lattice_ = lattice;
  return f;
}

TestFunction TestFunction::parse(std::string_view name) {
  if (name == "one") return one();
  if (name == "bump") return bump();
  for (const auto& [prefix, is_cos] : {std::pair{std::string_view("cos"), true}, std::pair{std::string_view("sin"), false}}) {
    if (name.substr(0, 3) != prefix) continue;
    auto rest = name.substr(3);
    if (!rest.empty() && rest.front() == ':') rest.remove_prefix(1);
    auto modes = parse_modes(rest);
    return is_cos ? cosine(std::move(modes)) : sine(std::move(modes));
  }
  throw std::invalid_argument("unknown test function '" + std::string(name) + "'");
}

double TestFunction::operator()(std::span<const double> point) const {
  switch (kind_) {
    case Kind::one:
      return 1.0;
    case Kind::cosine:
    case Kind::sine: {
      double phase = 0.0;
      for (std::size_t j = 0; j < modes_.size() && j < point.size(); ++j) phase += modes_[j] * point[j];
      phase *= 2.0 * std::numbers::pi;
      return kind_ == Kind::cosine ? std::cos(phase) : std::sin(phase);
    }
    case Kind::bump: {
      double r2 = 0.0;
      for (double xj : point) {
        double dx = xj - 0.5;
        dx -= std::round(dx);
        r2 += dx * dx;
      }
      const double s = r2 / (radius_ * radius_);
      return s < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s)) : 0.0;
    }
    case Kind::tabulated:
      break;
  }
  throw std::logic_error("tabulated test function has no closed form");
}

std::vector<double> TestFunction::values(const TorusLattice& lattice) const {
  if (kind_ == Kind::tabulated) {
    if (!(lattice == table_lattice_)) throw std::invalid_argument("tabulated test function: lattice mismatch");
    return table_;
  }
  std::vector<double> out(lattice.size());
  for (std::size_t x = 0; x < lattice.size(); ++x) out[x] = (*this)(lattice.point(x));
  return out;
}

double TestFunction::sup_norm() const {
  if (kind_ != Kind::tabulated) return 1.0;
  double m = 0.0;
  for (double v : table_) m = std::max(m, std::abs(v));
  return m;
}

double TestFunction::l2n_squared(const TorusLattice& lattice) const {
  double s = 0.0;
  for (double v : values(lattice)) s += v * v;
  return s * lattice.site_weight();
}

CenteredField::CenteredField(TorusLattice lattice, int threshold, std::vector<double> values)
    : lattice_(lattice), threshold_(threshold), values_(std::move(values)) {
  if (values_.size() != lattice_.size() * static_cast<std::size_t>(threshold_ + 1))
    throw std::invalid_argument("CenteredField: size mismatch");
}

CenteredField centered_field(const SpinConfig& sigma, const DensityField& u) {
  if (!(sigma.lattice() == u.lattice()) || sigma.threshold() != u.threshold())
    throw std::invalid_argument("centered_field: configuration and density shapes differ");
  const int states = u.states();
  std::vector<double> w(u.values().begin(), u.values().end());
  for (std::size_t x = 0; x < sigma.size(); ++x) {
    for (int i = 0; i < states; ++i) {
      auto& v = w[x * static_cast<std::size_t>(states) + static_cast<std::size_t>(i)];
      v = (sigma[x] == i ? 1.0 : 0.0) - v;
    }
  }
  return CenteredField(u.lattice(), u.threshold(), std::move(w));
}

namespace {

double weighted_sum(const CenteredField& w, std::span<const double> f, int i) {
  if (f.size() != w.sites()) throw std::invalid_argument("test function values do not match the lattice");
  if (i < 0 || i > w.threshold()) throw std::invalid_argument("state index out of range");
  double s = 0.0;
  for (std::size_t x = 0; x < w.sites(); ++x) s += w(x, i) * f[x];
  return s;
}

}  // namespace

double lln_error(const CenteredField& w, std::span<const double> f_values, int i) {
  return weighted_sum(w, f_values, i) * w.lattice().site_weight();
}

double lln_error(const CenteredField& w, const TestFunction& f, int i) {
  return lln_error(w, f.values(w.lattice()), i);
}

double fluctuation(const CenteredField& w, std::span<const double> f_values, int i) {
  return weighted_sum(w, f_values, i) / std::sqrt(static_cast<double>(w.sites()));
}

double fluctuation(const CenteredField& w, const TestFunction& f, int i) {
  return fluctuation(w, f.values(w.lattice()), i);
}

double carre_du_champ(const SpinConfig& sigma, const ModelParams& p, std::span<const double> f_values, int i, int j) {
  if (f_values.size() != sigma.size()) throw std::invalid_argument("test function values do not match the lattice");
  const int states = p.threshold + 1;
  if (i < 0 || i >= states || j < 0 || j >= states) throw std::invalid_argument("state index out of range");
  const auto rates = site_rates(sigma, p);
  const int im = (i + states - 1) % states;
  const int jm = (j + states - 1) % states;
  double s = 0.0;
  for (std::size_t x = 0; x < sigma.size(); ++x) {
    const int sx = sigma[x];
    const double di = (sx == im ? 1.0 : 0.0) - (sx == i ? 1.0 : 0.0);
    const double dj = (sx == jm ? 1.0 : 0.0) - (sx == j ? 1.0 : 0.0);
    s += rates[x] * di * dj * f_values[x] * f_values[x];
  }
  return s * sigma.lattice().site_weight();
}

double carre_du_champ(const SpinConfig& sigma, const ModelParams& p, const TestFunction& f, int i, int j) {
  return carre_du_champ(sigma, p, f.values(sigma.lattice()), i, j);
}

}  // namespace gcph
