#include "pspin_cw/limit_laws.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "pspin_cw/numeric.hpp"

namespace pspin {

namespace {

constexpr int kCells = 4096;
constexpr double kTailDrop = 40.0;  // relative log-density cut for the support window

struct Window {
  double shift;
  double lo;
  double hi;
};

// Mode-centred window outside which the quartic density is below e^-40 of its peak.
Window quartic_window(double c4, double drift) {
  const auto log_kernel = [&](double x) { return c4 * x * x * x * x + drift * x; };
  const double mode = std::cbrt(drift / (-4.0 * c4));
  const double shift = log_kernel(mode);
  const double unit = std::pow(-c4, -0.25);
  double hi = mode + unit;
  while (log_kernel(hi) - shift > -kTailDrop) hi += unit;
  double lo = mode - unit;
  while (log_kernel(lo) - shift > -kTailDrop) lo -= unit;
  if (drift == 0.0) lo = -hi;
  return {shift, lo, hi};
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double gk_integrate(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, 1e-14);
}

}  // namespace

std::string_view to_string(Scale s) {
  switch (s) {
    case Scale::None:
      return "none";
    case Scale::Quarter:
      return "quarter";
    case Scale::Sqrt:
      return "sqrt";
    case Scale::ThreeQuarters:
      return "three-quarters";
  }
  return "unknown";
}

Scale parse_scale(std::string_view name) {
  if (name == "none") return Scale::None;
  if (name == "quarter") return Scale::Quarter;
  if (name == "sqrt") return Scale::Sqrt;
  if (name == "three-quarters") return Scale::ThreeQuarters;
  throw std::invalid_argument("unknown scale '" + std::string(name) + "'");
}

double scale_factor(Scale s, std::int64_t n) {
  const double nd = static_cast<double>(n);
  switch (s) {
    case Scale::None:
      return 1.0;
    case Scale::Quarter:
      return std::pow(nd, 0.25);
    case Scale::Sqrt:
      return std::sqrt(nd);
    case Scale::ThreeQuarters:
      return std::pow(nd, 0.75);
  }
  return 1.0;
}

QuarticLaw::QuarticLaw(double h4, double drift) : c4_(h4 / 24.0), drift_(drift) {
  if (!(h4 < 0.0) || !std::isfinite(h4)) throw std::invalid_argument("quartic law needs a negative finite h4");
  if (!std::isfinite(drift)) throw std::invalid_argument("quartic law needs a finite drift");
  const Window w = quartic_window(c4_, drift_);
  shift_ = w.shift;
  lo_ = w.lo;
  hi_ = w.hi;
  step_ = (hi_ - lo_) / kCells;
  cum_.assign(kCells + 1, 0.0);
  for (int i = 0; i < kCells; ++i) {
    const double a = lo_ + i * step_;
    cum_[i + 1] = cum_[i] + cell_mass(a, a + step_);
  }
  const auto density = [this](double x) { return std::exp(log_kernel(x) - shift_); };
  const double z = gk_integrate(density, lo_, hi_);
  log_z_ = shift_ + std::log(z);
  if (drift_ != 0.0) {
    mean_ = gk_integrate([&](double x) { return x * density(x); }, lo_, hi_) / z;
  }
}

double QuarticLaw::cell_mass(double a, double b) const {
  return boost::math::quadrature::gauss<double, 20>::integrate(
      [this](double x) { return std::exp(log_kernel(x) - shift_); }, a, b);
}

double QuarticLaw::cumulative(double x) const {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return cum_.back();
  const auto i = std::min(static_cast<int>((x - lo_) / step_), kCells - 1);
  const double a = lo_ + i * step_;
  return cum_[i] + cell_mass(a, x);
}

double QuarticLaw::pdf(double x) const { return std::exp(log_kernel(x) - log_z_); }

double QuarticLaw::cdf(double x) const {
  if (std::isnan(x)) return x;
  if (drift_ == 0.0) {
    // Symmetric: measure from the centre so that cdf(0) = 1/2 exactly.
    const double half = cum_.back() - cum_[kCells / 2];
    const double r = std::min(1.0, (cumulative(std::abs(x)) - cum_[kCells / 2]) / half);
    return x >= 0.0 ? 0.5 + 0.5 * r : 0.5 - 0.5 * r;
  }
  return std::min(1.0, cumulative(x) / cum_.back());
}

double QuarticLaw::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("quantile: u must lie in [0,1]");
  if (u == 0.0) return lo_;
  if (u == 1.0) return hi_;
  const double target = u * cum_.back();
  auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
  const int i = std::clamp(static_cast<int>(it - cum_.begin()) - 1, 0, kCells - 1);
  const double a = lo_ + i * step_;
  const double b = a + step_;
  const double width = cum_[i + 1] - cum_[i];
  double x = width > 0.0 ? a + step_ * (target - cum_[i]) / width : a;
  for (int it_n = 0; it_n < 30; ++it_n) {
    const double f = cum_[i] + cell_mass(a, x) - target;
    const double d = std::exp(log_kernel(x) - shift_);
    if (!(d > 0.0)) break;
    const double next = std::clamp(x - f / d, a, b);
    if (std::abs(next - x) <= 1e-15 * (1.0 + std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

double quartic_mean(double h4, double drift) {
  if (!(h4 < 0.0)) throw std::invalid_argument("quartic law needs a negative h4");
  if (drift == 0.0) return 0.0;
  const double c4 = h4 / 24.0;
  const Window w = quartic_window(c4, drift);
  const auto density = [&](double x) { return std::exp(c4 * x * x * x * x + drift * x - w.shift); };
  const double z = gk_integrate(density, w.lo, w.hi);
  return gk_integrate([&](double x) { return x * density(x); }, w.lo, w.hi) / z;
}

LimitLaw LimitLaw::gaussian(double mean, double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance) || !std::isfinite(mean)) {
    throw std::invalid_argument("gaussian law needs finite mean and positive variance");
  }
  LimitLaw out;
  out.components_.push_back({1.0, Gaussian{mean, variance}});
  return out;
}

LimitLaw LimitLaw::half_normal(double variance, int sign) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw std::invalid_argument("half-normal law needs a positive variance");
  }
  if (sign != 1 && sign != -1) throw std::invalid_argument("half-normal sign must be +1 or -1");
  LimitLaw out;
  out.components_.push_back({1.0, HalfNormal{variance, sign}});
  return out;
}

LimitLaw LimitLaw::quartic(double h4, double drift) {
  LimitLaw out;
  out.components_.push_back({1.0, std::make_shared<const QuarticLaw>(h4, drift)});
  return out;
}

LimitLaw LimitLaw::point_mass(double location) {
  if (std::isnan(location)) throw std::invalid_argument("point mass location is NaN");
  LimitLaw out;
  out.components_.push_back({1.0, PointMass{location}});
  return out;
}

LimitLaw LimitLaw::mixture(const std::vector<std::pair<double, LimitLaw>>& parts) {
  LimitLaw out;
  double total = 0.0;
  for (const auto& [weight, law] : parts) {
    if (!(weight >= 0.0)) throw std::invalid_argument("mixture weights must be nonnegative");
    total += weight;
    if (weight == 0.0) continue;
    for (const auto& c : law.components_) out.components_.push_back({weight * c.weight, c.atom});
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("mixture weights sum to " + format_number(total) + ", not 1");
  }
  if (out.components_.empty()) throw std::invalid_argument("mixture has no components");
  return out;
}

namespace {

struct KindName {
  std::string operator()(const Gaussian&) const { return "gaussian"; }
  std::string operator()(const HalfNormal& a) const { return a.sign > 0 ? "half-normal+" : "half-normal-"; }
  std::string operator()(const std::shared_ptr<const QuarticLaw>&) const { return "quartic"; }
  std::string operator()(const PointMass&) const { return "point-mass"; }
};

struct AtomId {
  std::string operator()(const Gaussian& a) const {
    return "N(" + format_number(a.mean) + "," + format_number(a.variance) + ")";
  }
  std::string operator()(const HalfNormal& a) const {
    return std::string(a.sign > 0 ? "N+" : "N-") + "(0," + format_number(a.variance) + ")";
  }
  std::string operator()(const std::shared_ptr<const QuarticLaw>& a) const {
    return "F(h4=" + format_number(a->h4()) + ",drift=" + format_number(a->drift()) + ")";
  }
  std::string operator()(const PointMass& a) const { return "delta(" + format_number(a.location) + ")"; }
};

double atom_cdf(const Atom& atom, double x, bool left) {
  return std::visit(
      [&](const auto& a) -> double {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return normal_cdf((x - a.mean) / std::sqrt(a.variance));
        } else if constexpr (std::is_same_v<T, HalfNormal>) {
          const double z = x / std::sqrt(a.variance);
          if (a.sign > 0) return z <= 0.0 ? 0.0 : std::erf(z / std::numbers::sqrt2);
          return z >= 0.0 ? 1.0 : std::erfc(-z / std::numbers::sqrt2);
        } else if constexpr (std::is_same_v<T, PointMass>) {
          return left ? (a.location < x ? 1.0 : 0.0) : (a.location <= x ? 1.0 : 0.0);
        } else {
          return a->cdf(x);
        }
      },
      atom);
}

}  // namespace

std::string LimitLaw::kind() const {
  if (components_.size() != 1) return "mixture";
  return std::visit(KindName{}, components_.front().atom);
}

std::string LimitLaw::id() const {
  if (components_.size() == 1) return std::visit(AtomId{}, components_.front().atom);
  std::string out;
  for (const auto& c : components_) {
    if (!out.empty()) out += " + ";
    out += format_number(c.weight) + "*" + std::visit(AtomId{}, c.atom);
  }
  return out;
}

double LimitLaw::pdf(double x) const {
  double out = 0.0;
  for (const auto& c : components_) {
    out += c.weight * std::visit(
                          [&](const auto& a) -> double {
                            using T = std::decay_t<decltype(a)>;
                            if constexpr (std::is_same_v<T, Gaussian>) {
                              const double s = std::sqrt(a.variance);
                              const double z = (x - a.mean) / s;
                              return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
                            } else if constexpr (std::is_same_v<T, HalfNormal>) {
                              if (a.sign * x < 0.0) return 0.0;
                              const double s = std::sqrt(a.variance);
                              const double z = x / s;
                              return 2.0 * std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
                            } else if constexpr (std::is_same_v<T, PointMass>) {
                              return 0.0;
                            } else {
                              return a->pdf(x);
                            }
                          },
                          c.atom);
  }
  return out;
}

double LimitLaw::cdf(double x) const {
  if (x == kInf) return 1.0;
  double out = 0.0;
  for (const auto& c : components_) out += c.weight * atom_cdf(c.atom, x, false);
  return std::min(out, 1.0);
}

double LimitLaw::cdf_left(double x) const {
  if (x == -kInf) return 0.0;
  double out = 0.0;
  for (const auto& c : components_) out += c.weight * atom_cdf(c.atom, x, true);
  return std::min(out, 1.0);
}

std::vector<double> LimitLaw::atoms() const {
  std::vector<double> out;
  for (const auto& c : components_) {
    if (const auto* pm = std::get_if<PointMass>(&c.atom); pm && std::isfinite(pm->location)) {
      out.push_back(pm->location);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double LimitLaw::mass_at(double location) const {
  double out = 0.0;
  for (const auto& c : components_) {
    if (const auto* pm = std::get_if<PointMass>(&c.atom); pm && pm->location == location) out += c.weight;
  }
  return out;
}

double LimitLaw::mean() const {
  double out = 0.0;
  for (const auto& c : components_) {
    out += c.weight * std::visit(
                          [](const auto& a) -> double {
                            using T = std::decay_t<decltype(a)>;
                            if constexpr (std::is_same_v<T, Gaussian>) {
                              return a.mean;
                            } else if constexpr (std::is_same_v<T, HalfNormal>) {
                              return a.sign * std::sqrt(2.0 * a.variance / std::numbers::pi);
                            } else if constexpr (std::is_same_v<T, PointMass>) {
                              return a.location;
                            } else {
                              return a->mean();
                            }
                          },
                          c.atom);
  }
  return out;
}

double LimitLaw::sample(RngStream& rng) const {
  const double u = rng.uniform();
  const Component* chosen = &components_.back();
  double acc = 0.0;
  for (const auto& c : components_) {
    acc += c.weight;
    if (u < acc) {
      chosen = &c;
      break;
    }
  }
  return std::visit(
      [&](const auto& a) -> double {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return a.mean + std::sqrt(a.variance) * rng.normal();
        } else if constexpr (std::is_same_v<T, HalfNormal>) {
          return a.sign * std::abs(std::sqrt(a.variance) * rng.normal());
        } else if constexpr (std::is_same_v<T, PointMass>) {
          return a.location;
        } else {
          return a->quantile(rng.uniform_open());
        }
      },
      chosen->atom);
}

GLaw::GLaw(Which which, const HAnalysis& analysis) : which_(which) {
  if (analysis.classification != PointClass::Special) {
    throw std::invalid_argument("the G laws are defined at special points only, got " +
                                std::string(to_string(analysis.classification)));
  }
  const double m = analysis.maximizers.front();
  h4_ = analysis.fourth_derivs.front();
  slope_ = which == Which::Field ? 1.0 : analysis.p * ipow(m, analysis.p - 1);
  base_ = std::make_shared<const QuarticLaw>(h4_, 0.0);
  centering = which == Which::Field ? analysis.h : analysis.beta;
}

double GLaw::cdf(double t) const {
  if (t == -kInf) return 0.0;
  if (t == kInf) return 1.0;
  const double drift = slope_ * t;
  if (drift == 0.0) return 0.5;
  return base_->cdf(quartic_mean(h4_, drift));
}

std::string GLaw::id() const {
  return std::string(which_ == Which::Field ? "G1" : "G2") + "(h4=" + format_number(h4_) +
         ",slope=" + format_number(slope_) + ")";
}

double double_factorial(int n) {
  double out = 1.0;
  for (int k = n; k > 1; k -= 2) out *= k;
  return out;
}

double gamma_p(int p) {
  if (p < 2) throw std::invalid_argument("gamma_p: p must be at least 2");
  if (p % 2 == 1) return 0.5;
  const double c = std::pow(double_factorial(p - 1), 1.0 / p);
  return std::erf(c / std::numbers::sqrt2);
}

LimitLaw sigma_limit(const HAnalysis& a) {
  LimitLaw out;
  switch (a.classification) {
    case PointClass::Regular:
      out = LimitLaw::gaussian(0.0, -1.0 / a.second_derivs[0]);
      out.scale = Scale::Sqrt;
      out.centering = a.maximizers[0];
      return out;
    case PointClass::Special:
      out = LimitLaw::quartic(a.fourth_derivs[0], 0.0);
      out.scale = Scale::Quarter;
      out.centering = a.maximizers[0];
      return out;
    default: {
      std::vector<std::pair<double, LimitLaw>> parts;
      for (std::size_t k = 0; k < a.maximizers.size(); ++k) {
        parts.emplace_back(a.weights[k], LimitLaw::point_mass(a.maximizers[k]));
      }
      out = LimitLaw::mixture(parts);
      out.scale = Scale::None;
      out.centering = 0.0;
      return out;
    }
  }
}

namespace {

constexpr double kZeroMaximizer = 1e-9;

LimitLaw critical_half_normal_mix(double p1, double v1, int sign1, double v2, int sign2) {
  return LimitLaw::mixture({{p1 / 2.0, LimitLaw::half_normal(v1, sign1)},
                            {(1.0 - p1) / 2.0, LimitLaw::half_normal(v2, sign2)},
                            {0.5, LimitLaw::point_mass(0.0)}});
}

}  // namespace

LimitLaw h_mle_limit(const HAnalysis& a) {
  LimitLaw out;
  switch (a.classification) {
    case PointClass::Special:
      throw std::invalid_argument("h_mle_limit: special points converge at rate N^{3/4} to G1; use GLaw");
    case PointClass::Regular:
      out = LimitLaw::gaussian(0.0, -a.second_derivs[0]);
      break;
    case PointClass::WeaklyCritical:
      if (a.p % 2 == 0 && a.h == 0.0) {
        out = LimitLaw::mixture({{0.5, LimitLaw::gaussian(0.0, -a.second_derivs[1])},
                                 {0.5, LimitLaw::point_mass(0.0)}});
      } else {
        out = critical_half_normal_mix(a.weights[0], -a.second_derivs[0], -1, -a.second_derivs[1], 1);
      }
      break;
    case PointClass::StronglyCritical:
      out = LimitLaw::mixture({{a.weights[0], LimitLaw::gaussian(0.0, -a.second_derivs[0])},
                               {1.0 - a.weights[0], LimitLaw::point_mass(0.0)}});
      break;
  }
  out.scale = Scale::Sqrt;
  out.centering = a.h;
  return out;
}

LimitLaw beta_mle_limit(const HAnalysis& a) {
  const int p = a.p;
  const auto ratio = [&](std::size_t k) {
    const double m = a.maximizers[k];
    return -a.second_derivs[k] / (static_cast<double>(p) * p * ipow(m, 2 * p - 2));
  };
  LimitLaw out;
  switch (a.classification) {
    case PointClass::Special:
      throw std::invalid_argument("beta_mle_limit: special points converge at rate N^{3/4} to G2; use GLaw");
    case PointClass::Regular:
      if (std::abs(a.maximizers[0]) <= kZeroMaximizer) {
        const double bt = beta_tilde(p);
        if (p % 2 == 1) {
          out = LimitLaw::mixture({{0.5, LimitLaw::point_mass(bt)}, {0.5, LimitLaw::point_mass(-bt)}});
        } else {
          const double g = gamma_p(p);
          out = LimitLaw::mixture({{g, LimitLaw::point_mass(-kInf)}, {1.0 - g, LimitLaw::point_mass(bt)}});
        }
        out.scale = Scale::None;
        out.centering = 0.0;
        return out;
      }
      out = LimitLaw::gaussian(0.0, ratio(0));
      break;
    case PointClass::WeaklyCritical: {
      const double p1 = a.weights[0];
      if (p % 2 == 1) {
        if (std::abs(a.maximizers[0]) <= kZeroMaximizer) {
          out = LimitLaw::mixture({{p1 / 2.0, LimitLaw::point_mass(-kInf)},
                                   {(1.0 - p1) / 2.0, LimitLaw::half_normal(ratio(1), 1)},
                                   {0.5, LimitLaw::point_mass(0.0)}});
        } else {
          out = critical_half_normal_mix(p1, ratio(0), -1, ratio(1), 1);
        }
      } else if (a.h > 0.0) {
        out = critical_half_normal_mix(p1, ratio(0), -1, ratio(1), 1);
      } else if (a.h < 0.0) {
        out = critical_half_normal_mix(p1, ratio(0), 1, ratio(1), -1);
      } else {
        out = LimitLaw::gaussian(0.0, ratio(1));
      }
      break;
    }
    case PointClass::StronglyCritical: {
      const double p1 = a.weights[0];
      const double p2 = a.weights[1];
      const double g = gamma_p(p);
      out = LimitLaw::mixture({{p2 * g, LimitLaw::point_mass(-kInf)},
                               {p1, LimitLaw::half_normal(ratio(2), 1)},
                               {1.0 - p1 - p2 * g, LimitLaw::point_mass(0.0)}});
      break;
    }
  }
  out.scale = Scale::Sqrt;
  out.centering = a.beta;
  return out;
}

}  // namespace pspin
