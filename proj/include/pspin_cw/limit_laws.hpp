#pragma once

// Limiting distributions of the average magnetization and of the two
// marginal maximum-likelihood estimates. A LimitLaw is a finite mixture of
// Gaussians, half-normals, quartic-exponential laws and point masses (which
// may sit at +/- infinity), tagged with the scaling and centering under which
// the finite-N statistic converges to it.

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "pspin_cw/h_analysis.hpp"
#include "pspin_cw/rng.hpp"

namespace pspin {

/// Rate applied to (statistic - centering).
enum class Scale { None, Quarter, Sqrt, ThreeQuarters };

std::string_view to_string(Scale s);
Scale parse_scale(std::string_view name);
/// N^0, N^{1/4}, N^{1/2} or N^{3/4}.
double scale_factor(Scale s, std::int64_t n);

/// Law with density proportional to exp(c4 x^4 + drift x), c4 = h4 / 24 < 0.
/// The CDF is tabulated once on a cell grid covering all but e^-40 of the
/// relative mass; inside a cell it is completed by Gauss-Legendre quadrature.
class QuarticLaw {
 public:
  QuarticLaw(double h4, double drift);

  [[nodiscard]] double h4() const { return 24.0 * c4_; }
  [[nodiscard]] double c4() const { return c4_; }
  [[nodiscard]] double drift() const { return drift_; }
  /// log of the integral of exp(c4 x^4 + drift x) over the real line.
  [[nodiscard]] double log_normalizer() const { return log_z_; }
  [[nodiscard]] double pdf(double x) const;
  [[nodiscard]] double cdf(double x) const;
  [[nodiscard]] double mean() const { return mean_; }
  [[nodiscard]] double quantile(double u) const;
  [[nodiscard]] double lower() const { return lo_; }
  [[nodiscard]] double upper() const { return hi_; }

 private:
  [[nodiscard]] double log_kernel(double x) const { return c4_ * x * x * x * x + drift_ * x; }
  [[nodiscard]] double cell_mass(double a, double b) const;
  [[nodiscard]] double cumulative(double x) const;  // unnormalized, shifted

  double c4_;
  double drift_;
  double shift_ = 0.0;  // max of log_kernel, subtracted before exponentiating
  double lo_ = 0.0;
  double hi_ = 0.0;
  double step_ = 0.0;
  std::vector<double> cum_;
  double log_z_ = 0.0;
  double mean_ = 0.0;
};

/// Mean of the quartic law, by adaptive Gauss-Kronrod quadrature.
double quartic_mean(double h4, double drift);

struct Gaussian {
  double mean = 0.0;
  double variance = 1.0;
};

/// Law of sign * |Z| with Z ~ N(0, variance).
struct HalfNormal {
  double variance = 1.0;
  int sign = 1;
};

struct PointMass {
  double location = 0.0;  // may be +/- infinity
};

using Atom = std::variant<Gaussian, HalfNormal, std::shared_ptr<const QuarticLaw>, PointMass>;

struct Component {
  double weight = 1.0;
  Atom atom;
};

class LimitLaw {
 public:
  static LimitLaw gaussian(double mean, double variance);
  static LimitLaw half_normal(double variance, int sign);
  static LimitLaw quartic(double h4, double drift);
  static LimitLaw point_mass(double location);
  /// Flattens nested mixtures and drops zero-weight components; weights
  /// must be nonnegative and sum to 1 within 1e-12.
  static LimitLaw mixture(const std::vector<std::pair<double, LimitLaw>>& parts);

  [[nodiscard]] const std::vector<Component>& components() const { return components_; }
  /// gaussian, half-normal+, half-normal-, quartic, point-mass or mixture.
  [[nodiscard]] std::string kind() const;
  /// Short human-readable identifier of the whole law.
  [[nodiscard]] std::string id() const;

  /// Density of the absolutely continuous part.
  [[nodiscard]] double pdf(double x) const;
  /// P(X <= x); point masses at -infinity count fully at every finite x.
  [[nodiscard]] double cdf(double x) const;
  /// P(X < x).
  [[nodiscard]] double cdf_left(double x) const;
  /// Finite point-mass locations, increasing.
  [[nodiscard]] std::vector<double> atoms() const;
  /// Total weight of point masses at -infinity and +infinity.
  [[nodiscard]] double mass_at(double location) const;
  /// Mean; +/- infinity (or NaN) when point masses sit at infinity.
  [[nodiscard]] double mean() const;
  double sample(RngStream& rng) const;

  Scale scale = Scale::None;
  double centering = 0.0;

 private:
  std::vector<Component> components_;
};

/// The distribution function t -> G(t) = F_{0,0}(mean F_{drift(t)}) where
/// drift(t) = t for the field estimate and t p m*^{p-1} for the inverse
/// temperature estimate.
class GLaw {
 public:
  enum class Which { Field = 1, Temperature = 2 };
  GLaw(Which which, const HAnalysis& analysis);

  [[nodiscard]] Which which() const { return which_; }
  [[nodiscard]] double cdf(double t) const;
  [[nodiscard]] double cdf_left(double t) const { return cdf(t); }
  [[nodiscard]] std::vector<double> atoms() const { return {}; }
  [[nodiscard]] std::string id() const;
  /// drift per unit t.
  [[nodiscard]] double slope() const { return slope_; }

  Scale scale = Scale::ThreeQuarters;
  double centering = 0.0;

 private:
  Which which_;
  double h4_;
  double slope_;
  std::shared_ptr<const QuarticLaw> base_;
};

/// P(Z^p <= E Z^p) for standard normal Z.
double gamma_p(int p);
/// (n)!! as a double.
double double_factorial(int n);

/// Limit of sigma-bar: Gaussian for sqrt(N)(sigma-bar - m*) at regular points,
/// sum_k p_k delta_{m_k} for sigma-bar itself at critical points, quartic for
/// N^{1/4}(sigma-bar - m*) at special points.
LimitLaw sigma_limit(const HAnalysis& analysis);

/// Limit of the field estimate with the inverse temperature known. Rejects
/// special points (use GLaw).
LimitLaw h_mle_limit(const HAnalysis& analysis);

/// Limit of the inverse temperature estimate with the field known. Rejects
/// special points (use GLaw).
LimitLaw beta_mle_limit(const HAnalysis& analysis);

}  // namespace pspin
