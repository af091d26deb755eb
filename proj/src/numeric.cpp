#include "pspin_cw/numeric.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <math.h>  // lgamma_r

namespace pspin {

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -kInf;
  const double peak = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(peak)) return peak;
  double sum = 0.0;
  for (const double v : values) sum += std::exp(v - peak);
  return peak + std::log(sum);
}

double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (a == -kInf) return a;
  return a + std::log1p(std::exp(b - a));
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: argument must be positive");
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double q) {
  if (q < 0.0 || q > 1.0 || std::isnan(q)) throw std::domain_error("normal_quantile: q outside [0,1]");
  if (q == 0.0) return -kInf;
  if (q == 1.0) return kInf;
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * q);
}

RootResult solve_increasing(const std::function<std::pair<double, double>(double)>& value_and_slope,
                            double lo, double hi, double x_tol, double f_tol, int max_iterations) {
  if (!(lo < hi)) throw NumericalError("solve_increasing: empty bracket");
  RootResult out;
  double x = 0.5 * (lo + hi);
  double step_old = hi - lo;
  for (int it = 1; it <= max_iterations; ++it) {
    const auto [f, slope] = value_and_slope(x);
    out.root = x;
    out.residual = f;
    out.iterations = it;
    if (f == 0.0 || std::abs(f) <= f_tol) return out;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= x_tol * std::max(1.0, std::abs(x))) return out;

    // A correction below the tolerance means f sits at its rounding floor.
    if (slope > 0.0 && std::abs(f / slope) <= x_tol * std::max(1.0, std::abs(x))) return out;
    double next = x - f / slope;
    const bool newton_ok = std::isfinite(next) && slope > 0.0 && next > lo && next < hi &&
                           std::abs(2.0 * f) <= std::abs(step_old * slope);
    if (!newton_ok) next = 0.5 * (lo + hi);
    step_old = std::abs(next - x);
    if (next == x) return out;
    x = next;
  }
  return out;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double x_tol,
              int max_iterations) {
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo < 0.0) == (f_hi < 0.0)) throw NumericalError("bisect: no sign change in bracket");
  for (int it = 0; it < max_iterations && hi - lo > x_tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace pspin
