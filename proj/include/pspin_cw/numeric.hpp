#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace pspin {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised when a numerical routine cannot deliver a trustworthy answer
/// (bracketing failure, unstable root count, non-convergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Log-space helpers.
double log_sum_exp(std::span<const double> values);
double log_add_exp(double a, double b);

/// Natural log of Gamma(x) for x > 0. Reentrant (does not touch signgam).
double log_gamma(double x);

double normal_cdf(double x);
/// Standard normal quantile z_q, q in [0, 1]; returns -inf/+inf at the ends.
double normal_quantile(double q);

/// Integer power by repeated squaring; exact sign handling for negative x.
inline double ipow(double x, int n) {
  double result = 1.0;
  double base = x;
  unsigned e = static_cast<unsigned>(n < 0 ? -n : n);
  while (e != 0U) {
    if ((e & 1U) != 0U) result *= base;
    base *= base;
    e >>= 1U;
  }
  return n < 0 ? 1.0 / result : result;
}

struct RootResult {
  double root = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Safeguarded Newton iteration inside a sign-change bracket [lo, hi] of an
/// increasing function. `value_and_slope` returns (f(x), f'(x)); a slope that
/// is not finite or non-positive forces a bisection step. Stops when the
/// bracket is narrower than `x_tol` (relative to max(1,|x|)) or |f| <= f_tol.
RootResult solve_increasing(const std::function<std::pair<double, double>(double)>& value_and_slope,
                            double lo, double hi, double x_tol = 1e-15, double f_tol = 0.0,
                            int max_iterations = 400);

/// Plain bisection of a continuous function with f(lo) and f(hi) of opposite
/// signs. Returns the bracket midpoint once it is narrower than `x_tol`.
double bisect(const std::function<double(double)>& f, double lo, double hi, double x_tol,
              int max_iterations = 300);

}  // namespace pspin
