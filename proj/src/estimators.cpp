#include "pspin_cw/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pspin_cw/h_analysis.hpp"
#include "pspin_cw/numeric.hpp"

namespace pspin {

namespace {

constexpr int kMaxDoublings = 60;
constexpr double kResidualLimit = 1e-10;

void check_sigma_bar(double sigma_bar) {
  if (!(std::abs(sigma_bar) <= 1.0)) throw std::domain_error("sigma-bar must lie in [-1, 1]");
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
}

EstimateReport sentinel(Existence e) {
  EstimateReport out;
  out.existence = e;
  out.estimate = e == Existence::PlusInfinity ? kInf : -kInf;
  return out;
}

// Root of an increasing map f (value, slope) starting from [lo, hi], with
// doubling expansion; a bracket that never closes means the target is not
// attained numerically and the matching sentinel is returned.
EstimateReport solve_moment_equation(const std::function<std::pair<double, double>(double)>& f, double lo,
                                     double hi) {
  int doublings = 0;
  while (f(lo).first > 0.0) {
    hi = lo;
    lo *= 2.0;
    if (++doublings > kMaxDoublings) return sentinel(Existence::MinusInfinity);
  }
  doublings = 0;
  while (f(hi).first < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > kMaxDoublings) return sentinel(Existence::PlusInfinity);
  }
  const auto root = solve_increasing(f, lo, hi, 1e-14);
  EstimateReport out;
  out.estimate = root.root;
  out.residual = std::abs(root.residual);
  out.iterations = root.iterations;
  if (!(out.residual < kResidualLimit)) {
    throw NumericalError("moment equation residual " + std::to_string(out.residual) + " exceeds tolerance");
  }
  return out;
}

}  // namespace

std::string_view to_string(Existence e) {
  switch (e) {
    case Existence::Finite:
      return "finite";
    case Existence::PlusInfinity:
      return "+inf";
    case Existence::MinusInfinity:
      return "-inf";
  }
  return "unknown";
}

bool ConfidenceInterval::regular_contains(double x) const { return regular_valid && lower <= x && x <= upper; }

bool ConfidenceInterval::contains(double x) const {
  if (regular_contains(x)) return true;
  return std::any_of(augmentation.begin(), augmentation.end(),
                     [x](double a) { return std::abs(a - x) <= 1e-9 * std::max(1.0, std::abs(x)); });
}

MleSolver::MleSolver(int p, std::int64_t n) : kernel_(p, n) {
  const auto& pw = kernel_.support_pow();
  pow_min_ = *std::min_element(pw.begin(), pw.end());
  pow_max_ = *std::max_element(pw.begin(), pw.end());
}

EstimateReport MleSolver::h(double sigma_bar, double beta) const {
  check_sigma_bar(sigma_bar);
  if (sigma_bar <= -1.0) return sentinel(Existence::MinusInfinity);
  if (sigma_bar >= 1.0) return sentinel(Existence::PlusInfinity);
  const double nd = static_cast<double>(kernel_.n());
  const auto f = [&](double h) {
    const auto m = kernel_.moments(beta, h);
    return std::pair{m.mean - sigma_bar, nd * m.var};
  };
  return solve_moment_equation(f, -1.0, 1.0);
}

EstimateReport MleSolver::beta(double sigma_bar, double h) const {
  check_sigma_bar(sigma_bar);
  // The statistic sigma-bar^p ranges over [pow_min, pow_max] on the support;
  // the moment map sweeps exactly the open interval as beta runs over R.
  const double target = ipow(sigma_bar, kernel_.p());
  if (target <= pow_min_) return sentinel(Existence::MinusInfinity);
  if (target >= pow_max_) return sentinel(Existence::PlusInfinity);
  const double nd = static_cast<double>(kernel_.n());
  const auto f = [&](double beta) {
    const auto m = kernel_.moments(beta, h);
    return std::pair{m.mean_pow - target, nd * m.var_pow};
  };
  return solve_moment_equation(f, -1.0, 4.0);
}

IntervalEstimate MleSolver::ci_h(double sigma_bar, double beta, double alpha,
                                 const std::vector<double>& augmentation) const {
  check_alpha(alpha);
  IntervalEstimate out;
  out.estimate = h(sigma_bar, beta);
  out.interval.level = 1.0 - alpha;
  out.interval.augmentation = augmentation;
  if (!out.estimate.finite()) {
    out.interval.diagnostic = "estimate is infinite; no regular interval";
    return out;
  }
  const double d2 = h_derivatives(beta, 0.0, p(), sigma_bar, 2)[2];
  if (!(d2 < 0.0)) {
    out.interval.diagnostic = "plug-in H''(sigma-bar) = " + std::to_string(d2) + " is not negative";
    return out;
  }
  const double half = normal_quantile(1.0 - alpha / 2.0) * std::sqrt(-d2 / static_cast<double>(n()));
  out.interval.lower = out.estimate.estimate - half;
  out.interval.upper = out.estimate.estimate + half;
  out.interval.regular_valid = true;
  return out;
}

IntervalEstimate MleSolver::ci_beta(double sigma_bar, double h_known, double alpha,
                                    const std::vector<double>& augmentation) const {
  check_alpha(alpha);
  if (h_known == 0.0) throw std::invalid_argument("ci_beta requires h != 0");
  if (sigma_bar == 0.0) throw std::invalid_argument("ci_beta requires sigma-bar != 0");
  IntervalEstimate out;
  out.estimate = beta(sigma_bar, h_known);
  out.interval.level = 1.0 - alpha;
  out.interval.augmentation = augmentation;
  if (!out.estimate.finite()) {
    out.interval.diagnostic = "estimate is infinite; no regular interval";
    return out;
  }
  const double d2 = h_derivatives(out.estimate.estimate, h_known, p(), sigma_bar, 2)[2];
  if (!(d2 < 0.0)) {
    out.interval.diagnostic = "plug-in H''(sigma-bar) = " + std::to_string(d2) + " is not negative";
    return out;
  }
  const double pd = p();
  const double half = normal_quantile(1.0 - alpha / 2.0) * std::pow(std::abs(sigma_bar), 1.0 - pd) / pd *
                      std::sqrt(-d2 / static_cast<double>(n()));
  out.interval.lower = out.estimate.estimate - half;
  out.interval.upper = out.estimate.estimate + half;
  out.interval.regular_valid = true;
  return out;
}

EstimateReport mle_h(double sigma_bar, double beta, int p, std::int64_t n) {
  return MleSolver(p, n).h(sigma_bar, beta);
}

EstimateReport mle_beta(double sigma_bar, double h, int p, std::int64_t n) {
  return MleSolver(p, n).beta(sigma_bar, h);
}

IntervalEstimate ci_h(double sigma_bar, double beta, int p, std::int64_t n, double alpha) {
  return MleSolver(p, n).ci_h(sigma_bar, beta, alpha, critical_fields(p, beta));
}

IntervalEstimate ci_beta(double sigma_bar, double h, int p, std::int64_t n, double alpha) {
  if (h == 0.0) throw std::invalid_argument("ci_beta requires h != 0");
  return MleSolver(p, n).ci_beta(sigma_bar, h, alpha, critical_betas(p, h));
}

}  // namespace pspin
