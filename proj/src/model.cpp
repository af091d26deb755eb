#include "pspin_cw/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "pspin_cw/h_analysis.hpp"
#include "pspin_cw/numeric.hpp"

namespace pspin {

void ModelParams::validate() const {
  if (!std::isfinite(beta) || !std::isfinite(h)) throw std::invalid_argument("beta and h must be finite");
  if (beta < 0.0) throw std::invalid_argument("beta must be nonnegative, got " + std::to_string(beta));
  if (p < 2) throw std::invalid_argument("p must be at least 2, got " + std::to_string(p));
  if (n < 1) throw std::invalid_argument("N must be at least 1, got " + std::to_string(n));
}

std::vector<double> MagnetizationLaw::probabilities() const {
  std::vector<double> out(log_prob.size());
  for (std::size_t k = 0; k < log_prob.size(); ++k) out[k] = std::exp(log_prob[k]);
  return out;
}

double log_binomial(double n, double k) {
  if (!(n >= 0.0) || !(k >= 0.0) || k > n) {
    throw std::domain_error("log_binomial: need 0 <= k <= n");
  }
  // Parenthesised so that (n, k) and (n, n-k) round identically.
  return log_gamma(n + 1.0) - (log_gamma(k + 1.0) + log_gamma(n - k + 1.0));
}

double mirrored_sum(const std::vector<double>& terms) {
  const std::size_t size = terms.size();
  if (size == 0) return 0.0;
  double sum = 0.0;
  std::size_t lo = 0;
  std::size_t hi = size - 1;
  for (; lo < hi; ++lo, --hi) sum += terms[lo] + terms[hi];
  if (lo == hi) sum += terms[lo];
  return sum;
}

MagnetizationKernel::MagnetizationKernel(int p, std::int64_t n) : p_(p), n_(n) {
  if (p < 2) throw std::invalid_argument("p must be at least 2");
  if (n < 1) throw std::invalid_argument("N must be at least 1");
  const auto size = static_cast<std::size_t>(n + 1);
  support_.resize(size);
  power_.resize(size);
  log_base_.resize(size);
  const double nd = static_cast<double>(n);
  const double log_2n = nd * std::numbers::ln2;
  for (std::size_t k = 0; k < size; ++k) {
    const auto kk = static_cast<std::int64_t>(k);
    const double m = static_cast<double>(2 * kk - n) / nd;
    support_[k] = m;
    power_[k] = ipow(m, p);
    log_base_[k] = log_binomial(nd, static_cast<double>(kk)) - log_2n;
  }
}

std::vector<double> MagnetizationKernel::log_weights(double beta, double h) const {
  const double nd = static_cast<double>(n_);
  std::vector<double> out(support_.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = log_base_[k] + nd * (beta * power_[k] + h * support_[k]);
  }
  return out;
}

namespace {

// Z_N(0, 0, p) = 1 exactly; the binomial sum only reproduces it to rounding.
double normalizer(const std::vector<double>& log_w, double beta, double h) {
  if (beta == 0.0 && h == 0.0) return 0.0;
  return log_sum_exp(log_w);
}

}  // namespace

double MagnetizationKernel::log_partition(double beta, double h) const {
  return normalizer(log_weights(beta, h), beta, h);
}

MagnetizationLaw MagnetizationKernel::law(double beta, double h) const {
  MagnetizationLaw out;
  out.support = support_;
  out.log_prob = log_weights(beta, h);
  out.log_partition = normalizer(out.log_prob, beta, h);
  for (double& v : out.log_prob) v -= out.log_partition;
  return out;
}

MagnetizationKernel::Moments MagnetizationKernel::moments(double beta, double h) const {
  auto w = log_weights(beta, h);
  Moments out;
  const std::size_t size = w.size();
  if (beta == 0.0 && h == 0.0) {
    out.log_partition = 0.0;
    for (double& v : w) v = std::exp(v);
  } else {
    // One pass of exponentials serves both the normalizer and the weights.
    const double peak = *std::max_element(w.begin(), w.end());
    for (double& v : w) v = v - peak < -746.0 ? 0.0 : std::exp(v - peak);
    const double total = mirrored_sum(w);
    out.log_partition = peak + std::log(total);
    for (double& v : w) v /= total;
  }
  std::vector<double> t1(size), tp(size);
  for (std::size_t k = 0; k < size; ++k) {
    t1[k] = w[k] * support_[k];
    tp[k] = w[k] * power_[k];
  }
  out.mean = mirrored_sum(t1);
  out.mean_pow = mirrored_sum(tp);
  // Central second moments, accumulated around the means to avoid cancellation.
  double v1 = 0.0;
  double vp = 0.0;
  for (std::size_t k = 0; k < size; ++k) {
    const double d1 = support_[k] - out.mean;
    const double dp = power_[k] - out.mean_pow;
    v1 += w[k] * d1 * d1;
    vp += w[k] * dp * dp;
  }
  out.var = v1;
  out.var_pow = vp;
  return out;
}

double MagnetizationKernel::moment(double beta, double h, int order) const {
  if (order < 1) throw std::invalid_argument("moment order must be >= 1");
  auto w = log_weights(beta, h);
  const double lz = normalizer(w, beta, h);
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::exp(w[k] - lz) * ipow(support_[k], order);
  return mirrored_sum(w);
}

MagnetizationLaw magnetization_law(const ModelParams& params) {
  params.validate();
  return MagnetizationKernel(params.p, params.n).law(params.beta, params.h);
}

double log_partition(const ModelParams& params) {
  params.validate();
  return MagnetizationKernel(params.p, params.n).log_partition(params.beta, params.h);
}

double moment(const ModelParams& params, int order) {
  params.validate();
  return MagnetizationKernel(params.p, params.n).moment(params.beta, params.h, order);
}

double log_partition_expansion(const ModelParams& params, const HAnalysis& analysis) {
  params.validate();
  if (analysis.classification != PointClass::Regular) {
    throw std::domain_error("log_partition_expansion requires a regular point");
  }
  const double m = analysis.maximizers.front();
  const double h2 = analysis.second_derivs.front();
  return static_cast<double>(params.n) * analysis.values.front() - 0.5 * std::log((m * m - 1.0) * h2);
}

}  // namespace pspin
