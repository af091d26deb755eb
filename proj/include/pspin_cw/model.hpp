#pragma once

// Exact finite-N computations for the p-spin Curie-Weiss model. Every
// quantity is a sum over the N+1 attainable values of the average
// magnetization; the binomial weight absorbs the configuration count.

#include <cstdint>
#include <vector>

namespace pspin {

struct HAnalysis;

struct ModelParams {
  double beta = 0.0;
  double h = 0.0;
  int p = 2;
  std::int64_t n = 1;

  /// Throws std::invalid_argument unless beta >= 0, beta/h finite, p >= 2, n >= 1.
  void validate() const;
};

/// Law of the average magnetization on the grid m_k = -1 + 2k/N.
struct MagnetizationLaw {
  std::vector<double> support;
  std::vector<double> log_prob;
  double log_partition = 0.0;

  [[nodiscard]] std::int64_t n() const { return static_cast<std::int64_t>(support.size()) - 1; }
  [[nodiscard]] std::vector<double> probabilities() const;
};

/// log C(n, k) through log-gamma; n, k may be non-integer.
double log_binomial(double n, double k);

/// Precomputed per-(p, N) tables so that the law, log-partition function and
/// the first two moments of sigma-bar and sigma-bar^p can be re-evaluated at
/// many (beta, h) in O(N) each. Immutable after construction.
class MagnetizationKernel {
 public:
  MagnetizationKernel(int p, std::int64_t n);

  struct Moments {
    double log_partition = 0.0;
    double mean = 0.0;       // E[sigma-bar]
    double var = 0.0;        // Var[sigma-bar]
    double mean_pow = 0.0;   // E[sigma-bar^p]
    double var_pow = 0.0;    // Var[sigma-bar^p]
  };

  [[nodiscard]] int p() const { return p_; }
  [[nodiscard]] std::int64_t n() const { return n_; }
  [[nodiscard]] const std::vector<double>& support() const { return support_; }
  [[nodiscard]] const std::vector<double>& support_pow() const { return power_; }

  [[nodiscard]] std::vector<double> log_weights(double beta, double h) const;
  [[nodiscard]] MagnetizationLaw law(double beta, double h) const;
  [[nodiscard]] double log_partition(double beta, double h) const;
  [[nodiscard]] Moments moments(double beta, double h) const;
  /// E[sigma-bar^order].
  [[nodiscard]] double moment(double beta, double h, int order) const;

 private:
  int p_;
  std::int64_t n_;
  std::vector<double> support_;
  std::vector<double> power_;
  std::vector<double> log_base_;  // log C(N,k) - N log 2
};

MagnetizationLaw magnetization_law(const ModelParams& params);
double log_partition(const ModelParams& params);
/// u_{N,order} = E[sigma-bar^order].
double moment(const ModelParams& params, int order);

/// Two-term saddle-point expansion N H(m*) - 1/2 log[(m*^2 - 1) H''(m*)] of
/// the log-partition function. Diagnostic only; requires a regular point.
double log_partition_expansion(const ModelParams& params, const HAnalysis& analysis);

/// Sum of values[k] * weight[k] where the pairs (k, N-k) are added first, so
/// that antisymmetric summands cancel exactly.
double mirrored_sum(const std::vector<double>& terms);

}  // namespace pspin
