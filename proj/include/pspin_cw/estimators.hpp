#pragma once

// Marginal maximum-likelihood estimation of h (beta known) and beta (h known)
// from a single observed average magnetization, plus the plug-in confidence
// intervals and their augmentation by the critical set.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pspin_cw/model.hpp"

namespace pspin {

enum class Existence { Finite, PlusInfinity, MinusInfinity };
std::string_view to_string(Existence e);

struct EstimateReport {
  double estimate = 0.0;  // +/- infinity for the sentinels
  Existence existence = Existence::Finite;
  double residual = 0.0;  // |moment equation| at a finite root
  int iterations = 0;

  [[nodiscard]] bool finite() const { return existence == Existence::Finite; }
};

/// Regular plug-in interval unioned with a finite set of critical-set
/// parameters. The regular part is absent (with a diagnostic) when the plug-in
/// variance is not positive or the estimate is infinite.
struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool regular_valid = false;
  std::vector<double> augmentation;
  double level = 0.95;
  std::string diagnostic;

  [[nodiscard]] bool regular_contains(double x) const;
  [[nodiscard]] bool contains(double x) const;
};

struct IntervalEstimate {
  EstimateReport estimate;
  ConfidenceInterval interval;
};

/// Reusable solver for one (p, N): the moment maps share a precomputed kernel.
class MleSolver {
 public:
  MleSolver(int p, std::int64_t n);

  [[nodiscard]] const MagnetizationKernel& kernel() const { return kernel_; }
  [[nodiscard]] int p() const { return kernel_.p(); }
  [[nodiscard]] std::int64_t n() const { return kernel_.n(); }

  /// Solves E_{beta,h}[sigma-bar] = sigma_bar for h.
  [[nodiscard]] EstimateReport h(double sigma_bar, double beta) const;
  /// Solves E_{beta,h}[sigma-bar^p] = sigma_bar^p for beta over the whole real line.
  [[nodiscard]] EstimateReport beta(double sigma_bar, double h) const;

  [[nodiscard]] IntervalEstimate ci_h(double sigma_bar, double beta, double alpha,
                                      const std::vector<double>& augmentation) const;
  [[nodiscard]] IntervalEstimate ci_beta(double sigma_bar, double h, double alpha,
                                         const std::vector<double>& augmentation) const;

 private:
  MagnetizationKernel kernel_;
  double pow_min_;
  double pow_max_;
};

EstimateReport mle_h(double sigma_bar, double beta, int p, std::int64_t n);
EstimateReport mle_beta(double sigma_bar, double h, int p, std::int64_t n);

/// Interval for h, augmented by every h with (beta, h) on the closed critical set.
IntervalEstimate ci_h(double sigma_bar, double beta, int p, std::int64_t n, double alpha);
/// Interval for beta, augmented by every beta with (beta, h) on the closed critical set; h != 0.
IntervalEstimate ci_beta(double sigma_bar, double h, int p, std::int64_t n, double alpha);

}  // namespace pspin
