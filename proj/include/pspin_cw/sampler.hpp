#pragma once

// Exact draws from the p-spin Curie-Weiss measure. The Hamiltonian depends on
// a configuration only through its average, so a draw of the average by
// inverse CDF over the N+1 atoms followed by a uniformly random placement of
// the +1 spins is an exact draw of the whole configuration.

#include <cstdint>
#include <vector>

#include "pspin_cw/model.hpp"
#include "pspin_cw/rng.hpp"

namespace pspin {

/// Cumulative table of a magnetization law, built once; draws are O(log N).
class MagnetizationSampler {
 public:
  explicit MagnetizationSampler(const MagnetizationLaw& law);

  /// Index k of the drawn atom m_k.
  std::size_t draw_index(RngStream& rng) const;
  double draw(RngStream& rng) const { return support_[draw_index(rng)]; }

  [[nodiscard]] const std::vector<double>& support() const { return support_; }
  [[nodiscard]] const std::vector<double>& cdf() const { return cdf_; }

 private:
  std::vector<double> support_;
  std::vector<double> cdf_;
};

double sample_mean(const MagnetizationLaw& law, RngStream& rng);

inline constexpr std::int64_t kDefaultSpinCap = 1'000'000;

/// Spin vector of +1/-1 entries whose average is an exact draw of sigma-bar.
std::vector<int> sample_spins(const ModelParams& params, RngStream& rng, std::int64_t cap = kDefaultSpinCap);

}  // namespace pspin
