#include "pspin_cw/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pspin_cw/numeric.hpp"

namespace pspin {

MagnetizationSampler::MagnetizationSampler(const MagnetizationLaw& law) : support_(law.support) {
  const auto& lp = law.log_prob;
  if (lp.empty() || lp.size() != support_.size()) throw std::invalid_argument("sampler: malformed law");
  // Cumulative log-sums stay accurate even when individual atoms underflow.
  std::vector<double> cum(lp.size());
  double acc = -kInf;
  for (std::size_t k = 0; k < lp.size(); ++k) {
    acc = log_add_exp(acc, lp[k]);
    cum[k] = acc;
  }
  cdf_.resize(lp.size());
  for (std::size_t k = 0; k < lp.size(); ++k) cdf_[k] = std::exp(cum[k] - acc);
  cdf_.back() = 1.0;
}

std::size_t MagnetizationSampler::draw_index(RngStream& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

double sample_mean(const MagnetizationLaw& law, RngStream& rng) { return MagnetizationSampler(law).draw(rng); }

std::vector<int> sample_spins(const ModelParams& params, RngStream& rng, std::int64_t cap) {
  params.validate();
  if (params.n > cap) {
    throw std::invalid_argument("sample_spins: N = " + std::to_string(params.n) + " exceeds the cap of " +
                                std::to_string(cap));
  }
  const auto law = magnetization_law(params);
  const std::size_t k = MagnetizationSampler(law).draw_index(rng);
  const auto n = static_cast<std::size_t>(params.n);
  std::vector<int> spins(n, -1);
  std::fill(spins.begin(), spins.begin() + static_cast<std::ptrdiff_t>(k), 1);
  // Fisher-Yates with the stream's own uniform integers.
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(spins[i - 1], spins[j]);
  }
  return spins;
}

}  // namespace pspin
