#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numeric>
#include <set>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "oracles.hpp"
#include "pspin_cw/model.hpp"
#include "pspin_cw/rng.hpp"
#include "pspin_cw/sampler.hpp"

using namespace pspin;

TEST_CASE("streams are reproducible and distinct") {
  RngStream a(5, 3), b(5, 3), c(5, 4), d(6, 3);
  const auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
  CHECK(x != d.next_u64());
}

TEST_CASE("uniform variates") {
  RngStream rng(1, 0);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK_UNARY(u >= 0.0 && u < 1.0);
    const double v = rng.uniform_open();
    CHECK_UNARY(v > 0.0 && v < 1.0);
    sum += u;
  }
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 7000; ++i) {
    const auto k = rng.below(7);
    CHECK(k < 7);
    seen.insert(k);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("sampled magnetization follows the exact law") {
  const auto law = magnetization_law({0.57, 0.12159, 4, 30});
  const auto probs = law.probabilities();
  const MagnetizationSampler sampler(law);
  RngStream rng(2, 0);
  const int count = 200000;
  std::vector<int> hits(probs.size(), 0);
  for (int i = 0; i < count; ++i) ++hits[sampler.draw_index(rng)];
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double sd = std::sqrt(probs[k] * (1 - probs[k]) / count);
    CHECK(std::abs(static_cast<double>(hits[k]) / count - probs[k]) <= 5 * sd + 1e-12);
  }
}

TEST_CASE("spin vectors have the drawn magnetization") {
  RngStream rng(3, 1);
  const ModelParams params{0.2, 0.1, 4, 1000};
  for (int i = 0; i < 20; ++i) {
    const auto spins = sample_spins(params, rng);
    REQUIRE(spins.size() == 1000);
    for (const int s : spins) CHECK_UNARY(s == 1 || s == -1);
  }
  RngStream r1(9, 0), r2(9, 0);
  CHECK(sample_spins(params, r1) == sample_spins(params, r2));
  CHECK_THROWS_AS(sample_spins({0.2, 0.1, 4, 100}, rng, 10), std::invalid_argument);
}

TEST_CASE("spin configurations follow the Gibbs measure") {
  // chi-square test of all 2^12 configuration frequencies against the exact
  // Gibbs weights computed by enumeration
  const int n = 12;
  const auto ref = oracle::enumerate(0.5, 0.2, 3, n);
  const ModelParams params{0.5, 0.2, 3, n};
  const int draws = 200000;
  std::vector<int> counts(1U << n, 0);
  std::vector<int> first(2, 0), last(2, 0);
  RngStream rng(17, 0);
  for (int i = 0; i < draws; ++i) {
    const auto spins = sample_spins(params, rng);
    std::uint32_t code = 0;
    for (int j = 0; j < n; ++j) code |= (spins[j] > 0 ? 1U : 0U) << j;
    ++counts[code];
    ++first[spins.front() > 0];
    ++last[spins.back() > 0];
  }
  double chi2 = 0.0;
  for (std::uint32_t s = 0; s < counts.size(); ++s) {
    const int up = __builtin_popcount(s);
    const double binom = std::exp(std::lgamma(n + 1.0) - std::lgamma(up + 1.0) - std::lgamma(n - up + 1.0));
    const double expected = draws * ref.probs[up] / binom;
    chi2 += (counts[s] - expected) * (counts[s] - expected) / expected;
  }
  const boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  CHECK(boost::math::cdf(boost::math::complement(dist, chi2)) > 0.001);
  // exchangeability of the first and last coordinates
  const double p1 = static_cast<double>(first[1]) / draws;
  const double pn = static_cast<double>(last[1]) / draws;
  CHECK(std::abs(p1 - pn) <= 3 * std::sqrt(2 * p1 * (1 - p1) / draws));
}

TEST_CASE("degenerate and symmetric laws") {
  const auto law = magnetization_law({0.5, 30.0, 2, 10});
  RngStream rng(4, 0);
  CHECK(sample_mean(law, rng) == 1.0);
  const auto fair = magnetization_law({0.0, 0.0, 2, 10000});
  const MagnetizationSampler sampler(fair);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) sum += sampler.draw(rng);
  CHECK(std::abs(sum / 100000) <= 3 * 4 / std::sqrt(1e5 * 1e4));
}
