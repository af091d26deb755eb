#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "pspin_cw/h_analysis.hpp"
#include "pspin_cw/model.hpp"
#include "pspin_cw/numeric.hpp"

using namespace pspin;

TEST_CASE("law and partition function match 2^N enumeration") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> beta_dist(0.0, 1.5);
  std::uniform_real_distribution<double> h_dist(-1.0, 1.0);
  for (int p = 2; p <= 5; ++p) {
    for (int n = 2; n <= 10; n += 4) {
      for (int trial = 0; trial < 3; ++trial) {
        const double beta = beta_dist(gen);
        const double h = h_dist(gen);
        const auto ref = oracle::enumerate(beta, h, p, n);
        const ModelParams params{beta, h, p, n};
        const auto law = magnetization_law(params);
        const auto probs = law.probabilities();
        REQUIRE(probs.size() == static_cast<std::size_t>(n + 1));
        for (int k = 0; k <= n; ++k) CHECK(probs[k] == doctest::Approx(ref.probs[k]).epsilon(1e-12));
        CHECK(std::abs(log_partition(params) - ref.log_partition) < 1e-10);
        double m1 = 0.0;
        for (int k = 0; k <= n; ++k) m1 += ref.probs[k] * (2.0 * k - n) / n;
        CHECK(std::abs(moment(params, 1) - m1) < 1e-12);
      }
    }
  }
}

TEST_CASE("support is the grid -1 + 2k/N") {
  const auto law = magnetization_law({0.3, 0.1, 3, 6});
  REQUIRE(law.support.size() == 7);
  for (int k = 0; k <= 6; ++k) CHECK(law.support[k] == doctest::Approx(-1.0 + 2.0 * k / 6));
}

TEST_CASE("probabilities sum to one at large N") {
  for (const std::int64_t n : {1000, 100000}) {
    const auto probs = magnetization_law({0.57, 0.12159, 4, n}).probabilities();
    double total = 0.0;
    for (const double q : probs) total += q;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("zero parameters give the symmetric binomial law") {
  const auto law = magnetization_law({0.0, 0.0, 4, 10});
  CHECK(law.log_partition == doctest::Approx(0.0));
  CHECK(moment({0.0, 0.0, 4, 10}, 1) == doctest::Approx(0.0));
  CHECK(moment({0.0, 0.0, 4, 10}, 2) == doctest::Approx(0.1));
}

TEST_CASE("odd field flips the sign of the mean") {
  const double plus = moment({0.4, 0.2, 4, 50}, 1);
  const double minus = moment({0.4, -0.2, 4, 50}, 1);
  CHECK(plus == doctest::Approx(-minus).epsilon(1e-13));
}

TEST_CASE("kernel moments agree with the law") {
  const MagnetizationKernel kernel(3, 40);
  const auto mom = kernel.moments(0.5, 0.2);
  const auto law = kernel.law(0.5, 0.2);
  const auto probs = law.probabilities();
  double mean = 0.0, mean_pow = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    mean += probs[k] * law.support[k];
    mean_pow += probs[k] * std::pow(law.support[k], 3);
  }
  CHECK(mom.mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(mom.mean_pow == doctest::Approx(mean_pow).epsilon(1e-12));
  CHECK(mom.log_partition == doctest::Approx(law.log_partition).epsilon(1e-13));
  CHECK(mom.var > 0.0);
  CHECK(mom.var_pow > 0.0);
}

TEST_CASE("log-partition derivative in h is N times the mean") {
  const std::int64_t n = 200;
  const double e = 1e-6;
  const double d = (log_partition({0.4, 0.1 + e, 4, n}) - log_partition({0.4, 0.1 - e, 4, n})) / (2 * e);
  CHECK(d == doctest::Approx(n * moment({0.4, 0.1, 4, n}, 1)).epsilon(1e-6));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(ModelParams({-0.1, 0.0, 4, 10}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(ModelParams({0.1, 0.0, 1, 10}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(ModelParams({0.1, 0.0, 4, 0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(ModelParams({NAN, 0.0, 4, 10}).validate(), std::invalid_argument);
}

TEST_CASE("numeric helpers") {
  CHECK(log_gamma(5.0) == doctest::Approx(std::log(24.0)));
  CHECK(log_gamma(0.25) == doctest::Approx(std::lgamma(0.25)));
  CHECK(log_binomial(10, 3) == doctest::Approx(std::log(120.0)));
  const std::vector<double> v{-1000.0, -1000.0};
  CHECK(log_sum_exp(v) == doctest::Approx(-1000.0 + std::log(2.0)));
  CHECK(log_add_exp(-INFINITY, 1.0) == 1.0);
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054));
  CHECK(std::isinf(normal_quantile(0.0)));
  CHECK(ipow(-2.0, 3) == -8.0);
  const double r = bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-14);
  CHECK(r == doctest::Approx(std::sqrt(2.0)));
  const auto root = solve_increasing([](double x) { return std::pair{std::exp(x) - 3.0, std::exp(x)}; }, -5, 5);
  CHECK(root.root == doctest::Approx(std::log(3.0)).epsilon(1e-15));
}

TEST_CASE("moments are strictly increasing in beta and h") {
  for (const int p : {3, 4}) {
    for (const double h : {-0.3, 0.0, 0.2}) {
      double previous = -INFINITY;
      for (double beta = 0.0; beta <= 1.5; beta += 0.1) {
        const double u = moment({beta, h, p, 60}, p);
        CHECK(u > previous);
        previous = u;
      }
    }
    for (const double beta : {0.0, 0.5, 1.0}) {
      double previous = -INFINITY;
      for (double h = -1.0; h <= 1.0; h += 0.1) {
        const double u = moment({beta, h, p, 60}, 1);
        CHECK(u > previous);
        previous = u;
      }
    }
  }
}

TEST_CASE("even p symmetry") {
  for (const double beta : {0.2, 0.7, 1.2}) {
    CHECK(std::abs(moment({beta, 0.0, 4, 101}, 1)) <= 1e-14);
    CHECK(std::abs(moment({beta, 0.0, 4, 100}, 3)) <= 1e-14);
    CHECK(log_partition({beta, 0.3, 4, 80}) == doctest::Approx(log_partition({beta, -0.3, 4, 80})).epsilon(1e-14));
    CHECK(log_partition({beta, 0.0, 4, 80}) >= 0.0);
  }
  double previous = -INFINITY;
  for (double beta = 0.0; beta <= 1.5; beta += 0.1) {
    const double f = log_partition({beta, 0.0, 4, 200});
    CHECK(f >= previous);
    previous = f;
  }
}

TEST_CASE("saddle-point expansion approaches the exact log-partition function") {
  const auto a = analyze(0.2, 0.1, 4);
  double previous = INFINITY;
  for (const std::int64_t n : {100, 1000, 10000}) {
    const ModelParams params{0.2, 0.1, 4, n};
    const double gap = std::abs(log_partition(params) - log_partition_expansion(params, a));
    CHECK(gap < previous);
    previous = gap;
  }
  CHECK(log_partition_expansion({0.0, 0.0, 3, 50}, analyze(0.0, 0.0, 3)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(log_partition_expansion({0.688, 0.0, 4, 50}, analyze(beta_tilde(4), 0.0, 4)), std::domain_error);
}
