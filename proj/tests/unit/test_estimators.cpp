#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "pspin_cw/estimators.hpp"
#include "pspin_cw/h_analysis.hpp"
#include "pspin_cw/model.hpp"
#include "pspin_cw/numeric.hpp"

using namespace pspin;

TEST_CASE("estimates solve the moment equations") {
  int checked = 0;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const double beta = 0.05 + 0.1 * i;
      const double h = -0.45 + 0.1 * j;
      const std::int64_t n = 300;
      const MagnetizationKernel kernel(4, n);
      const ModelParams params{beta, h, 4, n};
      const double m1 = moment(params, 1);
      const auto h_hat = mle_h(m1, beta, 4, n);
      REQUIRE(h_hat.finite());
      CHECK(std::abs(h_hat.estimate - h) < 1e-9);
      const double m4 = std::pow(m1, 4);
      const auto b_hat = mle_beta(m1, h, 4, n);
      if (b_hat.finite()) {
        CHECK(std::abs(kernel.moments(b_hat.estimate, h).mean_pow - m4) < 1e-9);
        ++checked;
      }
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("field estimate round trip at large N") {
  const MleSolver solver(4, 20000);
  for (const double h : {-0.3, 0.0, 0.1, 0.4}) {
    const double m = solver.kernel().moments(0.2, h).mean;
    const auto est = solver.h(m, 0.2);
    CHECK(std::abs(est.estimate - h) < 1e-9);
    CHECK(est.iterations < 20);
  }
  CHECK(solver.h(0.0, 0.3).estimate == 0.0);
}

TEST_CASE("existence trichotomy") {
  for (int p = 2; p <= 5; ++p) {
    for (int n = 2; n <= 14; ++n) {
      const MleSolver solver(p, n);
      const auto& support = solver.kernel().support();
      const auto& powers = solver.kernel().support_pow();
      const double pow_min = *std::min_element(powers.begin(), powers.end());
      const double pow_max = *std::max_element(powers.begin(), powers.end());
      for (const double s : support) {
        const auto eh = solver.h(s, 0.3);
        if (s <= -1.0) CHECK(eh.existence == Existence::MinusInfinity);
        else if (s >= 1.0) CHECK(eh.existence == Existence::PlusInfinity);
        else CHECK(eh.existence == Existence::Finite);

        const double sp = ipow(s, p);
        const auto eb = solver.beta(s, 0.1);
        if (sp <= pow_min) CHECK(eb.existence == Existence::MinusInfinity);
        else if (sp >= pow_max) CHECK(eb.existence == Existence::PlusInfinity);
        else CHECK(eb.existence == Existence::Finite);
      }
    }
  }
}

TEST_CASE("field intervals") {
  const ModelParams params{0.2, 0.1, 4, 20000};
  const double m = moment(params, 1);
  const auto ci = ci_h(m, 0.2, 4, 20000, 0.05);
  CHECK(ci.interval.regular_valid);
  CHECK(ci.interval.lower < 0.1);
  CHECK(ci.interval.upper > 0.1);
  CHECK(ci.interval.contains(0.1));
  const double d2 = h_derivatives(0.2, 0.0, 4, m, 2)[2];
  CHECK(ci.interval.upper - ci.interval.lower == doctest::Approx(2 * 1.959963984540054 * std::sqrt(-d2 / 20000)));
  CHECK(ci.interval.augmentation.empty());

  const auto crit = ci_h(0.5, 0.57, 4, 20000, 0.05);
  CHECK(crit.interval.augmentation.size() == 2);
  CHECK(crit.interval.contains(crit.interval.augmentation[0]));

  const auto degenerate = ci_h(m, 0.2, 4, 20000, 1.0);
  CHECK(degenerate.interval.lower == degenerate.interval.upper);
  CHECK_THROWS_AS(ci_h(m, 0.2, 4, 20000, 0.0), std::invalid_argument);

  const auto edge = ci_h(1.0, 0.2, 4, 100, 0.05);
  CHECK_FALSE(edge.interval.regular_valid);
  CHECK_FALSE(edge.interval.diagnostic.empty());
}

TEST_CASE("temperature intervals") {
  const ModelParams params{0.5, 0.2, 3, 10000};
  const double m = moment(params, 1);
  const auto ci = ci_beta(m, 0.2, 3, 10000, 0.05);
  CHECK(ci.estimate.finite());
  CHECK(ci.interval.regular_valid);
  CHECK(ci.interval.contains(0.5));
  CHECK(ci.interval.augmentation.size() == 1);
  CHECK_THROWS_AS(ci_beta(m, 0.0, 3, 10000, 0.05), std::invalid_argument);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(mle_h(1.5, 0.2, 4, 10), std::domain_error);
  CHECK(to_string(Existence::PlusInfinity) == "+inf");
}

TEST_CASE("field estimate is odd in sigma-bar for even p") {
  const MleSolver solver(4, 400);
  for (const double s : {0.05, 0.3, 0.71}) {
    CHECK(solver.h(-s, 0.6).estimate == doctest::Approx(-solver.h(s, 0.6).estimate).epsilon(1e-10));
  }
}

TEST_CASE("augmented interval contains the regular one and ignores sigma-bar") {
  const auto a = ci_h(0.3, 0.57, 4, 5000, 0.05);
  const auto b = ci_h(0.9, 0.57, 4, 5000, 0.05);
  CHECK(a.interval.augmentation == b.interval.augmentation);
  if (a.interval.regular_valid) {
    CHECK(a.interval.contains(a.interval.lower));
    CHECK(a.interval.contains(a.interval.upper));
  }
}
