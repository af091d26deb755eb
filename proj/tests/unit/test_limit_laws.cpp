#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "pspin_cw/h_analysis.hpp"
#include "pspin_cw/limit_laws.hpp"
#include "pspin_cw/rng.hpp"

using namespace pspin;

TEST_CASE("quartic law normalizer and moments") {
  // integral of exp(-x^4) over the real line is Gamma(1/4) / 2
  const QuarticLaw base(-24.0, 0.0);
  CHECK(std::exp(base.log_normalizer()) == doctest::Approx(std::tgamma(0.25) / 2).epsilon(1e-12));
  CHECK(base.cdf(0.0) == 0.5);
  CHECK(base.mean() == doctest::Approx(0.0));
  CHECK(base.cdf(base.upper()) == doctest::Approx(1.0));
  CHECK(base.cdf(base.lower()) == doctest::Approx(0.0));

  for (const double drift : {-1.5, 0.3, 2.0}) {
    const QuarticLaw law(-5.0, drift);
    CHECK(law.mean() == doctest::Approx(oracle::quartic_mean(-5.0, drift)).epsilon(1e-9));
    CHECK(quartic_mean(-5.0, drift) == doctest::Approx(law.mean()).epsilon(1e-12));
    double previous = -1.0;
    for (double x = law.lower(); x <= law.upper(); x += (law.upper() - law.lower()) / 97) {
      const double c = law.cdf(x);
      CHECK(c >= previous);
      previous = c;
    }
    for (const double u : {0.01, 0.3, 0.5, 0.9}) CHECK(law.cdf(law.quantile(u)) == doctest::Approx(u).epsilon(1e-10));
    // density integrates to the cdf increment
    const double a = law.quantile(0.2), b = law.quantile(0.7);
    const double mass = oracle::trapezoid([&](double x) { return law.pdf(x); }, a, b, 20000);
    CHECK(mass == doctest::Approx(0.5).epsilon(1e-7));
  }
}

TEST_CASE("gamma_p") {
  CHECK(gamma_p(3) == 0.5);
  CHECK(gamma_p(4) == doctest::Approx(2 * 0.5 * std::erfc(-std::pow(3.0, 0.25) / std::sqrt(2.0)) - 1).epsilon(1e-14));
  CHECK(gamma_p(4) == doctest::Approx(0.8118507977).epsilon(1e-9));
  CHECK(double_factorial(5) == 15.0);
  CHECK(double_factorial(6) == 48.0);
}

TEST_CASE("mixtures") {
  const auto law = LimitLaw::mixture({{0.25, LimitLaw::half_normal(2.0, -1)},
                                      {0.25, LimitLaw::half_normal(1.0, 1)},
                                      {0.5, LimitLaw::point_mass(0.0)}});
  CHECK(law.cdf(0.0) == doctest::Approx(0.75));
  CHECK(law.cdf_left(0.0) == doctest::Approx(0.25));
  CHECK(law.atoms() == std::vector<double>{0.0});
  CHECK(law.cdf(-1e9) == doctest::Approx(0.0));
  CHECK(law.cdf(1e9) == doctest::Approx(1.0));
  CHECK_THROWS_AS(LimitLaw::mixture({{0.3, LimitLaw::gaussian(0, 1)}}), std::invalid_argument);

  const auto escape = LimitLaw::mixture({{0.4, LimitLaw::point_mass(-INFINITY)}, {0.6, LimitLaw::point_mass(1.0)}});
  CHECK(escape.cdf(-1e300) == doctest::Approx(0.4));
  CHECK(escape.mass_at(-INFINITY) == doctest::Approx(0.4));
  CHECK(escape.atoms() == std::vector<double>{1.0});
}

TEST_CASE("sampling reproduces the cdf") {
  const auto law = LimitLaw::mixture({{0.3, LimitLaw::gaussian(1.0, 4.0)}, {0.7, LimitLaw::quartic(-24.0, 0.5)}});
  RngStream rng(11, 0);
  const int count = 40000;
  int below = 0;
  for (int i = 0; i < count; ++i) below += law.sample(rng) <= 0.5 ? 1 : 0;
  CHECK(std::abs(static_cast<double>(below) / count - law.cdf(0.5)) < 4 * std::sqrt(0.25 / count));
}

TEST_CASE("sigma limits") {
  const auto regular = analyze(0.2, 0.1, 4);
  const auto law = sigma_limit(regular);
  CHECK(law.scale == Scale::Sqrt);
  CHECK(law.centering == regular.maximizers[0]);
  CHECK(law.cdf(0.0) == doctest::Approx(0.5));
  CHECK(law.cdf(std::sqrt(-1.0 / regular.second_derivs[0])) == doctest::Approx(0.8413447460685429));

  const auto [b, h] = special_point(4);
  const auto special = sigma_limit(analyze(b, h, 4));
  CHECK(special.scale == Scale::Quarter);
  CHECK(special.kind() == "quartic");

  const auto strong = sigma_limit(analyze(beta_tilde(4), 0.0, 4));
  CHECK(strong.scale == Scale::None);
  CHECK(strong.atoms().size() == 3);
}

TEST_CASE("field estimate limits") {
  const auto regular = analyze(0.2, 0.1, 4);
  const auto law = h_mle_limit(regular);
  CHECK(law.scale == Scale::Sqrt);
  CHECK(law.cdf(std::sqrt(-regular.second_derivs[0])) == doctest::Approx(0.8413447460685429));

  const auto weak = analyze(0.57, *critical_curve(4, 0.57), 4);
  const auto mixed = h_mle_limit(weak);
  CHECK(mixed.cdf(0.0) - mixed.cdf_left(0.0) == doctest::Approx(0.5));
  CHECK(mixed.cdf_left(0.0) == doctest::Approx(weak.weights[0] / 2));

  const auto strong = analyze(beta_tilde(4), 0.0, 4);
  const auto law3 = h_mle_limit(strong);
  CHECK(law3.cdf(0.0) - law3.cdf_left(0.0) == doctest::Approx(1.0 - strong.weights[0]));
  const auto [b, h] = special_point(4);
  CHECK_THROWS_AS(h_mle_limit(analyze(b, h, 4)), std::invalid_argument);
}

TEST_CASE("temperature estimate limits") {
  const auto zero = analyze(0.3, 0.0, 4);
  const auto law = beta_mle_limit(zero);
  CHECK(law.mass_at(-INFINITY) == doctest::Approx(gamma_p(4)));
  CHECK(law.atoms() == std::vector<double>{beta_tilde(4)});

  const auto odd_zero = beta_mle_limit(analyze(0.3, 0.0, 3));
  CHECK(odd_zero.atoms().size() == 2);
  CHECK(odd_zero.cdf(0.0) == doctest::Approx(0.5));

  const auto strong = analyze(beta_tilde(4), 0.0, 4);
  const auto law3 = beta_mle_limit(strong);
  CHECK(law3.mass_at(-INFINITY) == doctest::Approx(strong.weights[1] * gamma_p(4)));
  CHECK(law3.cdf(1e9) == doctest::Approx(1.0));

  const auto regular = analyze(0.2, 0.1, 4);
  const double m = regular.maximizers[0];
  const auto gauss = beta_mle_limit(regular);
  const double sd = std::sqrt(-regular.second_derivs[0] / (16 * std::pow(m, 6)));
  CHECK(gauss.cdf(sd) == doctest::Approx(0.8413447460685429));
}

TEST_CASE("G laws at the special point") {
  const auto [b, h] = special_point(4);
  const auto a = analyze(b, h, 4);
  const GLaw g1(GLaw::Which::Field, a);
  CHECK(g1.cdf(0.0) == 0.5);
  CHECK(g1.cdf(1.0) + g1.cdf(-1.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(g1.cdf(-50.0) < 1e-6);
  CHECK(g1.cdf(50.0) > 1 - 1e-6);
  double previous = 0.0;
  for (double t = -5; t <= 5; t += 0.25) {
    const double c = g1.cdf(t);
    CHECK(c >= previous);
    previous = c;
  }
  // direct evaluation: G(t) = F00(mean of the law with drift t)
  const QuarticLaw base(a.fourth_derivs[0], 0.0);
  CHECK(g1.cdf(0.7) == doctest::Approx(base.cdf(oracle::quartic_mean(a.fourth_derivs[0], 0.7))).epsilon(1e-8));

  const GLaw g2(GLaw::Which::Temperature, a);
  CHECK(g2.slope() == doctest::Approx(4 * std::pow(a.maximizers[0], 3)));
  CHECK(g2.scale == Scale::ThreeQuarters);
}

TEST_CASE("scales") {
  CHECK(scale_factor(Scale::Sqrt, 10000) == doctest::Approx(100.0));
  CHECK(scale_factor(Scale::Quarter, 10000) == doctest::Approx(10.0));
  CHECK(scale_factor(Scale::ThreeQuarters, 10000) == doctest::Approx(1000.0));
  CHECK(scale_factor(Scale::None, 10000) == 1.0);
  CHECK(parse_scale(to_string(Scale::ThreeQuarters)) == Scale::ThreeQuarters);
  CHECK_THROWS(parse_scale("cubic"));
}
