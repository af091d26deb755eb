#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pspin_cw/experiments.hpp"

using namespace pspin;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("pspin_cw_unit_" + name)).string();
}

}  // namespace

TEST_CASE("KS distance against continuous and atomic laws") {
  const auto normal = LimitLaw::gaussian(0.0, 1.0);
  CHECK(ks_distance(std::vector<double>{0.0}, normal) == doctest::Approx(0.5));
  const auto atom = LimitLaw::point_mass(0.0);
  CHECK(ks_distance(std::vector<double>{0.0, 0.0}, atom) == 0.0);
  CHECK(ks_distance(std::vector<double>{1.0}, atom) == doctest::Approx(1.0));
  const DiscreteLaw half{{-INFINITY, 0.0}, {0.5, 0.5}};
  const auto law = LimitLaw::mixture({{0.5, LimitLaw::point_mass(-INFINITY)}, {0.5, LimitLaw::point_mass(0.0)}});
  CHECK(ks_distance(half, law) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("parallel_for covers every index and propagates errors") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (const int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}

TEST_CASE("format_double") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(INFINITY) == "inf");
  CHECK(format_double(-INFINITY) == "-inf");
  CHECK(format_double(NAN) == "nan");
  CHECK(csv_header("histogram", "p=4").rfind("# pspin-cw v0.1.0 histogram", 0) == 0);
}

TEST_CASE("exact law of the scaled magnetization converges to the Gaussian limit") {
  double previous = 1.0;
  for (const std::int64_t n : {500, 5000}) {
    const ModelParams params{0.2, 0.1, 4, n};
    const auto a = analyze(0.2, 0.1, 4);
    const auto target = sigma_limit(a);
    const StatisticMap map(params, Statistic::SigmaScaled, Scale::Sqrt, target.centering);
    const auto exact = exact_statistic_law(magnetization_law(params), map, 1);
    const double ks = ks_distance(exact, target);
    CHECK(ks < previous);
    previous = ks;
  }
  CHECK(previous < 0.02);
}

TEST_CASE("histogram output is identical across worker counts") {
  ExperimentSpec spec;
  spec.params = {0.2, 0.1, 4, 2000};
  spec.replications = 3000;
  spec.statistic = Statistic::HMle;
  spec.seed = 42;
  spec.exact = false;
  spec.output_path = temp_path("h1.csv");
  spec.threads = 1;
  const auto one = run_histogram(spec);
  spec.output_path = temp_path("h3.csv");
  spec.threads = 3;
  const auto three = run_histogram(spec);
  CHECK(one.values == three.values);
  const auto a = slurp(temp_path("h1.csv"));
  CHECK(a == slurp(temp_path("h3.csv")));
  CHECK(a.rfind("# pspin-cw v0.1.0 histogram", 0) == 0);
  CHECK(one.report.ks_statistic < 0.05);
  CHECK(one.report.n_effective == 3000);
}

TEST_CASE("sampled and exact KS agree within Monte Carlo error") {
  ExperimentSpec spec;
  spec.params = {0.2, 0.1, 4, 5000};
  spec.replications = 20000;
  spec.seed = 5;
  const auto result = run_histogram(spec);
  REQUIRE(result.report.exact_ks.has_value());
  CHECK(std::abs(result.report.ks_statistic - *result.report.exact_ks) < 3 * 0.886 / std::sqrt(20000.0));
}

TEST_CASE("scale must match the limit theorem") {
  ExperimentSpec spec;
  spec.params = {0.2, 0.1, 4, 1000};
  spec.replications = 10;
  spec.scale = Scale::ThreeQuarters;
  CHECK_THROWS_AS(run_histogram(spec), std::invalid_argument);
  spec.replications = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("coverage summary") {
  ExperimentSpec spec;
  spec.params = {0.2, 0.1, 4, 2000};
  spec.replications = 2000;
  spec.statistic = Statistic::HMle;
  spec.output_path = temp_path("cov.csv");
  const auto cov = run_coverage(spec, 0.05);
  CHECK(cov.coverage > 0.92);
  CHECK(cov.standard_error == doctest::Approx(std::sqrt(cov.coverage * (1 - cov.coverage) / 2000)));
  CHECK(cov.exact_coverage == doctest::Approx(0.95).epsilon(0.02));
  CHECK(slurp(spec.output_path).find("# summary") != std::string::npos);

  spec.output_path.clear();
  const auto none = run_coverage(spec, 1.0);
  CHECK(none.coverage == 0.0);

  spec.statistic = Statistic::SigmaScaled;
  CHECK_THROWS_AS(run_coverage(spec, 0.05), std::invalid_argument);
}

TEST_CASE("phase diagram layers") {
  const auto rows4 = phase_diagram(4, 0.0, 1.2, -0.6, 0.6, 13, 13, 1, 60);
  int special = 0, strong = 0, curve = 0, grid = 0;
  std::vector<std::pair<double, double>> upper_arm;
  for (const auto& r : rows4) {
    if (r.layer == "special") ++special;
    if (r.layer == "strongly-critical") {
      ++strong;
      CHECK(r.beta == doctest::Approx(beta_tilde(4)));
      CHECK(r.h == 0.0);
    }
    if (r.layer == "grid") ++grid;
    if (r.layer == "curve") {
      ++curve;
      if (r.h > 0.0) upper_arm.emplace_back(r.beta, r.h);
    }
  }
  CHECK(grid == 169);
  CHECK(special == 2);
  CHECK(strong == 1);
  CHECK(curve > 0);
  // distance from the printed critical point to the traced polyline
  std::sort(upper_arm.begin(), upper_arm.end());
  double closest = INFINITY;
  for (std::size_t i = 1; i < upper_arm.size(); ++i) {
    const auto [x0, y0] = upper_arm[i - 1];
    const auto [x1, y1] = upper_arm[i];
    const double t = std::clamp(((0.57 - x0) * (x1 - x0) + (0.12159 - y0) * (y1 - y0)) /
                                    ((x1 - x0) * (x1 - x0) + (y1 - y0) * (y1 - y0)),
                                0.0, 1.0);
    closest = std::min(closest, std::hypot(x0 + t * (x1 - x0) - 0.57, y0 + t * (y1 - y0) - 0.12159));
  }
  CHECK(closest < 1e-3);
  CHECK(upper_arm.front().first == doctest::Approx(1.0 / 3.0));
  CHECK(upper_arm.front().second == doctest::Approx(special_point(4).second));

  const auto rows5 = phase_diagram(5, 0.0, 1.2, -0.6, 0.6, 5, 5, 1, 20);
  int special5 = 0;
  for (const auto& r : rows5) special5 += r.layer == "special" ? 1 : 0;
  CHECK(special5 == 1);

  std::ostringstream out;
  write_phase_csv(out, 4, rows4, "p=4");
  CHECK(out.str().rfind("# pspin-cw v0.1.0 phase-diagram", 0) == 0);
}
