#pragma once

// Desk-scale experiments: histogram and Kolmogorov-Smirnov comparisons of a
// finite-N statistic against its limit law, confidence-interval coverage, and
// phase-diagram grids. Every statistic here is a function of sigma-bar alone,
// so alongside Monte Carlo each experiment can use the exact finite-N law.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "pspin_cw/estimators.hpp"
#include "pspin_cw/h_analysis.hpp"
#include "pspin_cw/limit_laws.hpp"
#include "pspin_cw/model.hpp"

namespace pspin {

enum class Statistic { SigmaScaled, HMle, BetaMle };
std::string_view to_string(Statistic s);
Statistic parse_statistic(std::string_view name);

struct ExperimentSpec {
  ModelParams params;
  std::int64_t replications = 100000;
  Statistic statistic = Statistic::SigmaScaled;
  std::optional<Scale> scale;  // defaults to the rate of the limit theorem
  std::uint64_t seed = 1;
  std::string output_path;
  int threads = 1;
  double tolerance = 0.02;  // KS pass threshold
  bool exact = true;        // also compute the exact finite-N comparison

  void validate() const;
};

struct ComparisonReport {
  double ks_statistic = 0.0;  // sampled statistic vs limit law
  std::int64_t n_effective = 0;
  std::string limit_law_id;
  double tolerance = 0.0;
  bool pass = false;
  std::optional<double> exact_ks;  // exact finite-N law vs limit law
  double dropped_mass = 0.0;       // probability of atoms left out of the exact law
};

/// Distribution with finitely many atoms, values increasing and distinct.
struct DiscreteLaw {
  std::vector<double> values;
  std::vector<double> probs;
};

/// The limit law a statistic is compared against: a LimitLaw, or a G law at
/// special points for the two estimates.
using TargetLaw = std::variant<LimitLaw, GLaw>;
TargetLaw target_law(const HAnalysis& analysis, Statistic statistic);
Scale target_scale(const TargetLaw& law);
double target_centering(const TargetLaw& law);
std::string target_id(const TargetLaw& law);

/// Maps sigma-bar to the scaled statistic scale * (raw - centering), where raw
/// is sigma-bar, the field estimate or the inverse temperature estimate.
class StatisticMap {
 public:
  StatisticMap(const ModelParams& params, Statistic statistic, Scale scale, double centering);
  [[nodiscard]] double raw(double sigma_bar) const;
  [[nodiscard]] double operator()(double sigma_bar) const;
  [[nodiscard]] const MleSolver& solver() const { return solver_; }

 private:
  ModelParams params_;
  Statistic statistic_;
  double factor_;
  double centering_;
  MleSolver solver_;
};

/// Exact law of the statistic: every atom of the magnetization law with
/// probability at least `min_prob` is mapped through `map`; the remaining mass
/// is reported in `dropped`.
DiscreteLaw exact_statistic_law(const MagnetizationLaw& law, const StatisticMap& map, int threads,
                                double min_prob = 1e-14, double* dropped = nullptr);

/// Generalized Kolmogorov-Smirnov distance: at every sample value and atom
/// location both F_n(x) vs F(x) and F_n(x-) vs F(x-) are compared, so jumps of
/// either side are accounted for. Samples may contain +/- infinity.
template <class Law>
double ks_distance(std::vector<double> samples, const Law& law);
template <class Law>
double ks_distance(const DiscreteLaw& empirical, const Law& law);

/// Runs fn(i) for i in [0, count) on `threads` workers. Results must be written
/// to slot i so that reduction order does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn);

int default_threads();

struct HistogramResult {
  ComparisonReport report;
  std::vector<double> sigma_bars;
  std::vector<double> values;
};

/// Draws `replications` values of the statistic; writes the CSV artifact when
/// output_path is set.
HistogramResult run_histogram(const ExperimentSpec& spec);

struct CoverageResult {
  double coverage = 0.0;          // augmented interval, Monte Carlo
  double standard_error = 0.0;    // sqrt(c (1 - c) / R)
  double regular_coverage = 0.0;  // regular interval alone, Monte Carlo
  double exact_coverage = 0.0;    // augmented interval under the exact law
  double exact_regular_coverage = 0.0;
  std::int64_t replications = 0;
  std::int64_t invalid_intervals = 0;  // replications without a regular part
  double truth = 0.0;
  std::vector<double> augmentation;
};

CoverageResult run_coverage(const ExperimentSpec& spec, double alpha);

struct PhaseRow {
  std::string layer;  // grid, curve, special or strongly-critical
  double beta = 0.0;
  double h = 0.0;
  HAnalysis analysis;
};

std::vector<PhaseRow> phase_diagram(int p, double beta_min, double beta_max, double h_min, double h_max,
                                    int beta_points, int h_points, int threads, int curve_points = 200);
void write_phase_csv(std::ostream& out, int p, const std::vector<PhaseRow>& rows, const std::string& params);

/// Shortest round-trip decimal form; inf, -inf and nan spelled out.
std::string format_double(double x);
std::string csv_header(std::string_view experiment, std::string_view params);
std::string describe(const ExperimentSpec& spec);

std::string to_json(const ComparisonReport& report);
std::string to_json(const CoverageResult& result);

// ---------------------------------------------------------------------------

namespace detail {
inline bool is_atom_location(double x, const std::vector<double>& atoms) {
  return std::binary_search(atoms.begin(), atoms.end(), x);
}
}  // namespace detail

template <class Law>
double ks_distance(const DiscreteLaw& empirical, const Law& law) {
  std::vector<double> points = empirical.values;
  for (const double a : law.atoms()) points.push_back(a);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  double worst = 0.0;
  double below = 0.0;  // empirical mass strictly below the current point
  std::size_t j = 0;
  for (const double x : points) {
    while (j < empirical.values.size() && empirical.values[j] < x) below += empirical.probs[j++];
    double at = below;
    if (j < empirical.values.size() && empirical.values[j] == x) at += empirical.probs[j];
    worst = std::max(worst, std::abs(std::min(at, 1.0) - law.cdf(x)));
    worst = std::max(worst, std::abs(std::min(below, 1.0) - law.cdf_left(x)));
  }
  return worst;
}

template <class Law>
double ks_distance(std::vector<double> samples, const Law& law) {
  std::sort(samples.begin(), samples.end());
  DiscreteLaw empirical;
  const double unit = 1.0 / static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size();) {
    std::size_t k = i;
    while (k < samples.size() && samples[k] == samples[i]) ++k;
    empirical.values.push_back(samples[i]);
    empirical.probs.push_back(static_cast<double>(k - i) * unit);
    i = k;
  }
  return ks_distance(empirical, law);
}

template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace pspin
