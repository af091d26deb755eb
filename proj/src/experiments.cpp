#include "pspin_cw/experiments.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pspin_cw/numeric.hpp"
#include "pspin_cw/rng.hpp"
#include "pspin_cw/sampler.hpp"
#include "pspin_cw/version.hpp"

namespace pspin {

std::string_view to_string(Statistic s) {
  switch (s) {
    case Statistic::SigmaScaled:
      return "sigma";
    case Statistic::HMle:
      return "h-mle";
    case Statistic::BetaMle:
      return "beta-mle";
  }
  return "unknown";
}

Statistic parse_statistic(std::string_view name) {
  if (name == "sigma") return Statistic::SigmaScaled;
  if (name == "h-mle") return Statistic::HMle;
  if (name == "beta-mle") return Statistic::BetaMle;
  throw std::invalid_argument("unknown statistic '" + std::string(name) + "' (expected sigma, h-mle or beta-mle)");
}

void ExperimentSpec::validate() const {
  params.validate();
  if (replications < 1) throw std::invalid_argument("replications must be at least 1");
  if (threads < 1) throw std::invalid_argument("threads must be at least 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
}

int default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_header(std::string_view experiment, std::string_view params) {
  return "# pspin-cw v" + std::string(kVersion) + " " + std::string(experiment) + " " + std::string(params) + "\n";
}

std::string describe(const ExperimentSpec& spec) {
  std::ostringstream out;
  out << "p=" << spec.params.p << " beta=" << format_double(spec.params.beta)
      << " h=" << format_double(spec.params.h) << " n=" << spec.params.n << " statistic=" << to_string(spec.statistic)
      << " replications=" << spec.replications << " seed=" << spec.seed;
  if (spec.scale) out << " scale=" << to_string(*spec.scale);
  return out.str();
}

TargetLaw target_law(const HAnalysis& analysis, Statistic statistic) {
  const bool special = analysis.classification == PointClass::Special;
  switch (statistic) {
    case Statistic::SigmaScaled:
      return sigma_limit(analysis);
    case Statistic::HMle:
      if (special) return GLaw(GLaw::Which::Field, analysis);
      return h_mle_limit(analysis);
    case Statistic::BetaMle:
      if (special) return GLaw(GLaw::Which::Temperature, analysis);
      return beta_mle_limit(analysis);
  }
  throw std::invalid_argument("unknown statistic");
}

Scale target_scale(const TargetLaw& law) {
  return std::visit([](const auto& l) { return l.scale; }, law);
}

double target_centering(const TargetLaw& law) {
  return std::visit([](const auto& l) { return l.centering; }, law);
}

std::string target_id(const TargetLaw& law) {
  return std::visit([](const auto& l) { return l.id(); }, law);
}

StatisticMap::StatisticMap(const ModelParams& params, Statistic statistic, Scale scale, double centering)
    : params_(params),
      statistic_(statistic),
      factor_(scale_factor(scale, params.n)),
      centering_(centering),
      solver_(params.p, params.n) {}

double StatisticMap::raw(double sigma_bar) const {
  switch (statistic_) {
    case Statistic::SigmaScaled:
      return sigma_bar;
    case Statistic::HMle:
      return solver_.h(sigma_bar, params_.beta).estimate;
    case Statistic::BetaMle:
      return solver_.beta(sigma_bar, params_.h).estimate;
  }
  return sigma_bar;
}

double StatisticMap::operator()(double sigma_bar) const {
  const double r = raw(sigma_bar);
  if (std::isinf(r)) return r;
  return factor_ * (r - centering_);
}

DiscreteLaw exact_statistic_law(const MagnetizationLaw& law, const StatisticMap& map, int threads, double min_prob,
                                double* dropped) {
  const auto probs = law.probabilities();
  std::vector<std::size_t> kept;
  double lost = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] >= min_prob) {
      kept.push_back(k);
    } else {
      lost += probs[k];
    }
  }
  std::vector<double> values(kept.size());
  parallel_for(kept.size(), threads, [&](std::size_t i) { values[i] = map(law.support[kept[i]]); });
  std::vector<std::size_t> order(kept.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  DiscreteLaw out;
  for (const std::size_t i : order) {
    if (!out.values.empty() && out.values.back() == values[i]) {
      out.probs.back() += probs[kept[i]];
    } else {
      out.values.push_back(values[i]);
      out.probs.push_back(probs[kept[i]]);
    }
  }
  if (dropped) *dropped = lost;
  return out;
}

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

void finish_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

// Atom index of sigma-bar for each replication; stream i belongs to replication i.
std::vector<std::size_t> draw_indices(const MagnetizationSampler& sampler, const ExperimentSpec& spec) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(spec.replications));
  parallel_for(idx.size(), spec.threads, [&](std::size_t i) {
    RngStream rng(spec.seed, i);
    idx[i] = sampler.draw_index(rng);
  });
  return idx;
}

std::vector<std::size_t> distinct(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::size_t slot(const std::vector<std::size_t>& sorted, std::size_t k) {
  return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), k) - sorted.begin());
}

}  // namespace

HistogramResult run_histogram(const ExperimentSpec& spec) {
  spec.validate();
  const auto& prm = spec.params;
  const auto analysis = analyze(prm.beta, prm.h, prm.p);
  const auto target = target_law(analysis, spec.statistic);
  const Scale scale = target_scale(target);
  if (spec.scale && *spec.scale != scale) {
    throw std::invalid_argument("scale '" + std::string(to_string(*spec.scale)) + "' is inconsistent with the " +
                                std::string(to_string(analysis.classification)) + " limit theorem (expects '" +
                                std::string(to_string(scale)) + "')");
  }
  const StatisticMap map(prm, spec.statistic, scale, target_centering(target));
  const auto law = magnetization_law(prm);
  const MagnetizationSampler sampler(law);

  const auto idx = draw_indices(sampler, spec);
  const auto atoms = distinct(idx);
  std::vector<double> at_atom(atoms.size());
  parallel_for(atoms.size(), spec.threads, [&](std::size_t j) { at_atom[j] = map(law.support[atoms[j]]); });

  HistogramResult out;
  out.sigma_bars.resize(idx.size());
  out.values.resize(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.sigma_bars[i] = law.support[idx[i]];
    out.values[i] = at_atom[slot(atoms, idx[i])];
  }

  auto& report = out.report;
  report.n_effective = spec.replications;
  report.limit_law_id = target_id(target);
  report.tolerance = spec.tolerance;
  report.ks_statistic = std::visit([&](const auto& l) { return ks_distance(out.values, l); }, target);
  if (spec.exact) {
    const auto exact = exact_statistic_law(law, map, spec.threads, 1e-14, &report.dropped_mass);
    report.exact_ks = std::visit([&](const auto& l) { return ks_distance(exact, l); }, target);
  }
  report.pass = report.exact_ks.value_or(report.ks_statistic) <= spec.tolerance;

  if (!spec.output_path.empty()) {
    auto file = open_output(spec.output_path);
    file << csv_header("histogram", describe(spec) + " scale=" + std::string(to_string(scale)));
    file << "replication,sigma_bar,value\n";
    for (std::size_t i = 0; i < idx.size(); ++i) {
      file << i << ',' << format_double(out.sigma_bars[i]) << ',' << format_double(out.values[i]) << '\n';
    }
    finish_output(file, spec.output_path);
  }
  return out;
}

CoverageResult run_coverage(const ExperimentSpec& spec, double alpha) {
  spec.validate();
  const auto& prm = spec.params;
  if (spec.statistic == Statistic::SigmaScaled) {
    throw std::invalid_argument("coverage needs statistic h-mle or beta-mle");
  }
  const bool for_h = spec.statistic == Statistic::HMle;
  if (!for_h && prm.h == 0.0) throw std::invalid_argument("beta intervals need h != 0");

  CoverageResult out;
  out.truth = for_h ? prm.h : prm.beta;
  out.augmentation = for_h ? critical_fields(prm.p, prm.beta) : critical_betas(prm.p, prm.h);
  out.replications = spec.replications;

  const MleSolver solver(prm.p, prm.n);
  const auto law = magnetization_law(prm);
  const auto probs = law.probabilities();
  const MagnetizationSampler sampler(law);
  const auto idx = draw_indices(sampler, spec);

  // Intervals for every sampled atom and every atom carrying exact-law mass.
  std::vector<std::size_t> wanted = idx;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] >= 1e-14) wanted.push_back(k);
  }
  const auto atoms = distinct(std::move(wanted));
  std::vector<IntervalEstimate> ci(atoms.size());
  parallel_for(atoms.size(), spec.threads, [&](std::size_t j) {
    const double sb = law.support[atoms[j]];
    if (for_h) {
      ci[j] = solver.ci_h(sb, prm.beta, alpha, out.augmentation);
    } else if (sb == 0.0) {
      // No regular interval at sigma-bar = 0; only the augmentation remains.
      ci[j].estimate = solver.beta(sb, prm.h);
      ci[j].interval.level = 1.0 - alpha;
      ci[j].interval.augmentation = out.augmentation;
      ci[j].interval.diagnostic = "sigma-bar = 0";
    } else {
      ci[j] = solver.ci_beta(sb, prm.h, alpha, out.augmentation);
    }
  });

  for (std::size_t j = 0; j < atoms.size(); ++j) {
    const double pk = probs[atoms[j]];
    if (ci[j].interval.contains(out.truth)) out.exact_coverage += pk;
    if (ci[j].interval.regular_contains(out.truth)) out.exact_regular_coverage += pk;
  }

  std::int64_t covered = 0;
  std::int64_t covered_regular = 0;
  std::ofstream file;
  if (!spec.output_path.empty()) {
    file = open_output(spec.output_path);
    std::ostringstream params;
    params << describe(spec) << " alpha=" << format_double(alpha);
    file << csv_header("coverage", params.str());
    file << "replication,sigma_bar,estimate,lower,upper,covered_regular,covered\n";
  }
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& c = ci[slot(atoms, idx[i])];
    const bool in = c.interval.contains(out.truth);
    const bool in_regular = c.interval.regular_contains(out.truth);
    covered += in;
    covered_regular += in_regular;
    out.invalid_intervals += !c.interval.regular_valid;
    if (file.is_open()) {
      const double lo = c.interval.regular_valid ? c.interval.lower : std::nan("");
      const double hi = c.interval.regular_valid ? c.interval.upper : std::nan("");
      file << i << ',' << format_double(law.support[idx[i]]) << ',' << format_double(c.estimate.estimate) << ','
           << format_double(lo) << ',' << format_double(hi) << ',' << in_regular << ',' << in << '\n';
    }
  }
  const auto r = static_cast<double>(spec.replications);
  out.coverage = static_cast<double>(covered) / r;
  out.regular_coverage = static_cast<double>(covered_regular) / r;
  out.standard_error = std::sqrt(out.coverage * (1.0 - out.coverage) / r);
  if (file.is_open()) {
    file << "# summary coverage=" << format_double(out.coverage)
         << " standard_error=" << format_double(out.standard_error)
         << " regular_coverage=" << format_double(out.regular_coverage)
         << " exact_coverage=" << format_double(out.exact_coverage) << '\n';
    finish_output(file, spec.output_path);
  }
  return out;
}

std::vector<PhaseRow> phase_diagram(int p, double beta_min, double beta_max, double h_min, double h_max,
                                    int beta_points, int h_points, int threads, int curve_points) {
  if (p < 2) throw std::invalid_argument("p must be at least 2");
  if (beta_points < 2 || h_points < 2) throw std::invalid_argument("phase diagram grid must be at least 2x2");
  if (!(beta_min >= 0.0) || !(beta_max > beta_min) || !(h_max > h_min)) {
    throw std::invalid_argument("phase diagram needs 0 <= beta_min < beta_max and h_min < h_max");
  }
  const auto nb = static_cast<std::size_t>(beta_points);
  const auto nh = static_cast<std::size_t>(h_points);
  std::vector<PhaseRow> grid(nb * nh);
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    const std::size_t ib = i / nh;
    const std::size_t ih = i % nh;
    auto& row = grid[i];
    row.layer = "grid";
    row.beta = beta_min + (beta_max - beta_min) * static_cast<double>(ib) / static_cast<double>(nb - 1);
    row.h = h_min + (h_max - h_min) * static_cast<double>(ih) / static_cast<double>(nh - 1);
    row.analysis = analyze(row.beta, row.h, p);
  });

  std::vector<PhaseRow> rows = std::move(grid);
  const auto in_window = [&](double b, double f) { return b >= beta_min && b <= beta_max && f >= h_min && f <= h_max; };

  // Special points and the critical curve emanating from them.
  const double beta_start = p == 2 ? 0.5 : special_point(p).first;
  std::vector<std::pair<double, double>> specials;
  if (p == 2) {
    specials.emplace_back(0.5, 0.0);
  } else {
    specials.push_back(special_point(p));
    if (p % 2 == 0) specials.push_back(special_point(p, -1));
  }
  if (beta_max > beta_start && curve_points > 0) {
    std::vector<std::vector<double>> fields(static_cast<std::size_t>(curve_points));
    std::vector<double> betas(fields.size());
    parallel_for(fields.size(), threads, [&](std::size_t j) {
      betas[j] = beta_start + (beta_max - beta_start) * static_cast<double>(j + 1) / static_cast<double>(curve_points);
      if (p % 2 == 0 && p > 2 && std::abs(betas[j] - beta_tilde(p)) <= 1e-12) return;
      fields[j] = critical_fields(p, betas[j]);
    });
    std::vector<PhaseRow> curve;
    for (const auto& [b, f] : specials) {
      if (p > 2 && in_window(b, f)) curve.push_back({"curve", b, f, {}});
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      for (const double f : fields[j]) {
        if (in_window(betas[j], f)) curve.push_back({"curve", betas[j], f, {}});
      }
    }
    parallel_for(curve.size(), threads, [&](std::size_t j) { curve[j].analysis = analyze(curve[j].beta, curve[j].h, p); });
    rows.insert(rows.end(), curve.begin(), curve.end());
  }
  for (const auto& [b, f] : specials) {
    if (in_window(b, f)) rows.push_back({"special", b, f, analyze(b, f, p)});
  }
  if (p >= 4 && p % 2 == 0) {
    const double bt = beta_tilde(p);
    if (in_window(bt, 0.0)) rows.push_back({"strongly-critical", bt, 0.0, analyze(bt, 0.0, p)});
  }
  return rows;
}

void write_phase_csv(std::ostream& out, int p, const std::vector<PhaseRow>& rows, const std::string& params) {
  out << csv_header("phase-diagram", "p=" + std::to_string(p) + (params.empty() ? "" : " " + params));
  out << "layer,beta,h,class,K,m1,m2,m3,h2_1,h2_2,h2_3,w1,w2,w3\n";
  for (const auto& row : rows) {
    const auto& a = row.analysis;
    out << row.layer << ',' << format_double(row.beta) << ',' << format_double(row.h) << ','
        << to_string(a.classification) << ',' << a.maximizers.size();
    for (const auto* v : {&a.maximizers, &a.second_derivs, &a.weights}) {
      for (std::size_t k = 0; k < 3; ++k) {
        out << ',';
        if (k < v->size()) out << format_double((*v)[k]);
      }
    }
    out << '\n';
  }
}

namespace {

nlohmann::json number_or_string(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

}  // namespace

std::string to_json(const ComparisonReport& r) {
  nlohmann::json j;
  j["ks_statistic"] = r.ks_statistic;
  j["n_effective"] = r.n_effective;
  j["limit_law_id"] = r.limit_law_id;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  j["exact_ks"] = r.exact_ks ? nlohmann::json(*r.exact_ks) : nlohmann::json(nullptr);
  j["dropped_mass"] = r.dropped_mass;
  return j.dump(2);
}

std::string to_json(const CoverageResult& c) {
  nlohmann::json j;
  j["coverage"] = c.coverage;
  j["standard_error"] = c.standard_error;
  j["regular_coverage"] = c.regular_coverage;
  j["exact_coverage"] = c.exact_coverage;
  j["exact_regular_coverage"] = c.exact_regular_coverage;
  j["replications"] = c.replications;
  j["invalid_intervals"] = c.invalid_intervals;
  j["truth"] = number_or_string(c.truth);
  j["augmentation"] = c.augmentation;
  return j.dump(2);
}

}  // namespace pspin
