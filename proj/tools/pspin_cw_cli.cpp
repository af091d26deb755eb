// pspin-cw: command-line front end. Exit codes: 0 success, 2 usage error,
// 1 numerical or I/O failure.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pspin_cw/estimators.hpp"
#include "pspin_cw/experiments.hpp"
#include "pspin_cw/h_analysis.hpp"
#include "pspin_cw/limit_laws.hpp"
#include "pspin_cw/model.hpp"
#include "pspin_cw/numeric.hpp"
#include "pspin_cw/rng.hpp"
#include "pspin_cw/sampler.hpp"
#include "pspin_cw/version.hpp"

using nlohmann::json;
using namespace pspin;

namespace {

constexpr std::int64_t kMaxN = 10'000'000;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "+inf" : "-inf";
}

json nums(const std::vector<double>& xs) {
  json out = json::array();
  for (const double x : xs) out.push_back(num(x));
  return out;
}

json analysis_json(const HAnalysis& a) {
  json j;
  j["tag"] = to_string(a.classification);
  j["K"] = a.maximizers.size();
  j["maximizers"] = nums(a.maximizers);
  j["values"] = nums(a.values);
  j["second_derivs"] = nums(a.second_derivs);
  j["fourth_derivs"] = nums(a.fourth_derivs);
  j["weights"] = nums(a.weights);
  json st = json::array();
  for (const auto& s : a.stationary) {
    st.push_back({{"x", num(s.x)}, {"value", num(s.value)}, {"second_derivative", num(s.second_derivative)},
                  {"local_max", s.local_max}});
  }
  j["stationary_points"] = st;
  return j;
}

json estimate_json(const EstimateReport& e) {
  return {{"estimate", num(e.estimate)},
          {"existence", to_string(e.existence)},
          {"residual", num(e.residual)},
          {"iterations", e.iterations}};
}

json interval_json(const ConfidenceInterval& c) {
  json j;
  j["regular_valid"] = c.regular_valid;
  j["lower"] = c.regular_valid ? num(c.lower) : json(nullptr);
  j["upper"] = c.regular_valid ? num(c.upper) : json(nullptr);
  j["augmentation"] = nums(c.augmentation);
  j["level"] = c.level;
  if (!c.diagnostic.empty()) j["diagnostic"] = c.diagnostic;
  return j;
}

json law_json(const LimitLaw& law) {
  json comps = json::array();
  for (const auto& c : law.components()) {
    json cj;
    cj["weight"] = c.weight;
    std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, Gaussian>) {
            cj["kind"] = "gaussian";
            cj["mean"] = a.mean;
            cj["variance"] = a.variance;
          } else if constexpr (std::is_same_v<T, HalfNormal>) {
            cj["kind"] = a.sign > 0 ? "half-normal+" : "half-normal-";
            cj["variance"] = a.variance;
          } else if constexpr (std::is_same_v<T, PointMass>) {
            cj["kind"] = "point-mass";
            cj["location"] = num(a.location);
          } else {
            cj["kind"] = "quartic";
            cj["h4"] = a->h4();
            cj["drift"] = a->drift();
          }
        },
        c.atom);
    comps.push_back(cj);
  }
  return {{"id", law.id()}, {"kind", law.kind()}, {"components", comps}, {"mean", num(law.mean())}};
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out.flush()) throw std::runtime_error("failed while writing '" + path + "'");
}

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("PSPIN_CW_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw UsageError("PSPIN_CW_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  return default_threads();
}

void check_n(std::int64_t n, bool allow_large) {
  if (n < 1) throw UsageError("--n must be at least 1");
  if (n > kMaxN && !allow_large) {
    throw UsageError("--n " + std::to_string(n) + " exceeds 10^7; pass --allow-large-n to override");
  }
}

struct ModelFlags {
  int p = 0;
  std::string beta = "0";
  std::string h = "0";
  std::int64_t n = 0;
  bool allow_large_n = false;

  void add(CLI::App* app, bool with_n, bool beta_required = true, bool h_required = true) {
    app->add_option("--p", p, "interaction order (>= 2)")->required()->check(CLI::Range(2, 64));
    auto* b = app->add_option("--beta", beta, "inverse temperature (decimal)");
    auto* f = app->add_option("--h", h, "magnetic field (decimal)");
    if (beta_required) b->required();
    if (h_required) f->required();
    if (with_n) {
      app->add_option("--n", n, "system size N")->required();
      app->add_flag("--allow-large-n", allow_large_n, "permit N above 10^7");
    }
  }
  [[nodiscard]] double beta_value() const { return parse_printed(beta).value; }
  [[nodiscard]] double h_value() const { return parse_printed(h).value; }
  [[nodiscard]] ModelParams params() const {
    ModelParams m{beta_value(), h_value(), p, n};
    m.validate();
    return m;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact computation, estimation and limit laws for the p-spin Curie-Weiss model", "pspin-cw"};
  app.set_help_flag("--help", "print this help message and exit");
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  // classify
  ModelFlags cls;
  bool cls_exact = false;
  Tolerances tol;
  auto* classify = app.add_subcommand("classify", "classify a parameter point via the maximizers of H");
  cls.add(classify, false);
  classify->add_flag("--exact", cls_exact, "classify the literal values without resolving printed precision");
  classify->add_option("--value-tol", tol.value, "equal-maximum tolerance");
  classify->add_option("--curvature-tol", tol.curvature, "zero-curvature tolerance");

  // phase-diagram
  int pd_p = 0;
  double b_min = 0.0, b_max = 1.2, h_min = -0.6, h_max = 0.6;
  int nb = 200, nh = 200, curve_points = 200, pd_threads = 0;
  std::string pd_out;
  auto* phase = app.add_subcommand("phase-diagram", "classification grid plus critical-curve and special layers");
  phase->add_option("--p", pd_p, "interaction order")->required()->check(CLI::Range(2, 64));
  phase->add_option("--beta-min", b_min, "");
  phase->add_option("--beta-max", b_max, "");
  phase->add_option("--h-min", h_min, "");
  phase->add_option("--h-max", h_max, "");
  phase->add_option("--beta-points", nb, "grid points along beta");
  phase->add_option("--h-points", nh, "grid points along h");
  phase->add_option("--curve-points", curve_points, "samples of the critical curve");
  phase->add_option("--threads", pd_threads, "worker threads (default: PSPIN_CW_THREADS or all cores)");
  phase->add_option("--output,-o", pd_out, "CSV path (default stdout)");

  // partition
  ModelFlags part;
  bool part_law = false;
  std::string part_format = "json";
  auto* partition = app.add_subcommand("partition", "log-partition function and moments at finite N");
  part.add(partition, true);
  partition->add_flag("--law", part_law, "include the full magnetization law");
  partition->add_option("--format", part_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  // sample
  ModelFlags smp;
  std::int64_t count = 1;
  std::uint64_t seed = 1, stream = 0;
  bool spins = false;
  std::int64_t spin_cap = kDefaultSpinCap;
  std::string smp_format = "json";
  auto* sample = app.add_subcommand("sample", "exact draws of the average magnetization or of spin vectors");
  smp.add(sample, true);
  sample->add_option("--count", count, "number of draws");
  sample->add_option("--seed", seed, "RNG seed");
  sample->add_option("--stream", stream, "RNG stream id");
  sample->add_flag("--spins", spins, "emit full spin vectors");
  sample->add_option("--spin-cap", spin_cap, "largest N for --spins");
  sample->add_option("--format", smp_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  // mle
  ModelFlags mle;
  std::string which;
  double sigma_bar = 0.0;
  auto* mle_cmd = app.add_subcommand("mle", "marginal maximum-likelihood estimate of h or beta");
  mle.add(mle_cmd, true, false, false);
  mle_cmd->add_option("--which", which, "h or beta")->required()->check(CLI::IsMember({"h", "beta"}));
  mle_cmd->add_option("--sigma-bar", sigma_bar, "observed average magnetization")->required();

  // ci
  ModelFlags cif;
  std::string ci_which;
  double ci_sigma = 0.0, alpha = 0.05;
  auto* ci_cmd = app.add_subcommand("ci", "confidence interval for h or beta, augmented by the critical set");
  cif.add(ci_cmd, true, false, false);
  ci_cmd->add_option("--which", ci_which, "h or beta")->required()->check(CLI::IsMember({"h", "beta"}));
  ci_cmd->add_option("--sigma-bar", ci_sigma, "observed average magnetization")->required();
  ci_cmd->add_option("--alpha", alpha, "1 - confidence level");

  // limit-law
  ModelFlags ll;
  std::string ll_stat = "sigma";
  std::vector<double> at;
  std::int64_t ll_samples = 0;
  std::uint64_t ll_seed = 1;
  auto* limit = app.add_subcommand("limit-law", "limit law of a statistic at a parameter point");
  ll.add(limit, false);
  limit->add_option("--statistic", ll_stat, "sigma, h-mle or beta-mle")
      ->check(CLI::IsMember({"sigma", "h-mle", "beta-mle"}));
  limit->add_option("--at", at, "points at which to report the CDF")->delimiter(',');
  limit->add_option("--samples", ll_samples, "number of draws to emit");
  limit->add_option("--seed", ll_seed, "RNG seed");

  // experiment
  ModelFlags ex;
  std::string ex_kind, ex_stat = "sigma", ex_scale, ex_out;
  std::int64_t reps = 100000;
  std::uint64_t ex_seed = 1;
  int ex_threads = 0;
  double ex_alpha = 0.05, ex_tol = 0.02;
  bool no_exact = false, snap = false;
  auto* experiment = app.add_subcommand("experiment", "histogram/KS or coverage experiment");
  experiment->add_option("kind", ex_kind, "histogram or coverage")
      ->required()
      ->check(CLI::IsMember({"histogram", "coverage"}));
  ex.add(experiment, true);
  experiment->add_option("--statistic", ex_stat, "sigma, h-mle or beta-mle")
      ->check(CLI::IsMember({"sigma", "h-mle", "beta-mle"}));
  experiment->add_option("--scale", ex_scale, "none, quarter, sqrt or three-quarters (default: theorem rate)")
      ->check(CLI::IsMember({"none", "quarter", "sqrt", "three-quarters"}));
  experiment->add_option("--replications", reps, "");
  experiment->add_option("--seed", ex_seed, "");
  experiment->add_option("--threads", ex_threads, "worker threads (default: PSPIN_CW_THREADS or all cores)");
  experiment->add_option("--output,-o", ex_out, "CSV path");
  experiment->add_option("--alpha", ex_alpha, "1 - confidence level (coverage)");
  experiment->add_option("--tolerance", ex_tol, "KS pass threshold (histogram)");
  experiment->add_flag("--no-exact", no_exact, "skip the exact finite-N comparison");
  experiment->add_flag("--snap", snap, "resolve beta/h literals to the structural point they print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "pspin-cw: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*classify) {
      const auto bp = parse_printed(cls.beta);
      const auto hp = parse_printed(cls.h);
      ModelParams{bp.value, hp.value, cls.p, 1}.validate();
      const auto exact = analyze(bp.value, hp.value, cls.p, tol);
      json j;
      j["p"] = cls.p;
      j["beta"] = bp.value;
      j["h"] = hp.value;
      j["exact_tag"] = to_string(exact.classification);
      if (cls_exact) {
        j.update(analysis_json(exact));
        j["snapped"] = false;
        j["resolved_beta"] = bp.value;
        j["resolved_h"] = hp.value;
      } else {
        const auto r = resolve_printed_point(bp, hp, cls.p, tol);
        j.update(analysis_json(r.analysis));
        j["snapped"] = r.snapped;
        j["resolved_beta"] = r.beta;
        j["resolved_h"] = r.h;
      }
      std::cout << j.dump(2) << "\n";
    } else if (*phase) {
      const int threads = resolve_threads(pd_threads);
      const auto rows = phase_diagram(pd_p, b_min, b_max, h_min, h_max, nb, nh, threads, curve_points);
      std::ostringstream params;
      params << "beta=[" << format_double(b_min) << "," << format_double(b_max) << "] h=[" << format_double(h_min)
             << "," << format_double(h_max) << "] grid=" << nb << "x" << nh << " curve_points=" << curve_points;
      std::ostringstream out;
      write_phase_csv(out, pd_p, rows, params.str());
      write_text(pd_out, out.str());
    } else if (*partition) {
      check_n(part.n, part.allow_large_n);
      const auto prm = part.params();
      const MagnetizationKernel kernel(prm.p, prm.n);
      const auto m = kernel.moments(prm.beta, prm.h);
      if (part_format == "csv") {
        std::ostringstream out;
        out << csv_header("partition", "p=" + std::to_string(prm.p) + " beta=" + format_double(prm.beta) +
                                           " h=" + format_double(prm.h) + " n=" + std::to_string(prm.n));
        out << "k,m,log_prob\n";
        const auto law = kernel.law(prm.beta, prm.h);
        for (std::size_t k = 0; k < law.support.size(); ++k) {
          out << k << ',' << format_double(law.support[k]) << ',' << format_double(law.log_prob[k]) << '\n';
        }
        std::cout << out.str();
      } else {
        json j;
        j["p"] = prm.p;
        j["beta"] = prm.beta;
        j["h"] = prm.h;
        j["n"] = prm.n;
        j["log_partition"] = m.log_partition;
        j["mean"] = m.mean;
        j["variance"] = m.var;
        j["mean_pow"] = m.mean_pow;
        j["variance_pow"] = m.var_pow;
        const auto a = analyze(prm.beta, prm.h, prm.p);
        j["classification"] = to_string(a.classification);
        if (a.classification == PointClass::Regular) j["expansion"] = log_partition_expansion(prm, a);
        if (part_law) {
          const auto law = kernel.law(prm.beta, prm.h);
          j["support"] = law.support;
          j["log_prob"] = nums(law.log_prob);
        }
        std::cout << j.dump(2) << "\n";
      }
    } else if (*sample) {
      check_n(smp.n, smp.allow_large_n);
      if (count < 1) throw UsageError("--count must be at least 1");
      const auto prm = smp.params();
      RngStream rng(seed, stream);
      if (spins) {
        std::ostringstream out;
        json arr = json::array();
        for (std::int64_t i = 0; i < count; ++i) {
          const auto s = sample_spins(prm, rng, spin_cap);
          if (smp_format == "csv") {
            for (std::size_t k = 0; k < s.size(); ++k) out << (k ? "," : "") << s[k];
            out << '\n';
          } else {
            arr.push_back(s);
          }
        }
        std::cout << (smp_format == "csv" ? out.str() : json{{"spins", arr}}.dump() + "\n");
      } else {
        const MagnetizationSampler sampler(magnetization_law(prm));
        std::vector<double> draws(static_cast<std::size_t>(count));
        for (auto& d : draws) d = sampler.draw(rng);
        if (smp_format == "csv") {
          std::ostringstream out;
          out << "sigma_bar\n";
          for (const double d : draws) out << format_double(d) << '\n';
          std::cout << out.str();
        } else {
          std::cout << json{{"seed", seed}, {"stream", stream}, {"sigma_bar", draws}}.dump() << "\n";
        }
      }
    } else if (*mle_cmd) {
      check_n(mle.n, mle.allow_large_n);
      const bool for_h = which == "h";
      if (for_h && mle_cmd->count("--beta") == 0) throw UsageError("mle --which h requires --beta");
      if (!for_h && mle_cmd->count("--h") == 0) throw UsageError("mle --which beta requires --h");
      const auto prm = mle.params();
      const auto e = for_h ? mle_h(sigma_bar, prm.beta, prm.p, prm.n) : mle_beta(sigma_bar, prm.h, prm.p, prm.n);
      json j = estimate_json(e);
      j["which"] = which;
      std::cout << j.dump(2) << "\n";
    } else if (*ci_cmd) {
      check_n(cif.n, cif.allow_large_n);
      const bool for_h = ci_which == "h";
      if (for_h && ci_cmd->count("--beta") == 0) throw UsageError("ci --which h requires --beta");
      if (!for_h && ci_cmd->count("--h") == 0) throw UsageError("ci --which beta requires --h");
      const auto prm = cif.params();
      const auto r = for_h ? ci_h(ci_sigma, prm.beta, prm.p, prm.n, alpha) : ci_beta(ci_sigma, prm.h, prm.p, prm.n, alpha);
      json j = estimate_json(r.estimate);
      j["which"] = ci_which;
      j["interval"] = interval_json(r.interval);
      std::cout << j.dump(2) << "\n";
    } else if (*limit) {
      const double beta = ll.beta_value();
      const double h = ll.h_value();
      ModelParams{beta, h, ll.p, 1}.validate();
      const auto a = analyze(beta, h, ll.p);
      const auto target = target_law(a, parse_statistic(ll_stat));
      json j;
      j["classification"] = to_string(a.classification);
      j["statistic"] = ll_stat;
      std::visit(
          [&](const auto& law) {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, LimitLaw>) {
              j.update(law_json(law));
            } else {
              j["id"] = law.id();
              j["kind"] = law.which() == GLaw::Which::Field ? "G1" : "G2";
            }
            j["scale"] = to_string(law.scale);
            j["centering"] = law.centering;
            json cdf = json::array();
            for (const double x : at) cdf.push_back({{"x", num(x)}, {"cdf", law.cdf(x)}});
            j["cdf"] = cdf;
            if constexpr (std::is_same_v<T, LimitLaw>) {
              if (ll_samples > 0) {
                RngStream rng(ll_seed, 0);
                std::vector<double> draws(static_cast<std::size_t>(ll_samples));
                for (auto& d : draws) d = law.sample(rng);
                j["samples"] = nums(draws);
              }
            } else if (ll_samples > 0) {
              throw UsageError("--samples is not available for the G laws");
            }
          },
          target);
      std::cout << j.dump(2) << "\n";
    } else if (*experiment) {
      check_n(ex.n, ex.allow_large_n);
      ExperimentSpec spec;
      spec.params = ex.params();
      if (snap) {
        const auto r = resolve_printed_point(parse_printed(ex.beta), parse_printed(ex.h), ex.p);
        spec.params.beta = r.beta;
        spec.params.h = r.h;
      }
      spec.replications = reps;
      spec.statistic = parse_statistic(ex_stat);
      if (!ex_scale.empty()) spec.scale = parse_scale(ex_scale);
      spec.seed = ex_seed;
      spec.output_path = ex_out;
      spec.threads = resolve_threads(ex_threads);
      spec.tolerance = ex_tol;
      spec.exact = !no_exact;
      json j;
      j["experiment"] = ex_kind;
      j["params"] = describe(spec);
      j["beta"] = spec.params.beta;
      j["h"] = spec.params.h;
      if (ex_kind == "histogram") {
        const auto res = run_histogram(spec);
        j["report"] = json::parse(to_json(res.report));
      } else {
        const auto res = run_coverage(spec, ex_alpha);
        j["alpha"] = ex_alpha;
        j["coverage"] = json::parse(to_json(res));
      }
      std::cout << j.dump(2) << "\n";
    }
  } catch (const NumericalError& e) {
    std::cerr << "pspin-cw: numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "pspin-cw: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "pspin-cw: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "pspin-cw: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
