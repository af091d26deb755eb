#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pspin_cw/estimators.hpp"
#include "pspin_cw/experiments.hpp"
#include "pspin_cw/h_analysis.hpp"
#include "pspin_cw/limit_laws.hpp"
#include "pspin_cw/model.hpp"
#include "pspin_cw/numeric.hpp"
#include "pspin_cw/rng.hpp"
#include "pspin_cw/sampler.hpp"
#include "pspin_cw/version.hpp"

namespace py = pybind11;
using namespace pspin;

PYBIND11_MODULE(_core, m) {
  m.doc() = "p-spin Curie-Weiss model: exact laws, estimation and limit theorems";
  m.attr("__version__") = kVersion;

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::enum_<PointClass>(m, "PointClass")
      .value("Regular", PointClass::Regular)
      .value("Special", PointClass::Special)
      .value("WeaklyCritical", PointClass::WeaklyCritical)
      .value("StronglyCritical", PointClass::StronglyCritical);

  py::class_<Tolerances>(m, "Tolerances")
      .def(py::init<>())
      .def_readwrite("value", &Tolerances::value)
      .def_readwrite("curvature", &Tolerances::curvature);

  py::class_<StationaryPoint>(m, "StationaryPoint")
      .def_readonly("x", &StationaryPoint::x)
      .def_readonly("value", &StationaryPoint::value)
      .def_readonly("second_derivative", &StationaryPoint::second_derivative)
      .def_readonly("local_max", &StationaryPoint::local_max);

  py::class_<HAnalysis>(m, "HAnalysis")
      .def_readonly("beta", &HAnalysis::beta)
      .def_readonly("h", &HAnalysis::h)
      .def_readonly("p", &HAnalysis::p)
      .def_readonly("maximizers", &HAnalysis::maximizers)
      .def_readonly("values", &HAnalysis::values)
      .def_readonly("second_derivs", &HAnalysis::second_derivs)
      .def_readonly("fourth_derivs", &HAnalysis::fourth_derivs)
      .def_readonly("weights", &HAnalysis::weights)
      .def_readonly("stationary", &HAnalysis::stationary)
      .def_readonly("classification", &HAnalysis::classification)
      .def_property_readonly("tag", [](const HAnalysis& a) { return std::string(to_string(a.classification)); });

  py::class_<ResolvedPoint>(m, "ResolvedPoint")
      .def_readonly("beta", &ResolvedPoint::beta)
      .def_readonly("h", &ResolvedPoint::h)
      .def_readonly("snapped", &ResolvedPoint::snapped)
      .def_readonly("analysis", &ResolvedPoint::analysis);

  m.def("entropy", &entropy, py::arg("x"));
  m.def("h_value", &h_value, py::arg("beta"), py::arg("h"), py::arg("p"), py::arg("x"));
  m.def("h_derivatives", &h_derivatives, py::arg("beta"), py::arg("h"), py::arg("p"), py::arg("x"),
        py::arg("max_order") = 4);
  m.def("analyze", &analyze, py::arg("beta"), py::arg("h"), py::arg("p"), py::arg("tol") = Tolerances{});
  m.def("beta_tilde", &beta_tilde, py::arg("p"));
  m.def("special_point", &special_point, py::arg("p"), py::arg("sign") = 1);
  m.def("critical_curve", &critical_curve, py::arg("p"), py::arg("beta"));
  m.def("critical_fields", &critical_fields, py::arg("p"), py::arg("beta"));
  m.def("critical_betas", &critical_betas, py::arg("p"), py::arg("h"));
  m.def(
      "classify",
      [](int p, const std::string& beta, const std::string& h) {
        return resolve_printed_point(parse_printed(beta), parse_printed(h), p);
      },
      py::arg("p"), py::arg("beta"), py::arg("h"),
      "Classify decimal literals, resolving them to the structural point they print as.");

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](double beta, double h, int p, std::int64_t n) {
             ModelParams prm{beta, h, p, n};
             prm.validate();
             return prm;
           }),
           py::arg("beta"), py::arg("h"), py::arg("p"), py::arg("n"))
      .def_readonly("beta", &ModelParams::beta)
      .def_readonly("h", &ModelParams::h)
      .def_readonly("p", &ModelParams::p)
      .def_readonly("n", &ModelParams::n);

  py::class_<MagnetizationLaw>(m, "MagnetizationLaw")
      .def_readonly("support", &MagnetizationLaw::support)
      .def_readonly("log_prob", &MagnetizationLaw::log_prob)
      .def_readonly("log_partition", &MagnetizationLaw::log_partition)
      .def("probabilities", &MagnetizationLaw::probabilities);

  m.def("log_binomial", &log_binomial, py::arg("n"), py::arg("k"));
  m.def("magnetization_law", &magnetization_law, py::arg("params"));
  m.def("log_partition", py::overload_cast<const ModelParams&>(&log_partition), py::arg("params"));
  m.def("moment", py::overload_cast<const ModelParams&, int>(&moment), py::arg("params"), py::arg("order"));
  m.def("log_partition_expansion", &log_partition_expansion, py::arg("params"), py::arg("analysis"));

  py::enum_<Existence>(m, "Existence")
      .value("Finite", Existence::Finite)
      .value("PlusInfinity", Existence::PlusInfinity)
      .value("MinusInfinity", Existence::MinusInfinity);

  py::class_<EstimateReport>(m, "EstimateReport")
      .def_readonly("estimate", &EstimateReport::estimate)
      .def_readonly("existence", &EstimateReport::existence)
      .def_readonly("residual", &EstimateReport::residual)
      .def_readonly("iterations", &EstimateReport::iterations)
      .def_property_readonly("finite", &EstimateReport::finite);

  py::class_<ConfidenceInterval>(m, "ConfidenceInterval")
      .def_readonly("lower", &ConfidenceInterval::lower)
      .def_readonly("upper", &ConfidenceInterval::upper)
      .def_readonly("regular_valid", &ConfidenceInterval::regular_valid)
      .def_readonly("augmentation", &ConfidenceInterval::augmentation)
      .def_readonly("level", &ConfidenceInterval::level)
      .def_readonly("diagnostic", &ConfidenceInterval::diagnostic)
      .def("contains", &ConfidenceInterval::contains)
      .def("__contains__", &ConfidenceInterval::contains);

  py::class_<IntervalEstimate>(m, "IntervalEstimate")
      .def_readonly("estimate", &IntervalEstimate::estimate)
      .def_readonly("interval", &IntervalEstimate::interval);

  m.def("mle_h", &mle_h, py::arg("sigma_bar"), py::arg("beta"), py::arg("p"), py::arg("n"));
  m.def("mle_beta", &mle_beta, py::arg("sigma_bar"), py::arg("h"), py::arg("p"), py::arg("n"));
  m.def("ci_h", &ci_h, py::arg("sigma_bar"), py::arg("beta"), py::arg("p"), py::arg("n"), py::arg("alpha") = 0.05);
  m.def("ci_beta", &ci_beta, py::arg("sigma_bar"), py::arg("h"), py::arg("p"), py::arg("n"),
        py::arg("alpha") = 0.05);

  py::enum_<Scale>(m, "Scale")
      .value("None_", Scale::None)
      .value("Quarter", Scale::Quarter)
      .value("Sqrt", Scale::Sqrt)
      .value("ThreeQuarters", Scale::ThreeQuarters);

  py::class_<LimitLaw>(m, "LimitLaw")
      .def_static("gaussian", &LimitLaw::gaussian, py::arg("mean"), py::arg("variance"))
      .def_static("half_normal", &LimitLaw::half_normal, py::arg("variance"), py::arg("sign"))
      .def_static("quartic", &LimitLaw::quartic, py::arg("h4"), py::arg("drift"))
      .def_static("point_mass", &LimitLaw::point_mass, py::arg("location"))
      .def_static("mixture", &LimitLaw::mixture, py::arg("parts"))
      .def_property_readonly("kind", &LimitLaw::kind)
      .def_property_readonly("id", &LimitLaw::id)
      .def_readonly("scale", &LimitLaw::scale)
      .def_readonly("centering", &LimitLaw::centering)
      .def("pdf", &LimitLaw::pdf)
      .def("cdf", &LimitLaw::cdf)
      .def("cdf_left", &LimitLaw::cdf_left)
      .def("atoms", &LimitLaw::atoms)
      .def("mass_at", &LimitLaw::mass_at)
      .def("mean", &LimitLaw::mean)
      .def(
          "sample",
          [](const LimitLaw& law, std::size_t count, std::uint64_t seed, std::uint64_t stream) {
            RngStream rng(seed, stream);
            std::vector<double> out(count);
            for (auto& x : out) x = law.sample(rng);
            return out;
          },
          py::arg("count"), py::arg("seed") = 1, py::arg("stream") = 0)
      .def("__repr__", [](const LimitLaw& law) { return "<LimitLaw " + law.id() + ">"; });

  py::class_<GLaw>(m, "GLaw")
      .def("cdf", &GLaw::cdf)
      .def_property_readonly("id", &GLaw::id)
      .def_property_readonly("slope", &GLaw::slope)
      .def_readonly("centering", &GLaw::centering);

  m.def("quartic_law", &LimitLaw::quartic, py::arg("h4"), py::arg("drift"));
  m.def(
      "g_law",
      [](int which, double beta, double h, int p) {
        if (which != 1 && which != 2) throw std::invalid_argument("which must be 1 or 2");
        return GLaw(which == 1 ? GLaw::Which::Field : GLaw::Which::Temperature, analyze(beta, h, p));
      },
      py::arg("which"), py::arg("beta"), py::arg("h"), py::arg("p"));
  m.def("sigma_limit", &sigma_limit, py::arg("analysis"));
  m.def("h_mle_limit", &h_mle_limit, py::arg("analysis"));
  m.def("beta_mle_limit", &beta_mle_limit, py::arg("analysis"));
  m.def("gamma_p", &gamma_p, py::arg("p"));

  m.def(
      "sample_mean",
      [](const MagnetizationLaw& law, std::size_t count, std::uint64_t seed, std::uint64_t stream) {
        const MagnetizationSampler sampler(law);
        RngStream rng(seed, stream);
        std::vector<double> out(count);
        for (auto& x : out) x = sampler.draw(rng);
        return out;
      },
      py::arg("law"), py::arg("count") = 1, py::arg("seed") = 1, py::arg("stream") = 0);
  m.def(
      "sample_spins",
      [](const ModelParams& params, std::uint64_t seed, std::uint64_t stream, std::int64_t cap) {
        RngStream rng(seed, stream);
        return sample_spins(params, rng, cap);
      },
      py::arg("params"), py::arg("seed") = 1, py::arg("stream") = 0, py::arg("cap") = kDefaultSpinCap);

  py::enum_<Statistic>(m, "Statistic")
      .value("SigmaScaled", Statistic::SigmaScaled)
      .value("HMle", Statistic::HMle)
      .value("BetaMle", Statistic::BetaMle);

  py::class_<ComparisonReport>(m, "ComparisonReport")
      .def_readonly("ks_statistic", &ComparisonReport::ks_statistic)
      .def_readonly("n_effective", &ComparisonReport::n_effective)
      .def_readonly("limit_law_id", &ComparisonReport::limit_law_id)
      .def_readonly("tolerance", &ComparisonReport::tolerance)
      .def_readonly("pass_", &ComparisonReport::pass)
      .def_readonly("exact_ks", &ComparisonReport::exact_ks)
      .def_readonly("dropped_mass", &ComparisonReport::dropped_mass);

  m.def(
      "run_histogram",
      [](double beta, double h, int p, std::int64_t n, Statistic statistic, std::int64_t replications,
         std::uint64_t seed, int threads, double tolerance, bool exact, const std::string& output_path) {
        ExperimentSpec spec;
        spec.params = {beta, h, p, n};
        spec.statistic = statistic;
        spec.replications = replications;
        spec.seed = seed;
        spec.threads = threads;
        spec.tolerance = tolerance;
        spec.exact = exact;
        spec.output_path = output_path;
        py::gil_scoped_release release;
        return run_histogram(spec).report;
      },
      py::arg("beta"), py::arg("h"), py::arg("p"), py::arg("n"), py::arg("statistic") = Statistic::SigmaScaled,
      py::arg("replications") = 10000, py::arg("seed") = 1, py::arg("threads") = 1, py::arg("tolerance") = 0.02,
      py::arg("exact") = true, py::arg("output_path") = "");

  m.def(
      "phase_diagram",
      [](int p, double beta_min, double beta_max, double h_min, double h_max, int beta_points, int h_points) {
        py::list out;
        for (const auto& row : phase_diagram(p, beta_min, beta_max, h_min, h_max, beta_points, h_points, 1)) {
          out.append(py::make_tuple(row.layer, row.beta, row.h, std::string(to_string(row.analysis.classification))));
        }
        return out;
      },
      py::arg("p"), py::arg("beta_min"), py::arg("beta_max"), py::arg("h_min"), py::arg("h_max"),
      py::arg("beta_points"), py::arg("h_points"));
}
