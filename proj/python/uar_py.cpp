#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "uar/ar_model.hpp"
#include "uar/asymptotics.hpp"
#include "uar/bootstrap.hpp"
#include "uar/estimation.hpp"
#include "uar/experiments.hpp"
#include "uar/loss.hpp"
#include "uar/random.hpp"
#include "uar/stable.hpp"
#include "uar/statistics.hpp"

namespace py = pybind11;
using namespace uar;

namespace {

TimeSeries as_series(const std::vector<double>& values) {
  TimeSeries s;
  s.values = values;
  return s;
}

}  // namespace

PYBIND11_MODULE(_uar, m) {
  m.doc() = "Unstable AR(p) M-estimation with heavy-tailed innovations";

  py::register_exception<EstimationError>(m, "EstimationError", PyExc_RuntimeError);

  py::class_<RandomStream>(m, "RandomStream")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("derive", py::overload_cast<std::uint64_t>(&RandomStream::derive, py::const_), py::arg("tag"))
      .def("uniform", &RandomStream::uniform)
      .def("normal", &RandomStream::normal)
      .def_property_readonly("key", &RandomStream::key);

  // ---- innovations --------------------------------------------------------------
  py::enum_<InnovationFamily>(m, "InnovationFamily")
      .value("ExactSaS", InnovationFamily::ExactSaS)
      .value("SymmetricPareto", InnovationFamily::SymmetricPareto);

  py::class_<InnovationSpec>(m, "InnovationSpec")
      .def_static("exact", &InnovationSpec::exact, py::arg("alpha"), py::arg("scale") = 1.0)
      .def_static("pareto", &InnovationSpec::pareto, py::arg("alpha"), py::arg("scale") = 1.0)
      .def_readonly("alpha", &InnovationSpec::alpha)
      .def_readonly("family", &InnovationSpec::family)
      .def_readonly("scale", &InnovationSpec::scale)
      .def("__repr__", [](const InnovationSpec& s) {
        return "InnovationSpec(alpha=" + std::to_string(s.alpha) + ", family=" + to_string(s.family) +
               ", scale=" + std::to_string(s.scale) + ")";
      });

  m.def("sample_innovations",
        [](const InnovationSpec& spec, std::size_t n, std::uint64_t seed) {
          RandomStream rng(seed);
          return sample_innovations(spec, n, rng);
        },
        py::arg("spec"), py::arg("n"), py::arg("seed"));
  m.def("norming_constant", &norming_constant, py::arg("spec"), py::arg("n"));
  m.def("abs_tail_probability", &abs_tail_probability, py::arg("spec"), py::arg("x"));
  m.def("cdf", &cdf, py::arg("spec"), py::arg("x"));
  m.def("density", &density, py::arg("spec"), py::arg("x"));
  m.def("series_dispersion_constant", &series_dispersion_constant, py::arg("alpha"));

  // ---- losses -----------------------------------------------------------------
  py::class_<LossFunction>(m, "LossFunction")
      .def_readonly("name", &LossFunction::name)
      .def_readonly("knots", &LossFunction::knots)
      .def("rho", [](const LossFunction& l, double x) { return l.rho(x); })
      .def("psi", [](const LossFunction& l, double x) { return l.psi(x); })
      .def("psi_prime", [](const LossFunction& l, double x) { return l.psi_prime(x); })
      .def("__repr__", [](const LossFunction& l) { return "LossFunction(" + l.name + ")"; });
  m.def("huber_loss", &huber_loss, py::arg("c") = 5.0);
  m.def("smoothed_huber_loss", &smoothed_huber_loss, py::arg("c") = 5.0, py::arg("fraction") = 0.01);
  m.def("quadratic_loss", &quadratic_loss);
  m.def("parse_loss", &parse_loss, py::arg("text"));

  // ---- model --------------------------------------------------------------------
  py::class_<ComplexPair>(m, "ComplexPair")
      .def(py::init([](double theta, std::size_t d) { return ComplexPair{theta, d}; }), py::arg("theta"),
           py::arg("multiplicity") = 1)
      .def_readwrite("theta", &ComplexPair::theta)
      .def_readwrite("multiplicity", &ComplexPair::multiplicity);

  py::class_<RootSpec>(m, "RootSpec")
      .def(py::init([](std::size_t r, std::size_t s, std::vector<ComplexPair> pairs) {
             RootSpec spec{r, s, std::move(pairs)};
             spec.validate();
             return spec;
           }),
           py::arg("r") = 0, py::arg("s") = 0, py::arg("pairs") = std::vector<ComplexPair>{})
      .def_readonly("r", &RootSpec::r)
      .def_readonly("s", &RootSpec::s)
      .def_readonly("pairs", &RootSpec::pairs)
      .def("order", &RootSpec::order)
      .def("describe", &RootSpec::describe);

  py::class_<ARModel>(m, "ARModel")
      .def(py::init([](std::vector<double> phi) { return ARModel{std::move(phi), std::nullopt}; }), py::arg("phi"))
      .def_readonly("phi", &ARModel::phi)
      .def("order", &ARModel::order);
  m.def("expand_polynomial", &expand_polynomial, py::arg("spec"));
  m.def("characteristic_roots", &characteristic_roots, py::arg("phi"));
  m.def("verify_unit_roots", &verify_unit_roots, py::arg("model"), py::arg("tol") = 1e-8,
        py::arg("cluster_tol") = 1e-4);

  py::class_<TimeSeries>(m, "TimeSeries")
      .def_readonly("values", &TimeSeries::values)
      .def_readonly("presample", &TimeSeries::presample)
      .def_readonly("innovations", &TimeSeries::innovations)
      .def("__len__", &TimeSeries::size)
      .def("to_csv", &TimeSeries::to_csv);
  m.def("simulate_ar", &simulate_ar, py::arg("model"), py::arg("innovations"),
        py::arg("warm_start") = std::vector<double>{});
  m.def("simulate_from_rest", &simulate_from_rest, py::arg("model"), py::arg("eps"));

  // ---- estimation ---------------------------------------------------------------
  py::class_<EstimationResult>(m, "EstimationResult")
      .def_readonly("phi_hat", &EstimationResult::phi_hat)
      .def_readonly("residuals", &EstimationResult::residuals)
      .def_readonly("objective", &EstimationResult::objective)
      .def_readonly("gradient_norm", &EstimationResult::gradient_norm)
      .def_readonly("iterations", &EstimationResult::iterations)
      .def_readonly("converged", &EstimationResult::converged)
      .def_readonly("method", &EstimationResult::method)
      .def_readonly("diagnostic", &EstimationResult::diagnostic);
  m.def("ls_estimate", [](const std::vector<double>& x, std::size_t p) { return ls_estimate(as_series(x), p); },
        py::arg("values"), py::arg("p"));
  m.def("m_estimate",
        [](const std::vector<double>& x, std::size_t p, const LossFunction& loss, double tol) {
          MEstimateOptions opt;
          opt.tol = tol;
          return m_estimate(as_series(x), p, loss, opt);
        },
        py::arg("values"), py::arg("p"), py::arg("loss"), py::arg("tol") = 1e-8);
  m.def("objective_and_gradient",
        [](const std::vector<double>& x, std::size_t p, const LossFunction& loss, const std::vector<double>& beta) {
          return objective_and_gradient(as_series(x), p, loss, beta);
        },
        py::arg("values"), py::arg("p"), py::arg("loss"), py::arg("beta"));

  // ---- asymptotics --------------------------------------------------------------
  py::class_<LossMoments>(m, "LossMoments")
      .def_readonly("e_psi2", &LossMoments::e_psi2)
      .def_readonly("e_psi_prime", &LossMoments::e_psi_prime)
      .def_readonly("corr_eps_psi", &LossMoments::corr_eps_psi);
  m.def("loss_moments", &loss_moments, py::arg("loss"), py::arg("spec"));
  m.def("binomial_matrix", &binomial_matrix, py::arg("r"), py::arg("alternating"));

  py::class_<LimitLawSample>(m, "LimitLawSample")
      .def_readonly("matrix", &LimitLawSample::matrix)
      .def_readonly("vector", &LimitLawSample::vector)
      .def_readonly("solution", &LimitLawSample::solution)
      .def_readonly("singular", &LimitLawSample::singular)
      .def_readonly("multiplicity", &LimitLawSample::multiplicity)
      .def("label", &LimitLawSample::label);
  m.def("limit_sample_complex",
        [](double theta, std::size_t d, double alpha, const LossMoments& mom, std::uint64_t seed, std::size_t mesh,
           std::size_t truncation) {
          LimitOptions opt;
          opt.mesh = mesh;
          opt.truncation = truncation;
          return limit_sample_complex(theta, d, alpha, mom, RandomStream(seed), opt);
        },
        py::arg("theta"), py::arg("d"), py::arg("alpha"), py::arg("moments"), py::arg("seed"),
        py::arg("mesh") = 1000, py::arg("truncation") = kDefaultTruncation);
  m.def("limit_sample_real_root",
        [](std::size_t r, double alpha, const LossMoments& mom, std::uint64_t seed, bool minus, std::size_t mesh,
           std::size_t truncation) {
          LimitOptions opt;
          opt.mesh = mesh;
          opt.truncation = truncation;
          return limit_sample_real_root(r, alpha, mom, RandomStream(seed), minus ? RealRoot::Minus : RealRoot::Plus,
                                        opt);
        },
        py::arg("r"), py::arg("alpha"), py::arg("moments"), py::arg("seed"), py::arg("minus") = false,
        py::arg("mesh") = 1000, py::arg("truncation") = kDefaultTruncation);

  // ---- bootstrap ----------------------------------------------------------------
  py::class_<MRule>(m, "MRule")
      .def_static("n_over_loglog", &MRule::n_over_loglog)
      .def_static("power", &MRule::power, py::arg("gamma"))
      .def_static("parse", &parse_m_rule, py::arg("text"))
      .def("resample_size", &MRule::resample_size, py::arg("n"), py::arg("p"))
      .def("describe", &MRule::describe);

  py::class_<BootstrapConfig>(m, "BootstrapConfig")
      .def(py::init<>())
      .def_readwrite("m_rule", &BootstrapConfig::m_rule)
      .def_readwrite("replicates", &BootstrapConfig::replicates)
      .def_readwrite("level", &BootstrapConfig::level)
      .def_readwrite("loss", &BootstrapConfig::loss)
      .def_readwrite("jobs", &BootstrapConfig::jobs);

  py::class_<PercentileInterval>(m, "PercentileInterval")
      .def_readonly("lower", &PercentileInterval::lower)
      .def_readonly("upper", &PercentileInterval::upper)
      .def("contains", &PercentileInterval::contains);

  py::class_<BootstrapSummary>(m, "BootstrapSummary")
      .def_readonly("estimates", &BootstrapSummary::estimates)
      .def_readonly("interval", &BootstrapSummary::interval)
      .def_readonly("center", &BootstrapSummary::center)
      .def_readonly("m_used", &BootstrapSummary::m_used)
      .def_readonly("dropped", &BootstrapSummary::dropped)
      .def_readonly("flagged", &BootstrapSummary::flagged)
      .def("to_csv", &BootstrapSummary::to_csv);
  m.def("bootstrap_replicates",
        [](const std::vector<double>& x, const std::vector<double>& phi_hat, const BootstrapConfig& cfg,
           std::uint64_t seed) { return bootstrap_replicates(as_series(x), phi_hat, cfg, RandomStream(seed)); },
        py::arg("values"), py::arg("phi_hat"), py::arg("config"), py::arg("seed"));

  py::class_<CoverageResult>(m, "CoverageResult")
      .def_readonly("coverage", &CoverageResult::coverage)
      .def_readonly("outer", &CoverageResult::outer)
      .def_readonly("kept", &CoverageResult::kept)
      .def_readonly("covered", &CoverageResult::covered)
      .def_readonly("failed_fits", &CoverageResult::failed_fits)
      .def_readonly("m_used", &CoverageResult::m_used);
  m.def("coverage_experiment",
        [](const ARModel& model, const InnovationSpec& spec, std::size_t n, const BootstrapConfig& cfg,
           std::size_t outer, std::uint64_t seed, std::size_t coefficient) {
          py::gil_scoped_release release;
          return coverage_experiment(model, spec, n, cfg, outer, RandomStream(seed), coefficient);
        },
        py::arg("model"), py::arg("spec"), py::arg("n"), py::arg("config"), py::arg("outer_reps"),
        py::arg("seed"), py::arg("coefficient") = 0);

  // ---- experiments --------------------------------------------------------------
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_static("parse", &parse_config, py::arg("text"))
      .def_static("load", &load_config, py::arg("path"))
      .def_readwrite("n_list", &ExperimentConfig::n_list)
      .def_readwrite("alpha_list", &ExperimentConfig::alpha_list)
      .def_readwrite("replicates", &ExperimentConfig::replicates)
      .def_readwrite("estimators", &ExperimentConfig::estimators)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("jobs", &ExperimentConfig::jobs)
      .def_readwrite("out_dir", &ExperimentConfig::out_dir)
      .def("model", &ExperimentConfig::model);

  py::class_<SummaryRow>(m, "SummaryRow")
      .def_readonly("n", &SummaryRow::n)
      .def_readonly("alpha", &SummaryRow::alpha)
      .def_readonly("estimator", &SummaryRow::estimator)
      .def_readonly("median", &SummaryRow::median)
      .def_readonly("ipr90", &SummaryRow::ipr90)
      .def_readonly("replicates", &SummaryRow::replicates)
      .def_readonly("failures", &SummaryRow::failures);
  m.def("mc_table",
        [](const ExperimentConfig& cfg) {
          py::gil_scoped_release release;
          return mc_table(cfg).rows;
        },
        py::arg("config"));
  m.def("mc_table_csv", [](const ExperimentConfig& cfg) { return mc_table(cfg).to_csv(); }, py::arg("config"));

  // ---- statistics ---------------------------------------------------------------
  m.def("ks_two_sample",
        [](const std::vector<double>& a, const std::vector<double>& b) {
          const auto r = stats::ks_two_sample(a, b);
          return std::make_pair(r.statistic, r.p_value);
        },
        py::arg("a"), py::arg("b"));
}
