#include "ppfa/error.hpp"
#include "ppfa/model_io.hpp"
#include "ppfa/model_select.hpp"
#include "ppfa/pipeline.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>
#include <vector>

namespace py = pybind11;
using namespace ppfa;

namespace {

template <typename T, typename F>
py::array_t<T> column(const MonitorReport& report, F&& get)
{
  py::array_t<T> out(static_cast<py::ssize_t>(report.rows.size()));
  auto view = out.template mutable_unchecked<1>();
  for (std::size_t k = 0; k < report.rows.size(); ++k) {
    view(static_cast<py::ssize_t>(k)) = get(report.rows[k]);
  }
  return out;
}

// Report as a dict of equal-length arrays, one per report column.
py::dict report_dict(const MonitorReport& report)
{
  py::dict d;
  d["index"] = column<std::int64_t>(report, [](const ReportRow& r) { return r.index; });
  d["t2"] = column<double>(report, [](const ReportRow& r) { return r.t2; });
  d["spe"] = column<double>(report, [](const ReportRow& r) { return r.spe; });
  d["di"] = column<double>(report, [](const ReportRow& r) { return r.di; });
  d["flag_t2"] = column<bool>(report, [](const ReportRow& r) { return r.flag_t2; });
  d["flag_spe"] = column<bool>(report, [](const ReportRow& r) { return r.flag_spe; });
  d["flag_di"] = column<bool>(report, [](const ReportRow& r) { return r.flag_di; });
  d["burn_in"] = column<bool>(report, [](const ReportRow& r) { return r.burn_in; });
  py::list verdicts;
  for (const ReportRow& r : report.rows) {
    verdicts.append(verdict_name(r.verdict));
  }
  d["verdict"] = verdicts;
  return d;
}

EmConfig em_config(Index r, Index s, std::uint64_t seed, int max_iterations, double tol,
                   const GaConfig& ga)
{
  EmConfig cfg;
  cfg.r = r;
  cfg.s = s;
  cfg.seed = seed;
  cfg.max_iterations = max_iterations;
  cfg.loglik_rel_tol = tol;
  cfg.ga = ga;
  return cfg;
}

} // namespace

PYBIND11_MODULE(_ppfa, m)
{
  m.doc() = "Probabilistic predictable feature analysis: training and online monitoring";

  // PpfaError carries the failure class ("io", "config", "numeric",
  // "convergence") in its `category` attribute.
  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result([&] {
    return py::object(py::exception<Error>(m, "PpfaError", PyExc_RuntimeError));
  });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) {
        std::rethrow_exception(p);
      }
    } catch (const Error& e) {
      const py::object& type = error_type.get_stored();
      py::object exc = type(e.what());
      exc.attr("category") = category_name(e.category());
      PyErr_SetObject(type.ptr(), exc.ptr());
    }
  });

  py::class_<WhiteningTransform>(m, "WhiteningTransform")
    .def_readonly("mean", &WhiteningTransform::mean)
    .def_readonly("eigvecs", &WhiteningTransform::eigvecs)
    .def_readonly("singvals", &WhiteningTransform::singvals)
    .def("apply", &WhiteningTransform::apply_rows, py::arg("data"))
    .def("invert", &WhiteningTransform::invert_rows, py::arg("data"));

  py::class_<ModelParams>(m, "ModelParams")
    .def(py::init([](Eigen::MatrixXd beta, Eigen::MatrixXd H, Eigen::VectorXd sigma2) {
           ModelParams p;
           p.beta = std::move(beta);
           p.H = std::move(H);
           p.sigma2 = std::move(sigma2);
           set_unit_variance_noise(p);
           validate(p);
           return p;
         }),
         py::arg("beta"), py::arg("H"), py::arg("sigma2"),
         "tau2 follows from beta so that every latent has unit variance.")
    .def_readonly("beta", &ModelParams::beta)
    .def_readonly("H", &ModelParams::H)
    .def_readonly("tau2", &ModelParams::tau2)
    .def_readonly("sigma2", &ModelParams::sigma2)
    .def_property_readonly("m", &ModelParams::m)
    .def_property_readonly("r", &ModelParams::r)
    .def_property_readonly("s", &ModelParams::s);

  py::class_<ControlLimits>(m, "ControlLimits")
    .def_readonly("alpha", &ControlLimits::alpha)
    .def_readonly("psi_t2", &ControlLimits::psi_t2)
    .def_readonly("psi_spe", &ControlLimits::psi_spe)
    .def_readonly("psi_di", &ControlLimits::psi_di);

  py::class_<PpfaModel>(m, "Model")
    .def_readonly("whitening", &PpfaModel::whitening)
    .def_readonly("params", &PpfaModel::params)
    .def_readonly("limits", &PpfaModel::limits)
    .def_property_readonly("D", [](const PpfaModel& pm) { return pm.dynamics.D; })
    .def("to_json", &model_to_string)
    .def_static("from_json", &model_from_string, py::arg("text"));

  py::class_<GaConfig>(m, "GaConfig")
    .def(py::init<>())
    .def_readwrite("population_size", &GaConfig::population_size)
    .def_readwrite("generations", &GaConfig::generations)
    .def_readwrite("crossover_rate", &GaConfig::crossover_rate)
    .def_readwrite("mutation_rate", &GaConfig::mutation_rate)
    .def_readwrite("mutation_scale", &GaConfig::mutation_scale)
    .def_readwrite("lambda_penalty", &GaConfig::lambda_penalty)
    .def_readwrite("elitism_count", &GaConfig::elitism_count)
    .def_readwrite("tournament_size", &GaConfig::tournament_size)
    .def_readwrite("seed", &GaConfig::seed);

  py::class_<StreamMonitor>(m, "StreamMonitor")
    .def(py::init<PpfaModel>(), py::arg("model"))
    .def(
      "push",
      [](StreamMonitor& mon, const Eigen::MatrixXd& rows) {
        MonitorReport report;
        mon.push_rows(rows, report);
        return report_dict(report);
      },
      py::arg("rows"), "Scores raw rows, carrying the filter state to the next call.")
    .def_property_readonly("processed", &StreamMonitor::processed);

  m.def("fit_whitening", &fit_whitening, py::arg("data"));

  m.def("random_stable_model", &random_stable_model, py::arg("m"), py::arg("r"), py::arg("s"),
        py::arg("sigma2"), py::arg("seed"), py::arg("max_root") = 0.9);

  m.def(
    "simulate",
    [](const ModelParams& p, Index n, std::uint64_t seed) {
      Simulation sim = simulate(p, n, seed);
      return py::make_tuple(sim.observations, sim.latents);
    },
    py::arg("params"), py::arg("n"), py::arg("seed"),
    "Returns (observations, latents).");

  m.def(
    "train",
    [](const Eigen::MatrixXd& data, Index r, Index s, double alpha, std::uint64_t seed,
       int max_iterations, double tol, const GaConfig& ga) {
      TrainResult res =
        train_model(data, em_config(r, s, seed, max_iterations, tol, ga), alpha);
      py::dict info;
      info["log_likelihood"] = res.log_likelihood;
      info["iterations"] = res.trace.iterations.size();
      info["best_iteration"] = res.trace.best_iteration;
      info["converged"] = res.trace.converged;
      info["warnings"] = res.trace.warnings;
      return py::make_tuple(std::move(res.model), info);
    },
    py::arg("data"), py::arg("r"), py::arg("s"), py::arg("alpha") = 0.99, py::arg("seed") = 0,
    py::arg("max_iterations") = 100, py::arg("tol") = 1e-6, py::arg("ga") = GaConfig{},
    "Trains on raw normal data. Returns (model, info).");

  m.def(
    "score",
    [](const PpfaModel& model, const Eigen::MatrixXd& data) {
      return report_dict(score_stream(model, data));
    },
    py::arg("model"), py::arg("data"));

  m.def(
    "kde_limit",
    [](const std::vector<double>& values, double alpha) {
      const KdeLimit lim = kde_limit(values, alpha);
      return py::make_tuple(lim.psi, lim.bandwidth);
    },
    py::arg("values"), py::arg("alpha"), "Returns (psi, bandwidth).");

  m.def("fdr", &fdr, py::arg("tp"), py::arg("fn"));
  m.def("far", &far, py::arg("fp"), py::arg("tn"));

  m.def(
    "select",
    [](const Eigen::MatrixXd& data, std::vector<Index> r_candidates,
       std::vector<Index> s_candidates, std::vector<double> magnitudes, double alpha,
       std::uint64_t seed, int max_iterations) {
      SelectionGrid grid;
      grid.r_candidates = std::move(r_candidates);
      grid.s_candidates = std::move(s_candidates);
      grid.injection.magnitudes = std::move(magnitudes);
      grid.injection.seed = seed;
      const SelectionResult res =
        select(data, grid, em_config(1, 1, seed, max_iterations, 1e-6, GaConfig{}), alpha);
      py::list board;
      for (const ScoreRow& row : res.scoreboard) {
        py::dict d;
        d["r"] = row.r;
        d["s"] = row.s;
        d["fdr"] = row.fdr;
        d["far"] = row.far;
        d["log_likelihood"] = row.log_likelihood;
        board.append(d);
      }
      py::list skipped;
      for (const SkippedPair& sp : res.skipped) {
        skipped.append(py::make_tuple(sp.r, sp.s, sp.reason));
      }
      py::dict out;
      out["r"] = res.r;
      out["s"] = res.s;
      out["scoreboard"] = board;
      out["skipped"] = skipped;
      return out;
    },
    py::arg("data"), py::arg("r_candidates") = std::vector<Index>{1, 2, 3},
    py::arg("s_candidates") = std::vector<Index>{1, 2, 3},
    py::arg("magnitudes") = std::vector<double>{1.0, 2.0, 4.0}, py::arg("alpha") = 0.99,
    py::arg("seed") = 0, py::arg("max_iterations") = 100);

  m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
  m.def("load_model", &load_model, py::arg("path"));
}
