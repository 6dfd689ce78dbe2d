#include <sstream>
#include <string>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wvamp/cli.hpp"
#include "wvamp/errors.hpp"
#include "wvamp/optomech.hpp"
#include "wvamp/spectral.hpp"
#include "wvamp/weakmeas.hpp"

namespace py = pybind11;
using namespace wvamp;

namespace {

MirrorState mirror_from(const std::string& state, double mean_number, double beta) {
  if (state == "thermal") return MirrorState::thermal(mean_number);
  if (state == "coherent") return MirrorState::coherent(mean_number, beta);
  throw InvalidParameter("state must be 'thermal' or 'coherent'");
}

Quadrature quadrature_from(const std::string& q) {
  if (q == "x") return Quadrature::X;
  if (q == "y") return Quadrature::Y;
  throw InvalidParameter("quadrature must be 'x' or 'y'");
}

}  // namespace

PYBIND11_MODULE(_wvamp, m) {
  m.doc() = "Weak-value amplification of mirror quadratures with a single photon";

  py::register_exception<RegimeViolation>(m, "RegimeViolation", PyExc_RuntimeError);
  py::register_exception<UndefinedWeakValue>(m, "UndefinedWeakValue", PyExc_ValueError);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init([](double omega, double g0, double gamma_cav, double epsilon) {
             return ExperimentConfig::with_detuned_carrier(omega, g0, gamma_cav, epsilon);
           }),
           py::arg("omega") = 1e6, py::arg("g0") = 5e2, py::arg("gamma_cav") = 1e4,
           py::arg("epsilon") = 1e2)
      .def_readwrite("omega", &ExperimentConfig::omega)
      .def_readwrite("g0", &ExperimentConfig::g0)
      .def_readwrite("gamma_cav", &ExperimentConfig::gamma_cav)
      .def_readwrite("epsilon", &ExperimentConfig::epsilon)
      .def_readwrite("pulse_offset", &ExperimentConfig::pulse_offset)
      .def_property_readonly("gamma_eff", &ExperimentConfig::gamma_eff)
      .def_property_readonly("bare_coupling", &ExperimentConfig::bare_coupling);

  m.def(
      "weak_values",
      [](double delta, double theta) {
        const PostselectionSpec ps = PostselectionSpec::make(delta, theta);
        Ket psi = Ket::Zero(3);
        psi(kCarrier) = 1.0;
        const WeakValue w = weak_values(psi, postselection_ket(ps), build_tri_mode());
        return py::make_tuple(w.jx, w.jy);
      },
      py::arg("delta"), py::arg("theta") = 0.0,
      "Numerical weak values (Jx_w, Jy_w) for the dark-port postselection.");

  m.def(
      "closed_form_weak_values",
      [](double delta, double theta) {
        const WeakValue w = closed_form_weak_values(PostselectionSpec::make(delta, theta));
        return py::make_tuple(w.jx, w.jy);
      },
      py::arg("delta"), py::arg("theta") = 0.0);

  m.def(
      "amplification_curve",
      [](const ExperimentConfig& cfg, double mean_number, const std::string& state,
         std::vector<double> deltas, double theta) {
        const MirrorKind kind = mirror_from(state, mean_number, 0.0).kind;
        if (deltas.empty()) deltas = default_delta_grid(cfg, mean_number);
        py::dict out;
        std::vector<double> delta, ps, f;
        std::vector<bool> ok;
        for (const auto& p : amplification_curve(cfg, mean_number, kind, deltas, theta)) {
          delta.push_back(p.delta);
          ps.push_back(p.ps_probability);
          f.push_back(p.f);
          ok.push_back(p.regime_ok);
        }
        out["delta"] = delta;
        out["ps_probability"] = ps;
        out["f"] = f;
        out["regime_ok"] = ok;
        return out;
      },
      py::arg("cfg"), py::arg("mean_number"), py::arg("state") = "thermal",
      py::arg("deltas") = std::vector<double>{}, py::arg("theta") = 0.0,
      "Amplification factor f and postselection probability over delta.");

  m.def(
      "verify",
      [](const ExperimentConfig& cfg, const std::string& state, double mean_number, double delta,
         double theta, double beta, int times, const std::string& quadrature) {
        const VerificationResult r =
            verify_closed_form(cfg, mirror_from(state, mean_number, beta),
                               PostselectionSpec::make(delta, theta),
                               period_times(cfg.omega, times), quadrature_from(quadrature));
        py::dict out;
        std::vector<double> t, exact, analytic;
        for (const auto& row : r.rows) {
          t.push_back(row.t);
          exact.push_back(row.exact);
          analytic.push_back(row.analytic);
        }
        out["t"] = t;
        out["exact"] = exact;
        out["analytic"] = analytic;
        out["fitted_amplitude"] = r.fit.amplitude;
        out["fitted_phase"] = r.fit.phase;
        out["analytic_amplitude"] = r.analytic_amplitude;
        out["relative_amplitude_error"] = r.relative_amplitude_error;
        out["phase_error"] = r.phase_error;
        out["tolerance"] = r.tolerance;
        out["ps_probability"] = r.ps_probability;
        out["pass"] = r.pass;
        return out;
      },
      py::arg("cfg"), py::arg("state"), py::arg("mean_number"), py::arg("delta"),
      py::arg("theta") = 0.0, py::arg("beta") = 0.0, py::arg("times") = 12,
      py::arg("quadrature") = "x",
      "Exact conditional quadrature against the closed form over one period.");

  m.def("displaced_overlap", &displaced_overlap, py::arg("m"), py::arg("k"), py::arg("alpha"));

  m.def(
      "tri_mode_reduction",
      [](const ExperimentConfig& cfg, Index n, double tolerance) {
        const ReductionReport r = validate_tri_mode_reduction(cfg, n, tolerance);
        py::dict out;
        py::list branches;
        for (const auto& b : r.branches) {
          py::dict d;
          d["label"] = b.label;
          d["m"] = b.m;
          d["measured"] = b.measured;
          d["expected"] = b.expected;
          d["deviation"] = b.deviation;
          branches.append(d);
        }
        out["branches"] = branches;
        out["global_phase"] = r.global_phase;
        out["total_norm"] = r.total_norm;
        out["leakage"] = r.leakage;
        out["max_deviation"] = r.max_deviation;
        out["full_vs_peak"] = r.full_vs_peak;
        out["cross_overlap"] = r.cross_overlap;
        out["regime_ok"] = r.regime_ok;
        out["pass"] = r.pass;
        return out;
      },
      py::arg("cfg"), py::arg("n"), py::arg("tolerance") = 0.05,
      "Projection of the scattered amplitudes onto the three photon modes.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line front end; returns (exit_code, stdout, stderr).");
}
