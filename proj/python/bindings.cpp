#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ahss/experiment.hpp"

namespace py = pybind11;
using namespace ahss;

PYBIND11_MODULE(_ahss, m) {
    m.doc() = "Harmonic steady-state disturbance rejection toolkit";

    py::class_<StateSpaceModel>(m, "StateSpaceModel")
        .def(py::init<Mat, Mat, Mat, Mat, Mat, Mat, Vec>(), py::arg("A"), py::arg("B"),
             py::arg("C"), py::arg("D"), py::arg("D1"), py::arg("D2"), py::arg("x0"))
        .def_readonly("A", &StateSpaceModel::A)
        .def_readonly("B", &StateSpaceModel::B)
        .def_readonly("C", &StateSpaceModel::C)
        .def_readonly("D", &StateSpaceModel::D)
        .def_readonly("D1", &StateSpaceModel::D1)
        .def_readonly("D2", &StateSpaceModel::D2)
        .def_readonly("x0", &StateSpaceModel::x0);

    py::enum_<Port>(m, "Port").value("Control", Port::Control).value("Disturbance", Port::Disturbance);

    m.def("transfer_at", &transfer_at, py::arg("model"), py::arg("omega"),
          py::arg("port") = Port::Control);
    m.def("is_asymptotically_stable", &is_asymptotically_stable);
    m.def(
        "simulate",
        [](const StateSpaceModel& model, const SignalSource& u, const SignalSource& d, double t0,
           double t1, double fs) {
            SimResult r = simulate(model, u, d, t0, t1, fs);
            return py::make_tuple(r.t, r.y, r.x_end);
        },
        py::arg("model"), py::arg("control"), py::arg("disturbance"), py::arg("t0"), py::arg("t1"),
        py::arg("sample_rate"));

    py::class_<Phasor>(m, "Phasor")
        .def(py::init<double, CVec>(), py::arg("omega"), py::arg("value"))
        .def_readonly("omega", &Phasor::omega)
        .def_readonly("value", &Phasor::value);

    m.def("synthesize", [](const std::vector<Phasor>& p, double t) {
        return synthesize(std::span<const Phasor>(p.data(), p.size()), t);
    });
    m.def("extract", &extract, py::arg("samples"), py::arg("sample_times"), py::arg("omega"));
    m.def("avg_power", py::overload_cast<const Phasor&>(&avg_power));

    py::class_<HarmonicPlantMap>(m, "HarmonicPlantMap")
        .def(py::init<CMat, CVec>(), py::arg("M"), py::arg("d"))
        .def_readonly("M", &HarmonicPlantMap::M)
        .def_readonly("d", &HarmonicPlantMap::d);
    m.def("hss_response", &hss_response);

    py::class_<OptimalControl>(m, "OptimalControl")
        .def_readonly("u_star", &OptimalControl::u_star)
        .def_readonly("y_residual", &OptimalControl::y_residual)
        .def_readonly("J_min", &OptimalControl::J_min);
    m.def("optimal_control", &optimal_control, py::arg("M_star"), py::arg("d_hat"));

    m.def("hss_gain_bound", [](const CMat& Me, const CMat& Ms) {
        GainBound b = hss_gain_bound(Me, Ms);
        return py::make_tuple(b.lambda, b.rho_max);
    });
    m.def("hss_limits", [](const CMat& Me, const CMat& Ms, const CVec& d, const CVec& u0) {
        HssLimits lim = hss_limits(Me, Ms, d, u0);
        return py::make_tuple(lim.u_inf, lim.y_inf);
    });
    m.def("ahss_gradient", &ahss_gradient);
    m.def("ahss_step_size", &ahss_step_size);

    py::class_<AhssGains>(m, "AhssGains")
        .def(py::init([](double mu, double gamma, double nu1, double nu2) {
                 AhssGains g{mu, gamma, nu1, nu2};
                 g.validate();
                 return g;
             }),
             py::arg("mu"), py::arg("gamma"), py::arg("nu1"), py::arg("nu2"))
        .def_readwrite("mu", &AhssGains::mu)
        .def_readwrite("gamma", &AhssGains::gamma)
        .def_readwrite("nu1", &AhssGains::nu1)
        .def_readwrite("nu2", &AhssGains::nu2);
    m.def("default_gains", &default_gains);

    py::class_<HssController>(m, "HssController")
        .def(py::init<CMat, double, CVec>(), py::arg("M_e"), py::arg("rho"), py::arg("u0"))
        .def("step", &HssController::step)
        .def_property_readonly("command", &HssController::command);

    py::class_<AhssController>(m, "AhssController")
        .def(py::init<CMat, CVec, AhssGains>(), py::arg("M0"), py::arg("u0"), py::arg("gains"))
        .def("step", &AhssController::step)
        .def_property_readonly("command", &AhssController::command)
        .def_property_readonly("estimate", &AhssController::estimate)
        .def_property_readonly("collapsed", &AhssController::collapsed);

    py::class_<DuctGeometry>(m, "DuctGeometry")
        .def(py::init<>())
        .def_readwrite("length", &DuctGeometry::length)
        .def_readwrite("xi_disturbance", &DuctGeometry::xi_disturbance)
        .def_readwrite("xi_speakers", &DuctGeometry::xi_speakers)
        .def_readwrite("xi_microphones", &DuctGeometry::xi_microphones)
        .def_readwrite("phase_speed", &DuctGeometry::phase_speed)
        .def_readwrite("air_density", &DuctGeometry::air_density)
        .def_readwrite("speaker_area", &DuctGeometry::speaker_area)
        .def_readwrite("mode_count", &DuctGeometry::mode_count)
        .def_readwrite("damping", &DuctGeometry::damping);
    m.def("build_duct", &build_duct);
    m.def("mode_shape", &mode_shape);
    m.def("natural_frequency", &natural_frequency);

    py::class_<LyapunovConstants>(m, "LyapunovConstants")
        .def_readonly("a", &LyapunovConstants::a)
        .def_readonly("b_stab", &LyapunovConstants::b_stab)
        .def_readonly("b_conv", &LyapunovConstants::b_conv)
        .def_readonly("c1", &LyapunovConstants::c1)
        .def_readonly("c2", &LyapunovConstants::c2);
    m.def("lyap_constants", &lyap_constants);
    m.def("prop1_gap", &prop1_gap);
    m.def("lyap_V", &lyap_V);

    py::class_<StepRecord>(m, "StepRecord")
        .def_readonly("k", &StepRecord::k)
        .def_readonly("y", &StepRecord::y)
        .def_readonly("u", &StepRecord::u)
        .def_readonly("M", &StepRecord::M)
        .def_readonly("eta", &StepRecord::eta)
        .def_readonly("V", &StepRecord::V)
        .def_readonly("dV", &StepRecord::dV)
        .def_readonly("dV_M", &StepRecord::dV_M)
        .def_readonly("dV_y", &StepRecord::dV_y)
        .def_readonly("prop1_gap", &StepRecord::prop1_gap);
    py::class_<StepTrace>(m, "StepTrace")
        .def_readonly("y1", &StepTrace::y1)
        .def_readonly("constants", &StepTrace::constants)
        .def_readonly("steps", &StepTrace::steps);
    m.def("siso_closed_loop_iterate", &siso_closed_loop_iterate, py::arg("M_star"),
          py::arg("d_hat"), py::arg("u0"), py::arg("M0"), py::arg("gains"), py::arg("K"));

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("t", &RunResult::t)
        .def_readonly("y", &RunResult::y)
        .def_readonly("u", &RunResult::u)
        .def_readonly("windows", &RunResult::windows)
        .def_readonly("diverged", &RunResult::diverged)
        .def_readonly("oracle_violations", &RunResult::oracle_violations);
    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_readwrite("output_dir", &ExperimentConfig::output_dir);
    m.def("preset", &preset);
    m.def("load_config", &load_config);
    m.def("run", &run);
    m.def("write_csv", &write_csv);
}
