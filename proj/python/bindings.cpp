#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tiltwing/checks.hpp"
#include "tiltwing/cruise.hpp"
#include "tiltwing/harness.hpp"
#include "tiltwing/report.hpp"
#include "tiltwing/trim.hpp"

namespace py = pybind11;
using namespace tiltwing;

namespace {

py::dict trim_dict(const TrimVariables& x)
{
    py::dict d;
    d["theta_t"] = x.pitch;
    d["delta_w"] = x.wing;
    d["delta_plr"] = x.main_throttle;
    d["delta_al"] = x.flaperon;
    d["delta_e"] = x.elevator;
    d["delta_pt"] = x.tail_throttle;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Tiltwing VTOL model, trim and control";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<TrimError>(m, "TrimError", PyExc_RuntimeError);
    py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);

    py::class_<VehicleParams>(m, "VehicleParams")
        .def_readwrite("mass", &VehicleParams::mass)
        .def_readwrite("inertia", &VehicleParams::inertia)
        .def_readwrite("gravity", &VehicleParams::gravity)
        .def_readwrite("air_density", &VehicleParams::air_density)
        .def("wing_span", &VehicleParams::wing_span)
        .def("to_yaml", [](const VehicleParams& p) { return serialize_vehicle_config(p); });

    m.def("default_vehicle", &default_vehicle);
    m.def("load_vehicle", [](const std::filesystem::path& path) { return load_vehicle_config(path); });
    m.def("parse_vehicle", &parse_vehicle_config);
    m.def("validate", &validate);

    py::class_<ActuatorCommands>(m, "ActuatorCommands")
        .def(py::init<>())
        .def_readwrite("wing", &ActuatorCommands::wing)
        .def_readwrite("prop_left", &ActuatorCommands::prop_left)
        .def_readwrite("prop_right", &ActuatorCommands::prop_right)
        .def_readwrite("prop_tail", &ActuatorCommands::prop_tail)
        .def_readwrite("aileron_left", &ActuatorCommands::aileron_left)
        .def_readwrite("aileron_right", &ActuatorCommands::aileron_right)
        .def_readwrite("elevator", &ActuatorCommands::elevator)
        .def_readwrite("rudder", &ActuatorCommands::rudder)
        .def_readwrite("tail_tilt", &ActuatorCommands::tail_tilt);

    m.def(
        "wrench",
        [](const VehicleParams& p, const ActuatorCommands& cmd, const Vec3& velocity, const Vec3& euler,
           const Vec3& body_rate, const Vec3& wind) {
            RigidBodyState s;
            s.velocity = velocity;
            s.attitude = rotation_from_euler(euler.x(), euler.y(), euler.z());
            s.body_rate = body_rate;
            const Wrench w = net_wrench(air_velocity_body(s, wind), s.body_rate, actuate(cmd, p), p);
            return py::make_tuple(w.force, w.moment);
        },
        py::arg("vehicle"), py::arg("commands"), py::arg("velocity") = Vec3::Zero(),
        py::arg("euler") = Vec3::Zero(), py::arg("body_rate") = Vec3::Zero(), py::arg("wind") = Vec3::Zero(),
        "Body-frame aerodynamic (force, moment) for an inertial velocity and Euler attitude.");

    m.def(
        "solve_trim",
        [](const VehicleParams& p, double va, double gamma) {
            const TrimPoint t = solve_trim_point(va, gamma, hover_seed().initial_guess, p, TrimSettings{});
            py::dict d = trim_dict(t.x);
            d["feasible"] = t.feasible;
            d["cost"] = t.cost;
            d["res_v"] = t.accel_residual;
            d["res_th"] = t.pitch_accel_residual;
            return d;
        },
        py::arg("vehicle"), py::arg("va"), py::arg("gamma"), "Single trim solve from the hover initial guess.");

    py::class_<TrimMap>(m, "TrimMap")
        .def_readonly("airspeeds", &TrimMap::airspeeds)
        .def_readonly("gammas", &TrimMap::gammas)
        .def("feasible_count", &TrimMap::feasible_count)
        .def("to_csv", [](const TrimMap& map) { return trim_map_csv(map); })
        .def("lookup", [](const TrimMap& map, double va, double gamma) {
            const TrimLookup r = lookup_trim(map, va, gamma);
            py::dict d = trim_dict(r.x);
            d["clamped"] = r.clamped;
            d["fallback"] = r.fallback;
            return d;
        });

    m.def(
        "build_trim_map",
        [](const VehicleParams& p, std::vector<double> airspeeds, std::vector<double> gammas, unsigned threads) {
            TrimGrid g;
            if (!airspeeds.empty()) {
                g.airspeed_min = airspeeds.front();
                g.airspeed_max = airspeeds.back();
                g.airspeed_step = airspeeds.size() > 1 ? airspeeds[1] - airspeeds[0] : 1.0;
            }
            if (!gammas.empty()) {
                g.gamma_min = gammas.front();
                g.gamma_max = gammas.back();
                g.gamma_step = gammas.size() > 1 ? gammas[1] - gammas[0] : 1.0;
            }
            TrimBuildOptions o;
            o.threads = threads;
            py::gil_scoped_release release;
            return build_trim_map(g, hover_seed(), p, TrimSettings{}, o);
        },
        py::arg("vehicle"), py::arg("airspeeds") = std::vector<double>{}, py::arg("gammas") = std::vector<double>{},
        py::arg("threads") = 1u, "Builds a trim map on a uniform grid (default grid when axes are empty).");
    m.def("read_trim_map", [](const std::filesystem::path& path) { return read_trim_map_csv(path); });
    m.def("parse_trim_map", &parse_trim_map_csv);

    m.def(
        "run_scenario",
        [](const std::string& scenario_text, const VehicleParams& p, const TrimMap* map) {
            const Scenario sc = parse_scenario(scenario_text);
            RunLog log;
            {
                py::gil_scoped_release release;
                log = run_scenario(sc, p, map);
            }
            return log_csv(log);
        },
        py::arg("scenario"), py::arg("vehicle"), py::arg("map") = nullptr,
        "Runs a scenario given as text and returns the log CSV.");
    m.def(
        "report",
        [](const std::string& log_text) {
            const Report r = make_report(parse_log_csv(log_text));
            py::dict d;
            for (const auto& [k, v] : r.metrics()) {
                d[py::str(k)] = v;
            }
            return d;
        },
        py::arg("log"), "Metrics of a log CSV as a dict.");

    m.def(
        "wls_allocate",
        [](const Mat2& j, const Vec2& f, const Mat2& w, const Mat2& k, double max_pitch, double trim_throttle) {
            return wls_allocate(j, f, w, k, max_pitch, trim_throttle);
        },
        py::arg("J"), py::arg("F"), py::arg("W"), py::arg("K"), py::arg("max_pitch") = deg2rad(15.0),
        py::arg("trim_throttle") = 0.5);
    m.def("turn_coordination", &turn_coordination, py::arg("roll"), py::arg("v_ax"), py::arg("g") = 9.81,
          py::arg("v_min") = 5.0);
    m.def("lookup_velocity", [](const Vec2& desired, const Vec2& actual) {
        return lookup_velocity(desired, actual, LookupBounds{});
    });

    m.def("check", [](const VehicleParams& p) {
        py::list out;
        for (const CheckResult& r : run_checks(p)) {
            out.append(py::make_tuple(r.name, r.passed, r.value));
        }
        return out;
    });
}
