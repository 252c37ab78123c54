#include <chrono>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "tiltwing/checks.hpp"
#include "tiltwing/harness.hpp"
#include "tiltwing/report.hpp"
#include "tiltwing/state_io.hpp"
#include "tiltwing/trim.hpp"

using namespace tiltwing;

namespace {

VehicleParams vehicle_or_default(const std::string& path)
{
    return path.empty() ? default_vehicle() : load_vehicle_config(path);
}

std::string source_name(const WrenchContribution& c)
{
    switch (c.kind) {
    case SourceKind::Propeller:
        return "propeller";
    case SourceKind::Segment:
        return "segment";
    case SourceKind::Fuselage:
        break;
    }
    return "fuselage";
}

int model_eval(const std::string& vehicle, const std::string& state_file, const std::string& act_file)
{
    const VehicleParams p = vehicle_or_default(vehicle);
    const StateInput in = load_state(state_file);
    const ActuatorSet act = actuate(load_actuators(act_file), p);
    const ForceMoment fm = total_wrench(in.state, act, p, in.wind);
    std::cout << "source,index,name,fx,fy,fz,mx,my,mz,alpha,stalled,thrust\n" << std::setprecision(10);
    for (const WrenchContribution& c : fm.breakdown) {
        std::string name;
        if (c.kind == SourceKind::Segment) {
            name = p.segments[static_cast<std::size_t>(c.index)].name;
        } else if (c.kind == SourceKind::Propeller) {
            name = c.index == kPropLeft ? "left" : c.index == kPropRight ? "right" : "tail";
        }
        const Wrench& w = c.wrench;
        std::cout << source_name(c) << ',' << c.index << ',' << name << ',' << w.force.x() << ','
                  << w.force.y() << ',' << w.force.z() << ',' << w.moment.x() << ',' << w.moment.y() << ','
                  << w.moment.z() << ',' << c.alpha << ',' << (c.stalled ? 1 : 0) << ',' << c.thrust << '\n';
    }
    std::cout << "total,-1,total," << fm.force.x() << ',' << fm.force.y() << ',' << fm.force.z() << ','
              << fm.moment.x() << ',' << fm.moment.y() << ',' << fm.moment.z() << ",0,0,0\n";
    return 0;
}

int trim_build(const std::string& vehicle, const std::string& out, unsigned threads)
{
    const VehicleParams p = vehicle_or_default(vehicle);
    TrimBuildOptions options;
    options.threads = threads;
    TrimBuildStats stats;
    const auto t0 = std::chrono::steady_clock::now();
    const TrimMap map = build_trim_map(TrimGrid{}, hover_seed(), p, TrimSettings{}, options, &stats);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_trim_map_csv(map, out);
    std::cerr << "trim map: " << map.feasible_count() << "/" << map.cells.size() << " feasible cells, "
              << stats.sweeps << " sweeps, " << stats.solves << " solves, " << std::fixed << std::setprecision(1)
              << secs << " s\n";
    return 0;
}

int trim_query(const std::string& path, double va, double gamma_deg)
{
    const TrimMap map = read_trim_map_csv(path);
    const TrimLookup r = lookup_trim(map, va, deg2rad(gamma_deg));
    std::cout << std::setprecision(10) << "theta_t_deg = " << rad2deg(r.x.pitch) << '\n'
              << "delta_w = " << r.x.wing << '\n'
              << "delta_plr = " << r.x.main_throttle << '\n'
              << "delta_al = " << r.x.flaperon << '\n'
              << "delta_e = " << r.x.elevator << '\n'
              << "delta_pt = " << r.x.tail_throttle << '\n'
              << "clamped = " << (r.clamped ? "true" : "false") << '\n'
              << "fallback = " << (r.fallback ? "true" : "false") << '\n';
    if (r.clamped) {
        std::cerr << "warning: query outside the map, clamped to the grid hull\n";
    }
    return 0;
}

int sim_run(const std::string& vehicle, const std::string& scenario, const std::string& map_path,
            const std::string& out)
{
    const VehicleParams p = vehicle_or_default(vehicle);
    const Scenario sc = load_scenario(scenario);
    std::optional<TrimMap> map;
    if (!map_path.empty()) {
        map = read_trim_map_csv(map_path);
    }
    if (sc.mode == ControlMode::Cruise && !map) {
        std::cerr << "error: cruise scenarios need --map\n";
        return 2;
    }
    const RunLog log = run_scenario(sc, p, map ? &*map : nullptr);
    write_log_csv(log, out);
    std::cerr << "wrote " << log.rows.size() << " rows to " << out << '\n';
    if (log.fault) {
        std::cerr << "integration fault: " << *log.fault << '\n';
        return 3;
    }
    return 0;
}

int report(const std::string& path, const std::string& out)
{
    const Report r = make_report(read_log_csv(path));
    std::cout << report_summary(r);
    if (!out.empty()) {
        std::ofstream f(out);
        f << report_csv(r);
        if (!f) {
            throw std::runtime_error("cannot write '" + out + "'");
        }
    }
    return 0;
}

int check(const std::string& vehicle)
{
    const VehicleParams p = vehicle_or_default(vehicle);
    bool ok = true;
    for (const CheckResult& r : run_checks(p)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << " (tol " << r.tolerance
                  << ")\n";
        ok = ok && r.passed;
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Tiltwing VTOL simulation and control"};
    app.require_subcommand(1);
    int rc = 0;

    auto* config = app.add_subcommand("config", "Vehicle configuration");
    config->require_subcommand(1);
    auto* validate_cmd = config->add_subcommand("validate", "Load and validate a vehicle config");
    std::string config_path;
    validate_cmd->add_option("path", config_path, "YAML file")->required()->check(CLI::ExistingFile);
    validate_cmd->callback([&] {
        load_vehicle_config(config_path);
        std::cout << "ok: " << config_path << '\n';
    });

    auto* model = app.add_subcommand("model", "Aerodynamic model");
    model->require_subcommand(1);
    auto* eval_cmd = model->add_subcommand("eval", "Wrench breakdown as CSV");
    std::string vehicle, state_file, act_file;
    eval_cmd->add_option("--vehicle", vehicle, "Vehicle config (default: built-in)")->check(CLI::ExistingFile);
    eval_cmd->add_option("--state", state_file, "State YAML")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--actuators", act_file, "Actuator YAML")->required()->check(CLI::ExistingFile);
    eval_cmd->callback([&] { rc = model_eval(vehicle, state_file, act_file); });

    auto* trim = app.add_subcommand("trim", "Trim maps");
    trim->require_subcommand(1);
    auto* build_cmd = trim->add_subcommand("build", "Build the default-grid trim map");
    std::string out;
    unsigned threads = 1;
    build_cmd->add_option("--vehicle", vehicle, "Vehicle config")->required()->check(CLI::ExistingFile);
    build_cmd->add_option("--out", out, "Output CSV")->required();
    build_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 256u));
    build_cmd->callback([&] { rc = trim_build(vehicle, out, threads); });

    auto* query_cmd = trim->add_subcommand("query", "Interpolate a trim map");
    std::string map_path;
    double va = 0.0, gamma = 0.0;
    query_cmd->add_option("--map", map_path, "Trim map CSV")->required()->check(CLI::ExistingFile);
    query_cmd->add_option("--va", va, "Airspeed, m/s")->required();
    query_cmd->add_option("--gamma", gamma, "Flight-path angle, deg")->required();
    query_cmd->callback([&] { rc = trim_query(map_path, va, gamma); });

    auto* sim = app.add_subcommand("sim", "Closed-loop simulation");
    sim->require_subcommand(1);
    auto* run_cmd = sim->add_subcommand("run", "Run a scenario");
    std::string scenario;
    run_cmd->add_option("--vehicle", vehicle, "Vehicle config")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--map", map_path, "Trim map CSV")->check(CLI::ExistingFile);
    run_cmd->add_option("--out", out, "Log CSV")->required();
    run_cmd->callback([&] { rc = sim_run(vehicle, scenario, map_path, out); });

    auto* report_cmd = app.add_subcommand("report", "Metrics from a run log");
    std::string log_path;
    report_cmd->add_option("--log", log_path, "Log CSV")->required()->check(CLI::ExistingFile);
    report_cmd->add_option("--out", out, "Metrics CSV");
    report_cmd->callback([&] { rc = report(log_path, out); });

    auto* check_cmd = app.add_subcommand("check", "Run the invariant suites");
    check_cmd->add_option("--vehicle", vehicle, "Vehicle config (default: built-in)")->check(CLI::ExistingFile);
    check_cmd->callback([&] { rc = check(vehicle); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return rc;
}
