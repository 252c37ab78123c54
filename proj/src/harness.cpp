#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "tiltwing/harness.hpp"

namespace tiltwing {

namespace {

double column_or(const Timeline& tl, const std::string& c, double t, double fallback)
{
    return tl.has(c) ? tl.value(c, t) : fallback;
}

bool needs_trim(const Scenario& sc)
{
    const Timeline& tl = sc.timeline;
    switch (sc.mode) {
    case ControlMode::Cruise:
        return true;
    case ControlMode::Attitude:
        return sc.trim_init || !tl.has("wing") || !tl.has("throttle");
    case ControlMode::OpenLoop:
        break;
    }
    for (const char* c : {"wing", "throttle", "flaperon", "elevator", "tail_throttle"}) {
        if (!tl.has(c)) {
            return true;
        }
    }
    return sc.trim_init;
}

ActuatorCommands open_loop_commands(const Timeline& tl, double t, const TrimVariables& trim)
{
    TrimVariables x = trim;
    x.wing = column_or(tl, "wing", t, trim.wing);
    x.main_throttle = column_or(tl, "throttle", t, trim.main_throttle);
    x.flaperon = column_or(tl, "flaperon", t, trim.flaperon);
    x.elevator = column_or(tl, "elevator", t, trim.elevator);
    x.tail_throttle = column_or(tl, "tail_throttle", t, trim.tail_throttle);
    ActuatorCommands c = trim_commands(x);
    const double roll = column_or(tl, "aileron", t, 0.0);
    c.aileron_left += roll;
    c.aileron_right += roll;
    c.rudder = column_or(tl, "rudder", t, 0.0);
    c.tail_tilt = column_or(tl, "tail_tilt", t, 0.0);
    return c.clamped();
}

}  // namespace

RunLog run_scenario(const Scenario& sc, const VehicleParams& p, const TrimMap* map, const HarnessConfig& cfg)
{
    if (sc.mode == ControlMode::Cruise && map == nullptr) {
        throw ScenarioError("cruise mode needs a trim map");
    }
    if (!(cfg.dynamics_rate > 0.0) || !(cfg.cruise_rate > 0.0) || cfg.cruise_rate > cfg.dynamics_rate) {
        throw ScenarioError("harness rates must satisfy 0 < cruise_rate <= dynamics_rate");
    }
    const double dt = 1.0 / cfg.dynamics_rate;
    const int cruise_every = std::max(1, static_cast<int>(std::lround(cfg.dynamics_rate / cfg.cruise_rate)));
    const double cruise_dt = cruise_every * dt;
    const auto ticks = static_cast<long>(std::ceil(sc.duration / dt - 1e-9));

    RunLog log;
    log.scenario = sc.name;
    log.mode = sc.mode;
    log.rows.reserve(static_cast<std::size_t>(ticks));

    RigidBodyState s;
    s.position = sc.position;
    s.velocity = sc.velocity;
    s.body_rate = sc.body_rate;
    s.attitude = rotation_from_euler(sc.euler.x(), sc.euler.y(), sc.euler.z());

    TrimVariables trim0;
    if (needs_trim(sc)) {
        const Vec2 v0 = heading_frame_airspeed(s, sc.wind_at(0.0));
        const Vec2 mp = airspeed_to_map(v0);
        if (map != nullptr) {
            trim0 = lookup_trim(*map, mp.x(), mp.y()).x;
        } else {
            trim0 = solve_trim_point(mp.x(), mp.y(), hover_seed().initial_guess, p, cfg.trim).x;
        }
    }
    if (sc.trim_init) {
        s.attitude = rotation_from_euler(sc.euler.x(), trim0.pitch, sc.euler.z());
    }

    ActuatorCommands initial;
    switch (sc.mode) {
    case ControlMode::OpenLoop:
        initial = open_loop_commands(sc.timeline, 0.0, trim0);
        break;
    case ControlMode::Attitude:
        initial = sc.trim_init ? trim_commands(trim0)
                               : nominal_commands(column_or(sc.timeline, "wing", 0.0, trim0.wing),
                                                  column_or(sc.timeline, "throttle", 0.0, trim0.main_throttle));
        break;
    case ControlMode::Cruise:
        initial = trim_commands(trim0);
        break;
    }
    ActuatorSet current = actuate(initial, p);

    AttitudeController attitude(cfg.attitude);
    std::optional<CruiseController> cruise;
    if (sc.mode == ControlMode::Cruise) {
        cruise.emplace(*map, p, cfg.cruise);
    }
    CruiseOutput cruise_out;

    for (long k = 0; k < ticks; ++k) {
        const double t = static_cast<double>(k) * dt;
        const Vec3 wind = sc.wind_at(t);
        LogRow row;
        row.time = t;
        row.state = s;
        row.euler = euler_from_rotation(s.attitude);
        row.trim = trim0;

        ActuatorCommands command;
        if (sc.mode == ControlMode::OpenLoop) {
            command = open_loop_commands(sc.timeline, t, trim0);
        } else {
            double wing = 0.0;
            double throttle = 0.0;
            AttitudeSetpoint sp;
            if (sc.mode == ControlMode::Cruise) {
                CruiseSetpoint csp;
                csp.velocity = {sc.timeline.value("vx", t), sc.timeline.value("vz", t)};
                csp.roll = deg2rad(column_or(sc.timeline, "roll_deg", t, 0.0));
                if (k % cruise_every == 0) {
                    cruise_out = cruise->step(s, csp, current, wind, cruise_dt);
                }
                sp = cruise_out.attitude;
                wing = cruise_out.wing;
                throttle = cruise_out.main_throttle;
                row.velocity_sp = csp.velocity;
                row.velocity = heading_frame_airspeed(s, wind);
                row.lookup = cruise_out.lookup;
                row.force_c = cruise_out.force;
                row.correction = cruise_out.correction;
                row.trim = cruise_out.trim.x;
            } else {
                sp.roll = deg2rad(column_or(sc.timeline, "roll_deg", t, 0.0));
                sp.pitch = deg2rad(column_or(sc.timeline, "pitch_deg", t, 0.0));
                sp.yaw_rate = deg2rad(column_or(sc.timeline, "yaw_rate_deg", t, 0.0));
                wing = column_or(sc.timeline, "wing", t, trim0.wing);
                throttle = column_or(sc.timeline, "throttle", t, trim0.main_throttle);
                row.velocity = heading_frame_airspeed(s, wind);
            }
            row.attitude_sp = sp;
            row.main_throttle_nominal = throttle;

            row.omega_dot_des = attitude.update(s, sp, current.wing_tilt, dt);
            row.moment_des = dynamic_inversion(row.omega_dot_des, s.body_rate, p.inertia);
            const ActuatorSet nominal = nominal_actuation(current, wing, throttle, p);
            row.moment_nominal = nominal_moment_estimate(s, nominal, p, wind);
            const AllocationResult alloc =
                daisy_chain_allocate(row.moment_des - row.moment_nominal, s, nominal, p, wind, cfg.allocation);
            row.allocation_residual = alloc.residual;
            row.saturated = alloc.saturated;
            command = alloc.command;
            command.wing = wing;
        }
        row.command = command;

        const ActuatorSet next = apply_actuator_rates(current, command, dt, p);
        row.actuators = next;
        const ForceMoment fm = total_wrench(s, next, p, wind);
        row.aero_force = fm.force;
        row.aero_moment = fm.moment;
        for (const WrenchContribution& c : fm.breakdown) {
            row.stalled_segments += c.stalled ? 1 : 0;
        }
        log.rows.push_back(row);

        try {
            s = integrate_step(s, next, p, wind, dt);
        } catch (const IntegrationFault& e) {
            log.fault = "t=" + std::to_string(t) + ": " + e.what();
            break;
        }
        current = next;
    }
    return log;
}

std::vector<std::string> log_columns()
{
    return {"t",          "x",          "y",           "z",           "vx",          "vy",
            "vz",         "roll",       "pitch",       "yaw",         "p",           "q",
            "r",          "cmd_wing",   "cmd_prop_l",  "cmd_prop_r",  "cmd_prop_t",  "cmd_ail_l",
            "cmd_ail_r",  "cmd_elev",   "cmd_rud",     "cmd_tail_tilt", "wing_tilt", "roll_sp",
            "pitch_sp",   "yaw_rate_sp", "vx_sp",      "vz_sp",       "v_ax",        "v_az",
            "v_lu_x",     "v_lu_z",     "fc_x",        "fc_z",        "theta_c",     "delta_c",
            "theta_t",    "delta_w_t",  "delta_plr_t", "delta_al_t",  "delta_e_t",   "delta_pt_t",
            "delta_plr_n", "wdot_des_x", "wdot_des_y", "wdot_des_z",  "m_des_x",     "m_des_y",
            "m_des_z",    "m_hat_x",    "m_hat_y",     "m_hat_z",     "res_x",       "res_y",
            "res_z",      "saturated",  "f_x",         "f_y",         "f_z",         "m_x",
            "m_y",        "m_z",        "stalled"};
}

namespace {

std::vector<double> row_values(const LogRow& r)
{
    const RigidBodyState& s = r.state;
    const ActuatorCommands& c = r.command;
    return {r.time,
            s.position.x(), s.position.y(), s.position.z(),
            s.velocity.x(), s.velocity.y(), s.velocity.z(),
            r.euler.x(), r.euler.y(), r.euler.z(),
            s.body_rate.x(), s.body_rate.y(), s.body_rate.z(),
            c.wing, c.prop_left, c.prop_right, c.prop_tail, c.aileron_left, c.aileron_right, c.elevator,
            c.rudder, c.tail_tilt, r.actuators.wing_tilt,
            r.attitude_sp.roll, r.attitude_sp.pitch, r.attitude_sp.yaw_rate,
            r.velocity_sp.x(), r.velocity_sp.y(), r.velocity.x(), r.velocity.y(),
            r.lookup.x(), r.lookup.y(), r.force_c.x(), r.force_c.y(), r.correction.x(), r.correction.y(),
            r.trim.pitch, r.trim.wing, r.trim.main_throttle, r.trim.flaperon, r.trim.elevator,
            r.trim.tail_throttle, r.main_throttle_nominal,
            r.omega_dot_des.x(), r.omega_dot_des.y(), r.omega_dot_des.z(),
            r.moment_des.x(), r.moment_des.y(), r.moment_des.z(),
            r.moment_nominal.x(), r.moment_nominal.y(), r.moment_nominal.z(),
            r.allocation_residual.x(), r.allocation_residual.y(), r.allocation_residual.z(),
            r.saturated ? 1.0 : 0.0,
            r.aero_force.x(), r.aero_force.y(), r.aero_force.z(),
            r.aero_moment.x(), r.aero_moment.y(), r.aero_moment.z(),
            static_cast<double>(r.stalled_segments)};
}

}  // namespace

std::string log_csv(const RunLog& log)
{
    std::ostringstream os;
    os << "# scenario: " << log.scenario << '\n';
    os << "# mode: " << mode_name(log.mode) << '\n';
    const auto cols = log_columns();
    for (std::size_t k = 0; k < cols.size(); ++k) {
        os << (k ? "," : "") << cols[k];
    }
    os << '\n' << std::setprecision(12);
    for (const LogRow& r : log.rows) {
        const auto v = row_values(r);
        for (std::size_t k = 0; k < v.size(); ++k) {
            os << (k ? "," : "") << v[k];
        }
        os << '\n';
    }
    if (log.fault) {
        os << "# fault: " << *log.fault << '\n';
    }
    return os.str();
}

void write_log_csv(const RunLog& log, const std::filesystem::path& path)
{
    std::ofstream f(path);
    if (!f) {
        throw ScenarioError("cannot write log '" + path.string() + "'");
    }
    f << log_csv(log);
    if (!f) {
        throw ScenarioError("failed writing log '" + path.string() + "'");
    }
}

const std::vector<double>& LogTable::column(const std::string& name) const
{
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) {
        throw ScenarioError("log has no column '" + name + "'");
    }
    return data[static_cast<std::size_t>(it - columns.begin())];
}

LogTable parse_log_csv(const std::string& text)
{
    LogTable t;
    std::istringstream is(text);
    std::string line;
    bool have_header = false;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (line.front() == '#') {
            const auto colon = line.find(':');
            if (colon != std::string::npos) {
                const std::string key = line.substr(1, colon - 1);
                std::string value = line.substr(colon + 1);
                value.erase(0, value.find_first_not_of(' '));
                if (key.find("scenario") != std::string::npos) {
                    t.scenario = value;
                } else if (key.find("mode") != std::string::npos) {
                    t.mode = value;
                } else if (key.find("fault") != std::string::npos) {
                    t.fault = value;
                }
            }
            continue;
        }
        std::istringstream ls(line);
        std::string field;
        if (!have_header) {
            while (std::getline(ls, field, ',')) {
                t.columns.push_back(field);
            }
            t.data.assign(t.columns.size(), {});
            have_header = true;
            continue;
        }
        std::size_t k = 0;
        while (std::getline(ls, field, ',')) {
            if (k >= t.columns.size()) {
                break;
            }
            try {
                t.data[k].push_back(std::stod(field));
            } catch (const std::exception&) {
                throw ScenarioError("log line " + std::to_string(line_no) + ": bad number '" + field + "'");
            }
            ++k;
        }
        if (k != t.columns.size()) {
            throw ScenarioError("log line " + std::to_string(line_no) + ": expected " +
                                std::to_string(t.columns.size()) + " fields");
        }
    }
    if (!have_header) {
        throw ScenarioError("log has no header");
    }
    return t;
}

LogTable read_log_csv(const std::filesystem::path& path)
{
    std::ifstream f(path);
    if (!f) {
        throw ScenarioError("cannot open log '" + path.string() + "'");
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_log_csv(ss.str());
}

LogTable to_table(const RunLog& log)
{
    LogTable t;
    t.columns = log_columns();
    t.data.assign(t.columns.size(), {});
    for (const LogRow& r : log.rows) {
        const auto v = row_values(r);
        for (std::size_t k = 0; k < v.size(); ++k) {
            t.data[k].push_back(v[k]);
        }
    }
    t.scenario = log.scenario;
    t.mode = mode_name(log.mode);
    t.fault = log.fault;
    return t;
}

}  // namespace tiltwing
