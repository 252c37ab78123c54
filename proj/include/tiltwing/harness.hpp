#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tiltwing/attitude.hpp"
#include "tiltwing/cruise.hpp"
#include "tiltwing/trim.hpp"

namespace tiltwing {

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ControlMode { OpenLoop, Attitude, Cruise };

struct WindStep {
    double time = 0.0;
    Vec3 wind = Vec3::Zero();  // inertial, m/s
};

/// Setpoint timeline. Columns are named by the header line of the timeline
/// block; values hold between rows unless the column is listed as linear.
struct Timeline {
    std::vector<std::string> columns;  // excluding "t"
    std::vector<double> times;
    std::vector<std::vector<double>> rows;
    std::vector<bool> linear;

    bool has(const std::string& column) const;
    /// Value of a column at time t (first row before the first timestamp).
    double value(const std::string& column, double t) const;
    /// Timestamps at which a column changes value.
    std::vector<double> changes(const std::string& column) const;
};

struct Scenario {
    std::string name;
    ControlMode mode = ControlMode::Attitude;
    double duration = 0.0;
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();   // inertial
    Vec3 euler = Vec3::Zero();      // roll, pitch, yaw (rad)
    Vec3 body_rate = Vec3::Zero();
    /// Start from the trim at the initial airspeed: pitch and actuators taken
    /// from the trim, velocity kept.
    bool trim_init = false;
    Vec3 wind = Vec3::Zero();
    std::vector<WindStep> gusts;
    Timeline timeline;

    Vec3 wind_at(double t) const;
};

/// Parses the scenario text format: `key = value` lines, then a line `[timeline]`
/// followed by a CSV block whose first line names the columns.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

struct HarnessConfig {
    double dynamics_rate = 250.0;  // Hz, also the attitude loop rate
    double cruise_rate = 50.0;     // Hz
    AttitudeGains attitude;
    AllocationOptions allocation;
    CruiseConfig cruise;
    TrimSettings trim;
};

/// One row per dynamics tick. Angles in rad.
struct LogRow {
    double time = 0.0;
    RigidBodyState state;
    Vec3 euler = Vec3::Zero();
    ActuatorCommands command;
    ActuatorSet actuators;
    AttitudeSetpoint attitude_sp;
    Vec2 velocity_sp = Vec2::Zero();   // cruise (v_ax, v_az) setpoint
    Vec2 velocity = Vec2::Zero();      // measured heading-frame airspeed
    Vec2 lookup = Vec2::Zero();        // v_LU
    Vec2 force_c = Vec2::Zero();       // F^c
    Vec2 correction = Vec2::Zero();    // (theta_c, delta_c)
    TrimVariables trim;                // feed-forward values in use
    double main_throttle_nominal = 0.0;
    Vec3 omega_dot_des = Vec3::Zero();
    Vec3 moment_des = Vec3::Zero();
    Vec3 moment_nominal = Vec3::Zero();
    Vec3 allocation_residual = Vec3::Zero();
    bool saturated = false;
    Vec3 aero_force = Vec3::Zero();    // body frame, whole vehicle
    Vec3 aero_moment = Vec3::Zero();
    int stalled_segments = 0;
};

struct RunLog {
    std::string scenario;
    ControlMode mode = ControlMode::Attitude;
    std::vector<LogRow> rows;
    std::optional<std::string> fault;
};

/// Fixed-rate closed loop. Cruise mode needs a map; the other modes use the
/// map, if given, or a single trim solve at the initial condition when trim
/// values are required.
RunLog run_scenario(const Scenario& sc, const VehicleParams& p, const TrimMap* map = nullptr,
                    const HarnessConfig& cfg = {});

std::vector<std::string> log_columns();
std::string log_csv(const RunLog& log);
void write_log_csv(const RunLog& log, const std::filesystem::path& path);

/// Column-oriented view of a log CSV.
struct LogTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data;  // data[column][row]
    std::optional<std::string> fault;
    std::string scenario;
    std::string mode;

    std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }
    const std::vector<double>& column(const std::string& name) const;
};

LogTable parse_log_csv(const std::string& text);
LogTable read_log_csv(const std::filesystem::path& path);
LogTable to_table(const RunLog& log);

const char* mode_name(ControlMode m);

}  // namespace tiltwing
