#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tiltwing {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Rotation about the body y-axis (positive = nose/leading edge up).
Mat3 rotation_y(double angle);
/// Rotation about the body x-axis.
Mat3 rotation_x(double angle);
Mat3 rotation_z(double angle);
/// Body-to-inertial rotation from roll/pitch/yaw (z-y-x sequence).
Mat3 rotation_from_euler(double roll, double pitch, double yaw);
/// (roll, pitch, yaw) of a body-to-inertial rotation.
Vec3 euler_from_rotation(const Mat3& r);
Mat3 skew(const Vec3& v);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class PropellerMount { Wing, Tail };

/// Index into VehicleParams::propellers.
enum PropellerIndex : int { kPropLeft = 0, kPropRight = 1, kPropTail = 2 };

struct PropellerParams {
    std::string name;
    PropellerMount mount = PropellerMount::Wing;
    // Wing props: hub offset from the wing pivot, in the wing frame at zero tilt.
    // Tail prop: hub position in the body frame.
    Vec3 hub = Vec3::Zero();
    // Forward (thrust) axis at zero tilt, body frame.
    Vec3 axis = Vec3::UnitX();
    double diameter = 0.0;
    double ct0 = 0.0, ct1 = 0.0;   // C_T(J) = ct0 + ct1 * J
    double cq0 = 0.0, cq1 = 0.0;   // C_Q(J) = cq0 + cq1 * J
    double normal_coeff = 0.0;     // N = eta * normal_coeff * V_radial   [N s^2 / (rev m)]
    double handedness = 1.0;       // +1: turns positively about the forward axis
    double eta_max = 0.0;          // rev/s at full throttle

    double thrust_coefficient(double j) const { return ct0 + ct1 * j; }
    double torque_coefficient(double j) const { return cq0 + cq1 * j; }
    /// Largest advance ratio for which C_T stays non-negative.
    double max_advance_ratio() const;
    double disk_area() const { return kPi * diameter * diameter / 4.0; }
};

enum class SegmentMount { Body, Wing };
enum class SurfaceBinding { None, AileronLeft, AileronRight, Elevator, Rudder };

struct AirfoilSegmentParams {
    std::string name;
    SegmentMount mount = SegmentMount::Body;
    // Centre of pressure (quarter chord). Wing segments: offset from the wing
    // pivot in the wing frame at zero tilt. Body segments: body frame.
    Vec3 position = Vec3::Zero();
    Vec3 chord_axis = Vec3::UnitX();  // e_x^W at zero tilt
    Vec3 span_axis = Vec3::UnitY();   // e_y^W at zero tilt
    double chord = 0.0;
    double span = 0.0;

    double cl0 = 0.0, cl_alpha = 0.0, cl_delta = 0.0;
    double cd0 = 0.0, cd_alpha2 = 0.0;
    double cm0 = 0.0, cm_alpha = 0.0, cm_delta = 0.0;
    double stall_neg = 0.0, stall_pos = 0.0;   // rad
    double fp_cl45 = 0.0, fp_cd_min = 0.0, fp_cd90 = 0.0, fp_cm_max = 0.0;
    double blend_half_width = deg2rad(5.0);

    SurfaceBinding surface = SurfaceBinding::None;
    int slipstream = -1;  // propeller index, -1 = free stream only
};

struct FuselageParams {
    double cd_x = 0.0, cd_y = 0.0, cd_z = 0.0;  // m^2 (coefficient x reference area)
};

/// Physical ranges behind the normalized commands.
struct ActuatorLimits {
    double wing_tilt_max = kPi / 2.0;   // zeta_w at delta_w = 1
    double wing_tilt_up_time = 5.0;     // s for a full 0 -> max sweep
    double wing_tilt_down_time = 10.0;  // s for a full max -> 0 sweep
    double aileron_max = deg2rad(20.0);
    double elevator_max = deg2rad(25.0);
    double rudder_max = deg2rad(25.0);
    double tail_tilt_max = deg2rad(30.0);
};

struct VehicleParams {
    double mass = 0.0;
    Mat3 inertia = Mat3::Zero();
    Vec3 gravity{0.0, 0.0, 9.81};
    double air_density = 1.225;
    Vec3 wing_pivot = Vec3::Zero();
    std::vector<PropellerParams> propellers;
    std::vector<AirfoilSegmentParams> segments;
    FuselageParams fuselage;
    ActuatorLimits limits;

    /// Sum of wing segment spans.
    double wing_span() const;
};

/// Throws ConfigError naming the first offending field.
void validate(const VehicleParams& p);

VehicleParams load_vehicle_config(const std::filesystem::path& path);
VehicleParams parse_vehicle_config(const std::string& yaml_text);
std::string serialize_vehicle_config(const VehicleParams& p);
void save_vehicle_config(const VehicleParams& p, const std::filesystem::path& path);

/// Built-in parameter set; identical to config/default_vehicle.yaml.
VehicleParams default_vehicle();

/// Normalized commands. Throttles and wing tilt in [0, 1], the rest in [-1, 1].
/// The right aileron servo is mirrored: delta_al = delta_ar > 0 rolls right,
/// delta_al = -delta_ar deflects both ailerons as flaps.
struct ActuatorCommands {
    double wing = 0.0;
    double prop_left = 0.0;
    double prop_right = 0.0;
    double prop_tail = 0.0;
    double aileron_left = 0.0;
    double aileron_right = 0.0;
    double elevator = 0.0;
    double rudder = 0.0;
    double tail_tilt = 0.0;

    ActuatorCommands clamped() const;
    bool operator==(const ActuatorCommands&) const = default;
};

/// Commands together with the physical actuator state they produce.
struct ActuatorSet {
    ActuatorCommands command;
    double wing_tilt = 0.0;       // rad
    double tail_tilt = 0.0;       // rad
    double aileron_left = 0.0;    // rad, trailing edge down positive
    double aileron_right = 0.0;
    double elevator = 0.0;
    double rudder = 0.0;
    std::array<double, 3> prop_speed{0.0, 0.0, 0.0};  // rev/s

    bool operator==(const ActuatorSet&) const = default;
};

/// Instantaneous mapping of (clamped) commands to physical positions.
ActuatorSet actuate(const ActuatorCommands& cmd, const VehicleParams& p);

/// Same as actuate() but keeps the physical wing tilt of `current`.
ActuatorSet actuate_holding_wing(const ActuatorSet& current, const ActuatorCommands& cmd,
                                 const VehicleParams& p);

/// Moves the wing tilt toward the command under its rate limits; every other
/// actuator follows its command immediately.
ActuatorSet apply_actuator_rates(const ActuatorSet& current, const ActuatorCommands& command,
                                 double dt, const VehicleParams& p);

/// Nominal actuation: all attitude effectors at zero, wing and main throttle given.
ActuatorCommands nominal_commands(double wing, double main_throttle);

}  // namespace tiltwing
