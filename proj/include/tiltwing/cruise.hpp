#pragma once

#include "tiltwing/attitude.hpp"
#include "tiltwing/dynamics.hpp"
#include "tiltwing/trim.hpp"

namespace tiltwing {

/// Airspeed components in the heading frame: x forward-horizontal, z down.
struct CruiseSetpoint {
    Vec2 velocity = Vec2::Zero();  // (v_ax, v_az), m/s
    double roll = 0.0;             // rad, passed through for turns
};

struct LookupBounds {
    double x_minus = 1.5;
    double x_plus = 1.5;
    double z_minus = 1.5;
    double z_plus = 1.5;
};

struct PidGains {
    double p = 0.8;
    double i = 0.15;
    double d = 0.05;
    double integrator_limit = 2.0;  // m/s^2 contributed by the I term
};

struct CruiseConfig {
    LookupBounds bounds;
    PidGains pid_x;
    PidGains pid_z{3.0, 0.15, 0.05, 2.0};
    double w_zz = 1.0;
    double w_lo_ratio = 0.01;       // w_xx / w_zz below the ramp
    double w_hi_ratio = 1.0;        // w_xx / w_zz above the ramp
    double ramp_start = 12.0;       // m/s
    double ramp_end = 15.0;         // m/s
    Mat2 regularization = Mat2::Identity();  // K
    double max_corrective_pitch = deg2rad(15.0);
    double min_turn_speed = 5.0;    // m/s
    double pitch_step = deg2rad(0.5);   // finite-difference steps for J
    double throttle_step = 0.01;
};

/// Clamps v_des component-wise into the open band (v - v^-, v + v^+).
Vec2 lookup_velocity(const Vec2& desired, const Vec2& actual, const LookupBounds& bounds);

/// Heading-frame air velocity (v_ax, v_az) of the vehicle.
Vec2 heading_frame_airspeed(const RigidBodyState& s, const Vec3& wind);

/// Converts a heading-frame airspeed to trim-map coordinates (v_a, gamma).
Vec2 airspeed_to_map(const Vec2& v);

/// Two-axis PID returning a corrective force m * (Kp e + Ki int e + Kd de/dt).
class VelocityPid {
public:
    VelocityPid(PidGains x = {}, PidGains z = {});
    Vec2 update(const Vec2& error, double mass, double dt);
    void reset();
    const Vec2& integrator() const { return integrator_; }

private:
    PidGains gx_;
    PidGains gz_;
    Vec2 integrator_ = Vec2::Zero();
    Vec2 last_error_ = Vec2::Zero();
    bool has_last_ = false;
};

/// Heading-frame aerodynamic force (N) for the given pitch and main throttle,
/// everything else held. Optionally restricted to non-stalled segments plus
/// propellers and fuselage.
Vec2 path_force(const RigidBodyState& s, double pitch, const ActuatorSet& act, double main_throttle,
                const VehicleParams& p, const Vec3& wind);

/// J = d(f_x, f_z)/d(theta, delta_plr) in N/rad and N per unit throttle, from
/// five-point central differences. With exclude_stalled, segments stalled at
/// the evaluation point do not contribute to the pitch column.
Mat2 control_derivatives(const RigidBodyState& s, const ActuatorSet& act, const VehicleParams& p,
                         const Vec3& wind, double pitch_step, double throttle_step, bool exclude_stalled = true);

/// Regularized weighted least squares u = (J^T W J + K)^-1 J^T W F, unclamped.
Vec2 wls_solve(const Mat2& j, const Vec2& force, const Mat2& w, const Mat2& k);

/// wls_solve followed by |theta_c| <= max_pitch and 0 <= delta_trim + delta_c <= 1.
Vec2 wls_allocate(const Mat2& j, const Vec2& force, const Mat2& w, const Mat2& k, double max_pitch,
                  double trim_throttle);

/// Weighted least-squares objective at u.
double wls_objective(const Mat2& j, const Vec2& force, const Mat2& w, const Mat2& k, const Vec2& u);

/// Ramp factor in [0, 1] between ramp_start and ramp_end.
double schedule_ramp(double v_ax, const CruiseConfig& cfg);

/// diag(w_xx, w_zz) with w_xx ramped over the schedule speeds.
Mat2 weight_schedule(double v_ax, const CruiseConfig& cfg);

/// g tan(phi) / max(v_ax, v_min).
double turn_coordination(double roll, double v_ax, double g, double v_min = 5.0);

struct CruiseOutput {
    AttitudeSetpoint attitude;
    double wing = 0.0;             // delta_w command
    double main_throttle = 0.0;    // delta_plr^n = trim + correction
    Vec2 velocity = Vec2::Zero();  // measured (v_ax, v_az)
    Vec2 lookup = Vec2::Zero();    // v_LU
    Vec2 map_point = Vec2::Zero(); // (v_a, gamma) queried
    TrimLookup trim;
    Vec2 force = Vec2::Zero();     // F^c
    Vec2 correction = Vec2::Zero();// (theta_c, delta_c)
    Mat2 jacobian = Mat2::Zero();
    Mat2 weights = Mat2::Zero();
};

class CruiseController {
public:
    CruiseController(const TrimMap& map, const VehicleParams& p, CruiseConfig cfg = {});

    /// One cruise tick. `current` carries the physical actuator state (wing tilt).
    CruiseOutput step(const RigidBodyState& s, const CruiseSetpoint& sp, const ActuatorSet& current,
                      const Vec3& wind, double dt);

    void reset();
    const CruiseConfig& config() const { return cfg_; }

private:
    const TrimMap& map_;
    const VehicleParams& p_;
    CruiseConfig cfg_;
    VelocityPid pid_;
};

}  // namespace tiltwing
