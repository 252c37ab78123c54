#pragma once

#include <array>

#include "tiltwing/aero.hpp"
#include "tiltwing/dynamics.hpp"
#include "tiltwing/vehicle.hpp"

namespace tiltwing {

struct AttitudeSetpoint {
    double roll = 0.0;      // rad
    double pitch = 0.0;     // rad
    double yaw_rate = 0.0;  // rad/s
};

struct AttitudeGains {
    Vec3 attitude_p{6.0, 6.0, 6.0};   // 1/s
    Vec3 rate_p{8.0, 8.0, 8.0};
    Vec3 rate_i{2.0, 2.0, 2.0};
    Vec3 rate_d{0.1, 0.1, 0.1};
    Vec3 integrator_limit{2.0, 2.0, 2.0};  // rad/s^2 contributed by the I term
    double pitch_down_scale = 0.5;          // multiplier on pitch-down rate demand in hover
    double schedule_start = deg2rad(70.0);  // wing tilt where the pitch-down scaling starts
    double schedule_end = deg2rad(90.0);    // ... and is fully applied
};

/// Hamilton quaternion (w, x, y, z) from Z-Y-X Euler angles.
Eigen::Quaterniond quaternion_from_euler(double roll, double pitch, double yaw);

/// Cascaded P (quaternion attitude error) / PID (body rate) law producing a
/// desired body angular acceleration.
class AttitudeController {
public:
    explicit AttitudeController(AttitudeGains gains = {});

    /// Outer loop: body-rate demand for the current attitude, including the
    /// yaw-rate feed-forward and the hover pitch-down scaling.
    Vec3 rate_setpoint(const RigidBodyState& s, const AttitudeSetpoint& sp, double wing_tilt) const;

    /// Full cascade; advances the integrator and derivative memory by dt.
    Vec3 update(const RigidBodyState& s, const AttitudeSetpoint& sp, double wing_tilt, double dt);

    void reset();
    const AttitudeGains& gains() const { return gains_; }
    const Vec3& integrator() const { return integrator_; }

private:
    AttitudeGains gains_;
    Vec3 integrator_ = Vec3::Zero();
    Vec3 last_rate_ = Vec3::Zero();
    bool has_last_ = false;
};

/// M_des = I * omega_dot_des + omega x I omega.
Vec3 dynamic_inversion(const Vec3& omega_dot_des, const Vec3& omega, const Mat3& inertia);

/// Nominal actuation: attitude effectors centred, wing and main throttle as given,
/// wing at its current physical tilt.
ActuatorSet nominal_actuation(const ActuatorSet& current, double wing, double main_throttle,
                              const VehicleParams& p);

/// Model moment with nominal actuation.
Vec3 nominal_moment_estimate(const RigidBodyState& s, const ActuatorSet& nominal, const VehicleParams& p,
                             const Vec3& wind = Vec3::Zero());

enum AllocationBlock { kBlockElevator = 0, kBlockRudder = 1, kBlockWing = 2, kBlockTail = 3 };

struct AllocationOptions {
    Vec2 wing_weights{2.0, 1.0};  // roll, yaw
    int passes = 3;
    double deadband = 1e-9;       // N m; residual components below are not chased
    int newton_iterations = 20;
};

struct AllocationResult {
    ActuatorCommands command;
    ActuatorSet actuators;                 // physical state for the command (wing held)
    Vec3 demand = Vec3::Zero();            // M_act
    std::array<Vec3, 4> block_moments{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    Vec3 residual = Vec3::Zero();          // demand - sum(block_moments)
    bool saturated = false;                // an actuator sits at a limit with demand left over
    int passes = 0;
};

/// Minimizes (B s - e)^T W (B s - e) + reg |s|^2 over the box lo <= s <= hi.
Vec2 solve_box_qp2(const Mat2& b, const Vec2& e, const Mat2& w, const Vec2& lo, const Vec2& hi,
                   double reg = 0.0);

/// Prioritized sequential allocation of M_act on top of the nominal actuation.
/// Blocks: elevator (pitch), rudder (yaw), wing group (differential ailerons
/// and main throttle; roll and yaw), tail group (tail throttle for pitch, then
/// tail tilt for yaw with pitch held). Each block is solved on the full model
/// and its realized moment is what is booked, so the accounting is exact.
AllocationResult daisy_chain_allocate(const Vec3& m_act, const RigidBodyState& s, const ActuatorSet& nominal,
                                      const VehicleParams& p, const Vec3& wind = Vec3::Zero(),
                                      const AllocationOptions& options = {});

}  // namespace tiltwing
