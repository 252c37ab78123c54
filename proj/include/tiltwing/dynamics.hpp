#pragma once

#include <functional>
#include <stdexcept>

#include "tiltwing/aero.hpp"
#include "tiltwing/vehicle.hpp"

namespace tiltwing {

struct RigidBodyState {
    Vec3 position = Vec3::Zero();     // inertial (north-east-down), m
    Vec3 velocity = Vec3::Zero();     // inertial, m/s
    Mat3 attitude = Mat3::Identity(); // body -> inertial
    Vec3 body_rate = Vec3::Zero();    // body frame, rad/s
};

struct StateDerivative {
    Vec3 position_dot = Vec3::Zero();
    Vec3 velocity_dot = Vec3::Zero();
    Mat3 attitude_dot = Mat3::Zero();
    Vec3 body_rate_dot = Vec3::Zero();
};

class IntegrationFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Newton-Euler equations for body-frame force/moment.
StateDerivative state_derivative(const RigidBodyState& s, const Wrench& fm, const VehicleParams& p);

/// Angular acceleration produced by a body moment: I^-1 (M - w x I w).
Vec3 angular_acceleration(const Vec3& moment, const Vec3& omega, const Mat3& inertia);

/// Nearest rotation matrix (polar factor).
Mat3 orthonormalize(const Mat3& r);

using WrenchFunction = std::function<Wrench(const RigidBodyState&)>;

/// One classical RK4 step with the wrench re-evaluated at every stage, followed
/// by re-orthonormalization of the attitude. Throws IntegrationFault on
/// non-finite results.
RigidBodyState rk4_step(const RigidBodyState& s, const VehicleParams& p, double dt,
                        const WrenchFunction& wrench);

/// RK4 step of the full vehicle with actuation held over the step.
RigidBodyState integrate_step(const RigidBodyState& s, const ActuatorSet& act, const VehicleParams& p,
                              const Vec3& wind, double dt);

/// Largest allowed integration step.
inline constexpr double kMaxStep = 0.02;

}  // namespace tiltwing
