#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tiltwing/vehicle.hpp"

namespace tiltwing {

struct RigidBodyState;

struct Wrench {
    Vec3 force = Vec3::Zero();
    Vec3 moment = Vec3::Zero();

    Wrench& operator+=(const Wrench& o)
    {
        force += o.force;
        moment += o.moment;
        return *this;
    }
};

enum class SourceKind { Propeller, Segment, Fuselage };

struct WrenchContribution {
    SourceKind kind = SourceKind::Fuselage;
    int index = 0;
    Wrench wrench;
    double alpha = 0.0;     // segments only
    bool stalled = false;   // segments only: alpha outside (stall_neg, stall_pos)
    double thrust = 0.0;    // propellers only
};

/// Net body-frame aerodynamic force and moment (about the CG) with per-source parts.
struct ForceMoment {
    Vec3 force = Vec3::Zero();
    Vec3 moment = Vec3::Zero();
    std::vector<WrenchContribution> breakdown;

    Wrench wrench() const { return {force, moment}; }
};

/// Local airspeed at a point and its decomposition for a propeller or an
/// airfoil segment. Only the fields of the resolved context are meaningful.
struct LocalFlow {
    Vec3 airspeed = Vec3::Zero();

    double axial_speed = 0.0;    // V_par, signed
    double radial_speed = 0.0;   // V_perp >= 0
    Vec3 axial_dir = Vec3::UnitX();
    Vec3 radial_dir = Vec3::UnitY();

    double alpha = 0.0;          // angle of attack in [-pi, pi]
    double speed = 0.0;          // |u_ldp|
    Vec3 lift_dir = Vec3::Zero();
    Vec3 drag_dir = Vec3::Zero();
};

/// Body-frame placement of a propeller for the current actuator state.
struct PropellerPose {
    Vec3 hub = Vec3::Zero();
    Vec3 axis = Vec3::UnitX();
};

/// Body-frame placement and orientation of an airfoil segment.
struct SegmentFrame {
    Vec3 position = Vec3::Zero();
    Vec3 ex = Vec3::UnitX();
    Vec3 ey = Vec3::UnitY();
    Vec3 ez = Vec3::UnitZ();
};

struct AeroCoefficients {
    double cl = 0.0;
    double cd = 0.0;
    double cm = 0.0;
};

struct PropellerWrench {
    Wrench wrench;
    double thrust = 0.0;
    double advance_ratio = 0.0;
};

/// Below this speed [rev/s] the advance ratio is taken as zero.
inline constexpr double kMinPropSpeed = 1.0;

PropellerPose propeller_pose(const VehicleParams& p, int index, const ActuatorSet& act);
SegmentFrame segment_frame(const VehicleParams& p, int index, const ActuatorSet& act);
/// Control-surface deflection acting on a segment, rad.
double surface_deflection(const AirfoilSegmentParams& s, const ActuatorSet& act);

/// u_a = v_a + omega x r (+ w).
LocalFlow local_airspeed(const Vec3& r, const Vec3& v_air_body, const Vec3& omega,
                         const std::optional<Vec3>& slipstream = std::nullopt);
void resolve_propeller_flow(LocalFlow& flow, const Vec3& axis);
void resolve_segment_flow(LocalFlow& flow, const SegmentFrame& frame);

double advance_ratio(const PropellerParams& p, double eta, double axial_speed);

PropellerWrench propeller_wrench(const PropellerParams& p, const PropellerPose& pose, double eta,
                                 const LocalFlow& flow, double rho);

/// Momentum-theory slipstream velocity at the hub, along the prop axis.
Vec3 induced_velocity(const PropellerParams& p, const Vec3& axis, double thrust, double axial_speed,
                      double rho);

AeroCoefficients prestall_coefficients(const AirfoilSegmentParams& s, double alpha, double deflection);
AeroCoefficients flat_plate_coefficients(const AirfoilSegmentParams& s, double alpha);
AeroCoefficients airfoil_coefficients(const AirfoilSegmentParams& s, double alpha, double deflection);

Wrench segment_wrench(const AirfoilSegmentParams& s, const SegmentFrame& frame, const LocalFlow& flow,
                      double deflection, double rho);

Wrench fuselage_wrench(const Vec3& v_air_body, const FuselageParams& f, double rho);

/// Full model from air-relative body velocity and body rate.
ForceMoment total_wrench(const Vec3& v_air_body, const Vec3& omega, const ActuatorSet& act,
                         const VehicleParams& p);
/// Full model from rigid-body state and inertial wind.
ForceMoment total_wrench(const RigidBodyState& state, const ActuatorSet& act, const VehicleParams& p,
                         const Vec3& wind);
/// Same totals as total_wrench() without building the breakdown.
Wrench net_wrench(const Vec3& v_air_body, const Vec3& omega, const ActuatorSet& act,
                  const VehicleParams& p);

/// Body-frame air-relative velocity of the CG.
Vec3 air_velocity_body(const RigidBodyState& state, const Vec3& wind);

}  // namespace tiltwing
