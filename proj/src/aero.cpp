#include "tiltwing/aero.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "tiltwing/dynamics.hpp"

namespace tiltwing {

PropellerPose propeller_pose(const VehicleParams& p, int index, const ActuatorSet& act)
{
    const PropellerParams& pr = p.propellers[static_cast<std::size_t>(index)];
    PropellerPose pose;
    if (pr.mount == PropellerMount::Wing) {
        const Mat3 tilt = rotation_y(act.wing_tilt);
        pose.hub = p.wing_pivot + tilt * pr.hub;
        pose.axis = tilt * pr.axis;
    } else {
        pose.hub = pr.hub;
        pose.axis = rotation_x(act.tail_tilt) * pr.axis;
    }
    return pose;
}

SegmentFrame segment_frame(const VehicleParams& p, int index, const ActuatorSet& act)
{
    const AirfoilSegmentParams& s = p.segments[static_cast<std::size_t>(index)];
    SegmentFrame f;
    if (s.mount == SegmentMount::Wing) {
        const Mat3 tilt = rotation_y(act.wing_tilt);
        f.position = p.wing_pivot + tilt * s.position;
        f.ex = tilt * s.chord_axis;
        f.ey = tilt * s.span_axis;
    } else {
        f.position = s.position;
        f.ex = s.chord_axis;
        f.ey = s.span_axis;
    }
    f.ez = f.ex.cross(f.ey);
    return f;
}

double surface_deflection(const AirfoilSegmentParams& s, const ActuatorSet& act)
{
    switch (s.surface) {
    case SurfaceBinding::None: return 0.0;
    case SurfaceBinding::AileronLeft: return act.aileron_left;
    case SurfaceBinding::AileronRight: return act.aileron_right;
    case SurfaceBinding::Elevator: return act.elevator;
    case SurfaceBinding::Rudder: return act.rudder;
    }
    return 0.0;
}

LocalFlow local_airspeed(const Vec3& r, const Vec3& v_air_body, const Vec3& omega,
                         const std::optional<Vec3>& slipstream)
{
    LocalFlow flow;
    flow.airspeed = v_air_body + omega.cross(r);
    if (slipstream) {
        flow.airspeed += *slipstream;
    }
    return flow;
}

void resolve_propeller_flow(LocalFlow& flow, const Vec3& axis)
{
    flow.axial_dir = axis;
    flow.axial_speed = flow.airspeed.dot(axis);
    const Vec3 radial = flow.airspeed - flow.axial_speed * axis;
    flow.radial_speed = radial.norm();
    if (flow.radial_speed > 1e-12) {
        flow.radial_dir = radial / flow.radial_speed;
    } else {
        // Any unit vector normal to the axis; the normal force vanishes here.
        const Vec3 seed = std::abs(axis.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
        flow.radial_dir = (seed - seed.dot(axis) * axis).normalized();
        flow.radial_speed = 0.0;
    }
}

void resolve_segment_flow(LocalFlow& flow, const SegmentFrame& frame)
{
    const Vec3 ldp = flow.airspeed - flow.airspeed.dot(frame.ey) * frame.ey;
    flow.speed = ldp.norm();
    if (flow.speed > 0.0) {
        flow.alpha = std::atan2(ldp.dot(frame.ez), ldp.dot(frame.ex));
        flow.drag_dir = -ldp / flow.speed;
        flow.lift_dir = flow.drag_dir.cross(frame.ey);
    } else {
        flow.alpha = 0.0;
        flow.drag_dir = -frame.ex;
        flow.lift_dir = -frame.ez;
    }
}

double advance_ratio(const PropellerParams& p, double eta, double axial_speed)
{
    if (eta < kMinPropSpeed) {
        return 0.0;
    }
    const double j = axial_speed / (eta * p.diameter);
    return std::clamp(j, 0.0, p.max_advance_ratio());
}

PropellerWrench propeller_wrench(const PropellerParams& p, const PropellerPose& pose, double eta,
                                 const LocalFlow& flow, double rho)
{
    PropellerWrench out;
    if (eta <= 0.0) {
        return out;
    }
    const double j = advance_ratio(p, eta, flow.axial_speed);
    const double d2 = p.diameter * p.diameter;
    const double d4 = d2 * d2;
    const double thrust = rho * eta * eta * d4 * p.thrust_coefficient(j);
    const double normal = eta * p.normal_coeff * flow.radial_speed;
    const Vec3 force = thrust * flow.axial_dir - normal * flow.radial_dir;
    const double torque = rho * eta * eta * d4 * p.diameter * p.torque_coefficient(j);
    out.wrench.force = force;
    out.wrench.moment = -torque * p.handedness * flow.axial_dir + pose.hub.cross(force);
    out.thrust = thrust;
    out.advance_ratio = j;
    return out;
}

Vec3 induced_velocity(const PropellerParams& p, const Vec3& axis, double thrust, double axial_speed,
                      double rho)
{
    if (thrust <= 0.0) {
        return Vec3::Zero();
    }
    const double area = p.disk_area();
    const double radicand = std::max(0.0, axial_speed * axial_speed + 2.0 * thrust / (rho * area));
    const double w = 0.5 * (-axial_speed + std::sqrt(radicand));
    return std::max(0.0, w) * axis;
}

AeroCoefficients prestall_coefficients(const AirfoilSegmentParams& s, double alpha, double deflection)
{
    return {s.cl0 + s.cl_alpha * alpha + s.cl_delta * deflection,
            s.cd0 + s.cd_alpha2 * alpha * alpha,
            s.cm0 + s.cm_alpha * alpha + s.cm_delta * deflection};
}

AeroCoefficients flat_plate_coefficients(const AirfoilSegmentParams& s, double alpha)
{
    const double sa = std::sin(alpha);
    const double sgn = alpha > 0.0 ? 1.0 : (alpha < 0.0 ? -1.0 : 0.0);
    return {s.fp_cl45 * std::sin(2.0 * alpha),
            s.fp_cd_min + (s.fp_cd90 - s.fp_cd_min) * sa * sa,
            -s.fp_cm_max * std::sin(sgn * alpha * alpha / kPi)};
}

AeroCoefficients airfoil_coefficients(const AirfoilSegmentParams& s, double alpha, double deflection)
{
    const double h = s.blend_half_width;
    const double lo_in = s.stall_neg + h, lo_out = s.stall_neg - h;
    const double hi_in = s.stall_pos - h, hi_out = s.stall_pos + h;
    if (alpha >= lo_in && alpha <= hi_in) {
        return prestall_coefficients(s, alpha, deflection);
    }
    if (alpha <= lo_out || alpha >= hi_out) {
        return flat_plate_coefficients(s, alpha);
    }
    // Linear blend across the band around the stall angle; t = 0 on the
    // pre-stall edge, t = 1 on the flat-plate edge.
    const double t = alpha > 0.5 * (s.stall_neg + s.stall_pos) ? (alpha - hi_in) / (hi_out - hi_in) : (lo_in - alpha) / (lo_in - lo_out);
    const AeroCoefficients a = prestall_coefficients(s, alpha, deflection);
    const AeroCoefficients b = flat_plate_coefficients(s, alpha);
    return {(1.0 - t) * a.cl + t * b.cl, (1.0 - t) * a.cd + t * b.cd, (1.0 - t) * a.cm + t * b.cm};
}

Wrench segment_wrench(const AirfoilSegmentParams& s, const SegmentFrame& frame, const LocalFlow& flow,
                      double deflection, double rho)
{
    Wrench w;
    if (flow.speed <= 0.0) {
        return w;
    }
    const AeroCoefficients c = airfoil_coefficients(s, flow.alpha, deflection);
    const double qs = 0.5 * rho * flow.speed * flow.speed * s.chord * s.span;
    w.force = c.cl * qs * flow.lift_dir + c.cd * qs * flow.drag_dir;
    w.moment = c.cm * qs * s.chord * frame.ey + frame.position.cross(w.force);
    return w;
}

Wrench fuselage_wrench(const Vec3& v_air_body, const FuselageParams& f, double rho)
{
    const double u = v_air_body.x(), v = v_air_body.y(), w = v_air_body.z();
    Wrench out;
    out.force = -0.5 * rho * Vec3(f.cd_x * u * std::abs(u), f.cd_y * v * std::abs(v), f.cd_z * w * std::abs(w));
    return out;
}

namespace {

template <typename Sink>
void accumulate(const Vec3& v_air_body, const Vec3& omega, const ActuatorSet& act, const VehicleParams& p,
                Sink&& sink)
{
    const double rho = p.air_density;
    const std::size_t nprop = p.propellers.size();
    std::array<Vec3, 3> slip{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};

    // Propellers first: their thrust sets the slipstream seen by bound segments.
    for (std::size_t i = 0; i < nprop && i < 3; ++i) {
        const PropellerParams& pr = p.propellers[i];
        const PropellerPose pose = propeller_pose(p, static_cast<int>(i), act);
        LocalFlow flow = local_airspeed(pose.hub, v_air_body, omega);
        resolve_propeller_flow(flow, pose.axis);
        const PropellerWrench pw = propeller_wrench(pr, pose, act.prop_speed[i], flow, rho);
        slip[i] = induced_velocity(pr, pose.axis, pw.thrust, flow.axial_speed, rho);
        WrenchContribution c;
        c.kind = SourceKind::Propeller;
        c.index = static_cast<int>(i);
        c.wrench = pw.wrench;
        c.thrust = pw.thrust;
        sink(c);
    }

    for (std::size_t i = 0; i < p.segments.size(); ++i) {
        const AirfoilSegmentParams& s = p.segments[i];
        const SegmentFrame frame = segment_frame(p, static_cast<int>(i), act);
        std::optional<Vec3> w;
        if (s.slipstream >= 0) {
            w = slip[static_cast<std::size_t>(s.slipstream)];
        }
        LocalFlow flow = local_airspeed(frame.position, v_air_body, omega, w);
        resolve_segment_flow(flow, frame);
        WrenchContribution c;
        c.kind = SourceKind::Segment;
        c.index = static_cast<int>(i);
        c.wrench = segment_wrench(s, frame, flow, surface_deflection(s, act), rho);
        c.alpha = flow.alpha;
        c.stalled = flow.speed > 0.0 && !(flow.alpha > s.stall_neg && flow.alpha < s.stall_pos);
        sink(c);
    }

    WrenchContribution c;
    c.kind = SourceKind::Fuselage;
    c.index = 0;
    c.wrench = fuselage_wrench(v_air_body, p.fuselage, rho);
    sink(c);
}

}  // namespace

ForceMoment total_wrench(const Vec3& v_air_body, const Vec3& omega, const ActuatorSet& act,
                         const VehicleParams& p)
{
    ForceMoment fm;
    fm.breakdown.reserve(p.propellers.size() + p.segments.size() + 1);
    accumulate(v_air_body, omega, act, p, [&](const WrenchContribution& c) {
        fm.force += c.wrench.force;
        fm.moment += c.wrench.moment;
        fm.breakdown.push_back(c);
    });
    return fm;
}

Wrench net_wrench(const Vec3& v_air_body, const Vec3& omega, const ActuatorSet& act, const VehicleParams& p)
{
    Wrench w;
    accumulate(v_air_body, omega, act, p, [&](const WrenchContribution& c) { w += c.wrench; });
    return w;
}

Vec3 air_velocity_body(const RigidBodyState& state, const Vec3& wind)
{
    return state.attitude.transpose() * (state.velocity - wind);
}

ForceMoment total_wrench(const RigidBodyState& state, const ActuatorSet& act, const VehicleParams& p,
                         const Vec3& wind)
{
    return total_wrench(air_velocity_body(state, wind), state.body_rate, act, p);
}

}  // namespace tiltwing
