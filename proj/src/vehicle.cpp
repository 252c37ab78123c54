#include "tiltwing/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tiltwing {

Mat3 rotation_y(double angle)
{
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    r << c, 0.0, s,
         0.0, 1.0, 0.0,
         -s, 0.0, c;
    return r;
}

Mat3 rotation_x(double angle)
{
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    r << 1.0, 0.0, 0.0,
         0.0, c, -s,
         0.0, s, c;
    return r;
}

Mat3 rotation_z(double angle)
{
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    r << c, -s, 0.0,
         s, c, 0.0,
         0.0, 0.0, 1.0;
    return r;
}

Mat3 rotation_from_euler(double roll, double pitch, double yaw)
{
    return rotation_z(yaw) * rotation_y(pitch) * rotation_x(roll);
}

Vec3 euler_from_rotation(const Mat3& r)
{
    const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
    const double roll = std::atan2(r(2, 1), r(2, 2));
    const double yaw = std::atan2(r(1, 0), r(0, 0));
    return {roll, pitch, yaw};
}

Mat3 skew(const Vec3& v)
{
    Mat3 s;
    s << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
         -v.y(), v.x(), 0.0;
    return s;
}

double PropellerParams::max_advance_ratio() const
{
    if (ct1 < 0.0) {
        return -ct0 / ct1;
    }
    return std::numeric_limits<double>::infinity();
}

double VehicleParams::wing_span() const
{
    double span = 0.0;
    for (const auto& s : segments) {
        if (s.mount == SegmentMount::Wing) {
            span += s.span;
        }
    }
    return span;
}

namespace {

void require(bool ok, const std::string& field, const std::string& what)
{
    if (!ok) {
        throw ConfigError("invalid value for '" + field + "': " + what);
    }
}

bool finite(const Vec3& v) { return v.allFinite(); }

}  // namespace

void validate(const VehicleParams& p)
{
    require(std::isfinite(p.mass) && p.mass > 0.0, "mass", "must be > 0");
    require(p.inertia.allFinite(), "inertia", "must be finite");
    require((p.inertia - p.inertia.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * p.inertia.norm(),
            "inertia", "must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat3> eig(p.inertia);
    require(eig.eigenvalues().minCoeff() > 0.0, "inertia", "must be positive definite");
    require(finite(p.gravity), "gravity", "must be finite");
    require(std::isfinite(p.air_density) && p.air_density > 0.0, "air_density", "must be > 0");
    require(finite(p.wing_pivot), "wing_pivot", "must be finite");

    require(p.propellers.size() == 3, "propellers", "exactly 3 propellers (left, right, tail) required");
    require(p.propellers[kPropLeft].mount == PropellerMount::Wing, "propellers[0].mount", "left prop must be wing-mounted");
    require(p.propellers[kPropRight].mount == PropellerMount::Wing, "propellers[1].mount", "right prop must be wing-mounted");
    require(p.propellers[kPropTail].mount == PropellerMount::Tail, "propellers[2].mount", "tail prop must be tail-mounted");
    for (std::size_t i = 0; i < p.propellers.size(); ++i) {
        const auto& pr = p.propellers[i];
        const std::string f = "propellers[" + std::to_string(i) + "]";
        require(pr.diameter > 0.0, f + ".diameter", "must be > 0");
        require(pr.ct0 > 0.0, f + ".ct0", "C_T(0) must be > 0");
        require(std::isfinite(pr.ct1), f + ".ct1", "must be finite");
        require(std::isfinite(pr.cq0) && std::isfinite(pr.cq1), f + ".cq", "must be finite");
        require(pr.normal_coeff > 0.0, f + ".normal_coeff", "must be > 0");
        require(pr.handedness == 1.0 || pr.handedness == -1.0, f + ".handedness", "must be +1 or -1");
        require(pr.eta_max > 0.0, f + ".eta_max", "must be > 0");
        require(finite(pr.hub), f + ".hub", "must be finite");
        require(std::abs(pr.axis.norm() - 1.0) < 1e-9, f + ".axis", "must be a unit vector");
    }

    for (std::size_t i = 0; i < p.segments.size(); ++i) {
        const auto& s = p.segments[i];
        const std::string f = "segments[" + std::to_string(i) + "]";
        require(s.chord > 0.0, f + ".chord", "must be > 0");
        require(s.span > 0.0, f + ".span", "must be > 0");
        require(s.stall_neg < 0.0, f + ".stall_neg", "must be < 0");
        require(s.stall_pos > 0.0, f + ".stall_pos", "must be > 0");
        require(s.fp_cl45 >= 0.0, f + ".fp_cl45", "must be >= 0");
        require(s.fp_cd_min >= 0.0, f + ".fp_cd_min", "must be >= 0");
        require(s.fp_cd90 >= 0.0, f + ".fp_cd90", "must be >= 0");
        require(s.fp_cm_max >= 0.0, f + ".fp_cm_max", "must be >= 0");
        require(s.blend_half_width > 0.0, f + ".blend_half_width", "must be > 0");
        require(s.stall_neg + s.blend_half_width < s.stall_pos - s.blend_half_width,
                f + ".blend_half_width", "blend bands must not overlap");
        require(std::abs(s.chord_axis.norm() - 1.0) < 1e-9, f + ".chord_axis", "must be a unit vector");
        require(std::abs(s.span_axis.norm() - 1.0) < 1e-9, f + ".span_axis", "must be a unit vector");
        require(std::abs(s.chord_axis.dot(s.span_axis)) < 1e-9, f + ".span_axis", "must be orthogonal to chord_axis");
        require(s.slipstream >= -1 && s.slipstream < static_cast<int>(p.propellers.size()),
                f + ".slipstream", "must name an existing propeller");
        require(finite(s.position), f + ".position", "must be finite");
    }

    const auto& l = p.limits;
    require(l.wing_tilt_max > 0.0, "actuators.wing_tilt_max", "must be > 0");
    require(l.wing_tilt_up_time > 0.0, "actuators.wing_tilt_up_time", "must be > 0");
    require(l.wing_tilt_down_time > 0.0, "actuators.wing_tilt_down_time", "must be > 0");
    require(l.aileron_max > 0.0, "actuators.aileron_max", "must be > 0");
    require(l.elevator_max > 0.0, "actuators.elevator_max", "must be > 0");
    require(l.rudder_max > 0.0, "actuators.rudder_max", "must be > 0");
    require(l.tail_tilt_max > 0.0, "actuators.tail_tilt_max", "must be > 0");
    require(p.fuselage.cd_x >= 0.0 && p.fuselage.cd_y >= 0.0 && p.fuselage.cd_z >= 0.0,
            "fuselage", "drag coefficients must be >= 0");
}

ActuatorCommands ActuatorCommands::clamped() const
{
    auto unit = [](double v) { return std::clamp(v, 0.0, 1.0); };
    auto sym = [](double v) { return std::clamp(v, -1.0, 1.0); };
    ActuatorCommands c;
    c.wing = unit(wing);
    c.prop_left = unit(prop_left);
    c.prop_right = unit(prop_right);
    c.prop_tail = unit(prop_tail);
    c.aileron_left = sym(aileron_left);
    c.aileron_right = sym(aileron_right);
    c.elevator = sym(elevator);
    c.rudder = sym(rudder);
    c.tail_tilt = sym(tail_tilt);
    return c;
}

ActuatorSet actuate(const ActuatorCommands& cmd, const VehicleParams& p)
{
    const ActuatorCommands c = cmd.clamped();
    const auto& l = p.limits;
    ActuatorSet a;
    a.command = c;
    a.wing_tilt = c.wing * l.wing_tilt_max;
    a.tail_tilt = c.tail_tilt * l.tail_tilt_max;
    a.aileron_left = c.aileron_left * l.aileron_max;
    a.aileron_right = -c.aileron_right * l.aileron_max;  // mirrored servo
    a.elevator = c.elevator * l.elevator_max;
    a.rudder = c.rudder * l.rudder_max;
    a.prop_speed[kPropLeft] = c.prop_left * p.propellers[kPropLeft].eta_max;
    a.prop_speed[kPropRight] = c.prop_right * p.propellers[kPropRight].eta_max;
    a.prop_speed[kPropTail] = c.prop_tail * p.propellers[kPropTail].eta_max;
    return a;
}

ActuatorSet actuate_holding_wing(const ActuatorSet& current, const ActuatorCommands& cmd,
                                 const VehicleParams& p)
{
    ActuatorSet a = actuate(cmd, p);
    a.wing_tilt = current.wing_tilt;
    return a;
}

ActuatorSet apply_actuator_rates(const ActuatorSet& current, const ActuatorCommands& command,
                                 double dt, const VehicleParams& p)
{
    if (!(dt > 0.0)) {
        throw std::invalid_argument("apply_actuator_rates: dt must be > 0");
    }
    ActuatorSet next = actuate(command, p);
    const auto& l = p.limits;
    const double target = next.wing_tilt;
    const double up_step = l.wing_tilt_max / l.wing_tilt_up_time * dt;
    const double down_step = l.wing_tilt_max / l.wing_tilt_down_time * dt;
    double tilt = current.wing_tilt;
    if (target > tilt) {
        tilt = std::min(target, tilt + up_step);
    } else if (target < tilt) {
        tilt = std::max(target, tilt - down_step);
    }
    next.wing_tilt = tilt;
    return next;
}

ActuatorCommands nominal_commands(double wing, double main_throttle)
{
    ActuatorCommands c;
    c.wing = wing;
    c.prop_left = main_throttle;
    c.prop_right = main_throttle;
    return c;
}

}  // namespace tiltwing
