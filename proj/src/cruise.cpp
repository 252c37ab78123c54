#include "tiltwing/cruise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tiltwing {

Vec2 lookup_velocity(const Vec2& desired, const Vec2& actual, const LookupBounds& b)
{
    constexpr double kInset = 1e-9;
    Vec2 out;
    out.x() = std::clamp(desired.x(), actual.x() - b.x_minus + kInset, actual.x() + b.x_plus - kInset);
    out.y() = std::clamp(desired.y(), actual.y() - b.z_minus + kInset, actual.y() + b.z_plus - kInset);
    return out;
}

Vec2 heading_frame_airspeed(const RigidBodyState& s, const Vec3& wind)
{
    const Vec3 v = s.velocity - wind;
    const double psi = euler_from_rotation(s.attitude).z();
    return {std::cos(psi) * v.x() + std::sin(psi) * v.y(), v.z()};
}

Vec2 airspeed_to_map(const Vec2& v)
{
    const double va = v.norm();
    if (va < 0.5) {
        return {va, 0.0};
    }
    return {va, std::atan2(-v.y(), v.x())};
}

VelocityPid::VelocityPid(PidGains x, PidGains z) : gx_(x), gz_(z) {}

void VelocityPid::reset()
{
    integrator_.setZero();
    last_error_.setZero();
    has_last_ = false;
}

Vec2 VelocityPid::update(const Vec2& error, double mass, double dt)
{
    if (!(dt > 0.0)) {
        throw std::invalid_argument("velocity PID: dt must be > 0");
    }
    const Vec2 kp(gx_.p, gz_.p);
    const Vec2 ki(gx_.i, gz_.i);
    const Vec2 kd(gx_.d, gz_.d);
    const Vec2 limit(gx_.integrator_limit, gz_.integrator_limit);
    integrator_ += ki.cwiseProduct(error) * dt;
    integrator_ = integrator_.cwiseMax(-limit).cwiseMin(limit);
    Vec2 derivative = Vec2::Zero();
    if (has_last_) {
        derivative = (error - last_error_) / dt;
    }
    last_error_ = error;
    has_last_ = true;
    return mass * (kp.cwiseProduct(error) + integrator_ + kd.cwiseProduct(derivative));
}

namespace {

struct PathEval {
    Vec2 total = Vec2::Zero();
    std::vector<Vec2> segments;   // per segment index
    std::vector<char> stalled;
};

PathEval evaluate_path(const RigidBodyState& s, double pitch, const ActuatorSet& act, double main_throttle,
                       const VehicleParams& p, const Vec3& wind, bool with_parts)
{
    const Vec3 euler = euler_from_rotation(s.attitude);
    const Mat3 r = rotation_from_euler(euler.x(), pitch, euler.z());
    const Vec3 v_air = r.transpose() * (s.velocity - wind);
    ActuatorSet a = act;
    a.prop_speed[kPropLeft] = main_throttle * p.propellers[kPropLeft].eta_max;
    a.prop_speed[kPropRight] = main_throttle * p.propellers[kPropRight].eta_max;
    const double psi = euler.z();
    auto to_path = [&](const Vec3& body_force) {
        const Vec3 f = r * body_force;
        return Vec2(std::cos(psi) * f.x() + std::sin(psi) * f.y(), f.z());
    };
    PathEval out;
    if (!with_parts) {
        out.total = to_path(net_wrench(v_air, s.body_rate, a, p).force);
        return out;
    }
    const ForceMoment fm = total_wrench(v_air, s.body_rate, a, p);
    out.total = to_path(fm.force);
    out.segments.assign(p.segments.size(), Vec2::Zero());
    out.stalled.assign(p.segments.size(), 0);
    for (const WrenchContribution& c : fm.breakdown) {
        if (c.kind == SourceKind::Segment) {
            const auto k = static_cast<std::size_t>(c.index);
            out.segments[k] = to_path(c.wrench.force);
            out.stalled[k] = c.stalled ? 1 : 0;
        }
    }
    return out;
}

double main_throttle_of(const ActuatorSet& act, const VehicleParams& p)
{
    return 0.5 * (act.prop_speed[kPropLeft] / p.propellers[kPropLeft].eta_max +
                  act.prop_speed[kPropRight] / p.propellers[kPropRight].eta_max);
}

}  // namespace

Vec2 path_force(const RigidBodyState& s, double pitch, const ActuatorSet& act, double main_throttle,
                const VehicleParams& p, const Vec3& wind)
{
    return evaluate_path(s, pitch, act, main_throttle, p, wind, false).total;
}

Mat2 control_derivatives(const RigidBodyState& s, const ActuatorSet& act, const VehicleParams& p, const Vec3& wind,
                         double pitch_step, double throttle_step, bool exclude_stalled)
{
    const double theta = euler_from_rotation(s.attitude).y();
    const double delta = main_throttle_of(act, p);
    Mat2 j;

    // Pitch column.
    const std::vector<double> offsets{-2.0, -1.0, 1.0, 2.0};
    const std::vector<double> weights{1.0, -8.0, 8.0, -1.0};
    std::vector<char> excluded(p.segments.size(), 0);
    if (exclude_stalled) {
        excluded = evaluate_path(s, theta, act, delta, p, wind, true).stalled;
    }
    const bool any_excluded = std::any_of(excluded.begin(), excluded.end(), [](char c) { return c != 0; });
    Vec2 col = Vec2::Zero();
    for (std::size_t k = 0; k < offsets.size(); ++k) {
        const PathEval e = evaluate_path(s, theta + offsets[k] * pitch_step, act, delta, p, wind, any_excluded);
        Vec2 f = e.total;
        if (any_excluded) {
            for (std::size_t i = 0; i < excluded.size(); ++i) {
                if (excluded[i] != 0) {
                    f -= e.segments[i];
                }
            }
        }
        col += weights[k] * f;
    }
    j.col(0) = col / (12.0 * pitch_step);

    // Throttle column.
    col.setZero();
    for (std::size_t k = 0; k < offsets.size(); ++k) {
        col += weights[k] * path_force(s, theta, act, delta + offsets[k] * throttle_step, p, wind);
    }
    j.col(1) = col / (12.0 * throttle_step);
    return j;
}

Vec2 wls_solve(const Mat2& j, const Vec2& force, const Mat2& w, const Mat2& k)
{
    const Mat2 h = j.transpose() * w * j + k;
    return h.ldlt().solve(j.transpose() * w * force);
}

Vec2 wls_allocate(const Mat2& j, const Vec2& force, const Mat2& w, const Mat2& k, double max_pitch,
                  double trim_throttle)
{
    Vec2 u = wls_solve(j, force, w, k);
    u.x() = std::clamp(u.x(), -max_pitch, max_pitch);
    u.y() = std::clamp(u.y(), -trim_throttle, 1.0 - trim_throttle);
    return u;
}

double wls_objective(const Mat2& j, const Vec2& force, const Mat2& w, const Mat2& k, const Vec2& u)
{
    const Vec2 r = j * u - force;
    return r.dot(w * r) + u.dot(k * u);
}

double schedule_ramp(double v_ax, const CruiseConfig& cfg)
{
    const double span = cfg.ramp_end - cfg.ramp_start;
    if (!(span > 0.0)) {
        return v_ax >= cfg.ramp_end ? 1.0 : 0.0;
    }
    return std::clamp((v_ax - cfg.ramp_start) / span, 0.0, 1.0);
}

Mat2 weight_schedule(double v_ax, const CruiseConfig& cfg)
{
    const double lo = cfg.w_lo_ratio * cfg.w_zz;
    const double hi = cfg.w_hi_ratio * cfg.w_zz;
    Mat2 w = Mat2::Zero();
    w(0, 0) = lo + (hi - lo) * schedule_ramp(v_ax, cfg);
    w(1, 1) = cfg.w_zz;
    return w;
}

double turn_coordination(double roll, double v_ax, double g, double v_min)
{
    return g * std::tan(roll) / std::max(v_ax, v_min);
}

CruiseController::CruiseController(const TrimMap& map, const VehicleParams& p, CruiseConfig cfg)
    : map_(map), p_(p), cfg_(std::move(cfg)), pid_(cfg_.pid_x, cfg_.pid_z)
{
}

void CruiseController::reset() { pid_.reset(); }

CruiseOutput CruiseController::step(const RigidBodyState& s, const CruiseSetpoint& sp, const ActuatorSet& current,
                                    const Vec3& wind, double dt)
{
    CruiseOutput out;
    out.velocity = heading_frame_airspeed(s, wind);
    out.lookup = lookup_velocity(sp.velocity, out.velocity, cfg_.bounds);
    out.map_point = airspeed_to_map(out.lookup);
    out.trim = lookup_trim(map_, out.map_point.x(), out.map_point.y());

    out.force = pid_.update(out.lookup - out.velocity, p_.mass, dt);

    ActuatorCommands trim_cmd = nominal_commands(out.trim.x.wing, out.trim.x.main_throttle);
    const ActuatorSet trim_act = actuate_holding_wing(current, trim_cmd, p_);
    out.jacobian = control_derivatives(s, trim_act, p_, wind, cfg_.pitch_step, cfg_.throttle_step, true);
    out.weights = weight_schedule(out.velocity.x(), cfg_);
    out.correction = wls_allocate(out.jacobian, out.force, out.weights, cfg_.regularization,
                                  cfg_.max_corrective_pitch, out.trim.x.main_throttle);

    out.wing = out.trim.x.wing;
    out.main_throttle = out.trim.x.main_throttle + out.correction.y();
    out.attitude.roll = sp.roll;
    out.attitude.pitch = out.trim.x.pitch + out.correction.x();
    out.attitude.yaw_rate = schedule_ramp(out.velocity.x(), cfg_) *
                            turn_coordination(sp.roll, out.velocity.x(), p_.gravity.norm(), cfg_.min_turn_speed);
    return out;
}

}  // namespace tiltwing
