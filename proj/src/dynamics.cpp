#include "tiltwing/dynamics.hpp"

#include <sstream>

namespace tiltwing {

Vec3 angular_acceleration(const Vec3& moment, const Vec3& omega, const Mat3& inertia)
{
    return inertia.ldlt().solve(moment - omega.cross(inertia * omega));
}

StateDerivative state_derivative(const RigidBodyState& s, const Wrench& fm, const VehicleParams& p)
{
    StateDerivative d;
    d.position_dot = s.velocity;
    d.velocity_dot = p.gravity + s.attitude * fm.force / p.mass;
    d.attitude_dot = s.attitude * skew(s.body_rate);
    d.body_rate_dot = angular_acceleration(fm.moment, s.body_rate, p.inertia);
    return d;
}

Mat3 orthonormalize(const Mat3& r)
{
    Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 u = svd.matrixU();
    const Mat3 v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0.0) {
        u.col(2) = -u.col(2);
    }
    return u * v.transpose();
}

namespace {

RigidBodyState advance(const RigidBodyState& s, const StateDerivative& d, double h)
{
    RigidBodyState out;
    out.position = s.position + h * d.position_dot;
    out.velocity = s.velocity + h * d.velocity_dot;
    out.attitude = s.attitude + h * d.attitude_dot;
    out.body_rate = s.body_rate + h * d.body_rate_dot;
    return out;
}

bool finite(const RigidBodyState& s)
{
    return s.position.allFinite() && s.velocity.allFinite() && s.attitude.allFinite() &&
           s.body_rate.allFinite();
}

}  // namespace

RigidBodyState rk4_step(const RigidBodyState& s, const VehicleParams& p, double dt,
                        const WrenchFunction& wrench)
{
    if (!(dt > 0.0) || dt > kMaxStep) {
        throw std::invalid_argument("integration step must lie in (0, 0.02] s");
    }
    const StateDerivative k1 = state_derivative(s, wrench(s), p);
    const RigidBodyState s2 = advance(s, k1, 0.5 * dt);
    const StateDerivative k2 = state_derivative(s2, wrench(s2), p);
    const RigidBodyState s3 = advance(s, k2, 0.5 * dt);
    const StateDerivative k3 = state_derivative(s3, wrench(s3), p);
    const RigidBodyState s4 = advance(s, k3, dt);
    const StateDerivative k4 = state_derivative(s4, wrench(s4), p);

    const double w = dt / 6.0;
    RigidBodyState out;
    out.position = s.position + w * (k1.position_dot + 2.0 * k2.position_dot + 2.0 * k3.position_dot + k4.position_dot);
    out.velocity = s.velocity + w * (k1.velocity_dot + 2.0 * k2.velocity_dot + 2.0 * k3.velocity_dot + k4.velocity_dot);
    out.attitude = s.attitude + w * (k1.attitude_dot + 2.0 * k2.attitude_dot + 2.0 * k3.attitude_dot + k4.attitude_dot);
    out.body_rate = s.body_rate + w * (k1.body_rate_dot + 2.0 * k2.body_rate_dot + 2.0 * k3.body_rate_dot + k4.body_rate_dot);

    if (!finite(out)) {
        std::ostringstream msg;
        msg << "non-finite state after integration step: position=" << out.position.transpose()
            << " velocity=" << out.velocity.transpose() << " body_rate=" << out.body_rate.transpose();
        throw IntegrationFault(msg.str());
    }
    out.attitude = orthonormalize(out.attitude);
    return out;
}

RigidBodyState integrate_step(const RigidBodyState& s, const ActuatorSet& act, const VehicleParams& p,
                              const Vec3& wind, double dt)
{
    return rk4_step(s, p, dt, [&](const RigidBodyState& x) {
        return net_wrench(air_velocity_body(x, wind), x.body_rate, act, p);
    });
}

}  // namespace tiltwing
