#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "tiltwing/dynamics.hpp"

using namespace tiltwing;

namespace {

VehicleParams body_with_inertia(const Mat3& inertia)
{
    VehicleParams p = default_vehicle();
    p.inertia = inertia;
    return p;
}

const WrenchFunction kNoWrench = [](const RigidBodyState&) { return Wrench{}; };

RigidBodyState spin(double dt, double duration, const VehicleParams& p)
{
    RigidBodyState s;
    s.body_rate = {2.0, -1.0, 3.0};
    const int n = static_cast<int>(std::lround(duration / dt));
    for (int k = 0; k < n; ++k) {
        s = rk4_step(s, p, dt, kNoWrench);
    }
    return s;
}

double distance(const RigidBodyState& a, const RigidBodyState& b)
{
    return (a.attitude - b.attitude).norm() + (a.body_rate - b.body_rate).norm();
}

}  // namespace

TEST(Dynamics, FreeFall)
{
    const VehicleParams p = default_vehicle();
    RigidBodyState s;
    s.attitude = rotation_from_euler(0.3, -0.2, 1.0);
    const StateDerivative d = state_derivative(s, Wrench{}, p);
    EXPECT_TRUE(d.velocity_dot.isApprox(Vec3(0.0, 0.0, 9.81)));
    EXPECT_EQ(d.body_rate_dot.norm(), 0.0);
}

TEST(Dynamics, SphericalInertiaNoGyroscopicTerm)
{
    const Vec3 w(0.7, -1.3, 2.2);
    EXPECT_LT(angular_acceleration(Vec3::Zero(), w, 0.3 * Mat3::Identity()).norm(), 1e-14);
}

TEST(Dynamics, EulerTermHandValue)
{
    const Mat3 inertia = Vec3(1.0, 2.0, 3.0).asDiagonal();
    // w x I w = (1,1,0) x (1,2,0) = (0,0,1); w_dot = -I^-1 (0,0,1)
    const Vec3 a = angular_acceleration(Vec3::Zero(), Vec3(1.0, 1.0, 0.0), inertia);
    EXPECT_NEAR(a.x(), 0.0, 1e-15);
    EXPECT_NEAR(a.y(), 0.0, 1e-15);
    EXPECT_NEAR(a.z(), -1.0 / 3.0, 1e-15);
}

TEST(Dynamics, ForceRotatedToInertial)
{
    const VehicleParams p = default_vehicle();
    RigidBodyState s;
    s.attitude = rotation_from_euler(0.0, deg2rad(90.0), 0.0);
    const StateDerivative d = state_derivative(s, Wrench{Vec3(p.mass, 0.0, 0.0), Vec3::Zero()}, p);
    // Nose pointing up: body x thrust of m*1 N cancels 1 m/s^2 of gravity.
    EXPECT_NEAR(d.velocity_dot.z(), 9.81 - 1.0, 1e-12);
}

TEST(Integrator, ConstantVelocityExact)
{
    VehicleParams p = default_vehicle();
    p.gravity = Vec3::Zero();
    RigidBodyState s;
    s.position = {1.0, 2.0, 3.0};
    s.velocity = {4.0, -5.0, 6.0};
    const RigidBodyState n = rk4_step(s, p, 0.01, kNoWrench);
    EXPECT_EQ(n.velocity, s.velocity);
    EXPECT_TRUE(n.position.isApprox(s.position + 0.01 * s.velocity, 1e-15));
}

TEST(Integrator, OrthonormalAfterManySteps)
{
    const VehicleParams p = body_with_inertia(Vec3(0.06, 0.08, 0.12).asDiagonal());
    RigidBodyState s;
    s.body_rate = {1.3, -0.7, 2.1};
    for (int k = 0; k < 100000; ++k) {
        s = rk4_step(s, p, 0.004, kNoWrench);
    }
    EXPECT_LT((s.attitude.transpose() * s.attitude - Mat3::Identity()).norm(), 1e-8);
    EXPECT_NEAR(s.attitude.determinant(), 1.0, 1e-9);
}

TEST(Integrator, FourthOrderConvergence)
{
    const VehicleParams p = body_with_inertia(Vec3(1.0, 2.0, 3.0).asDiagonal());
    const double dt = 0.02;
    const RigidBodyState a = spin(dt, 2.0, p);
    const RigidBodyState b = spin(dt / 2.0, 2.0, p);
    const RigidBodyState c = spin(dt / 4.0, 2.0, p);
    const double order = std::log2(distance(a, b) / distance(b, c));
    EXPECT_GE(order, 3.9);
}

TEST(Integrator, TorqueFreeConservesMomentum)
{
    const Mat3 inertia = Vec3(0.06, 0.08, 0.12).asDiagonal();
    const VehicleParams p = body_with_inertia(inertia);
    RigidBodyState s;
    s.body_rate = {1.3, -0.7, 2.1};
    const Vec3 h0 = s.attitude * inertia * s.body_rate;
    for (int k = 0; k < 2500; ++k) {
        s = rk4_step(s, p, 0.004, kNoWrench);
    }
    EXPECT_LT((s.attitude * inertia * s.body_rate - h0).norm(), 1e-6 * h0.norm());
}

TEST(Integrator, RejectsBadStep)
{
    const VehicleParams p = default_vehicle();
    EXPECT_THROW(rk4_step({}, p, 0.0, kNoWrench), std::invalid_argument);
    EXPECT_THROW(rk4_step({}, p, 0.05, kNoWrench), std::invalid_argument);
}

TEST(Integrator, NonFiniteIsFault)
{
    const VehicleParams p = default_vehicle();
    const WrenchFunction bad = [](const RigidBodyState&) {
        return Wrench{Vec3(std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0), Vec3::Zero()};
    };
    EXPECT_THROW(rk4_step({}, p, 0.004, bad), IntegrationFault);
}

TEST(Integrator, OrthonormalizeIsProjection)
{
    const Mat3 r = rotation_from_euler(0.2, 0.4, -0.6);
    EXPECT_TRUE(orthonormalize(r).isApprox(r, 1e-14));
    Mat3 noisy = r;
    noisy(0, 1) += 1e-4;
    const Mat3 q = orthonormalize(noisy);
    EXPECT_LT((q.transpose() * q - Mat3::Identity()).norm(), 1e-14);
    EXPECT_NEAR(q.determinant(), 1.0, 1e-14);
}
