#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tiltwing/aero.hpp"
#include "tiltwing/dynamics.hpp"

using namespace tiltwing;

namespace {

PropellerParams test_prop()
{
    PropellerParams pr;
    pr.diameter = 0.3;
    pr.ct0 = 0.09;
    pr.ct1 = -0.1;
    pr.cq0 = 0.006;
    pr.cq1 = -0.004;
    pr.normal_coeff = 0.002;
    pr.eta_max = 150.0;
    return pr;
}

AirfoilSegmentParams symmetric_segment()
{
    AirfoilSegmentParams s;
    s.chord = 0.2;
    s.span = 0.5;
    s.cl_alpha = 5.0;
    s.cd0 = 0.02;
    s.cd_alpha2 = 1.0;
    s.cm_alpha = -0.1;
    s.stall_neg = deg2rad(-12.0);
    s.stall_pos = deg2rad(12.0);
    s.fp_cl45 = 1.1;
    s.fp_cd_min = 0.05;
    s.fp_cd90 = 1.3;
    s.fp_cm_max = 0.4;
    return s;
}

// Reflection y -> -y: forces as polar vectors, moments and rates as axial vectors.
Vec3 mirror_polar(const Vec3& v) { return {v.x(), -v.y(), v.z()}; }
Vec3 mirror_axial(const Vec3& v) { return {-v.x(), v.y(), -v.z()}; }

ActuatorSet mirror(const ActuatorSet& a)
{
    ActuatorSet m = a;
    m.aileron_left = a.aileron_right;
    m.aileron_right = a.aileron_left;
    m.rudder = -a.rudder;
    m.tail_tilt = -a.tail_tilt;
    m.prop_speed[kPropLeft] = a.prop_speed[kPropRight];
    m.prop_speed[kPropRight] = a.prop_speed[kPropLeft];
    return m;
}

ActuatorSet random_actuators(std::mt19937_64& rng, const VehicleParams& p)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> s(-1.0, 1.0);
    ActuatorCommands c;
    c.wing = u(rng);
    c.prop_left = u(rng);
    c.prop_right = u(rng);
    c.prop_tail = u(rng);
    c.aileron_left = s(rng);
    c.aileron_right = s(rng);
    c.elevator = s(rng);
    c.rudder = s(rng);
    c.tail_tilt = s(rng);
    return actuate(c, p);
}

}  // namespace

TEST(LocalAirspeed, Examples)
{
    const Vec3 v(3.0, -1.0, 0.5);
    EXPECT_TRUE(local_airspeed(Vec3(0.3, 0.2, 0.1), v, Vec3::Zero()).airspeed.isApprox(v));
    const Vec3 r(1.0, 0.0, 0.0);
    const Vec3 w(0.0, 1.0, 0.0);
    EXPECT_TRUE(local_airspeed(r, Vec3::Zero(), w).airspeed.isApprox(Vec3(0.0, 0.0, -1.0)));
    EXPECT_TRUE(local_airspeed(r, Vec3::Zero(), w, Vec3(5.0, 0.0, 0.0)).airspeed.isApprox(Vec3(5.0, 0.0, -1.0)));
}

TEST(Propeller, StaticThrustHandValue)
{
    const PropellerParams pr = test_prop();
    LocalFlow flow;
    resolve_propeller_flow(flow, Vec3::UnitX());
    const PropellerWrench w = propeller_wrench(pr, {}, 100.0, flow, 1.225);
    const double expected = 1.225 * 1e4 * 0.0081 * 0.09;
    EXPECT_NEAR(w.thrust, expected, 1e-12);
    EXPECT_NEAR(w.thrust, 8.93, 0.005);
    EXPECT_TRUE(w.wrench.force.isApprox(Vec3(expected, 0.0, 0.0)));
}

TEST(Propeller, ZeroSpeedZeroWrench)
{
    LocalFlow flow = local_airspeed(Vec3::Zero(), Vec3(5.0, 3.0, -2.0), Vec3::Zero());
    resolve_propeller_flow(flow, Vec3::UnitX());
    const PropellerWrench w = propeller_wrench(test_prop(), {}, 0.0, flow, 1.225);
    EXPECT_EQ(w.wrench.force.norm(), 0.0);
    EXPECT_EQ(w.wrench.moment.norm(), 0.0);
}

TEST(Propeller, HandednessFlipsReactionOnly)
{
    PropellerParams pr = test_prop();
    PropellerPose pose;
    pose.hub = Vec3(0.2, 0.3, 0.0);
    LocalFlow flow = local_airspeed(pose.hub, Vec3(4.0, 2.0, 0.0), Vec3::Zero());
    resolve_propeller_flow(flow, Vec3::UnitX());
    const PropellerWrench a = propeller_wrench(pr, pose, 80.0, flow, 1.225);
    pr.handedness = -pr.handedness;
    const PropellerWrench b = propeller_wrench(pr, pose, 80.0, flow, 1.225);
    EXPECT_EQ(a.thrust, b.thrust);
    EXPECT_TRUE(a.wrench.force.isApprox(b.wrench.force));
    const Vec3 lever = pose.hub.cross(a.wrench.force);
    EXPECT_TRUE((a.wrench.moment - lever).isApprox(-(b.wrench.moment - lever)));
}

TEST(Propeller, AdvanceRatioClampKeepsThrustNonNegative)
{
    const PropellerParams pr = test_prop();
    EXPECT_EQ(advance_ratio(pr, 0.5, 10.0), 0.0);
    EXPECT_NEAR(advance_ratio(pr, 100.0, 300.0), pr.max_advance_ratio(), 1e-15);
    EXPECT_EQ(advance_ratio(pr, 100.0, -3.0), 0.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-40.0, 40.0);
    for (int k = 0; k < 200; ++k) {
        LocalFlow flow = local_airspeed(Vec3::Zero(), Vec3(u(rng), u(rng), u(rng)), Vec3::Zero());
        resolve_propeller_flow(flow, Vec3::UnitX());
        EXPECT_GE(propeller_wrench(pr, {}, 60.0, flow, 1.225).thrust, 0.0);
    }
}

TEST(Propeller, FlowAxesOrthonormal)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int k = 0; k < 100; ++k) {
        const Vec3 axis = Vec3(u(rng), u(rng), u(rng)).normalized();
        LocalFlow flow = local_airspeed(Vec3::Zero(), Vec3(u(rng), u(rng), u(rng)), Vec3::Zero());
        resolve_propeller_flow(flow, axis);
        EXPECT_NEAR(flow.axial_dir.norm(), 1.0, 1e-12);
        EXPECT_NEAR(flow.radial_dir.norm(), 1.0, 1e-12);
        EXPECT_NEAR(flow.axial_dir.dot(flow.radial_dir), 0.0, 1e-12);
    }
}

TEST(InducedVelocity, Examples)
{
    const PropellerParams pr = test_prop();
    const double area = kPi * 0.3 * 0.3 / 4.0;
    const double oracle = std::sqrt(10.0 / (2.0 * 1.225 * area));
    const Vec3 w = induced_velocity(pr, Vec3::UnitX(), 10.0, 0.0, 1.225);
    EXPECT_NEAR(w.norm(), oracle, 1e-12);
    EXPECT_NEAR(w.norm(), 7.60, 0.005);
    EXPECT_EQ(induced_velocity(pr, Vec3::UnitX(), 0.0, 0.0, 1.225).norm(), 0.0);
    EXPECT_EQ(induced_velocity(pr, Vec3::UnitX(), 0.0, 12.0, 1.225).norm(), 0.0);
}

TEST(Airfoil, FlatPlateAnchors)
{
    const AirfoilSegmentParams s = symmetric_segment();
    EXPECT_NEAR(airfoil_coefficients(s, kPi / 4.0, 0.0).cl, s.fp_cl45, 1e-12);
    EXPECT_NEAR(airfoil_coefficients(s, kPi / 2.0, 0.0).cd, s.fp_cd90, 1e-12);
    const AeroCoefficients zero = airfoil_coefficients(s, 0.0, 0.0);
    EXPECT_EQ(zero.cl, 0.0);
    EXPECT_EQ(zero.cm, 0.0);
}

TEST(Airfoil, PeriodicAtPi)
{
    const AirfoilSegmentParams s = symmetric_segment();
    const AeroCoefficients a = airfoil_coefficients(s, -kPi, 0.0);
    const AeroCoefficients b = airfoil_coefficients(s, kPi, 0.0);
    EXPECT_NEAR(a.cl, b.cl, 1e-12);
    EXPECT_NEAR(a.cd, b.cd, 1e-12);
    EXPECT_NEAR(a.cm, b.cm, 1e-12);
}

TEST(Airfoil, BlendEdgesContinuous)
{
    AirfoilSegmentParams s = symmetric_segment();
    s.cl0 = 0.05;
    for (double edge : {s.stall_neg - s.blend_half_width, s.stall_neg + s.blend_half_width,
                        s.stall_pos - s.blend_half_width, s.stall_pos + s.blend_half_width}) {
        const AeroCoefficients a = airfoil_coefficients(s, std::nextafter(edge, -10.0), 0.2);
        const AeroCoefficients b = airfoil_coefficients(s, std::nextafter(edge, 10.0), 0.2);
        EXPECT_LT(std::abs(a.cl - b.cl), 1e-12);
        EXPECT_LT(std::abs(a.cd - b.cd), 1e-12);
        EXPECT_LT(std::abs(a.cm - b.cm), 1e-12);
    }
}

TEST(Airfoil, DenseSweepHasNoJumps)
{
    const AirfoilSegmentParams s = symmetric_segment();
    const int n = 200000;
    const double h = 2.0 * kPi / n;
    AeroCoefficients prev = airfoil_coefficients(s, -kPi, 0.0);
    double worst = 0.0;
    for (int k = 1; k <= n; ++k) {
        const AeroCoefficients c = airfoil_coefficients(s, -kPi + k * h, 0.0);
        worst = std::max({worst, std::abs(c.cl - prev.cl), std::abs(c.cd - prev.cd), std::abs(c.cm - prev.cm)});
        prev = c;
    }
    // Bounded by the largest slope times the step.
    EXPECT_LT(worst, 10.0 * h);
}

TEST(Segment, Examples)
{
    const AirfoilSegmentParams s = symmetric_segment();
    SegmentFrame frame;
    frame.position = Vec3(0.1, 0.3, 0.0);

    LocalFlow still = local_airspeed(frame.position, Vec3::Zero(), Vec3::Zero());
    resolve_segment_flow(still, frame);
    const Wrench zero = segment_wrench(s, frame, still, 0.0, 1.225);
    EXPECT_EQ(zero.force.norm(), 0.0);
    EXPECT_EQ(zero.moment.norm(), 0.0);

    LocalFlow flow = local_airspeed(frame.position, Vec3(10.0, 0.0, 0.0), Vec3::Zero());
    resolve_segment_flow(flow, frame);
    const Wrench w = segment_wrench(s, frame, flow, 0.0, 1.225);
    const double drag = 0.5 * 1.225 * 100.0 * s.chord * s.span * s.cd0;
    EXPECT_NEAR(w.force.x(), -drag, 1e-12);
    EXPECT_NEAR(w.force.y(), 0.0, 1e-12);
    EXPECT_NEAR(w.force.z(), 0.0, 1e-12);

    LocalFlow slow = local_airspeed(frame.position, Vec3(4.0, 0.5, 1.0), Vec3::Zero());
    LocalFlow fast = local_airspeed(frame.position, Vec3(8.0, 1.0, 2.0), Vec3::Zero());
    resolve_segment_flow(slow, frame);
    resolve_segment_flow(fast, frame);
    const Wrench a = segment_wrench(s, frame, slow, 0.1, 1.225);
    const Wrench b = segment_wrench(s, frame, fast, 0.1, 1.225);
    EXPECT_TRUE(b.force.isApprox(4.0 * a.force, 1e-12));
    EXPECT_TRUE(b.moment.isApprox(4.0 * a.moment, 1e-12));
}

TEST(Segment, FlowAxes)
{
    SegmentFrame frame;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int k = 0; k < 100; ++k) {
        LocalFlow flow = local_airspeed(Vec3::Zero(), Vec3(u(rng), u(rng), u(rng)), Vec3::Zero());
        resolve_segment_flow(flow, frame);
        const Vec3 ldp = flow.airspeed - flow.airspeed.dot(frame.ey) * frame.ey;
        EXPECT_NEAR(flow.lift_dir.norm(), 1.0, 1e-12);
        EXPECT_NEAR(flow.drag_dir.norm(), 1.0, 1e-12);
        EXPECT_NEAR(flow.lift_dir.dot(flow.drag_dir), 0.0, 1e-12);
        EXPECT_NEAR(flow.drag_dir.dot(ldp), -ldp.norm(), 1e-9);
    }
}

TEST(Fuselage, Examples)
{
    FuselageParams f;
    f.cd_x = 0.05;
    f.cd_y = 0.1;
    f.cd_z = 0.2;
    EXPECT_EQ(fuselage_wrench(Vec3::Zero(), f, 1.225).force.norm(), 0.0);
    EXPECT_NEAR(fuselage_wrench(Vec3(2.0, 0.0, 0.0), f, 1.225).force.x(), -0.1225, 1e-12);
    const Vec3 v(3.0, -2.0, 1.5);
    EXPECT_TRUE(fuselage_wrench(-v, f, 1.225).force.isApprox(-fuselage_wrench(v, f, 1.225).force));
}

TEST(TotalWrench, AtRestUnpoweredIsZero)
{
    const VehicleParams p = default_vehicle();
    const ForceMoment fm = total_wrench(Vec3::Zero(), Vec3::Zero(), actuate(nominal_commands(0.5, 0.0), p), p);
    EXPECT_EQ(fm.force.norm(), 0.0);
    EXPECT_EQ(fm.moment.norm(), 0.0);
}

TEST(TotalWrench, BreakdownSumsToTotal)
{
    const VehicleParams p = default_vehicle();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-15.0, 15.0);
    for (int k = 0; k < 100; ++k) {
        const ForceMoment fm =
            total_wrench(Vec3(u(rng), u(rng), u(rng)), 0.1 * Vec3(u(rng), u(rng), u(rng)), random_actuators(rng, p), p);
        Vec3 f = Vec3::Zero();
        Vec3 m = Vec3::Zero();
        for (const WrenchContribution& c : fm.breakdown) {
            f += c.wrench.force;
            m += c.wrench.moment;
        }
        EXPECT_LE((f - fm.force).norm(), 1e-9 * std::max(1.0, fm.force.norm()));
        EXPECT_LE((m - fm.moment).norm(), 1e-9 * std::max(1.0, fm.moment.norm()));
    }
}

TEST(TotalWrench, SymmetricStateHasNoLateralWrench)
{
    const VehicleParams p = default_vehicle();
    for (double wing : {0.0, 0.3, 0.7, 1.0}) {
        ActuatorCommands c = nominal_commands(wing, 0.6);
        c.elevator = 0.2;
        const ForceMoment fm = total_wrench(Vec3(9.0, 0.0, 1.5), Vec3(0.0, 0.2, 0.0), actuate(c, p), p);
        EXPECT_NEAR(fm.force.y(), 0.0, 1e-9);
        EXPECT_NEAR(fm.moment.x(), 0.0, 1e-9);
        EXPECT_NEAR(fm.moment.z(), 0.0, 1e-9);
    }
}

TEST(TotalWrench, HoverThrustBalance)
{
    const VehicleParams p = default_vehicle();
    const PropellerParams& pr = p.propellers[kPropLeft];
    const double d4 = std::pow(pr.diameter, 4);
    // 2 rho eta^2 D^4 C_T0 = m g
    const double eta = std::sqrt(p.mass * p.gravity.z() / (2.0 * p.air_density * d4 * pr.ct0));
    const ActuatorSet act = actuate(nominal_commands(1.0, eta / pr.eta_max), p);
    const ForceMoment fm = total_wrench(Vec3::Zero(), Vec3::Zero(), act, p);
    // Level attitude: inertial z equals body z. Residual is the download of
    // the wing in the slipstream.
    EXPECT_LT(std::abs(fm.force.z() + p.mass * p.gravity.z()), 0.1 * p.mass * p.gravity.z());
    EXPECT_LT(fm.force.z(), 0.0);
}

TEST(TotalWrench, MirrorSymmetry)
{
    const VehicleParams p = default_vehicle();
    VehicleParams mirrored = p;
    // A reflected rotor spins the other way.
    mirrored.propellers[kPropTail].handedness = -p.propellers[kPropTail].handedness;
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const Vec3 v(15.0 * u(rng), 5.0 * u(rng), 5.0 * u(rng));
        const Vec3 w(u(rng), u(rng), u(rng));
        const ActuatorSet a = random_actuators(rng, p);
        const ForceMoment fm = total_wrench(v, w, a, p);
        const ForceMoment mm = total_wrench(mirror_polar(v), mirror_axial(w), mirror(a), mirrored);
        const double scale = std::max(1.0, fm.force.norm() + fm.moment.norm());
        EXPECT_LE((mm.force - mirror_polar(fm.force)).norm(), 1e-9 * scale);
        EXPECT_LE((mm.moment - mirror_axial(fm.moment)).norm(), 1e-9 * scale);
    }
}

TEST(TotalWrench, StateOverloadUsesAirRelativeVelocity)
{
    const VehicleParams p = default_vehicle();
    RigidBodyState s;
    s.attitude = rotation_from_euler(0.1, 0.2, 0.3);
    s.velocity = Vec3(10.0, 1.0, -0.5);
    s.body_rate = Vec3(0.1, -0.2, 0.05);
    const Vec3 wind(2.0, -1.0, 0.3);
    const ActuatorSet act = actuate(nominal_commands(0.2, 0.5), p);
    const ForceMoment a = total_wrench(s, act, p, wind);
    const ForceMoment b = total_wrench(s.attitude.transpose() * (s.velocity - wind), s.body_rate, act, p);
    EXPECT_TRUE(a.force.isApprox(b.force));
    EXPECT_TRUE(a.moment.isApprox(b.moment));
    const Wrench n = net_wrench(air_velocity_body(s, wind), s.body_rate, act, p);
    EXPECT_TRUE(n.force.isApprox(a.force));
}
