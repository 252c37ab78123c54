#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "tiltwing/trim.hpp"

using namespace tiltwing;

namespace {

const VehicleParams& vehicle()
{
    static const VehicleParams p = default_vehicle();
    return p;
}

double total_thrust(const TrimVariables& x, double airspeed, double gamma)
{
    const TrimCondition c = trim_condition(x, airspeed, gamma, vehicle());
    const ForceMoment fm = total_wrench(c.air_velocity_body, Vec3::Zero(), c.actuators, vehicle());
    double t = 0.0;
    for (const WrenchContribution& w : fm.breakdown) {
        if (w.kind == SourceKind::Propeller) {
            t += w.thrust;
        }
    }
    return t;
}

// Independent hover balance: Newton on (main throttle, tail throttle, pitch)
// with the wing vertical and surfaces centred.
TrimVariables hover_balance()
{
    TrimVariables x;
    x.wing = 1.0;
    x.main_throttle = 0.7;
    x.tail_throttle = 0.2;
    auto g = [](const TrimVariables& v) {
        const SteadyAccelerations a = steady_accelerations(v, 0.0, 0.0, vehicle());
        return Vec3(a.linear.x(), a.linear.z(), a.pitch);
    };
    for (int it = 0; it < 50; ++it) {
        const Vec3 r = g(x);
        if (r.norm() < 1e-12) {
            break;
        }
        Mat3 jac;
        for (int k = 0; k < 3; ++k) {
            TrimVariables p = x;
            const double h = 1e-7;
            (k == 0 ? p.main_throttle : k == 1 ? p.tail_throttle : p.pitch) += h;
            jac.col(k) = (g(p) - r) / h;
        }
        const Vec3 d = jac.fullPivLu().solve(-r);
        x.main_throttle += d[0];
        x.tail_throttle += d[1];
        x.pitch += d[2];
    }
    return x;
}

TrimMap hand_map()
{
    TrimMap m;
    m.airspeeds = {0.0, 1.0, 2.0};
    m.gammas = {-0.1, 0.0, 0.1};
    for (double va : m.airspeeds) {
        for (double g : m.gammas) {
            TrimPoint t;
            t.airspeed = va;
            t.gamma = g;
            t.x.wing = 1.0 - 0.2 * va + g;
            t.x.main_throttle = 0.5 + 0.1 * va - g;
            t.x.flaperon = 0.01 * va;
            t.x.elevator = -0.02 * va;
            t.x.tail_throttle = 0.3 - 0.1 * va;
            t.x.pitch = 0.5 * g;
            t.feasible = true;
            t.solved = true;
            m.cells.push_back(t);
        }
    }
    return m;
}

}  // namespace

TEST(TrimResidual, ExactHoverBalance)
{
    const TrimVariables x = hover_balance();
    const SteadyAccelerations a = steady_accelerations(x, 0.0, 0.0, vehicle());
    EXPECT_LT(a.linear.norm(), 1e-6);
    EXPECT_LT(std::abs(a.pitch), 1e-6);
}

TEST(TrimResidual, FreeFallWithoutActuation)
{
    const SteadyAccelerations a = steady_accelerations(TrimVariables{}, 0.0, 0.0, vehicle());
    EXPECT_NEAR(a.linear.norm(), 9.81, 1e-12);
}

TEST(TrimResidual, AccelWeightIsSquareRooted)
{
    TrimSettings s;
    TrimVariables x;
    x.main_throttle = 0.3;
    x.wing = 0.5;
    const Eigen::VectorXd a = trim_residual(x, 5.0, 0.1, vehicle(), s);
    s.accel_weights *= 4.0;
    const Eigen::VectorXd b = trim_residual(x, 5.0, 0.1, vehicle(), s);
    EXPECT_NEAR(b.head<2>().norm(), 2.0 * a.head<2>().norm(), 1e-12);
    EXPECT_DOUBLE_EQ(a[2], b[2]);
}

TEST(TrimCost, ZeroAtRest)
{
    const TrimSettings s;
    TrimVariables x;
    x.pitch = desired_pitch(14.0, 0.2, s);
    EXPECT_EQ(trim_cost(x, 14.0, 0.2, vehicle(), s), 0.0);
}

TEST(TrimCost, PowerScalesWithSpeedCubed)
{
    TrimVariables x;
    x.wing = 1.0;
    x.main_throttle = 0.3;
    x.tail_throttle = 0.2;
    const double a = propeller_power(x, 0.0, 0.0, vehicle());
    x.main_throttle *= 2.0;
    x.tail_throttle *= 2.0;
    const double b = propeller_power(x, 0.0, 0.0, vehicle());
    EXPECT_GT(a, 0.0);
    EXPECT_NEAR(b, 8.0 * a, 1e-12 * b);
}

TEST(TrimCost, NeighborTermVanishesAtMean)
{
    const TrimSettings s;
    TrimVariables x;
    x.wing = 0.4;
    x.main_throttle = 0.6;
    x.elevator = 0.1;
    TrimContext ctx;
    ctx.neighbor_mean = x.to_vector();
    EXPECT_NEAR(trim_cost(x, 10.0, 0.0, vehicle(), s, ctx), trim_cost(x, 10.0, 0.0, vehicle(), s), 1e-15);
    ctx.neighbor_mean->coeffRef(0) += 0.1;
    EXPECT_GT(trim_cost(x, 10.0, 0.0, vehicle(), s, ctx), trim_cost(x, 10.0, 0.0, vehicle(), s));
}

TEST(TrimCost, BarrierShape)
{
    const TrimSettings s;
    EXPECT_EQ(saturation_barrier(0.0, s), 0.0);
    EXPECT_NEAR(saturation_barrier(0.5, s), saturation_barrier(-0.5, s), 1e-15);
    EXPECT_LT(saturation_barrier(0.3, s), 1e-3);
    EXPECT_GT(saturation_barrier(1.0, s), saturation_barrier(0.9, s));
}

TEST(TrimCost, DesiredPitchBlend)
{
    const TrimSettings s;
    EXPECT_EQ(desired_pitch(2.0, 0.3, s), 0.0);
    EXPECT_DOUBLE_EQ(desired_pitch(20.0, 0.3, s), 0.3);
    EXPECT_DOUBLE_EQ(desired_pitch(8.0, 0.3, s), 0.15);
}

TEST(TrimSolve, Hover)
{
    const TrimPoint t = solve_trim_point(0.0, 0.0, hover_seed().initial_guess, vehicle(), TrimSettings{});
    ASSERT_TRUE(t.feasible);
    const double mg = vehicle().mass * vehicle().gravity.z();
    EXPECT_NEAR(total_thrust(t.x, 0.0, 0.0), mg, 0.01 * mg);
    EXPECT_NEAR(rad2deg(t.x.wing * vehicle().limits.wing_tilt_max + t.x.pitch), 90.0, 2.0);
}

TEST(TrimSolve, FastLevelCruise)
{
    TrimVariables ig;
    ig.wing = 0.05;
    ig.main_throttle = 0.6;
    const TrimPoint t = solve_trim_point(20.0, 0.0, ig, vehicle(), TrimSettings{});
    ASSERT_TRUE(t.feasible);
    EXPECT_LT(std::abs(rad2deg(t.x.pitch)), 3.0);
    EXPECT_LT(rad2deg(t.x.wing * vehicle().limits.wing_tilt_max), 20.0);
}

TEST(TrimSolve, SteepClimbSaturatesThrottle)
{
    TrimVariables ig;
    ig.wing = 0.3;
    ig.main_throttle = 0.9;
    ig.pitch = deg2rad(40.0);
    const TrimPoint t = solve_trim_point(20.0, deg2rad(60.0), ig, vehicle(), TrimSettings{});
    EXPECT_FALSE(t.feasible);
    EXPECT_GT(t.x.main_throttle, 0.99);
}

TEST(TrimSolve, BoundsRespected)
{
    TrimVariables ig;
    ig.wing = 3.0;
    ig.elevator = -4.0;
    const TrimPoint t = solve_trim_point(8.0, 0.1, ig, vehicle(), TrimSettings{});
    const Vec6 v = t.x.to_vector();
    EXPECT_TRUE((v.array() >= trim_lower_bounds().array()).all());
    EXPECT_TRUE((v.array() <= trim_upper_bounds().array()).all());
}

TEST(TrimMapBuild, SingleCellEqualsPointSolve)
{
    TrimGrid g;
    g.airspeed_min = g.airspeed_max = 0.0;
    g.gamma_min = g.gamma_max = 0.0;
    const TrimMap m = build_trim_map(g, hover_seed(), vehicle());
    ASSERT_EQ(m.cells.size(), 1u);
    const TrimPoint t = solve_trim_point(0.0, 0.0, hover_seed().initial_guess, vehicle(), TrimSettings{});
    EXPECT_TRUE(m.cells[0].x.to_vector().isApprox(t.x.to_vector(), 1e-9));
    EXPECT_EQ(m.cells[0].feasible, t.feasible);
}

TEST(TrimMapBuild, SmallGridProperties)
{
    TrimGrid g;
    g.airspeed_max = 20.0;
    g.airspeed_step = 5.0;
    g.gamma_min = deg2rad(-10.0);
    g.gamma_max = deg2rad(10.0);
    g.gamma_step = deg2rad(10.0);
    TrimBuildStats stats;
    TrimBuildOptions opt;
    opt.threads = 2;
    const TrimMap m = build_trim_map(g, hover_seed(), vehicle(), TrimSettings{}, opt, &stats);
    ASSERT_EQ(m.rows(), 5u);
    ASSERT_EQ(m.cols(), 3u);
    EXPECT_EQ(m.cells.size(), 15u);

    // Keep-best: a cell never gets worse across sweeps.
    for (const auto& history : stats.cost_history) {
        for (std::size_t k = 1; k < history.size(); ++k) {
            EXPECT_LE(history[k], history[k - 1] + 1e-12);
        }
    }
    // Hover row shares one solution.
    for (std::size_t j = 0; j < m.cols(); ++j) {
        if (m.at(0, j).feasible) {
            EXPECT_TRUE(m.at(0, j).x.to_vector().isApprox(m.at(0, 1).x.to_vector()));
        }
    }
    // Wing tilts down with airspeed in level flight.
    for (std::size_t i = 1; i < m.rows(); ++i) {
        if (m.at(i, 1).feasible && m.at(i - 1, 1).feasible) {
            EXPECT_LE(m.at(i, 1).x.wing, m.at(i - 1, 1).x.wing + 1e-9);
        }
    }
    // Deterministic regardless of thread count.
    opt.threads = 1;
    EXPECT_EQ(trim_map_csv(build_trim_map(g, hover_seed(), vehicle(), TrimSettings{}, opt)), trim_map_csv(m));
}

TEST(TrimLookup, OnNode)
{
    const TrimMap m = hand_map();
    const TrimLookup r = lookup_trim(m, 1.0, 0.1);
    EXPECT_FALSE(r.clamped);
    EXPECT_FALSE(r.fallback);
    EXPECT_TRUE(r.x.to_vector().isApprox(m.at(1, 2).x.to_vector(), 1e-14));
}

TEST(TrimLookup, MidpointIsCornerMean)
{
    const TrimMap m = hand_map();
    const TrimLookup r = lookup_trim(m, 0.5, -0.05);
    const Vec6 mean =
        0.25 * (m.at(0, 0).x.to_vector() + m.at(0, 1).x.to_vector() + m.at(1, 0).x.to_vector() + m.at(1, 1).x.to_vector());
    EXPECT_TRUE(r.x.to_vector().isApprox(mean, 1e-14));
}

TEST(TrimLookup, ClampsOutsideHull)
{
    const TrimMap m = hand_map();
    const TrimLookup r = lookup_trim(m, 9.0, 0.0);
    EXPECT_TRUE(r.clamped);
    EXPECT_TRUE(r.x.to_vector().isApprox(m.at(2, 1).x.to_vector(), 1e-14));
}

TEST(TrimLookup, InfeasibleCornerFallsBackToNearestFeasible)
{
    TrimMap m = hand_map();
    m.at(1, 1).feasible = false;
    const TrimLookup r = lookup_trim(m, 0.9, 0.01);
    EXPECT_TRUE(r.fallback);
    EXPECT_TRUE(r.x.to_vector().isApprox(m.at(1, 2).x.to_vector(), 1e-14) ||
                r.x.to_vector().isApprox(m.at(0, 1).x.to_vector(), 1e-14) ||
                r.x.to_vector().isApprox(m.at(2, 1).x.to_vector(), 1e-14) ||
                r.x.to_vector().isApprox(m.at(1, 0).x.to_vector(), 1e-14));
}

TEST(TrimLookup, HoverNodeIdentity)
{
    TrimGrid g;
    g.airspeed_max = 1.0;
    g.gamma_min = deg2rad(-5.0);
    g.gamma_max = deg2rad(5.0);
    const TrimMap m = build_trim_map(g, hover_seed(), vehicle());
    const TrimLookup r = lookup_trim(m, 0.0, 0.0);
    EXPECT_NEAR(rad2deg(r.x.wing * vehicle().limits.wing_tilt_max + r.x.pitch), 90.0, 2.0);
}

TEST(TrimCsv, HeaderAndRoundTrip)
{
    TrimMap m = hand_map();
    m.at(2, 0).feasible = false;
    m.at(1, 1).cost = 0.125;
    m.at(1, 1).accel_residual = 1e-7;
    const std::string text = trim_map_csv(m);
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "va,gamma,feasible,theta_t,delta_w,delta_plr,delta_al,delta_e,delta_pt,cost,res_v,res_th");
    const TrimMap back = parse_trim_map_csv(text);
    EXPECT_EQ(back.airspeeds, m.airspeeds);
    EXPECT_EQ(back.gammas, m.gammas);
    EXPECT_EQ(back.feasible_count(), m.feasible_count());
    EXPECT_EQ(trim_map_csv(back), text);

    const auto path = std::filesystem::temp_directory_path() / "tiltwing_trim_roundtrip.csv";
    write_trim_map_csv(m, path);
    EXPECT_EQ(trim_map_csv(read_trim_map_csv(path)), text);
    std::filesystem::remove(path);
}

TEST(TrimCsv, MalformedRejected)
{
    EXPECT_THROW(parse_trim_map_csv("va,gamma\n0,0\n"), std::exception);
    EXPECT_THROW(parse_trim_map_csv(""), std::exception);
}

TEST(TrimLookup, EmptyMapRejected)
{
    TrimMap m = hand_map();
    for (TrimPoint& c : m.cells) {
        c.feasible = false;
    }
    EXPECT_THROW(lookup_trim(m, 1.0, 0.0), TrimError);
}
