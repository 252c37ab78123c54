#include "tiltwing/checks.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "tiltwing/attitude.hpp"
#include "tiltwing/cruise.hpp"
#include "tiltwing/dynamics.hpp"

namespace tiltwing {

namespace {

std::string fmt(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

CheckResult check_jacobian(const VehicleParams& p)
{
    CheckResult r{"jacobian_fd", false, 0.0, 1e-6, {}};
    const double step_pitch = deg2rad(0.5);
    const double step_throttle = 0.01;
    double worst = 0.0;
    // Cruise states away from the stall blend edges and the advance-ratio clamp.
    for (double speed : {8.0, 12.0, 16.0}) {
        RigidBodyState s;
        s.attitude = rotation_from_euler(0.0, deg2rad(2.0), 0.0);
        s.velocity = {speed, 0.0, 0.0};
        const ActuatorSet act = actuate(nominal_commands(0.0, 0.7), p);
        const Mat2 j = control_derivatives(s, act, p, Vec3::Zero(), step_pitch, step_throttle, false);
        const Mat2 ref = control_derivatives(s, act, p, Vec3::Zero(), step_pitch / 8.0, step_throttle / 8.0, false);
        worst = std::max(worst, (j - ref).norm() / ref.norm());
    }
    r.value = worst;
    r.passed = worst < r.tolerance;
    r.detail = "relative difference to a refined stencil " + fmt(worst);
    return r;
}

CheckResult check_allocation_accounting(const VehicleParams& p, int cases)
{
    CheckResult r{"allocation_accounting", false, 0.0, 1e-9, {}};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < cases; ++k) {
        RigidBodyState s;
        s.attitude = rotation_from_euler(0.2 * u(rng), 0.2 * u(rng), 0.0);
        s.velocity = {3.0 * u(rng), u(rng), u(rng)};
        s.body_rate = {0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng)};
        const ActuatorSet nominal = actuate(nominal_commands(0.8 + 0.2 * u(rng), 0.6 + 0.1 * u(rng)), p);
        const Vec3 demand(2.0 * u(rng), 2.0 * u(rng), 2.0 * u(rng));
        const AllocationResult a = daisy_chain_allocate(demand, s, nominal, p);
        Vec3 sum = a.residual;
        for (const Vec3& b : a.block_moments) {
            sum += b;
        }
        worst = std::max(worst, (sum - demand).lpNorm<Eigen::Infinity>());
    }
    r.value = worst;
    r.passed = worst <= r.tolerance;
    r.detail = std::to_string(cases) + " demands, worst |booked + residual - demand| " + fmt(worst);
    return r;
}

CheckResult check_orthonormality(const VehicleParams& p, int steps)
{
    CheckResult r{"orthonormality", false, 0.0, 1e-8, {}};
    RigidBodyState s;
    s.body_rate = {1.3, -0.7, 2.1};
    const WrenchFunction torque_free = [](const RigidBodyState&) { return Wrench{}; };
    for (int k = 0; k < steps; ++k) {
        s = rk4_step(s, p, 0.004, torque_free);
    }
    const double err = (s.attitude.transpose() * s.attitude - Mat3::Identity()).norm();
    r.value = err;
    r.passed = err < r.tolerance;
    r.detail = std::to_string(steps) + " steps, |R^T R - I| " + fmt(err);
    return r;
}

CheckResult check_stall_blend(const VehicleParams& p)
{
    CheckResult r{"stall_blend_continuity", false, 0.0, 1e-12, {}};
    double worst = 0.0;
    for (const AirfoilSegmentParams& seg : p.segments) {
        const double h = seg.blend_half_width;
        for (double edge : {seg.stall_neg - h, seg.stall_neg + h, seg.stall_pos - h, seg.stall_pos + h}) {
            const double below = std::nextafter(edge, -10.0);
            const double above = std::nextafter(edge, 10.0);
            const AeroCoefficients a = airfoil_coefficients(seg, below, 0.0);
            const AeroCoefficients b = airfoil_coefficients(seg, above, 0.0);
            worst = std::max({worst, std::abs(a.cl - b.cl), std::abs(a.cd - b.cd), std::abs(a.cm - b.cm)});
        }
    }
    r.value = worst;
    r.passed = worst < r.tolerance;
    r.detail = "largest coefficient jump across blend edges " + fmt(worst);
    return r;
}

std::vector<CheckResult> run_checks(const VehicleParams& p)
{
    return {check_jacobian(p), check_allocation_accounting(p), check_orthonormality(p), check_stall_blend(p)};
}

}  // namespace tiltwing
