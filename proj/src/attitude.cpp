#include "tiltwing/attitude.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tiltwing {

Eigen::Quaterniond quaternion_from_euler(double roll, double pitch, double yaw)
{
    return Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                              Eigen::AngleAxisd(roll, Vec3::UnitX()));
}

AttitudeController::AttitudeController(AttitudeGains gains) : gains_(std::move(gains)) {}

void AttitudeController::reset()
{
    integrator_.setZero();
    last_rate_.setZero();
    has_last_ = false;
}

Vec3 AttitudeController::rate_setpoint(const RigidBodyState& s, const AttitudeSetpoint& sp, double wing_tilt) const
{
    const Vec3 euler = euler_from_rotation(s.attitude);
    const Eigen::Quaterniond q(s.attitude);
    const Eigen::Quaterniond qd = quaternion_from_euler(sp.roll, sp.pitch, euler.z());
    Eigen::Quaterniond qe = q.conjugate() * qd;
    if (qe.w() < 0.0) {
        qe.coeffs() = -qe.coeffs();
    }
    Vec3 rate = 2.0 * gains_.attitude_p.cwiseProduct(qe.vec());

    const double span = gains_.schedule_end - gains_.schedule_start;
    const double t = span > 0.0 ? std::clamp((wing_tilt - gains_.schedule_start) / span, 0.0, 1.0) : 0.0;
    if (rate.y() < 0.0) {
        rate.y() *= 1.0 - (1.0 - gains_.pitch_down_scale) * t;
    }

    const double phi = euler.x();
    const double theta = euler.y();
    rate += sp.yaw_rate * Vec3(-std::sin(theta), std::sin(phi) * std::cos(theta), std::cos(phi) * std::cos(theta));
    return rate;
}

Vec3 AttitudeController::update(const RigidBodyState& s, const AttitudeSetpoint& sp, double wing_tilt, double dt)
{
    if (!(dt > 0.0)) {
        throw std::invalid_argument("attitude controller: dt must be > 0");
    }
    const Vec3 error = rate_setpoint(s, sp, wing_tilt) - s.body_rate;
    integrator_ += gains_.rate_i.cwiseProduct(error) * dt;
    integrator_ = integrator_.cwiseMax(-gains_.integrator_limit).cwiseMin(gains_.integrator_limit);
    Vec3 derivative = Vec3::Zero();
    if (has_last_) {
        derivative = -(s.body_rate - last_rate_) / dt;
    }
    last_rate_ = s.body_rate;
    has_last_ = true;
    return gains_.rate_p.cwiseProduct(error) + integrator_ + gains_.rate_d.cwiseProduct(derivative);
}

Vec3 dynamic_inversion(const Vec3& omega_dot_des, const Vec3& omega, const Mat3& inertia)
{
    return inertia * omega_dot_des + omega.cross(inertia * omega);
}

ActuatorSet nominal_actuation(const ActuatorSet& current, double wing, double main_throttle, const VehicleParams& p)
{
    return actuate_holding_wing(current, nominal_commands(wing, main_throttle), p);
}

Vec3 nominal_moment_estimate(const RigidBodyState& s, const ActuatorSet& nominal, const VehicleParams& p,
                             const Vec3& wind)
{
    return net_wrench(air_velocity_body(s, wind), s.body_rate, nominal, p).moment;
}

Vec2 solve_box_qp2(const Mat2& b, const Vec2& e, const Mat2& w, const Vec2& lo, const Vec2& hi, double reg)
{
    const Mat2 h = b.transpose() * w * b + reg * Mat2::Identity();
    const Vec2 g = b.transpose() * w * e;
    auto objective = [&](const Vec2& s) {
        const Vec2 r = b * s - e;
        return r.dot(w * r) + reg * s.squaredNorm();
    };
    auto inside = [&](const Vec2& s) {
        return s[0] >= lo[0] && s[0] <= hi[0] && s[1] >= lo[1] && s[1] <= hi[1];
    };

    Vec2 best = lo.cwiseMax(Vec2::Zero()).cwiseMin(hi);
    double best_f = objective(best);
    auto consider = [&](const Vec2& s) {
        const double f = objective(s);
        if (f < best_f) {
            best_f = f;
            best = s;
        }
    };
    if (std::abs(h.determinant()) > 1e-300) {
        const Vec2 s = h.inverse() * g;
        if (inside(s)) {
            consider(s);
        }
    }
    // One coordinate on a bound, the other minimized and clipped.
    for (int fixed = 0; fixed < 2; ++fixed) {
        const int other = 1 - fixed;
        for (const double v : {lo[fixed], hi[fixed]}) {
            Vec2 s;
            s[fixed] = v;
            s[other] = 0.0;
            if (h(other, other) > 0.0) {
                s[other] = (g[other] - h(other, fixed) * v) / h(other, other);
            }
            s[other] = std::clamp(s[other], lo[other], hi[other]);
            consider(s);
        }
    }
    for (const double a : {lo[0], hi[0]}) {
        for (const double c : {lo[1], hi[1]}) {
            consider(Vec2(a, c));
        }
    }
    return best;
}

namespace {

class ChainModel {
public:
    ChainModel(const RigidBodyState& s, const ActuatorSet& nominal, const VehicleParams& p, const Vec3& wind)
        : p_(p), nominal_(nominal), v_air_(air_velocity_body(s, wind)), omega_(s.body_rate)
    {
    }

    Vec3 moment(const ActuatorCommands& c) const
    {
        return net_wrench(v_air_, omega_, actuate_holding_wing(nominal_, c, p_), p_).moment;
    }

    ActuatorSet actuators(const ActuatorCommands& c) const { return actuate_holding_wing(nominal_, c, p_); }

private:
    const VehicleParams& p_;
    const ActuatorSet& nominal_;
    Vec3 v_air_;
    Vec3 omega_;
};

constexpr double kSolveTolerance = 1e-12;

// Drives f(x) to target on [lo, hi]. Newton steps inside a bisection bracket;
// when the target is out of reach the closest sampled point is returned.
template <class F>
double solve_scalar(F&& f, double target, double x, double lo, double hi, int iterations)
{
    x = std::clamp(x, lo, hi);
    double fx = f(x) - target;
    if (std::abs(fx) < kSolveTolerance) {
        return x;
    }
    // Bracket the sign change nearest x by stepping outward; the moment maps are
    // not always monotone, so the far root of [lo, hi] can be the wrong one.
    double a = x;
    double fa = fx;
    double b = x;
    double best = x;
    double best_f = std::abs(fx);
    bool bracketed = false;
    for (double h = 1e-3 * (hi - lo); !bracketed; h *= 2.0) {
        const bool last = x - h <= lo && x + h >= hi;
        for (double cand : {std::min(x + h, hi), std::max(x - h, lo)}) {
            const double fc = f(cand) - target;
            if (std::abs(fc) < best_f) {
                best = cand;
                best_f = std::abs(fc);
            }
            if ((fc > 0.0) != (fx > 0.0)) {
                b = cand;
                bracketed = true;
                break;
            }
        }
        if (last) {
            break;
        }
    }
    if (!bracketed) {
        return best;
    }
    // Inner search over the bracket [x, b].
    a = x;
    fa = fx;
    for (int k = 0; k < std::max(iterations, 60); ++k) {
        if (std::abs(fx) < kSolveTolerance) {
            break;
        }
        if ((fx > 0.0) == (fa > 0.0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        double h = 1e-6;
        if (x + h > hi) {
            h = -h;
        }
        const double d = (f(x + h) - target - fx) / h;
        double xn = std::abs(d) > 1e-14 ? x - fx / d : 0.5 * (a + b);
        if (!(xn > std::min(a, b) && xn < std::max(a, b))) {
            xn = 0.5 * (a + b);
        }
        if (xn == x) {
            break;
        }
        x = xn;
        fx = f(x) - target;
    }
    return x;
}

}  // namespace

AllocationResult daisy_chain_allocate(const Vec3& m_act, const RigidBodyState& s, const ActuatorSet& nominal,
                                      const VehicleParams& p, const Vec3& wind, const AllocationOptions& options)
{
    const ChainModel model(s, nominal, p, wind);
    AllocationResult out;
    out.demand = m_act;
    out.block_moments.fill(Vec3::Zero());
    ActuatorCommands c = nominal.command;
    const double main_nominal = 0.5 * (c.prop_left + c.prop_right);
    const Vec3 m_nominal = model.moment(c);
    Vec3 m_current = m_nominal;
    const int iters = options.newton_iterations;

    auto residual = [&]() {
        Vec3 r = m_act;
        for (const Vec3& b : out.block_moments) {
            r -= b;
        }
        return r;
    };
    auto book = [&](int block) {
        const Vec3 m = model.moment(c);
        out.block_moments[static_cast<std::size_t>(block)] += m - m_current;
        m_current = m;
    };

    for (int pass = 0; pass < std::max(1, options.passes); ++pass) {
        Vec3 r = residual();
        if (r.lpNorm<Eigen::Infinity>() <= options.deadband) {
            break;
        }
        ++out.passes;

        // Block 1: elevator on pitch.
        auto elevator = [&] {
            if (std::abs(r.y()) <= options.deadband) {
                return;
            }
            c.elevator = solve_scalar(
                [&](double x) {
                    ActuatorCommands t = c;
                    t.elevator = x;
                    return model.moment(t).y();
                },
                m_current.y() + r.y(), c.elevator, -1.0, 1.0, iters);
            book(kBlockElevator);
            r = residual();
        };
        elevator();

        // Block 2: rudder on yaw.
        if (std::abs(r.z()) > options.deadband) {
            const double target = m_current.z() + r.z();
            c.rudder = solve_scalar(
                [&](double x) {
                    ActuatorCommands t = c;
                    t.rudder = x;
                    return model.moment(t).z();
                },
                target, c.rudder, -1.0, 1.0, iters);
            book(kBlockRudder);
            r = residual();
        }

        // Block 3: differential ailerons (a) and differential main throttle (d)
        // trade roll against yaw.
        if (std::abs(r.x()) > options.deadband || std::abs(r.z()) > options.deadband) {
            const Vec2 goal = Vec2(m_current.x(), m_current.z()) + Vec2(r.x(), r.z());
            const Vec2 lo(-1.0, std::max(-main_nominal, main_nominal - 1.0));
            const Vec2 hi(1.0, std::min(1.0 - main_nominal, main_nominal));
            const Mat2 w = options.wing_weights.asDiagonal();
            auto apply = [&](const Vec2& u) {
                ActuatorCommands t = c;
                t.aileron_left = u[0];
                t.aileron_right = u[0];
                t.prop_left = main_nominal + u[1];
                t.prop_right = main_nominal - u[1];
                return t;
            };
            auto eval = [&](const Vec2& u) {
                const Vec3 m = model.moment(apply(u));
                return Vec2(m.x(), m.z());
            };
            Vec2 u(c.aileron_left, 0.5 * (c.prop_left - c.prop_right));
            Vec2 f = eval(u);
            for (int k = 0; k < iters; ++k) {
                const Vec2 e = goal - f;
                if (e.lpNorm<Eigen::Infinity>() < kSolveTolerance) {
                    break;
                }
                Mat2 b;
                for (int j = 0; j < 2; ++j) {
                    Vec2 probe = u;
                    double h = 1e-6;
                    if (probe[j] + h > hi[j]) {
                        h = -h;
                    }
                    probe[j] += h;
                    b.col(j) = (eval(probe) - f) / h;
                }
                const double reg = 1e-10 * (b.transpose() * w * b).trace() + 1e-300;
                const Vec2 step = solve_box_qp2(b, e, w, lo - u, hi - u, reg);
                if (step.norm() < 1e-13) {
                    break;
                }
                const double err0 = e.dot(w * e);
                Vec2 un = u + step;
                Vec2 fn = eval(un);
                for (int half = 0; half < 10 && (goal - fn).dot(w * (goal - fn)) > err0; ++half) {
                    un = u + 0.5 * (un - u);
                    fn = eval(un);
                }
                if (!((goal - fn).dot(w * (goal - fn)) < err0)) {
                    break;
                }
                u = un;
                f = fn;
            }
            c = apply(u);
            book(kBlockWing);
            r = residual();
        }

        // Pitch coupling picked up in blocks 2-3 goes back to the elevator before the tail.
        elevator();

        // Block 4: tail throttle attains pitch first; tail tilt then serves yaw
        // only as far as the pitch moment can be held.
        if (std::abs(r.y()) > options.deadband || std::abs(r.z()) > options.deadband) {
            const Vec3 entry = m_current;
            auto pitch_for = [&](double tilt, double target) {
                ActuatorCommands t = c;
                t.tail_tilt = tilt;
                t.prop_tail = solve_scalar(
                    [&](double x) {
                        ActuatorCommands q = t;
                        q.prop_tail = x;
                        return model.moment(q).y();
                    },
                    target, t.prop_tail, 0.0, 1.0, iters);
                return t;
            };
            c = pitch_for(c.tail_tilt, entry.y() + r.y());
            const double pitch_held = model.moment(c).y();
            const double yaw_goal = entry.z() + r.z();
            auto held = [&](double tilt, ActuatorCommands& t) {
                t = pitch_for(tilt, pitch_held);
                return std::abs(model.moment(t).y() - pitch_held) < 1e-9;
            };
            if (std::abs(yaw_goal - model.moment(c).z()) > options.deadband) {
                double tilt = c.tail_tilt;
                ActuatorCommands t = c;
                double f = model.moment(c).z();
                for (int k = 0; k < iters; ++k) {
                    const double err = yaw_goal - f;
                    if (std::abs(err) < kSolveTolerance) {
                        break;
                    }
                    double h = 1e-6;
                    if (tilt + h > 1.0) {
                        h = -h;
                    }
                    ActuatorCommands probe;
                    held(tilt + h, probe);
                    const double d = (model.moment(probe).z() - f) / h;
                    if (!(std::abs(d) > 1e-14)) {
                        break;
                    }
                    double next = std::clamp(tilt + err / d, -1.0, 1.0);
                    // Pull back toward the last tilt until pitch is still attained.
                    bool ok = held(next, t);
                    for (int half = 0; half < 30 && !ok; ++half) {
                        next = 0.5 * (tilt + next);
                        ok = held(next, t);
                    }
                    double fn = model.moment(t).z();
                    for (int half = 0; half < 10 && ok && std::abs(yaw_goal - fn) > std::abs(err); ++half) {
                        next = 0.5 * (tilt + next);
                        ok = held(next, t);
                        fn = model.moment(t).z();
                    }
                    if (!ok || !(std::abs(yaw_goal - fn) < std::abs(err)) || next == tilt) {
                        break;
                    }
                    tilt = next;
                    c = t;
                    f = fn;
                }
            }
            book(kBlockTail);
        }
    }

    out.residual = residual();
    out.command = c;
    out.actuators = model.actuators(c);
    out.saturated = out.residual.norm() > 1e-6;
    return out;
}

}  // namespace tiltwing
