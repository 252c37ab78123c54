#include "tiltwing/trim.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>

#include "tiltwing/dynamics.hpp"

namespace tiltwing {

Vec6 TrimVariables::to_vector() const
{
    Vec6 v;
    v << wing, main_throttle, flaperon, elevator, tail_throttle, pitch;
    return v;
}

TrimVariables TrimVariables::from_vector(const Vec6& v)
{
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

ActuatorCommands trim_commands(const TrimVariables& x)
{
    ActuatorCommands c;
    c.wing = x.wing;
    c.prop_left = x.main_throttle;
    c.prop_right = x.main_throttle;
    c.prop_tail = x.tail_throttle;
    c.aileron_left = x.flaperon;
    c.aileron_right = -x.flaperon;
    c.elevator = x.elevator;
    return c;
}

Vec6 trim_lower_bounds()
{
    Vec6 v;
    v << 0.0, 0.0, -1.0, -1.0, 0.0, -0.5 * kPi;
    return v;
}

Vec6 trim_upper_bounds()
{
    Vec6 v;
    v << 1.0, 1.0, 1.0, 1.0, 1.0, 0.5 * kPi;
    return v;
}

double desired_pitch(double airspeed, double gamma, const TrimSettings& s)
{
    const double span = s.pitch_blend_end - s.pitch_blend_start;
    const double t = span > 0.0 ? std::clamp((airspeed - s.pitch_blend_start) / span, 0.0, 1.0)
                                : (airspeed >= s.pitch_blend_end ? 1.0 : 0.0);
    return t * gamma;
}

TrimCondition trim_condition(const TrimVariables& x, double airspeed, double gamma, const VehicleParams& p)
{
    TrimCondition c;
    c.attitude = rotation_y(x.pitch);
    const Vec3 v_inertial(airspeed * std::cos(gamma), 0.0, -airspeed * std::sin(gamma));
    c.air_velocity_body = c.attitude.transpose() * v_inertial;
    c.actuators = actuate(trim_commands(x), p);
    return c;
}

SteadyAccelerations steady_accelerations(const TrimVariables& x, double airspeed, double gamma,
                                         const VehicleParams& p)
{
    const TrimCondition c = trim_condition(x, airspeed, gamma, p);
    const Wrench w = net_wrench(c.air_velocity_body, Vec3::Zero(), c.actuators, p);
    SteadyAccelerations a;
    a.linear = p.gravity + c.attitude * w.force / p.mass;
    a.pitch = angular_acceleration(w.moment, Vec3::Zero(), p.inertia).y();
    return a;
}

double propeller_power(const TrimVariables& x, double airspeed, double gamma, const VehicleParams& p)
{
    const TrimCondition c = trim_condition(x, airspeed, gamma, p);
    double power = 0.0;
    for (std::size_t i = 0; i < p.propellers.size(); ++i) {
        const PropellerParams& pr = p.propellers[i];
        const double eta = c.actuators.prop_speed[i];
        if (eta <= 0.0) {
            continue;
        }
        const PropellerPose pose = propeller_pose(p, static_cast<int>(i), c.actuators);
        LocalFlow flow = local_airspeed(pose.hub, c.air_velocity_body, Vec3::Zero());
        resolve_propeller_flow(flow, pose.axis);
        const double j = advance_ratio(pr, eta, flow.axial_speed);
        power += p.air_density * eta * eta * eta * std::pow(pr.diameter, 5) * pr.torque_coefficient(j);
    }
    return power;
}

namespace {

double softplus(double x, double k)
{
    const double kx = k * x;
    if (kx > 30.0) {
        return x;
    }
    return std::log1p(std::exp(kx)) / k;
}

// Cost residuals r_q with |r_q|^2 = q.
void append_cost_residuals(Eigen::VectorXd& r, Eigen::Index offset, const TrimVariables& x, double airspeed,
                           double gamma, const VehicleParams& p, const TrimSettings& s, const TrimContext& ctx)
{
    const double power = propeller_power(x, airspeed, gamma, p);
    r[offset++] = std::sqrt(s.power_weight * std::max(0.0, power));
    for (const double d : {x.flaperon, x.elevator}) {
        const double b = saturation_barrier(d, s);
        r[offset++] = std::copysign(std::sqrt(s.saturation_weight * b), d);
    }
    r[offset++] = std::sqrt(s.pitch_weight) * (x.pitch - desired_pitch(airspeed, gamma, s));
    if (ctx.neighbor_mean) {
        r.segment<6>(offset) = std::sqrt(s.neighbor_weight) * (x.to_vector() - *ctx.neighbor_mean);
    }
}

Eigen::Index cost_residual_count(const TrimContext& ctx) { return ctx.neighbor_mean ? 10 : 4; }

}  // namespace

double saturation_barrier(double delta, const TrimSettings& s)
{
    const double k = s.barrier_sharpness;
    const double sat = s.surface_saturation;
    const double b = softplus(delta - sat, k) + softplus(-delta - sat, k) - 2.0 * softplus(-sat, k);
    return std::max(0.0, b);
}

Eigen::VectorXd trim_residual(const TrimVariables& x, double airspeed, double gamma, const VehicleParams& p,
                              const TrimSettings& s, const TrimContext& ctx)
{
    Eigen::VectorXd r(3 + cost_residual_count(ctx));
    const SteadyAccelerations a = steady_accelerations(x, airspeed, gamma, p);
    r[0] = std::sqrt(s.accel_weights[0]) * a.linear.x();
    r[1] = std::sqrt(s.accel_weights[1]) * a.linear.z();
    r[2] = std::sqrt(s.pitch_accel_weight) * a.pitch;
    append_cost_residuals(r, 3, x, airspeed, gamma, p, s, ctx);
    return r;
}

double trim_cost(const TrimVariables& x, double airspeed, double gamma, const VehicleParams& p,
                 const TrimSettings& s, const TrimContext& ctx)
{
    Eigen::VectorXd r(cost_residual_count(ctx));
    append_cost_residuals(r, 0, x, airspeed, gamma, p, s, ctx);
    return r.squaredNorm();
}

TrimPoint evaluate_trim_point(double airspeed, double gamma, const TrimVariables& x, const VehicleParams& p,
                              const TrimSettings& s, const TrimContext& ctx)
{
    TrimPoint t;
    t.airspeed = airspeed;
    t.gamma = gamma;
    t.x = x;
    t.context = ctx;
    const SteadyAccelerations a = steady_accelerations(x, airspeed, gamma, p);
    t.accel_residual = a.linear.norm();
    t.pitch_accel_residual = std::abs(a.pitch);
    t.cost = trim_cost(x, airspeed, gamma, p, s, ctx);
    t.objective = trim_residual(x, airspeed, gamma, p, s, ctx).squaredNorm();
    t.feasible = std::isfinite(t.objective) && t.accel_residual < s.accel_threshold &&
                 t.pitch_accel_residual < s.pitch_accel_threshold;
    t.solved = true;
    return t;
}

TrimPoint solve_trim_point(double airspeed, double gamma, const TrimVariables& initial_guess,
                           const VehicleParams& p, const TrimSettings& s, const TrimContext& ctx)
{
    const Eigen::VectorXd lower = trim_lower_bounds();
    const Eigen::VectorXd upper = trim_upper_bounds();
    const ResidualFunction f = [&](const Eigen::VectorXd& v) {
        return trim_residual(TrimVariables::from_vector(v), airspeed, gamma, p, s, ctx);
    };
    const LmResult res = minimize_bounded(f, initial_guess.to_vector(), lower, upper, s.solver);
    TrimPoint t = evaluate_trim_point(airspeed, gamma, TrimVariables::from_vector(res.x), p, s, ctx);
    t.iterations = res.iterations;
    if (!res.converged()) {
        t.feasible = false;
    }
    return t;
}

std::size_t TrimMap::feasible_count() const
{
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](const TrimPoint& c) { return c.feasible; }));
}

namespace {

std::vector<double> axis(double lo, double hi, double step, const char* name)
{
    if (!(step > 0.0) || hi < lo) {
        throw TrimError(std::string("invalid grid axis '") + name + "'");
    }
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = lo + static_cast<double>(i) * step;
    }
    return out;
}

}  // namespace

std::vector<double> TrimGrid::airspeeds() const { return axis(airspeed_min, airspeed_max, airspeed_step, "airspeed"); }
std::vector<double> TrimGrid::gammas() const { return axis(gamma_min, gamma_max, gamma_step, "gamma"); }

TrimSeed hover_seed()
{
    TrimSeed s;
    s.initial_guess.wing = 1.0;
    s.initial_guess.main_throttle = 0.72;
    s.initial_guess.tail_throttle = 0.2;
    return s;
}

namespace {

struct CellUpdate {
    bool changed = false;
    TrimPoint point;
    long solves = 0;
};

class MapBuilder {
public:
    MapBuilder(const TrimGrid& grid, const VehicleParams& p, const TrimSettings& s)
        : p_(p), s_(s)
    {
        map_.airspeeds = grid.airspeeds();
        map_.gammas = grid.gammas();
        map_.settings = s;
        map_.cells.resize(map_.rows() * map_.cols());
        for (std::size_t i = 0; i < map_.rows(); ++i) {
            for (std::size_t j = 0; j < map_.cols(); ++j) {
                TrimPoint& c = map_.at(i, j);
                c.airspeed = map_.airspeeds[i];
                c.gamma = map_.gammas[j];
            }
        }
        hover_row_ = std::abs(map_.airspeeds.front()) < 1e-12;
        hover_col_ = nearest(map_.gammas, 0.0);
    }

    TrimMap build(const TrimSeed& seed, const TrimBuildOptions& options, TrimBuildStats* stats)
    {
        const std::size_t si = nearest(map_.airspeeds, seed.airspeed);
        const std::size_t sj = nearest(map_.gammas, seed.gamma);
        const std::size_t seed_cell = representative(si * map_.cols() + sj);
        TrimPoint first = solve(seed_cell, seed.initial_guess, {});
        if (!first.feasible) {
            std::ostringstream msg;
            msg << "trim seed at va=" << first.airspeed << " m/s, gamma=" << rad2deg(first.gamma)
                << " deg is infeasible (|v_dot|=" << first.accel_residual
                << ", |theta_ddot|=" << first.pitch_accel_residual << ")";
            throw TrimError(msg.str());
        }
        history_.assign(map_.cells.size(), {});
        store(seed_cell, first);
        long solves = 1;

        std::vector<char> changed(map_.cells.size(), 0);
        changed[seed_cell] = 1;
        int sweeps = 0;
        while (sweeps < options.max_sweeps) {
            ++sweeps;
            const std::vector<TrimPoint> snapshot = map_.cells;
            std::vector<std::size_t> work;
            for (std::size_t c = 0; c < map_.cells.size(); ++c) {
                if (representative(c) != c) {
                    continue;
                }
                const auto nb = neighbors(c);
                if (std::any_of(nb.begin(), nb.end(), [&](std::size_t n) { return changed[n] != 0; })) {
                    work.push_back(c);
                }
            }
            std::vector<CellUpdate> updates(work.size());
            auto run = [&](std::size_t begin, std::size_t stride) {
                for (std::size_t k = begin; k < work.size(); k += stride) {
                    updates[k] = update_cell(work[k], snapshot, changed, options.change_tolerance);
                }
            };
            const unsigned threads = std::max(1u, options.threads);
            if (threads == 1 || work.size() < 2) {
                run(0, 1);
            } else {
                std::vector<std::thread> pool;
                for (unsigned t = 0; t < threads; ++t) {
                    pool.emplace_back(run, t, threads);
                }
                for (auto& th : pool) {
                    th.join();
                }
            }
            std::fill(changed.begin(), changed.end(), 0);
            bool any = false;
            for (std::size_t k = 0; k < work.size(); ++k) {
                solves += updates[k].solves;
                if (updates[k].changed) {
                    store(work[k], updates[k].point);
                    changed[work[k]] = updates[k].point.feasible ? 1 : 0;
                    any = any || updates[k].point.feasible;
                }
            }
            if (!any) {
                break;
            }
        }
        if (stats != nullptr) {
            stats->sweeps = sweeps;
            stats->solves = solves;
            stats->cost_history = history_;
        }
        return map_;
    }

private:
    static std::size_t nearest(const std::vector<double>& axis, double v)
    {
        std::size_t best = 0;
        for (std::size_t k = 1; k < axis.size(); ++k) {
            if (std::abs(axis[k] - v) < std::abs(axis[best] - v)) {
                best = k;
            }
        }
        return best;
    }

    bool in_hover_row(std::size_t c) const { return hover_row_ && c / map_.cols() == 0; }

    std::size_t representative(std::size_t c) const { return in_hover_row(c) ? hover_col_ : c; }

    std::vector<std::size_t> neighbors(std::size_t c) const
    {
        const auto rows = static_cast<long>(map_.rows());
        const auto cols = static_cast<long>(map_.cols());
        const long i = static_cast<long>(c) / cols;
        const long j = static_cast<long>(c) % cols;
        std::set<std::size_t> out;
        for (long di = -1; di <= 1; ++di) {
            for (long dj = -1; dj <= 1; ++dj) {
                const long ni = i + di;
                const long nj = j + dj;
                if ((di == 0 && dj == 0) || ni < 0 || nj < 0 || ni >= rows || nj >= cols) {
                    continue;
                }
                const std::size_t n = representative(static_cast<std::size_t>(ni * cols + nj));
                if (n != representative(c)) {
                    out.insert(n);
                }
            }
        }
        return {out.begin(), out.end()};
    }

    double solve_gamma(std::size_t c) const { return in_hover_row(c) ? 0.0 : map_.cells[c].gamma; }

    TrimPoint solve(std::size_t c, const TrimVariables& ig, const TrimContext& ctx) const
    {
        return solve_trim_point(map_.cells[c].airspeed, solve_gamma(c), ig, p_, s_, ctx);
    }

    CellUpdate update_cell(std::size_t c, const std::vector<TrimPoint>& snapshot, const std::vector<char>& changed,
                           double tolerance) const
    {
        CellUpdate out;
        TrimContext ctx;
        Vec6 sum = Vec6::Zero();
        int count = 0;
        std::vector<std::size_t> sources;
        for (const std::size_t n : neighbors(c)) {
            if (snapshot[n].feasible) {
                sum += snapshot[n].x.to_vector();
                ++count;
                if (changed[n] != 0) {
                    sources.push_back(n);
                }
            }
        }
        if (count > 0) {
            ctx.neighbor_mean = sum / count;
        }
        const TrimPoint& current = snapshot[c];
        std::optional<TrimPoint> best;
        for (const std::size_t n : sources) {
            TrimPoint t = solve(c, snapshot[n].x, ctx);
            ++out.solves;
            const bool better = !best || (t.feasible && !best->feasible) ||
                                (t.feasible == best->feasible && t.objective < best->objective);
            if (better) {
                best = std::move(t);
            }
        }
        if (!best) {
            return out;
        }
        if (best->feasible) {
            out.changed = !current.feasible || best->objective < current.objective - tolerance;
        } else {
            out.changed = !current.solved ||
                          (!current.feasible && best->objective < current.objective - tolerance);
        }
        out.point = *best;
        return out;
    }

    void store(std::size_t c, const TrimPoint& t)
    {
        if (t.feasible) {
            history_[c].push_back(t.objective);
        }
        if (in_hover_row(c)) {
            for (std::size_t j = 0; j < map_.cols(); ++j) {
                TrimPoint copy = t;
                copy.gamma = map_.gammas[j];
                map_.at(0, j) = copy;
                if (j != hover_col_ && t.feasible) {
                    history_[j].push_back(t.objective);
                }
            }
        } else {
            map_.cells[c] = t;
        }
    }

    const VehicleParams& p_;
    const TrimSettings& s_;
    TrimMap map_;
    bool hover_row_ = false;
    std::size_t hover_col_ = 0;
    std::vector<std::vector<double>> history_;
};

}  // namespace

TrimMap build_trim_map(const TrimGrid& grid, const TrimSeed& seed, const VehicleParams& p, const TrimSettings& s,
                       const TrimBuildOptions& options, TrimBuildStats* stats)
{
    MapBuilder builder(grid, p, s);
    return builder.build(seed, options, stats);
}

}  // namespace tiltwing
