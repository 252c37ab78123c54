#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "tiltwing/aero.hpp"
#include "tiltwing/lm.hpp"
#include "tiltwing/vehicle.hpp"

namespace tiltwing {

using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Longitudinal trim unknowns. Main throttles are equal, the ailerons act as
/// flaps (delta_al = -delta_ar = flaperon), rudder and tail tilt stay centred.
struct TrimVariables {
    double wing = 0.0;
    double main_throttle = 0.0;
    double flaperon = 0.0;
    double elevator = 0.0;
    double tail_throttle = 0.0;
    double pitch = 0.0;

    Vec6 to_vector() const;
    static TrimVariables from_vector(const Vec6& v);
};

ActuatorCommands trim_commands(const TrimVariables& x);

Vec6 trim_lower_bounds();
Vec6 trim_upper_bounds();

struct TrimSettings {
    Vec2 accel_weights{10.0, 10.0};   // Q_v on (x, z) inertial
    double pitch_accel_weight = 10.0; // Q_theta
    double power_weight = 0.01;       // w1
    double saturation_weight = 1.0;   // w2
    double pitch_weight = 1.0;        // w3
    double neighbor_weight = 0.1;     // w4
    double surface_saturation = 0.8;  // |delta| where the barrier turns on
    double barrier_sharpness = 20.0;
    double accel_threshold = 0.05;        // eps_v, m/s^2
    double pitch_accel_threshold = 0.05;  // eps_theta, rad/s^2
    double pitch_blend_start = 4.0;   // theta* = 0 below, m/s
    double pitch_blend_end = 12.0;    // theta* = gamma above, m/s
    LmOptions solver{.max_iterations = 1000};
};

/// Mean of the neighbouring solutions used by the smoothness penalty.
struct TrimContext {
    std::optional<Vec6> neighbor_mean;
};

/// Desired trim pitch theta*(v_a, gamma).
double desired_pitch(double airspeed, double gamma, const TrimSettings& s);

/// Body attitude, air-relative body velocity and actuation of a trim candidate.
struct TrimCondition {
    Mat3 attitude;
    Vec3 air_velocity_body;
    ActuatorSet actuators;
};
TrimCondition trim_condition(const TrimVariables& x, double airspeed, double gamma, const VehicleParams& p);

struct SteadyAccelerations {
    Vec3 linear = Vec3::Zero();   // inertial v_dot, m/s^2
    double pitch = 0.0;           // theta_ddot, rad/s^2
};
SteadyAccelerations steady_accelerations(const TrimVariables& x, double airspeed, double gamma,
                                         const VehicleParams& p);

/// Shaft-power proxy sum(rho eta^3 D^5 C_Q(J)).
double propeller_power(const TrimVariables& x, double airspeed, double gamma, const VehicleParams& p);

/// Smooth, even barrier that is zero at the centre and grows once |delta| > saturation.
double saturation_barrier(double delta, const TrimSettings& s);

/// Stacked residual whose squared norm is the trim objective:
/// [sqrt(Q_v) v_dot_xz; sqrt(Q_theta) theta_ddot; cost terms].
Eigen::VectorXd trim_residual(const TrimVariables& x, double airspeed, double gamma, const VehicleParams& p,
                              const TrimSettings& s, const TrimContext& ctx = {});

/// Cost q >= 0: power, surface saturation, pitch deviation and neighbour deviation.
double trim_cost(const TrimVariables& x, double airspeed, double gamma, const VehicleParams& p,
                 const TrimSettings& s, const TrimContext& ctx = {});

struct TrimPoint {
    double airspeed = 0.0;
    double gamma = 0.0;
    TrimVariables x;
    double accel_residual = 0.0;        // |v_dot|
    double pitch_accel_residual = 0.0;  // |theta_ddot|
    double cost = 0.0;                  // q
    double objective = 0.0;             // full least-squares objective
    bool feasible = false;
    bool solved = false;
    TrimContext context;
    int iterations = 0;
};

TrimPoint solve_trim_point(double airspeed, double gamma, const TrimVariables& initial_guess,
                           const VehicleParams& p, const TrimSettings& s, const TrimContext& ctx = {});

/// Re-evaluates residual, cost and feasibility of a fixed solution.
TrimPoint evaluate_trim_point(double airspeed, double gamma, const TrimVariables& x, const VehicleParams& p,
                              const TrimSettings& s, const TrimContext& ctx = {});

struct TrimGrid {
    double airspeed_min = 0.0;
    double airspeed_max = 25.0;
    double airspeed_step = 1.0;
    double gamma_min = deg2rad(-30.0);
    double gamma_max = deg2rad(30.0);
    double gamma_step = deg2rad(5.0);

    std::vector<double> airspeeds() const;
    std::vector<double> gammas() const;
};

struct TrimMap {
    std::vector<double> airspeeds;   // strictly increasing, uniform
    std::vector<double> gammas;      // strictly increasing, uniform
    std::vector<TrimPoint> cells;    // row-major: airspeed index outer
    TrimSettings settings;

    std::size_t rows() const { return airspeeds.size(); }
    std::size_t cols() const { return gammas.size(); }
    TrimPoint& at(std::size_t i, std::size_t j) { return cells[i * cols() + j]; }
    const TrimPoint& at(std::size_t i, std::size_t j) const { return cells[i * cols() + j]; }
    std::size_t feasible_count() const;
};

struct TrimSeed {
    double airspeed = 0.0;
    double gamma = 0.0;
    TrimVariables initial_guess;
};

/// Hover initial guess for the default vehicle layout.
TrimSeed hover_seed();

struct TrimBuildOptions {
    int max_sweeps = 200;
    double change_tolerance = 1e-9;
    unsigned threads = 1;
};

struct TrimBuildStats {
    int sweeps = 0;
    long solves = 0;
    /// Objective each cell held after every sweep in which it changed.
    std::vector<std::vector<double>> cost_history;
};

class TrimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Neighbour-seeded sweep: every cell is solved once per freshly improved
/// neighbour solution, keeps its best feasible result, and the sweep repeats
/// until no cell improves. Cells at zero airspeed share the gamma = 0 hover
/// solution.
TrimMap build_trim_map(const TrimGrid& grid, const TrimSeed& seed, const VehicleParams& p,
                       const TrimSettings& s = {}, const TrimBuildOptions& options = {},
                       TrimBuildStats* stats = nullptr);

struct TrimLookup {
    TrimVariables x;
    bool clamped = false;     // query was outside the grid hull
    bool fallback = false;    // an enclosing corner was infeasible
};

TrimLookup lookup_trim(const TrimMap& map, double airspeed, double gamma);

/// CSV with header va,gamma,feasible,theta_t,delta_w,delta_plr,delta_al,delta_e,delta_pt,cost,res_v,res_th.
void write_trim_map_csv(const TrimMap& map, const std::filesystem::path& path);
std::string trim_map_csv(const TrimMap& map);
TrimMap read_trim_map_csv(const std::filesystem::path& path);
TrimMap parse_trim_map_csv(const std::string& text);

}  // namespace tiltwing
