#pragma once

#include <functional>

#include <Eigen/Dense>

namespace tiltwing {

/// Bound-constrained Levenberg-Marquardt for min 0.5 * |r(x)|^2, l <= x <= u.
/// Jacobians come from central differences (one-sided at an active bound);
/// bounds are enforced by projecting each trial step onto the box and by
/// freezing variables whose bound is active with the gradient pointing out.
struct LmOptions {
    int max_iterations = 200;
    double step_tolerance = 1e-10;
    double gradient_tolerance = 1e-8;
    double fd_relative_step = 1e-6;
    double initial_damping = 1e-3;
    double max_damping = 1e12;
};

enum class LmStatus { StepTolerance, GradientTolerance, DampingLimit, MaxIterations };

struct LmResult {
    Eigen::VectorXd x;
    Eigen::VectorXd residual;
    double objective = 0.0;  // |r|^2
    int iterations = 0;
    int evaluations = 0;
    LmStatus status = LmStatus::MaxIterations;

    bool converged() const { return status != LmStatus::MaxIterations; }
};

using ResidualFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

Eigen::MatrixXd numerical_jacobian(const ResidualFunction& f, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& r0, const Eigen::VectorXd& lower,
                                   const Eigen::VectorXd& upper, double relative_step, int* evaluations = nullptr);

LmResult minimize_bounded(const ResidualFunction& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& lower,
                          const Eigen::VectorXd& upper, const LmOptions& options = {});

}  // namespace tiltwing
