#include "tiltwing/lm.hpp"

#include <algorithm>
#include <cmath>

namespace tiltwing {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd project(const VectorXd& x, const VectorXd& lower, const VectorXd& upper)
{
    return x.cwiseMax(lower).cwiseMin(upper);
}

MatrixXd numerical_jacobian(const ResidualFunction& f, const VectorXd& x, const VectorXd& r0,
                            const VectorXd& lower, const VectorXd& upper, double relative_step,
                            int* evaluations)
{
    const Eigen::Index n = x.size();
    MatrixXd jac(r0.size(), n);
    VectorXd probe = x;
    int evals = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = relative_step * std::max(1.0, std::abs(x[i]));
        const bool up_ok = x[i] + h <= upper[i];
        const bool down_ok = x[i] - h >= lower[i];
        if (up_ok && down_ok) {
            probe[i] = x[i] + h;
            const VectorXd rp = f(probe);
            probe[i] = x[i] - h;
            const VectorXd rm = f(probe);
            jac.col(i) = (rp - rm) / (2.0 * h);
            evals += 2;
        } else if (up_ok) {
            probe[i] = x[i] + h;
            jac.col(i) = (f(probe) - r0) / h;
            ++evals;
        } else {
            probe[i] = x[i] - h;
            jac.col(i) = (r0 - f(probe)) / h;
            ++evals;
        }
        probe[i] = x[i];
    }
    if (evaluations != nullptr) {
        *evaluations += evals;
    }
    return jac;
}

LmResult minimize_bounded(const ResidualFunction& f, const VectorXd& x0, const VectorXd& lower,
                          const VectorXd& upper, const LmOptions& options)
{
    LmResult res;
    VectorXd x = project(x0, lower, upper);
    VectorXd r = f(x);
    res.evaluations = 1;
    double cost = r.squaredNorm();
    double lambda = options.initial_damping;
    const Eigen::Index n = x.size();

    for (int it = 0; it < options.max_iterations; ++it) {
        res.iterations = it + 1;
        const MatrixXd jac = numerical_jacobian(f, x, r, lower, upper, options.fd_relative_step, &res.evaluations);
        const VectorXd grad = jac.transpose() * r;

        const VectorXd projected_grad = x - project(x - grad, lower, upper);
        if (projected_grad.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
            res.status = LmStatus::GradientTolerance;
            break;
        }

        // Variables pinned at a bound with the descent direction pointing out.
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool at_lower = x[i] <= lower[i] && grad[i] > 0.0;
            const bool at_upper = x[i] >= upper[i] && grad[i] < 0.0;
            if (!at_lower && !at_upper) {
                free.push_back(i);
            }
        }
        if (free.empty()) {
            res.status = LmStatus::GradientTolerance;
            break;
        }
        const auto nf = static_cast<Eigen::Index>(free.size());
        MatrixXd jf(jac.rows(), nf);
        VectorXd gf(nf);
        for (Eigen::Index k = 0; k < nf; ++k) {
            jf.col(k) = jac.col(free[static_cast<std::size_t>(k)]);
            gf[k] = grad[free[static_cast<std::size_t>(k)]];
        }
        const MatrixXd jtj = jf.transpose() * jf;
        const VectorXd scale = jtj.diagonal().cwiseMax(1e-12);

        bool accepted = false;
        bool tiny_step = false;
        while (lambda <= options.max_damping) {
            MatrixXd a = jtj;
            a.diagonal() += lambda * scale;
            const VectorXd step_f = a.ldlt().solve(-gf);
            VectorXd trial = x;
            for (Eigen::Index k = 0; k < nf; ++k) {
                trial[free[static_cast<std::size_t>(k)]] += step_f[k];
            }
            trial = project(trial, lower, upper);
            const double step_norm = (trial - x).norm();
            if (step_norm < options.step_tolerance) {
                tiny_step = true;
                break;
            }
            const VectorXd r_trial = f(trial);
            ++res.evaluations;
            const double cost_trial = r_trial.squaredNorm();
            if (std::isfinite(cost_trial) && cost_trial < cost) {
                x = trial;
                r = r_trial;
                cost = cost_trial;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                break;
            }
            lambda *= 4.0;
        }
        if (tiny_step) {
            res.status = LmStatus::StepTolerance;
            break;
        }
        if (!accepted) {
            res.status = LmStatus::DampingLimit;
            break;
        }
        res.status = LmStatus::MaxIterations;
    }
    res.x = x;
    res.residual = r;
    res.objective = cost;
    return res;
}

}  // namespace tiltwing
