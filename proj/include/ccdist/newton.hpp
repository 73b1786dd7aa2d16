#pragma once

// Damped Newton / Gauss-Newton driver shared by the distance-space solvers
// and the position-space oracle. Backtracking halves the step until the
// residual norm decreases and the iterate stays admissible (positive
// distances, no collisions).

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace ccdist {

struct SolveFailure {
    enum class Kind { none, non_convergence, singular_jacobian, invalid_region, bad_guess };
    Kind kind = Kind::none;
    std::string message;
    double last_residual = 0.0;
    int iterations = 0;
};

struct NewtonOptions {
    double tol = 1e-12;
    int max_iter = 100;
    int max_backtrack = 30;
    // extra full steps after the tolerance is met, kept only while they
    // still reduce the residual; drives the iterate to the round-off floor
    int polish_steps = 2;
};

struct NewtonOutcome {
    bool converged = false;
    bool singular = false;
    int iterations = 0;
    double residual_norm = 0.0;
};

// Square systems solve the step by LU; rectangular (consistent
// overdetermined) ones by column-pivoted QR, i.e. Gauss-Newton.
inline NewtonOutcome damped_newton(
    Eigen::VectorXd& u, const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residual,
    const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& jacobian,
    const std::function<bool(const Eigen::VectorXd&)>& admissible, const NewtonOptions& opt = {})
{
    NewtonOutcome out;
    Eigen::VectorXd f = residual(u);
    out.residual_norm = f.norm();

    const auto polish = [&] {
        for (int k = 0; k < opt.polish_steps; ++k) {
            const Eigen::MatrixXd jac = jacobian(u);
            Eigen::VectorXd step;
            if (jac.rows() == jac.cols())
                step = Eigen::PartialPivLU<Eigen::MatrixXd>(jac).solve(-f);
            else
                step = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(jac).solve(-f);
            if (!step.allFinite())
                return;
            const Eigen::VectorXd trial = u + step;
            if (!admissible(trial))
                return;
            const Eigen::VectorXd ft = residual(trial);
            if (ft.norm() >= out.residual_norm)
                return;
            u = trial;
            f = ft;
            out.residual_norm = ft.norm();
        }
    };

    for (out.iterations = 0; out.iterations < opt.max_iter; ++out.iterations) {
        if (out.residual_norm < opt.tol) {
            out.converged = true;
            polish();
            return out;
        }
        const Eigen::MatrixXd jac = jacobian(u);
        Eigen::VectorXd step;
        if (jac.rows() == jac.cols()) {
            Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
            step = lu.solve(-f);
            if (!step.allFinite()) {
                out.singular = true;
                return out;
            }
        } else {
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jac);
            if (qr.rank() < jac.cols()) {
                out.singular = true;
                return out;
            }
            step = qr.solve(-f);
        }

        double alpha = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < opt.max_backtrack; ++bt, alpha *= 0.5) {
            const Eigen::VectorXd trial = u + alpha * step;
            if (!admissible(trial))
                continue;
            const Eigen::VectorXd ft = residual(trial);
            const double norm_t = ft.norm();
            if (norm_t < (1.0 - 1e-4 * alpha) * out.residual_norm) {
                u = trial;
                f = ft;
                out.residual_norm = norm_t;
                accepted = true;
                break;
            }
        }
        if (!accepted)
            return out;  // stalled: line search exhausted
    }
    out.converged = out.residual_norm < opt.tol;
    if (out.converged)
        polish();
    return out;
}

}  // namespace ccdist
