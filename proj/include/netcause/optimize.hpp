// Small dense optimizers for the likelihood fits: derivative-free simplex for
// a robust start, then BFGS with central-difference gradients to polish.
#ifndef NETCAUSE_OPTIMIZE_HPP
#define NETCAUSE_OPTIMIZE_HPP

#include <Eigen/Dense>
#include <functional>

namespace netcause {

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

struct OptimOptions {
    double rel_tol = 1e-8;   // relative objective change
    int max_iter = 500;
    double initial_step = 0.25;  // simplex edge length
};

struct OptimResult {
    Eigen::VectorXd x;
    double fval = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Central-difference gradient with per-coordinate step eps^(1/3)*(1+|x_k|).
Eigen::VectorXd numeric_gradient(const ObjectiveFn& f, const Eigen::VectorXd& x);

OptimResult nelder_mead(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                        const OptimOptions& opts = {});

OptimResult bfgs(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                 const OptimOptions& opts = {});

// Simplex start followed by BFGS polish; the iteration budget is shared.
OptimResult minimize(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                     const OptimOptions& opts = {});

}  // namespace netcause

#endif
