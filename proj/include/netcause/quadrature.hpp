// Gauss-Hermite rule (physicists' weight exp(-x^2)) via the Golub-Welsch
// tridiagonal eigenproblem; used to integrate over Gaussian random intercepts.
#ifndef NETCAUSE_QUADRATURE_HPP
#define NETCAUSE_QUADRATURE_HPP

#include <Eigen/Dense>

namespace netcause {

struct GaussHermite {
    Eigen::VectorXd nodes;        // ascending abscissae x_k
    Eigen::VectorXd weights;      // w_k > 0, sum = sqrt(pi)
    Eigen::VectorXd log_weights;  // log w_k, cached for log-space accumulation

    int points() const { return static_cast<int>(nodes.size()); }

    // int f(x) e^{-x^2} dx  ~=  sum_k w_k f(x_k)
    static GaussHermite rule(int q);
};

}  // namespace netcause

#endif
