#include "netcause/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace netcause {

GaussHermite GaussHermite::rule(int q) {
    if (q < 1) throw std::invalid_argument("GaussHermite: need at least one point");
    GaussHermite r;
    if (q == 1) {
        r.nodes = Eigen::VectorXd::Zero(1);
        r.weights = Eigen::VectorXd::Constant(1, std::sqrt(M_PI));
        r.log_weights = r.weights.array().log();
        return r;
    }
    // Jacobi matrix of the Hermite recurrence: zero diagonal, off-diag sqrt(k/2).
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(q, q);
    for (int k = 1; k < q; ++k) {
        double b = std::sqrt(k / 2.0);
        jacobi(k, k - 1) = b;
        jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("GaussHermite: eigen decomposition failed");
    r.nodes = es.eigenvalues();
    r.weights.resize(q);
    const double mu0 = std::sqrt(M_PI);  // int e^{-x^2} dx
    for (int k = 0; k < q; ++k) {
        double v = es.eigenvectors()(0, k);
        r.weights(k) = mu0 * v * v;
    }
    r.log_weights = r.weights.array().log();
    return r;
}

}  // namespace netcause
