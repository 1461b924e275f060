// Test-only reference implementations, kept independent of the library's
// computational paths: dense-matrix likelihoods, brute-force enumerations, and
// high-resolution quadrature baselines.
#ifndef NETCAUSE_TEST_ORACLES_HPP
#define NETCAUSE_TEST_ORACLES_HPP

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <random>
#include <vector>

namespace oracles {

inline double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// Binomial pmf by explicit enumeration of all 2^d assignment vectors.
inline double binomial_pmf_enumerated(int s, int d, double alpha) {
    double total = 0.0;
    for (unsigned long long mask = 0; mask < (1ull << d); ++mask) {
        int ones = __builtin_popcountll(mask);
        if (ones != s) continue;
        total += std::pow(alpha, ones) * std::pow(1.0 - alpha, d - ones);
    }
    return total;
}

// Log-gamma binomial pmf (independent of the library's endpoint handling).
inline double binomial_pmf_lgamma(int s, int d, double alpha) {
    double lc = std::lgamma(d + 1.0) - std::lgamma(s + 1.0) - std::lgamma(d - s + 1.0);
    return std::exp(lc) * std::pow(alpha, s) * std::pow(1.0 - alpha, d - s);
}

// High-resolution trapezoid integration of prod_j sigma-terms against a
// N(0, phi_b) density over [-span*sigma, span*sigma].
inline double joint_propensity_trapezoid(const std::vector<double>& etas,
                                         const std::vector<int>& zs, double phi_b,
                                         int n_points = 400001, double span = 12.0) {
    if (phi_b <= 0.0) {
        double p = 1.0;
        for (std::size_t k = 0; k < etas.size(); ++k) {
            double pj = logistic(etas[k]);
            p *= zs[k] == 1 ? pj : 1.0 - pj;
        }
        return p;
    }
    double sigma = std::sqrt(phi_b);
    double lo = -span * sigma, hi = span * sigma;
    double h = (hi - lo) / (n_points - 1);
    double total = 0.0;
    for (int k = 0; k < n_points; ++k) {
        double b = lo + k * h;
        double f = std::exp(-b * b / (2.0 * phi_b)) / std::sqrt(2.0 * M_PI * phi_b);
        for (std::size_t j = 0; j < etas.size(); ++j) {
            double pj = logistic(etas[j] + b);
            f *= zs[j] == 1 ? pj : 1.0 - pj;
        }
        total += (k == 0 || k == n_points - 1) ? 0.5 * f : f;
    }
    return total * h;
}

// BFS distances from a source over an adjacency list.
inline std::vector<int> bfs_distances(const std::vector<std::vector<int>>& adj, int source) {
    std::vector<int> dist(adj.size(), -1);
    std::deque<int> q{source};
    dist[source] = 0;
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        for (int v : adj[u])
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
    }
    return dist;
}

// Dense multivariate normal log-density with explicit covariance.
inline double mvn_logpdf(const Eigen::VectorXd& r, const Eigen::MatrixXd& V) {
    Eigen::LLT<Eigen::MatrixXd> llt(V);
    Eigen::VectorXd w = llt.solve(r);
    double logdet = 0.0;
    for (int i = 0; i < V.rows(); ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
    return -0.5 * (r.size() * std::log(2.0 * M_PI) + logdet + r.dot(w));
}

// Generalized least squares with an explicit dense covariance inverse.
inline Eigen::VectorXd dense_gls(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                                 const Eigen::MatrixXd& V) {
    Eigen::MatrixXd Vi = V.inverse();
    Eigen::MatrixXd A = D.transpose() * Vi * D;
    Eigen::VectorXd b = D.transpose() * Vi * y;
    return A.ldlt().solve(b);
}

// HC0 heteroskedasticity-robust covariance of OLS coefficients.
inline Eigen::MatrixXd hc0_covariance(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    Eigen::VectorXd beta = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    Eigen::VectorXd r = y - X * beta;
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(X.cols(), X.cols());
    for (int i = 0; i < X.rows(); ++i)
        meat += r(i) * r(i) * X.row(i).transpose() * X.row(i);
    Eigen::MatrixXd bread = (X.transpose() * X).inverse();
    return bread * meat * bread;
}

// Plain logistic log-likelihood and score.
inline double logistic_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXi& Z,
                              const Eigen::VectorXd& gamma) {
    double ll = 0.0;
    for (int i = 0; i < X.rows(); ++i) {
        double eta = X.row(i).dot(gamma);
        ll += Z(i) * eta - std::log1p(std::exp(eta));
    }
    return ll;
}
inline Eigen::VectorXd logistic_score(const Eigen::MatrixXd& X, const Eigen::VectorXi& Z,
                                      const Eigen::VectorXd& gamma) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(X.cols());
    for (int i = 0; i < X.rows(); ++i)
        s += X.row(i).transpose() * (Z(i) - logistic(X.row(i).dot(gamma)));
    return s;
}

}  // namespace oracles

#endif
