#include "netcause/propensity.hpp"

#include <cmath>
#include <limits>

#include "netcause/errors.hpp"
#include "netcause/optimize.hpp"

namespace netcause {

namespace {

const double kFdStep = std::cbrt(std::numeric_limits<double>::epsilon());

// log(1/(1+e^-t)), stable on both tails.
inline double log_sigmoid(double t) {
    return t >= 0.0 ? -std::log1p(std::exp(-t)) : t - std::log1p(std::exp(t));
}

inline double bernoulli_logprob(double eta, int z) {
    double lp = log_sigmoid(eta);
    return z == 1 ? lp : lp - eta;  // log(1-p) = log p - eta
}

double logsumexp(const Eigen::VectorXd& v) {
    double mx = v.maxCoeff();
    if (!std::isfinite(mx)) return mx;
    return mx + std::log((v.array() - mx).exp().sum());
}

}  // namespace

Eigen::MatrixXd PropensityModel::design_matrix(const NodeData& data) const {
    Eigen::MatrixXd d(data.n(), dim());
    d.col(0).setOnes();
    if (covariates.dim() > 0) d.rightCols(covariates.dim()) = covariates.matrix(data);
    return d;
}

Eigen::VectorXd PropensityFit::eta(const NodeData& data) const {
    return model.design_matrix(data) * gamma;
}

double log_joint_treatment_probability(const Eigen::VectorXd& eta, double phi_b,
                                       const GaussHermite& gh, std::span<const int> nodes,
                                       std::span<const int> zvals) {
    if (phi_b <= 0.0) {
        double lp = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k)
            lp += bernoulli_logprob(eta(nodes[k]), zvals[k]);
        return lp;
    }
    const double scale = std::sqrt(2.0 * phi_b);
    const double log_norm = -0.5 * std::log(M_PI);
    Eigen::VectorXd terms(gh.points());
    for (int q = 0; q < gh.points(); ++q) {
        double b = scale * gh.nodes(q);
        double lp = gh.log_weights(q) + log_norm;
        for (std::size_t k = 0; k < nodes.size(); ++k)
            lp += bernoulli_logprob(eta(nodes[k]) + b, zvals[k]);
        terms(q) = lp;
    }
    return logsumexp(terms);
}

double joint_treatment_probability(const Eigen::VectorXd& eta, double phi_b,
                                   const GaussHermite& gh, std::span<const int> nodes,
                                   std::span<const int> zvals, double floor,
                                   PropensityEvalStats* stats) {
    double p = std::exp(log_joint_treatment_probability(eta, phi_b, gh, nodes, zvals));
    if (p < floor) {
        if (stats) stats->floored.fetch_add(1, std::memory_order_relaxed);
        p = floor;
    }
    return std::min(p, 1.0);
}

double propensity_component_loglik(const ComponentGraph& g, const Eigen::VectorXi& Z,
                                   const Eigen::VectorXd& eta, double phi_b,
                                   const GaussHermite& gh, int component) {
    const auto& nodes = g.component_nodes[component];
    if (phi_b <= 0.0) {
        double lp = 0.0;
        for (int i : nodes) lp += bernoulli_logprob(eta(i), Z(i));
        return lp;
    }
    const double scale = std::sqrt(2.0 * phi_b);
    Eigen::VectorXd terms(gh.points());
    for (int q = 0; q < gh.points(); ++q) {
        double b = scale * gh.nodes(q);
        double lp = gh.log_weights(q) - 0.5 * std::log(M_PI);
        for (int i : nodes) lp += bernoulli_logprob(eta(i) + b, Z(i));
        terms(q) = lp;
    }
    return logsumexp(terms);
}

double propensity_loglik(const ComponentGraph& g, const Eigen::VectorXi& Z,
                         const Eigen::VectorXd& eta, double phi_b, const GaussHermite& gh) {
    double total = 0.0;
    for (int c = 0; c < g.num_components(); ++c)
        total += propensity_component_loglik(g, Z, eta, phi_b, gh, c);
    return total;
}

Eigen::VectorXd irls_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXi& Z,
                              int max_iter, double tol) {
    const int n = static_cast<int>(design.rows());
    const int p = static_cast<int>(design.cols());
    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd zd = Z.cast<double>();
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd eta = design * gamma;
        Eigen::VectorXd mu(n), w(n);
        for (int i = 0; i < n; ++i) {
            double m = 1.0 / (1.0 + std::exp(-eta(i)));
            mu(i) = m;
            w(i) = std::max(m * (1.0 - m), 1e-10);
        }
        Eigen::MatrixXd hess = design.transpose() * w.asDiagonal() * design;
        hess.diagonal().array() += 1e-10;  // guards separation
        Eigen::VectorXd score = design.transpose() * (zd - mu);
        Eigen::VectorXd step = hess.ldlt().solve(score);
        // damp huge steps under quasi-separation
        double norm = step.norm();
        if (norm > 10.0) step *= 10.0 / norm;
        gamma += step;
        if (step.lpNorm<Eigen::Infinity>() < tol) break;
    }
    return gamma;
}

PropensityFit fit_propensity(const ComponentGraph& g, const NodeData& data,
                             const PropensityModel& model, const PropensityOptions& opts) {
    validate_node_data(g, data);
    PropensityFit fit;
    fit.model = model;
    fit.gh = GaussHermite::rule(opts.gh_points);
    fit.floor = opts.floor;

    const Eigen::MatrixXd design = model.design_matrix(data);
    const int p = model.dim();
    const Eigen::VectorXd gamma0 = irls_logistic(design, data.Z);

    // Optimize over (gamma, log phi_b); the log scale enforces phi_b >= 0.
    auto nll = [&](const Eigen::VectorXd& th) {
        Eigen::VectorXd eta = design * th.head(p);
        double phi = std::exp(th(p));
        return -propensity_loglik(g, data.Z, eta, phi, fit.gh);
    };
    Eigen::VectorXd th0(p + 1);
    th0.head(p) = gamma0;
    th0(p) = std::log(opts.phi_init);

    OptimOptions oo;
    oo.rel_tol = opts.rel_tol;
    oo.max_iter = opts.max_iter;
    OptimResult res = minimize(nll, th0, oo);

    fit.iterations = res.iterations;
    fit.converged = res.converged;
    double phi = std::exp(res.x(p));
    if (phi < opts.boundary_phi) {
        // Unconstrained optimum effectively at the boundary: the phi_b = 0
        // likelihood is an independent logistic regression, solved exactly.
        fit.gamma = irls_logistic(design, data.Z);
        fit.phi_b = 0.0;
        fit.at_boundary = true;
        fit.loglik = propensity_loglik(g, data.Z, design * fit.gamma, 0.0, fit.gh);
        fit.converged = true;
    } else {
        fit.gamma = res.x.head(p);
        fit.phi_b = phi;
        fit.loglik = -res.fval;
    }
    return fit;
}

namespace {
double joint_over_set(const PropensityFit& fit, const NodeData& data,
                      const std::vector<int>& nodes, const std::vector<int>& zvals,
                      PropensityEvalStats* stats) {
    Eigen::VectorXd eta = fit.eta(data);
    return joint_treatment_probability(eta, fit.phi_b, fit.gh, nodes, zvals, fit.floor, stats);
}
}  // namespace

double joint_propensity(const PropensityFit& fit, const ComponentGraph& g,
                        const NodeData& data, int i, int z,
                        const std::vector<int>& z_nbr, PropensityEvalStats* stats) {
    if (static_cast<int>(z_nbr.size()) != g.degree[i])
        throw DataError("joint_propensity: z_nbr length does not match degree");
    std::vector<int> nodes{i}, zvals{z};
    nodes.insert(nodes.end(), g.neighbors[i].begin(), g.neighbors[i].end());
    zvals.insert(zvals.end(), z_nbr.begin(), z_nbr.end());
    return joint_over_set(fit, data, nodes, zvals, stats);
}

double joint_propensity_second_order(const PropensityFit& fit, const ComponentGraph& g,
                                     const NodeData& data, int i, int z,
                                     const std::vector<int>& z_nbr1,
                                     const std::vector<int>& z_nbr2,
                                     PropensityEvalStats* stats) {
    std::vector<int> second = second_order_neighbors(g, i);
    if (static_cast<int>(z_nbr1.size()) != g.degree[i] || z_nbr2.size() != second.size())
        throw DataError("joint_propensity_second_order: assignment lengths misaligned");
    std::vector<int> nodes{i}, zvals{z};
    nodes.insert(nodes.end(), g.neighbors[i].begin(), g.neighbors[i].end());
    zvals.insert(zvals.end(), z_nbr1.begin(), z_nbr1.end());
    nodes.insert(nodes.end(), second.begin(), second.end());
    zvals.insert(zvals.end(), z_nbr2.begin(), z_nbr2.end());
    return joint_over_set(fit, data, nodes, zvals, stats);
}

Eigen::MatrixXd propensity_score_equations(const ComponentGraph& g, const NodeData& data,
                                           const PropensityModel& model,
                                           const Eigen::VectorXd& gamma, double phi_b,
                                           const GaussHermite& gh) {
    const Eigen::MatrixXd design = model.design_matrix(data);
    const int p = model.dim();
    const int m = g.num_components();
    Eigen::MatrixXd scores(m, p + 1);

    Eigen::VectorXd eta = design * gamma;
    for (int k = 0; k < p; ++k) {
        double h = kFdStep * (1.0 + std::abs(gamma(k)));
        Eigen::VectorXd eta_p = eta + h * design.col(k);
        Eigen::VectorXd eta_m = eta - h * design.col(k);
        for (int c = 0; c < m; ++c) {
            double lp = propensity_component_loglik(g, data.Z, eta_p, phi_b, gh, c);
            double lm = propensity_component_loglik(g, data.Z, eta_m, phi_b, gh, c);
            scores(c, k) = (lp - lm) / (2.0 * h);
        }
    }
    double h = kFdStep * (1.0 + std::abs(phi_b));
    if (phi_b - h >= 0.0) {
        for (int c = 0; c < m; ++c) {
            double lp = propensity_component_loglik(g, data.Z, eta, phi_b + h, gh, c);
            double lm = propensity_component_loglik(g, data.Z, eta, phi_b - h, gh, c);
            scores(c, p) = (lp - lm) / (2.0 * h);
        }
    } else {
        // second-order forward difference at the variance boundary
        for (int c = 0; c < m; ++c) {
            double l0 = propensity_component_loglik(g, data.Z, eta, phi_b, gh, c);
            double l1 = propensity_component_loglik(g, data.Z, eta, phi_b + h, gh, c);
            double l2 = propensity_component_loglik(g, data.Z, eta, phi_b + 2 * h, gh, c);
            scores(c, p) = (-3.0 * l0 + 4.0 * l1 - l2) / (2.0 * h);
        }
    }
    return scores;
}

Eigen::MatrixXd propensity_score_equations(const PropensityFit& fit, const ComponentGraph& g,
                                           const NodeData& data) {
    return propensity_score_equations(g, data, fit.model, fit.gamma, fit.phi_b, fit.gh);
}

}  // namespace netcause
