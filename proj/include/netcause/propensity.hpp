// Component-random-intercept logistic treatment model: marginal likelihood by
// Gauss-Hermite quadrature, joint neighbourhood propensity evaluation, and the
// per-component score equations used by the sandwich variance.
#ifndef NETCAUSE_PROPENSITY_HPP
#define NETCAUSE_PROPENSITY_HPP

#include <Eigen/Dense>
#include <atomic>
#include <span>
#include <vector>

#include "netcause/design.hpp"
#include "netcause/graph.hpp"
#include "netcause/quadrature.hpp"

namespace netcause {

struct PropensityModel {
    CovariateSpec covariates;  // linear predictor = gamma_0 + terms . gamma_1..p

    int dim() const { return covariates.dim() + 1; }  // including intercept
    // n x (p+1) design with leading intercept column.
    Eigen::MatrixXd design_matrix(const NodeData& data) const;
};

struct PropensityOptions {
    int gh_points = 10;
    double rel_tol = 1e-8;
    int max_iter = 500;
    double floor = 1e-12;       // joint-propensity underflow floor
    double phi_init = 1.0;
    double boundary_phi = 1e-8; // below this the variance is pinned to 0
};

struct PropensityFit {
    PropensityModel model;
    Eigen::VectorXd gamma;      // intercept first
    double phi_b = 0.0;
    GaussHermite gh;
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
    bool at_boundary = false;   // phi_b driven to 0
    double floor = 1e-12;

    Eigen::VectorXd eta(const NodeData& data) const;
};

// Counts propensity-floor events so extreme-weight diagnostics can be surfaced.
struct PropensityEvalStats {
    std::atomic<long long> floored{0};
};

// log P(Z_j = z_j for all j in `nodes`) with a shared N(0, phi_b) intercept,
// by Gauss-Hermite quadrature; exact product when phi_b == 0.
double log_joint_treatment_probability(const Eigen::VectorXd& eta, double phi_b,
                                       const GaussHermite& gh, std::span<const int> nodes,
                                       std::span<const int> zvals);

// Floored probability in (0,1); flooring is counted in `stats` when given.
double joint_treatment_probability(const Eigen::VectorXd& eta, double phi_b,
                                   const GaussHermite& gh, std::span<const int> nodes,
                                   std::span<const int> zvals, double floor,
                                   PropensityEvalStats* stats = nullptr);

// Marginal log-likelihood of the fitted mixed logistic model.
double propensity_loglik(const ComponentGraph& g, const Eigen::VectorXi& Z,
                         const Eigen::VectorXd& eta, double phi_b, const GaussHermite& gh);
double propensity_component_loglik(const ComponentGraph& g, const Eigen::VectorXi& Z,
                                   const Eigen::VectorXd& eta, double phi_b,
                                   const GaussHermite& gh, int component);

// Plain logistic regression by iteratively reweighted least squares; used to
// start the mixed fit and as the exact phi_b = 0 path.
Eigen::VectorXd irls_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXi& Z,
                              int max_iter = 100, double tol = 1e-10);

PropensityFit fit_propensity(const ComponentGraph& g, const NodeData& data,
                             const PropensityModel& model, const PropensityOptions& opts = {});

// Joint propensity of (z, z_nbr) over {i} u N_i; z_nbr is aligned with the
// sorted neighbour list of i.
double joint_propensity(const PropensityFit& fit, const ComponentGraph& g,
                        const NodeData& data, int i, int z,
                        const std::vector<int>& z_nbr, PropensityEvalStats* stats = nullptr);

// Same integral with the product extended over {i} u N_i u N'_i.
double joint_propensity_second_order(const PropensityFit& fit, const ComponentGraph& g,
                                     const NodeData& data, int i, int z,
                                     const std::vector<int>& z_nbr1,
                                     const std::vector<int>& z_nbr2,
                                     PropensityEvalStats* stats = nullptr);

// Per-component gradient of the marginal log-likelihood w.r.t. (gamma, phi_b),
// by central finite differences (one-sided at the phi_b = 0 boundary).
// Returns an m x (p+2) matrix; rows sum to ~0 at the MLE.
Eigen::MatrixXd propensity_score_equations(const ComponentGraph& g, const NodeData& data,
                                           const PropensityModel& model,
                                           const Eigen::VectorXd& gamma, double phi_b,
                                           const GaussHermite& gh);
Eigen::MatrixXd propensity_score_equations(const PropensityFit& fit, const ComponentGraph& g,
                                           const NodeData& data);

}  // namespace netcause

#endif
