// Stacked estimating equations and the empirical sandwich covariance
// Sigma_m = U_m^-1 V_m U_m^-T over components, with delta-method contrasts.
// The bread U_m comes from central finite differences of the per-component
// estimating functions; one-sided differences are used at variance boundaries.
#ifndef NETCAUSE_MESTIMATION_HPP
#define NETCAUSE_MESTIMATION_HPP

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "netcause/estimators.hpp"
#include "netcause/graph.hpp"
#include "netcause/outcome.hpp"
#include "netcause/propensity.hpp"

namespace netcause {

struct ThetaBlock {
    std::string name;
    int offset = 0;
    int size = 0;
    bool nonneg = false;  // variance components: keep finite differences one-sided at 0
};

struct ThetaLayout {
    std::vector<ThetaBlock> blocks;
    int dim = 0;

    int add(const std::string& name, int size, bool nonneg = false);
    const ThetaBlock& block(const std::string& name) const;
    bool has(const std::string& name) const;
    int index(const std::string& name, int j = 0) const;
    bool is_nonneg(int k) const;
};

// A stack of per-component estimating functions psi(O_nu; theta) with the
// fitted root theta_hat. Rows of psi_components are components.
class EstimatingSystem {
public:
    virtual ~EstimatingSystem() = default;
    ThetaLayout layout;
    Eigen::VectorXd theta_hat;

    virtual int num_components() const = 0;
    virtual Eigen::MatrixXd psi_components(const Eigen::VectorXd& theta) const = 0;

    Eigen::VectorXd component_psi(const Eigen::VectorXd& theta, int component) const {
        return psi_components(theta).row(component);
    }
};

struct SandwichOptions {
    double condition_limit = 1e10;
    bool df_inflation = false;      // multiply V by m/(m - dim); off by default
};

struct SandwichResult {
    Eigen::MatrixXd Sigma;   // m-free: Var(theta_hat) ~ Sigma / m
    Eigen::MatrixXd U, V;    // retained for diagnostics
    double condition = 0.0;  // 1 / rcond estimate of U
    double root_residual = 0.0;  // max |mean psi| at theta_hat; ~0 at the root
    int m = 0;
};

SandwichResult sandwich(const EstimatingSystem& sys, const SandwichOptions& opts = {});

struct ContrastInterval {
    double se = 0.0;
    double lo = 0.0, hi = 0.0;
};

// se = sqrt(tau' Sigma tau / m); Wald interval at the given critical value.
ContrastInterval contrast_se(const SandwichResult& res, const Eigen::VectorXd& tau,
                             double point, double critical = 1.96);

// Standard normal quantile (used when the CLI confidence level is not 95%).
double normal_quantile(double p);

// --- concrete stacks for the four estimator kinds ---

struct StackRequest {
    EstimatorKind kind = EstimatorKind::DRBC;
    std::vector<double> alphas;   // distinct allocation values getting mean slots
    bool marginal = false;        // also include mu_alpha slots
    Pooling pooling = Pooling::ComponentAverage;
};

struct FittedModels {
    const PropensityFit* propensity = nullptr;          // required unless kind == REG
    const OutcomeFit* outcome = nullptr;                // required for REG / DR-BC
    // IP-WLS: arm fits per alpha, in the order of StackRequest::alphas.
    std::vector<std::array<const OutcomeFit*, 2>> wls_fits;
    // Optional wider interference sets for the weight product (second-order IPW).
    std::optional<std::vector<std::vector<int>>> prop_sets;
};

// Builds the stacked system with theta_hat assembled from the fitted models;
// target-mean slots are named "mu0@k", "mu1@k" (and "mu@k") per alpha index k.
std::unique_ptr<EstimatingSystem> build_system(const ComponentGraph& g, const NodeData& data,
                                               const StackRequest& request,
                                               const FittedModels& fits);

// Contrast vectors against a built system's layout.
Eigen::VectorXd de_contrast(const EstimatingSystem& sys, int alpha_index);
Eigen::VectorXd ie_contrast(const EstimatingSystem& sys, int alpha_index, int alpha_prime_index);
Eigen::VectorXd te_contrast(const EstimatingSystem& sys, int alpha_index, int alpha_prime_index);
Eigen::VectorXd oe_contrast(const EstimatingSystem& sys, int alpha_index, int alpha_prime_index);

}  // namespace netcause

#endif
