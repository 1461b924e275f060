// Outcome regressions: OLS, per-arm inverse-probability-weighted LS, the
// random-intercept linear mixed model by marginal ML, and its weighted
// pseudolikelihood counterpart. All predictions are fixed-effects only.
#ifndef NETCAUSE_OUTCOME_HPP
#define NETCAUSE_OUTCOME_HPP

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "netcause/design.hpp"
#include "netcause/graph.hpp"
#include "netcause/weights.hpp"

namespace netcause {

struct OutcomeDesign {
    bool treatment_term = true;   // beta_Z z
    bool exposure_term = true;    // beta_h h(s)
    bool interaction = false;     // beta_zh z h(s)
    CovariateSpec covariates;
    ExposureSpec exposure;

    int dim() const {
        return 1 + (treatment_term ? 1 : 0) + (exposure_term ? 1 : 0) +
               (interaction ? 1 : 0) + covariates.dim();
    }
    std::vector<std::string> labels() const;
    Eigen::VectorXd row_raw(const Eigen::Ref<const Eigen::RowVectorXd>& xraw,
                            double z, int s, int d_eff) const;
    Eigen::VectorXd row(const NodeData& data, const ComponentGraph& g, int i,
                        double z, int s) const;

    // Per-arm design used by the weighted fits: the treatment main effect folds
    // into the intercept and the interaction into the exposure slope.
    int arm_dim() const { return 1 + (exposure_term || interaction ? 1 : 0) + covariates.dim(); }
    std::vector<std::string> arm_labels() const;
    Eigen::VectorXd arm_row_raw(const Eigen::Ref<const Eigen::RowVectorXd>& xraw,
                                int s, int d_eff) const;
    Eigen::VectorXd arm_row(const NodeData& data, const ComponentGraph& g, int i, int s) const;
};

// Per-component Gram pieces for likelihoods with covariance a*W^-1 + b*11'.
// Everything the profiled beta, the log-likelihood, and the beta score need
// reduces to these, so neither the fits nor the sandwich ever form V densely.
struct RankOneBlock {
    Eigen::MatrixXd dtd;   // D' W D
    Eigen::VectorXd dt1;   // D' W 1
    Eigen::VectorXd dty;   // D' W y
    double yty = 0.0;      // y' W y
    double oty = 0.0;      // 1' W y
    double sw = 0.0;       // 1' W 1 (= block size when unweighted)
    int n = 0;
    double sum_log_w = 0.0;
    double sum_one_minus_w = 0.0;

    double loglik(const Eigen::VectorXd& beta, double s2e, double s2c, bool weighted) const;
    // D' V^-1 (y - D beta) via Sherman-Morrison
    Eigen::VectorXd beta_score(const Eigen::VectorXd& beta, double s2e, double s2c) const;
};

// One block per component; rows with non-positive weight are excluded.
std::vector<RankOneBlock> rank_one_blocks(const ComponentGraph& g, const Eigen::MatrixXd& D,
                                          const Eigen::VectorXd& y, const Eigen::VectorXd* w);

enum class OutcomeVariant { OLS, WLS, LMM, WLMM };

struct OutcomeFit {
    OutcomeVariant variant = OutcomeVariant::OLS;
    OutcomeDesign design;
    Eigen::VectorXd beta;          // full design for OLS/LMM, arm design for WLS/WLMM
    double sigma2_eps = std::numeric_limits<double>::quiet_NaN();
    double sigma2_c = std::numeric_limits<double>::quiet_NaN();
    double loglik = std::numeric_limits<double>::quiet_NaN();
    bool converged = true;
    bool boundary_sigma2c = false;
    int arm = -1;                  // WLS/WLMM: which treatment group
    double alpha = std::numeric_limits<double>::quiet_NaN();

    bool is_arm_fit() const { return variant == OutcomeVariant::WLS || variant == OutcomeVariant::WLMM; }
    bool is_multilevel() const { return variant == OutcomeVariant::LMM || variant == OutcomeVariant::WLMM; }
};

struct OutcomeOptions {
    double rel_tol = 1e-8;
    int max_iter = 500;
    double boundary_ratio = 1e-8;  // sigma2_c below this times sigma2_eps pins to 0
};

OutcomeFit fit_ols(const ComponentGraph& g, const NodeData& data, const OutcomeDesign& design);

OutcomeFit fit_wls(const ComponentGraph& g, const NodeData& data, const OutcomeDesign& design,
                   const WeightContext& wc, int z, double alpha);
OutcomeFit fit_wls(const ComponentGraph& g, const NodeData& data, const OutcomeDesign& design,
                   const PropensityFit& fit_p, int z, double alpha);

OutcomeFit fit_lmm(const ComponentGraph& g, const NodeData& data, const OutcomeDesign& design,
                   const OutcomeOptions& opts = {});

OutcomeFit fit_wlmm(const ComponentGraph& g, const NodeData& data, const OutcomeDesign& design,
                    const WeightContext& wc, int z, double alpha, const OutcomeOptions& opts = {});
OutcomeFit fit_wlmm(const ComponentGraph& g, const NodeData& data, const OutcomeDesign& design,
                    const PropensityFit& fit_p, int z, double alpha,
                    const OutcomeOptions& opts = {});

// Fixed-effects-only prediction m(z, s, x); d is the effective interference
// set size (h = 0 when d = 0). Arm fits ignore z by construction.
double predict_marginal(const OutcomeFit& fit, int z, int s, int d,
                        const Eigen::Ref<const Eigen::RowVectorXd>& xraw);
double predict_node(const OutcomeFit& fit, const NodeData& data, const ComponentGraph& g,
                    int i, int z, int s);

// Random-intercept marginal log-likelihood at explicit parameters (used by the
// sandwich variance for the variance-component scores). Per-component value.
double lmm_component_loglik(const ComponentGraph& g, const NodeData& data,
                            const OutcomeDesign& design, const Eigen::VectorXd& beta,
                            double sigma2_eps, double sigma2_c, int component);

// Weighted pseudolikelihood analogue; `omega` holds the per-node weights
// (zero-weight observations contribute a unit factor and drop out).
double wlmm_component_loglik(const ComponentGraph& g, const NodeData& data,
                             const OutcomeDesign& design, const Eigen::VectorXd& beta_arm,
                             double sigma2_eps, double sigma2_c,
                             const Eigen::VectorXd& omega, int component);

}  // namespace netcause

#endif
