// Average-potential-outcome estimators (IPW, REG, DR-BC, IP-WLS) and the
// causal contrasts built from them. Per-component values are exposed because
// components are the independent unit for the variance theory.
#ifndef NETCAUSE_ESTIMATORS_HPP
#define NETCAUSE_ESTIMATORS_HPP

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <vector>

#include "netcause/graph.hpp"
#include "netcause/outcome.hpp"
#include "netcause/propensity.hpp"
#include "netcause/weights.hpp"

namespace netcause {

enum class EstimatorKind { IPW, REG, DRBC, IPWLS };
const char* estimator_name(EstimatorKind k);
EstimatorKind parse_estimator(const std::string& name);

enum class Pooling { ComponentAverage, GlobalAverage };  // global average is non-canonical

struct MeanEstimate {
    double pooled = 0.0;
    Eigen::VectorXd per_component;
};

double pool_components(const Eigen::VectorXd& per_component, const ComponentGraph& g,
                       Pooling pooling = Pooling::ComponentAverage);

// Uniform prediction interface over full fits (one beta) and per-arm fits
// (IP-WLS: beta per treatment group).
struct OutcomePredictor {
    OutcomeDesign design;
    bool arm_mode = false;
    Eigen::VectorXd beta_full;
    Eigen::VectorXd beta_arm0, beta_arm1;

    static OutcomePredictor from_fit(const OutcomeFit& fit);
    static OutcomePredictor from_arm_fits(const OutcomeFit& fit0, const OutcomeFit& fit1);
    static OutcomePredictor from_values(const OutcomeDesign& design, const Eigen::VectorXd& beta);
    static OutcomePredictor from_arm_values(const OutcomeDesign& design,
                                            const Eigen::VectorXd& beta0,
                                            const Eigen::VectorXd& beta1);

    double predict(const NodeData& data, const ComponentGraph& g, int i, int z, int s) const;
    // m(z, s) is affine in h(s): returns (base, slope) so the inner s-sums can
    // avoid rebuilding design rows.
    std::pair<double, double> node_affine(const NodeData& data, int i, int z) const;
};

// --- per-component evaluators (length m), parameterized by explicit state ---

Eigen::VectorXd ipw_component_means(const ComponentGraph& g, const NodeData& data,
                                    const WeightContext& wc, int z, double alpha);
Eigen::VectorXd ipw_component_means_marginal(const ComponentGraph& g, const NodeData& data,
                                             const WeightContext& wc, double alpha);
Eigen::VectorXd reg_component_means(const ComponentGraph& g, const NodeData& data,
                                    const OutcomePredictor& pred, int z, double alpha);
Eigen::VectorXd reg_component_means_marginal(const ComponentGraph& g, const NodeData& data,
                                             const OutcomePredictor& pred, double alpha);
// `obs_counts`, when given, are precomputed observed exposure counts under the
// predictor's exposure spec (saves rebuilding them inside variance loops).
Eigen::VectorXd drbc_component_means(const ComponentGraph& g, const NodeData& data,
                                     const OutcomePredictor& pred, const WeightContext& wc,
                                     int z, double alpha,
                                     const std::vector<int>* obs_counts = nullptr);
Eigen::VectorXd drbc_component_means_marginal(const ComponentGraph& g, const NodeData& data,
                                              const OutcomePredictor& pred,
                                              const WeightContext& wc, double alpha,
                                              const std::vector<int>* obs_counts = nullptr);

// --- pooled estimators over fitted models ---

MeanEstimate ipw_mean(const ComponentGraph& g, const NodeData& data, const PropensityFit& fit_p,
                      int z, double alpha, PropensityEvalStats* stats = nullptr,
                      Pooling pooling = Pooling::ComponentAverage);
MeanEstimate ipw_mean_marginal(const ComponentGraph& g, const NodeData& data,
                               const PropensityFit& fit_p, double alpha,
                               PropensityEvalStats* stats = nullptr,
                               Pooling pooling = Pooling::ComponentAverage);
MeanEstimate reg_mean(const ComponentGraph& g, const NodeData& data, const OutcomeFit& fit_o,
                      int z, double alpha, Pooling pooling = Pooling::ComponentAverage);
MeanEstimate reg_mean_marginal(const ComponentGraph& g, const NodeData& data,
                               const OutcomeFit& fit_o, double alpha,
                               Pooling pooling = Pooling::ComponentAverage);
MeanEstimate drbc_mean(const ComponentGraph& g, const NodeData& data, const PropensityFit& fit_p,
                       const OutcomeFit& fit_o, int z, double alpha,
                       PropensityEvalStats* stats = nullptr,
                       Pooling pooling = Pooling::ComponentAverage);
MeanEstimate drbc_mean_marginal(const ComponentGraph& g, const NodeData& data,
                                const PropensityFit& fit_p, const OutcomeFit& fit_o, double alpha,
                                PropensityEvalStats* stats = nullptr,
                                Pooling pooling = Pooling::ComponentAverage);

// IP-WLS refits the per-arm weighted regression at each (z, alpha), then
// aggregates it in regression form. The arm fits are returned as well since
// the sandwich stack needs them.
struct IpwlsMean {
    MeanEstimate mean;
    OutcomeFit arm_fit;  // the (z, alpha) fit behind the estimate
};
IpwlsMean ipwls_mean(const ComponentGraph& g, const NodeData& data, const PropensityFit& fit_p,
                     const OutcomeDesign& design, int z, double alpha, bool multilevel = false,
                     PropensityEvalStats* stats = nullptr,
                     Pooling pooling = Pooling::ComponentAverage);
struct IpwlsMarginalMean {
    MeanEstimate mean;
    OutcomeFit arm_fit0, arm_fit1;
};
IpwlsMarginalMean ipwls_mean_marginal(const ComponentGraph& g, const NodeData& data,
                                      const PropensityFit& fit_p, const OutcomeDesign& design,
                                      double alpha, bool multilevel = false,
                                      PropensityEvalStats* stats = nullptr,
                                      Pooling pooling = Pooling::ComponentAverage);

// --- causal contrasts ---

enum class EffectKind { DE, IE, TE, OE };
const char* effect_name(EffectKind k);

struct EffectEstimate {
    EffectKind kind;
    double alpha = 0.0, alpha_prime = 0.0;
    double point = 0.0;
    std::optional<double> se;
    std::optional<std::pair<double, double>> ci;
};

// Means keyed by (arm, alpha) with arm 0/1 and 2 for the marginal mean.
using MeansTable = std::map<std::pair<int, double>, double>;

// DE(alpha), IE(alpha, alpha'), TE(alpha, alpha'), OE(alpha, alpha'); any
// contrast whose means are missing from the table is omitted, not fabricated.
std::vector<EffectEstimate> effects(const MeansTable& means, double alpha, double alpha_prime);

}  // namespace netcause

#endif
