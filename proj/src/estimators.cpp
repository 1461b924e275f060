#include "netcause/estimators.hpp"

#include <cmath>

#include "netcause/allocation.hpp"
#include "netcause/errors.hpp"

namespace netcause {

const char* estimator_name(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::IPW: return "IPW";
        case EstimatorKind::REG: return "REG";
        case EstimatorKind::DRBC: return "DR-BC";
        case EstimatorKind::IPWLS: return "IP-WLS";
    }
    return "?";
}

EstimatorKind parse_estimator(const std::string& name) {
    if (name == "IPW" || name == "ipw") return EstimatorKind::IPW;
    if (name == "REG" || name == "reg") return EstimatorKind::REG;
    if (name == "DRBC" || name == "DR-BC" || name == "drbc") return EstimatorKind::DRBC;
    if (name == "IPWLS" || name == "IP-WLS" || name == "ipwls") return EstimatorKind::IPWLS;
    throw ConfigError("unknown estimator '" + name + "'");
}

double pool_components(const Eigen::VectorXd& per_component, const ComponentGraph& g,
                       Pooling pooling) {
    if (pooling == Pooling::ComponentAverage) return per_component.mean();
    double num = 0.0;
    for (int c = 0; c < g.num_components(); ++c)
        num += per_component(c) * g.component_sizes[c];
    return num / g.n_nodes;
}

WeightContext WeightContext::build(const ComponentGraph& g, const NodeData& data,
                                   const PropensityModel& model, const Eigen::VectorXd& gamma,
                                   double phi_b, const GaussHermite& gh, double floor,
                                   const std::optional<std::vector<std::vector<int>>>& sets,
                                   PropensityEvalStats* stats) {
    WeightContext wc;
    wc.f_obs.resize(data.n());
    wc.count.resize(data.n());
    wc.set_size.resize(data.n());
    const Eigen::VectorXd eta = model.design_matrix(data) * gamma;

    std::vector<int> nodes, zvals;
    for (int i = 0; i < data.n(); ++i) {
        const std::vector<int>& set = sets ? (*sets)[i] : g.neighbors[i];
        nodes.assign(1, i);
        nodes.insert(nodes.end(), set.begin(), set.end());
        zvals.resize(nodes.size());
        int s = 0;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            zvals[k] = data.Z(nodes[k]);
            if (k > 0) s += zvals[k];
        }
        wc.count[i] = s;
        wc.set_size[i] = static_cast<int>(set.size());
        wc.f_obs(i) = joint_treatment_probability(eta, phi_b, gh, nodes, zvals, floor, stats);
    }
    return wc;
}

WeightContext WeightContext::from_fit(const ComponentGraph& g, const NodeData& data,
                                      const PropensityFit& fit,
                                      const std::optional<std::vector<std::vector<int>>>& sets,
                                      PropensityEvalStats* stats) {
    return build(g, data, fit.model, fit.gamma, fit.phi_b, fit.gh, fit.floor, sets, stats);
}

OutcomePredictor OutcomePredictor::from_fit(const OutcomeFit& fit) {
    if (fit.is_arm_fit())
        throw FitError("OutcomePredictor::from_fit expects a full (non-arm) outcome fit");
    return from_values(fit.design, fit.beta);
}

OutcomePredictor OutcomePredictor::from_arm_fits(const OutcomeFit& fit0, const OutcomeFit& fit1) {
    if (!fit0.is_arm_fit() || fit0.arm != 0 || !fit1.is_arm_fit() || fit1.arm != 1)
        throw FitError("OutcomePredictor::from_arm_fits expects arm-0 and arm-1 fits");
    return from_arm_values(fit0.design, fit0.beta, fit1.beta);
}

OutcomePredictor OutcomePredictor::from_values(const OutcomeDesign& design,
                                               const Eigen::VectorXd& beta) {
    OutcomePredictor p;
    p.design = design;
    p.arm_mode = false;
    p.beta_full = beta;
    return p;
}

OutcomePredictor OutcomePredictor::from_arm_values(const OutcomeDesign& design,
                                                   const Eigen::VectorXd& beta0,
                                                   const Eigen::VectorXd& beta1) {
    OutcomePredictor p;
    p.design = design;
    p.arm_mode = true;
    p.beta_arm0 = beta0;
    p.beta_arm1 = beta1;
    return p;
}

double OutcomePredictor::predict(const NodeData& data, const ComponentGraph& g, int i, int z,
                                 int s) const {
    int d = design.exposure.eff_degree(g, i);
    if (arm_mode)
        return design.arm_row_raw(data.X.row(i), s, d).dot(z == 1 ? beta_arm1 : beta_arm0);
    return design.row_raw(data.X.row(i), z, s, d).dot(beta_full);
}

std::pair<double, double> OutcomePredictor::node_affine(const NodeData& data, int i,
                                                        int z) const {
    if (arm_mode) {
        const Eigen::VectorXd& b = z == 1 ? beta_arm1 : beta_arm0;
        double base = b(0);
        double slope = 0.0;
        int k = 1;
        if (design.exposure_term || design.interaction) slope = b(k++);
        if (design.covariates.dim() > 0)
            base += design.covariates.row(data.X.row(i)).dot(b.tail(design.covariates.dim()));
        return {base, slope};
    }
    const Eigen::VectorXd& b = beta_full;
    int k = 0;
    double base = b(k++);
    if (design.treatment_term) base += z * b(k++);
    double slope = 0.0;
    if (design.exposure_term) slope += b(k++);
    if (design.interaction) slope += z * b(k++);
    if (design.covariates.dim() > 0)
        base += design.covariates.row(data.X.row(i)).dot(b.tail(design.covariates.dim()));
    return {base, slope};
}

Eigen::VectorXd ipw_component_means(const ComponentGraph& g, const NodeData& data,
                                    const WeightContext& wc, int z, double alpha) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(g.num_components());
    for (int c = 0; c < g.num_components(); ++c) {
        double sum = 0.0;
        for (int i : g.component_nodes[c]) sum += data.Y(i) * wc.arm_weight(i, z, alpha, data.Z);
        out(c) = sum / g.component_sizes[c];
    }
    if (!out.allFinite()) throw NumericalError("ipw: non-finite weighted sum");
    return out;
}

Eigen::VectorXd ipw_component_means_marginal(const ComponentGraph& g, const NodeData& data,
                                             const WeightContext& wc, double alpha) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(g.num_components());
    for (int c = 0; c < g.num_components(); ++c) {
        double sum = 0.0;
        for (int i : g.component_nodes[c]) sum += data.Y(i) * wc.marginal_weight(i, alpha, data.Z);
        out(c) = sum / g.component_sizes[c];
    }
    if (!out.allFinite()) throw NumericalError("ipw marginal: non-finite weighted sum");
    return out;
}

namespace {

// sum_s h(s, d) pi(s; d, alpha), cached per distinct effective degree.
class ExposureMeanCache {
public:
    ExposureMeanCache(const ExposureSpec& exposure, double alpha)
        : exposure_(exposure), alpha_(alpha) {}

    double operator()(int d) {
        if (d >= static_cast<int>(values_.size())) values_.resize(d + 1);
        auto& slot = values_[d];
        if (!slot) {
            double v = 0.0;
            for (int s = 0; s <= d; ++s)
                v += exposure_.h(s, d) * pi_neighborhood(s, d, alpha_);
            slot = v;
        }
        return *slot;
    }

private:
    const ExposureSpec& exposure_;
    double alpha_;
    std::vector<std::optional<double>> values_;
};

// Observed-exposure values for the residual term of the bias correction.
std::vector<int> observed_outcome_counts(const ComponentGraph& g, const NodeData& data,
                                         const OutcomeDesign& design) {
    ExposureState st = ExposureState::build(g, data.Z, design.exposure);
    return st.count;
}

}  // namespace

Eigen::VectorXd reg_component_means(const ComponentGraph& g, const NodeData& data,
                                    const OutcomePredictor& pred, int z, double alpha) {
    ExposureMeanCache hbar(pred.design.exposure, alpha);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(g.num_components());
    for (int c = 0; c < g.num_components(); ++c) {
        double sum = 0.0;
        for (int i : g.component_nodes[c]) {
            auto [base, slope] = pred.node_affine(data, i, z);
            sum += base + slope * hbar(pred.design.exposure.eff_degree(g, i));
        }
        out(c) = sum / g.component_sizes[c];
    }
    return out;
}

Eigen::VectorXd reg_component_means_marginal(const ComponentGraph& g, const NodeData& data,
                                             const OutcomePredictor& pred, double alpha) {
    // pi_joint factorizes, so the marginal is the alpha-mixture across arms.
    ExposureMeanCache hbar(pred.design.exposure, alpha);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(g.num_components());
    for (int c = 0; c < g.num_components(); ++c) {
        double sum = 0.0;
        for (int i : g.component_nodes[c]) {
            double hv = hbar(pred.design.exposure.eff_degree(g, i));
            auto [b0, s0] = pred.node_affine(data, i, 0);
            auto [b1, s1] = pred.node_affine(data, i, 1);
            sum += (1.0 - alpha) * (b0 + s0 * hv) + alpha * (b1 + s1 * hv);
        }
        out(c) = sum / g.component_sizes[c];
    }
    return out;
}

Eigen::VectorXd drbc_component_means(const ComponentGraph& g, const NodeData& data,
                                     const OutcomePredictor& pred, const WeightContext& wc,
                                     int z, double alpha, const std::vector<int>* obs_counts) {
    Eigen::VectorXd out = reg_component_means(g, data, pred, z, alpha);
    std::vector<int> local;
    if (!obs_counts) {
        local = observed_outcome_counts(g, data, pred.design);
        obs_counts = &local;
    }
    for (int c = 0; c < g.num_components(); ++c) {
        double corr = 0.0;
        for (int i : g.component_nodes[c]) {
            double w = wc.arm_weight(i, z, alpha, data.Z);
            if (w == 0.0) continue;
            corr += (data.Y(i) - pred.predict(data, g, i, data.Z(i), (*obs_counts)[i])) * w;
        }
        out(c) += corr / g.component_sizes[c];
    }
    if (!out.allFinite()) throw NumericalError("drbc: non-finite correction");
    return out;
}

Eigen::VectorXd drbc_component_means_marginal(const ComponentGraph& g, const NodeData& data,
                                              const OutcomePredictor& pred,
                                              const WeightContext& wc, double alpha,
                                              const std::vector<int>* obs_counts) {
    Eigen::VectorXd out = reg_component_means_marginal(g, data, pred, alpha);
    std::vector<int> local;
    if (!obs_counts) {
        local = observed_outcome_counts(g, data, pred.design);
        obs_counts = &local;
    }
    for (int c = 0; c < g.num_components(); ++c) {
        double corr = 0.0;
        for (int i : g.component_nodes[c]) {
            double w = wc.marginal_weight(i, alpha, data.Z);
            if (w == 0.0) continue;
            corr += (data.Y(i) - pred.predict(data, g, i, data.Z(i), (*obs_counts)[i])) * w;
        }
        out(c) += corr / g.component_sizes[c];
    }
    if (!out.allFinite()) throw NumericalError("drbc marginal: non-finite correction");
    return out;
}

namespace {
MeanEstimate make_estimate(Eigen::VectorXd per_component, const ComponentGraph& g,
                           Pooling pooling) {
    MeanEstimate e;
    e.pooled = pool_components(per_component, g, pooling);
    e.per_component = std::move(per_component);
    return e;
}
}  // namespace

MeanEstimate ipw_mean(const ComponentGraph& g, const NodeData& data, const PropensityFit& fit_p,
                      int z, double alpha, PropensityEvalStats* stats, Pooling pooling) {
    WeightContext wc = WeightContext::from_fit(g, data, fit_p, {}, stats);
    return make_estimate(ipw_component_means(g, data, wc, z, alpha), g, pooling);
}

MeanEstimate ipw_mean_marginal(const ComponentGraph& g, const NodeData& data,
                               const PropensityFit& fit_p, double alpha,
                               PropensityEvalStats* stats, Pooling pooling) {
    WeightContext wc = WeightContext::from_fit(g, data, fit_p, {}, stats);
    return make_estimate(ipw_component_means_marginal(g, data, wc, alpha), g, pooling);
}

MeanEstimate reg_mean(const ComponentGraph& g, const NodeData& data, const OutcomeFit& fit_o,
                      int z, double alpha, Pooling pooling) {
    return make_estimate(
        reg_component_means(g, data, OutcomePredictor::from_fit(fit_o), z, alpha), g, pooling);
}

MeanEstimate reg_mean_marginal(const ComponentGraph& g, const NodeData& data,
                               const OutcomeFit& fit_o, double alpha, Pooling pooling) {
    return make_estimate(
        reg_component_means_marginal(g, data, OutcomePredictor::from_fit(fit_o), alpha), g,
        pooling);
}

MeanEstimate drbc_mean(const ComponentGraph& g, const NodeData& data, const PropensityFit& fit_p,
                       const OutcomeFit& fit_o, int z, double alpha, PropensityEvalStats* stats,
                       Pooling pooling) {
    WeightContext wc = WeightContext::from_fit(g, data, fit_p, {}, stats);
    return make_estimate(
        drbc_component_means(g, data, OutcomePredictor::from_fit(fit_o), wc, z, alpha), g,
        pooling);
}

MeanEstimate drbc_mean_marginal(const ComponentGraph& g, const NodeData& data,
                                const PropensityFit& fit_p, const OutcomeFit& fit_o, double alpha,
                                PropensityEvalStats* stats, Pooling pooling) {
    WeightContext wc = WeightContext::from_fit(g, data, fit_p, {}, stats);
    return make_estimate(
        drbc_component_means_marginal(g, data, OutcomePredictor::from_fit(fit_o), wc, alpha), g,
        pooling);
}

IpwlsMean ipwls_mean(const ComponentGraph& g, const NodeData& data, const PropensityFit& fit_p,
                     const OutcomeDesign& design, int z, double alpha, bool multilevel,
                     PropensityEvalStats* stats, Pooling pooling) {
    WeightContext wc = WeightContext::from_fit(g, data, fit_p, {}, stats);
    IpwlsMean out;
    out.arm_fit = multilevel ? fit_wlmm(g, data, design, wc, z, alpha)
                             : fit_wls(g, data, design, wc, z, alpha);
    // only arm z is ever evaluated below, so both slots can hold its beta
    OutcomePredictor pred =
        OutcomePredictor::from_arm_values(design, out.arm_fit.beta, out.arm_fit.beta);
    out.mean = make_estimate(reg_component_means(g, data, pred, z, alpha), g, pooling);
    return out;
}

IpwlsMarginalMean ipwls_mean_marginal(const ComponentGraph& g, const NodeData& data,
                                      const PropensityFit& fit_p, const OutcomeDesign& design,
                                      double alpha, bool multilevel, PropensityEvalStats* stats,
                                      Pooling pooling) {
    WeightContext wc = WeightContext::from_fit(g, data, fit_p, {}, stats);
    IpwlsMarginalMean out;
    out.arm_fit0 = multilevel ? fit_wlmm(g, data, design, wc, 0, alpha)
                              : fit_wls(g, data, design, wc, 0, alpha);
    out.arm_fit1 = multilevel ? fit_wlmm(g, data, design, wc, 1, alpha)
                              : fit_wls(g, data, design, wc, 1, alpha);
    OutcomePredictor pred =
        OutcomePredictor::from_arm_values(design, out.arm_fit0.beta, out.arm_fit1.beta);
    out.mean = make_estimate(reg_component_means_marginal(g, data, pred, alpha), g, pooling);
    return out;
}

const char* effect_name(EffectKind k) {
    switch (k) {
        case EffectKind::DE: return "DE";
        case EffectKind::IE: return "IE";
        case EffectKind::TE: return "TE";
        case EffectKind::OE: return "OE";
    }
    return "?";
}

std::vector<EffectEstimate> effects(const MeansTable& means, double alpha, double alpha_prime) {
    auto get = [&](int arm, double a) -> std::optional<double> {
        auto it = means.find({arm, a});
        if (it == means.end()) return std::nullopt;
        return it->second;
    };
    std::vector<EffectEstimate> out;
    auto mu0a = get(0, alpha), mu1a = get(1, alpha);
    auto mu0p = get(0, alpha_prime);
    auto muma = get(2, alpha), mump = get(2, alpha_prime);
    if (mu0a && mu1a)
        out.push_back({EffectKind::DE, alpha, alpha_prime, *mu1a - *mu0a, {}, {}});
    if (mu0a && mu0p)
        out.push_back({EffectKind::IE, alpha, alpha_prime, *mu0a - *mu0p, {}, {}});
    if (mu1a && mu0p)
        out.push_back({EffectKind::TE, alpha, alpha_prime, *mu1a - *mu0p, {}, {}});
    if (muma && mump)
        out.push_back({EffectKind::OE, alpha, alpha_prime, *muma - *mump, {}, {}});
    return out;
}

}  // namespace netcause
