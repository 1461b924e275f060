#include "netcause/mestimation.hpp"

#include <cmath>
#include <limits>

#include "netcause/errors.hpp"

namespace netcause {

namespace {
const double kFdStep = std::cbrt(std::numeric_limits<double>::epsilon());
}

int ThetaLayout::add(const std::string& name, int size, bool nonneg) {
    ThetaBlock b;
    b.name = name;
    b.offset = dim;
    b.size = size;
    b.nonneg = nonneg;
    blocks.push_back(b);
    dim += size;
    return b.offset;
}

const ThetaBlock& ThetaLayout::block(const std::string& name) const {
    for (const auto& b : blocks)
        if (b.name == name) return b;
    throw NumericalError("ThetaLayout: no block named '" + name + "'");
}

bool ThetaLayout::has(const std::string& name) const {
    for (const auto& b : blocks)
        if (b.name == name) return true;
    return false;
}

int ThetaLayout::index(const std::string& name, int j) const { return block(name).offset + j; }

bool ThetaLayout::is_nonneg(int k) const {
    for (const auto& b : blocks)
        if (k >= b.offset && k < b.offset + b.size) return b.nonneg;
    return false;
}

SandwichResult sandwich(const EstimatingSystem& sys, const SandwichOptions& opts) {
    const int dim = sys.layout.dim;
    const int m = sys.num_components();
    const Eigen::VectorXd& theta = sys.theta_hat;

    SandwichResult res;
    res.m = m;

    Eigen::MatrixXd psi0 = sys.psi_components(theta);
    res.root_residual = psi0.colwise().mean().lpNorm<Eigen::Infinity>();

    res.V = (psi0.transpose() * psi0) / m;
    if (opts.df_inflation && m > dim) res.V *= static_cast<double>(m) / (m - dim);

    res.U.resize(dim, dim);
    Eigen::VectorXd th = theta;
    for (int k = 0; k < dim; ++k) {
        double h = kFdStep * (1.0 + std::abs(theta(k)));
        Eigen::MatrixXd deriv;
        if (sys.layout.is_nonneg(k) && theta(k) - h < 0.0) {
            th(k) = theta(k) + h;
            Eigen::MatrixXd p1 = sys.psi_components(th);
            th(k) = theta(k) + 2.0 * h;
            Eigen::MatrixXd p2 = sys.psi_components(th);
            th(k) = theta(k);
            deriv = (-3.0 * psi0 + 4.0 * p1 - p2) / (2.0 * h);
        } else {
            th(k) = theta(k) + h;
            Eigen::MatrixXd pp = sys.psi_components(th);
            th(k) = theta(k) - h;
            Eigen::MatrixXd pm = sys.psi_components(th);
            th(k) = theta(k);
            deriv = (pp - pm) / (2.0 * h);
        }
        res.U.col(k) = -deriv.colwise().mean().transpose();
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(res.U);
    double rcond = lu.rcond();
    res.condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(rcond > 0.0) || res.condition > opts.condition_limit)
        throw NumericalError("sandwich: ill-conditioned bread matrix (condition ~ " +
                             std::to_string(res.condition) + ", limit " +
                             std::to_string(opts.condition_limit) + ", m = " +
                             std::to_string(m) + ", dim = " + std::to_string(dim) + ")");

    Eigen::MatrixXd B = lu.solve(res.V);
    res.Sigma = lu.solve(B.transpose()).transpose();
    res.Sigma = ((res.Sigma + res.Sigma.transpose()) / 2.0).eval();
    return res;
}

ContrastInterval contrast_se(const SandwichResult& res, const Eigen::VectorXd& tau,
                             double point, double critical) {
    if (tau.size() != res.Sigma.rows())
        throw NumericalError("contrast_se: contrast length does not match theta");
    double q = tau.dot(res.Sigma * tau);
    if (q < -1e-10)
        throw NumericalError("contrast_se: negative variance quadratic form (" +
                             std::to_string(q) + ")");
    q = std::max(q, 0.0);
    ContrastInterval ci;
    ci.se = std::sqrt(q / res.m);
    ci.lo = point - critical * ci.se;
    ci.hi = point + critical * ci.se;
    return ci;
}

double normal_quantile(double p) {
    // Acklam's rational approximation followed by one Halley refinement.
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p outside (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    } else if (p <= phigh) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        double q = std::sqrt(-2 * std::log(1 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
    return x - u / (1 + x * u / 2);
}

namespace {

// Concrete stacked system for IPW / REG / DR-BC / IP-WLS.
class EstimatorStack final : public EstimatingSystem {
public:
    const ComponentGraph* g = nullptr;
    const NodeData* data = nullptr;
    EstimatorKind kind = EstimatorKind::DRBC;
    std::vector<double> alphas;
    bool marginal = false;
    bool multilevel = false;

    bool has_prop = false;
    PropensityModel prop_model;
    GaussHermite gh;
    double floor = 1e-12;
    std::optional<std::vector<std::vector<int>>> prop_sets;

    bool has_outcome = false;  // single full outcome fit (REG / DR-BC)
    OutcomeDesign out_design;
    Eigen::MatrixXd d_obs;                // observed full-design rows
    std::vector<RankOneBlock> out_blocks; // unweighted blocks for LMM scores
    std::vector<int> obs_counts;          // observed exposure counts

    Eigen::MatrixXd d_arm;                // observed arm-design rows (IP-WLS)

    int num_components() const override { return g->num_components(); }
    Eigen::MatrixXd psi_components(const Eigen::VectorXd& theta) const override;

    // Sub-block caches keyed by the parameter segments they depend on, so the
    // finite-difference sweeps only recompute what a perturbation touches.
    struct PropCache {
        bool valid = false;
        Eigen::VectorXd key;
        WeightContext wc;
        Eigen::MatrixXd scores;
    };
    struct OutCache {
        bool valid = false;
        Eigen::VectorXd key;
        Eigen::MatrixXd scores;
    };
    struct WlsCache {
        bool valid = false;
        Eigen::VectorXd key;
        Eigen::MatrixXd scores;
    };
    mutable PropCache prop_cache_;
    mutable OutCache out_cache_;
    mutable std::vector<WlsCache> wls_cache_;  // indexed 2*k + z

    const PropCache& propensity_pieces(const Eigen::VectorXd& theta) const;
    const OutCache& outcome_scores(const Eigen::VectorXd& theta) const;
    const WlsCache& wls_scores(const Eigen::VectorXd& theta, int k, int z,
                               const WeightContext& wc) const;
};

const EstimatorStack::PropCache& EstimatorStack::propensity_pieces(
    const Eigen::VectorXd& theta) const {
    const int pg = prop_model.dim();
    Eigen::VectorXd key(pg + 1);
    key.head(pg) = theta.segment(layout.block("gamma").offset, pg);
    key(pg) = std::max(theta(layout.block("phi_b").offset), 0.0);
    if (prop_cache_.valid && prop_cache_.key == key) return prop_cache_;

    prop_cache_.key = key;
    prop_cache_.wc = WeightContext::build(*g, *data, prop_model, key.head(pg), key(pg), gh,
                                          floor, prop_sets, nullptr);
    prop_cache_.scores =
        propensity_score_equations(*g, *data, prop_model, key.head(pg), key(pg), gh);
    prop_cache_.valid = true;
    return prop_cache_;
}

const EstimatorStack::OutCache& EstimatorStack::outcome_scores(
    const Eigen::VectorXd& theta) const {
    const int pb = out_design.dim();
    const bool ml = multilevel;
    Eigen::VectorXd key(pb + (ml ? 2 : 0));
    key.head(pb) = theta.segment(layout.block("beta").offset, pb);
    if (ml) key.tail(2) = theta.segment(layout.block("sigma2").offset, 2);
    if (out_cache_.valid && out_cache_.key == key) return out_cache_;

    const int m = g->num_components();
    Eigen::MatrixXd scores(m, pb + (ml ? 2 : 0));
    Eigen::VectorXd beta = key.head(pb);
    if (!ml) {
        // OLS normal equations per component
        for (int c = 0; c < m; ++c) {
            Eigen::VectorXd s = Eigen::VectorXd::Zero(pb);
            for (int i : g->component_nodes[c])
                s += d_obs.row(i).transpose() * (data->Y(i) - d_obs.row(i).dot(beta));
            scores.row(c) = s.transpose();
        }
    } else {
        double s2e = std::max(key(pb), 1e-12), s2c = std::max(key(pb + 1), 0.0);
        double he = kFdStep * (1.0 + s2e);
        double hc = kFdStep * (1.0 + s2c);
        bool fwd_c = s2c - hc < 0.0;
        for (int c = 0; c < m; ++c) {
            const RankOneBlock& blk = out_blocks[c];
            scores.row(c).head(pb) = blk.beta_score(beta, s2e, s2c).transpose();
            scores(c, pb) = (blk.loglik(beta, s2e + he, s2c, false) -
                             blk.loglik(beta, s2e - he, s2c, false)) / (2.0 * he);
            if (fwd_c) {
                scores(c, pb + 1) = (-3.0 * blk.loglik(beta, s2e, s2c, false) +
                                     4.0 * blk.loglik(beta, s2e, s2c + hc, false) -
                                     blk.loglik(beta, s2e, s2c + 2 * hc, false)) / (2.0 * hc);
            } else {
                scores(c, pb + 1) = (blk.loglik(beta, s2e, s2c + hc, false) -
                                     blk.loglik(beta, s2e, s2c - hc, false)) / (2.0 * hc);
            }
        }
    }
    out_cache_.key = key;
    out_cache_.scores = scores;
    out_cache_.valid = true;
    return out_cache_;
}

const EstimatorStack::WlsCache& EstimatorStack::wls_scores(const Eigen::VectorXd& theta, int k,
                                                           int z,
                                                           const WeightContext& wc) const {
    const int pa = out_design.arm_dim();
    const std::string beta_name = "beta" + std::to_string(z) + "@" + std::to_string(k);
    const std::string sig_name = "sigma2_" + std::to_string(z) + "@" + std::to_string(k);
    Eigen::VectorXd key(pa + (multilevel ? 2 : 0) + prop_cache_.key.size());
    key.head(pa) = theta.segment(layout.block(beta_name).offset, pa);
    if (multilevel) key.segment(pa, 2) = theta.segment(layout.block(sig_name).offset, 2);
    key.tail(prop_cache_.key.size()) = prop_cache_.key;

    WlsCache& cache = wls_cache_[2 * k + z];
    if (cache.valid && cache.key == key) return cache;

    const int m = g->num_components();
    const double alpha = alphas[k];
    Eigen::VectorXd beta = key.head(pa);
    Eigen::VectorXd omega(data->n());
    for (int i = 0; i < data->n(); ++i) omega(i) = wc.arm_weight(i, z, alpha, data->Z);

    Eigen::MatrixXd scores(m, pa + (multilevel ? 2 : 0));
    if (!multilevel) {
        for (int c = 0; c < m; ++c) {
            Eigen::VectorXd s = Eigen::VectorXd::Zero(pa);
            for (int i : g->component_nodes[c]) {
                if (omega(i) <= 0.0) continue;
                s += omega(i) * d_arm.row(i).transpose() * (data->Y(i) - d_arm.row(i).dot(beta));
            }
            scores.row(c) = s.transpose();
        }
    } else {
        auto blocks = rank_one_blocks(*g, d_arm, data->Y, &omega);
        double s2e = std::max(key(pa), 1e-12), s2c = std::max(key(pa + 1), 0.0);
        double he = kFdStep * (1.0 + s2e);
        double hc = kFdStep * (1.0 + s2c);
        bool fwd_c = s2c - hc < 0.0;
        for (int c = 0; c < m; ++c) {
            const RankOneBlock& blk = blocks[c];
            scores.row(c).head(pa) = blk.beta_score(beta, s2e, s2c).transpose();
            scores(c, pa) = (blk.loglik(beta, s2e + he, s2c, true) -
                             blk.loglik(beta, s2e - he, s2c, true)) / (2.0 * he);
            if (fwd_c) {
                scores(c, pa + 1) = (-3.0 * blk.loglik(beta, s2e, s2c, true) +
                                     4.0 * blk.loglik(beta, s2e, s2c + hc, true) -
                                     blk.loglik(beta, s2e, s2c + 2 * hc, true)) / (2.0 * hc);
            } else {
                scores(c, pa + 1) = (blk.loglik(beta, s2e, s2c + hc, true) -
                                     blk.loglik(beta, s2e, s2c - hc, true)) / (2.0 * hc);
            }
        }
    }
    cache.key = key;
    cache.scores = scores;
    cache.valid = true;
    return cache;
}

Eigen::MatrixXd EstimatorStack::psi_components(const Eigen::VectorXd& theta) const {
    const int m = g->num_components();
    Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(m, layout.dim);

    const WeightContext* wc = nullptr;
    if (has_prop) {
        const PropCache& pc = propensity_pieces(theta);
        wc = &pc.wc;
        const int pg = prop_model.dim();
        psi.middleCols(layout.block("gamma").offset, pg) = pc.scores.leftCols(pg);
        psi.col(layout.block("phi_b").offset) = pc.scores.col(pg);
    }

    OutcomePredictor pred;
    if (has_outcome) {
        pred = OutcomePredictor::from_values(
            out_design, theta.segment(layout.block("beta").offset, out_design.dim()));
        const OutCache& oc = outcome_scores(theta);
        psi.middleCols(layout.block("beta").offset, out_design.dim()) =
            oc.scores.leftCols(out_design.dim());
        if (multilevel)
            psi.middleCols(layout.block("sigma2").offset, 2) =
                oc.scores.rightCols(2);
    }

    for (std::size_t k = 0; k < alphas.size(); ++k) {
        const double alpha = alphas[k];
        const std::string suffix = "@" + std::to_string(k);
        Eigen::VectorXd v0, v1, vm;
        switch (kind) {
            case EstimatorKind::IPW:
                v0 = ipw_component_means(*g, *data, *wc, 0, alpha);
                v1 = ipw_component_means(*g, *data, *wc, 1, alpha);
                if (marginal) vm = ipw_component_means_marginal(*g, *data, *wc, alpha);
                break;
            case EstimatorKind::REG:
                v0 = reg_component_means(*g, *data, pred, 0, alpha);
                v1 = reg_component_means(*g, *data, pred, 1, alpha);
                if (marginal) vm = reg_component_means_marginal(*g, *data, pred, alpha);
                break;
            case EstimatorKind::DRBC:
                v0 = drbc_component_means(*g, *data, pred, *wc, 0, alpha, &obs_counts);
                v1 = drbc_component_means(*g, *data, pred, *wc, 1, alpha, &obs_counts);
                if (marginal)
                    vm = drbc_component_means_marginal(*g, *data, pred, *wc, alpha, &obs_counts);
                break;
            case EstimatorKind::IPWLS: {
                const int pa = out_design.arm_dim();
                Eigen::VectorXd b0 =
                    theta.segment(layout.block("beta0" + suffix).offset, pa);
                Eigen::VectorXd b1 =
                    theta.segment(layout.block("beta1" + suffix).offset, pa);
                OutcomePredictor armp = OutcomePredictor::from_arm_values(out_design, b0, b1);
                v0 = reg_component_means(*g, *data, armp, 0, alpha);
                v1 = reg_component_means(*g, *data, armp, 1, alpha);
                if (marginal) vm = reg_component_means_marginal(*g, *data, armp, alpha);
                // per-(z, alpha) weighted-regression scores
                for (int z = 0; z <= 1; ++z) {
                    const WlsCache& wcch = wls_scores(theta, static_cast<int>(k), z, *wc);
                    const std::string bname = "beta" + std::to_string(z) + suffix;
                    psi.middleCols(layout.block(bname).offset, pa) = wcch.scores.leftCols(pa);
                    if (multilevel) {
                        const std::string sname = "sigma2_" + std::to_string(z) + suffix;
                        psi.middleCols(layout.block(sname).offset, 2) = wcch.scores.rightCols(2);
                    }
                }
                break;
            }
        }
        psi.col(layout.block("mu0" + suffix).offset) =
            v0.array() - theta(layout.block("mu0" + suffix).offset);
        psi.col(layout.block("mu1" + suffix).offset) =
            v1.array() - theta(layout.block("mu1" + suffix).offset);
        if (marginal)
            psi.col(layout.block("mu" + suffix).offset) =
                vm.array() - theta(layout.block("mu" + suffix).offset);
    }
    return psi;
}

}  // namespace

std::unique_ptr<EstimatingSystem> build_system(const ComponentGraph& g, const NodeData& data,
                                               const StackRequest& request,
                                               const FittedModels& fits) {
    if (request.alphas.empty()) throw ConfigError("build_system: no alpha values requested");
    if (request.pooling != Pooling::ComponentAverage)
        throw ConfigError("sandwich variance supports the canonical component-average pooling only");

    auto sys = std::make_unique<EstimatorStack>();
    sys->g = &g;
    sys->data = &data;
    sys->kind = request.kind;
    sys->alphas = request.alphas;
    sys->marginal = request.marginal;

    const bool needs_prop = request.kind != EstimatorKind::REG;
    const bool needs_outcome =
        request.kind == EstimatorKind::REG || request.kind == EstimatorKind::DRBC;
    if (needs_prop) {
        if (!fits.propensity) throw ConfigError("build_system: propensity fit required");
        sys->has_prop = true;
        sys->prop_model = fits.propensity->model;
        sys->gh = fits.propensity->gh;
        sys->floor = fits.propensity->floor;
        sys->prop_sets = fits.prop_sets;
    }
    if (needs_outcome) {
        if (!fits.outcome) throw ConfigError("build_system: outcome fit required");
        if (fits.outcome->is_arm_fit())
            throw ConfigError("build_system: REG/DR-BC stacks need a full outcome fit");
        sys->has_outcome = true;
        sys->out_design = fits.outcome->design;
        sys->multilevel = fits.outcome->is_multilevel();
    }
    if (request.kind == EstimatorKind::IPWLS) {
        if (fits.wls_fits.size() != request.alphas.size())
            throw ConfigError("build_system: one pair of arm fits per alpha required");
        const OutcomeFit* any = fits.wls_fits.front()[0];
        if (!any) throw ConfigError("build_system: missing arm fit");
        sys->out_design = any->design;
        sys->multilevel = any->is_multilevel();
        sys->wls_cache_.resize(2 * request.alphas.size());
    }

    // Precompute observed design state shared by the score evaluations.
    if (needs_outcome || request.kind == EstimatorKind::IPWLS) {
        ExposureState st = ExposureState::build(g, data.Z, sys->out_design.exposure);
        sys->obs_counts = st.count;
        if (needs_outcome) {
            sys->d_obs.resize(data.n(), sys->out_design.dim());
            for (int i = 0; i < data.n(); ++i)
                sys->d_obs.row(i) = sys->out_design
                                        .row_raw(data.X.row(i), data.Z(i), st.count[i],
                                                 st.eff_deg[i])
                                        .transpose();
            if (sys->multilevel)
                sys->out_blocks = rank_one_blocks(g, sys->d_obs, data.Y, nullptr);
        }
        if (request.kind == EstimatorKind::IPWLS) {
            sys->d_arm.resize(data.n(), sys->out_design.arm_dim());
            for (int i = 0; i < data.n(); ++i)
                sys->d_arm.row(i) =
                    sys->out_design.arm_row_raw(data.X.row(i), st.count[i], st.eff_deg[i])
                        .transpose();
        }
    }

    // Layout: target means first, then outcome nuisances, then treatment ones.
    for (std::size_t k = 0; k < request.alphas.size(); ++k) {
        const std::string suffix = "@" + std::to_string(k);
        sys->layout.add("mu0" + suffix, 1);
        sys->layout.add("mu1" + suffix, 1);
        if (request.marginal) sys->layout.add("mu" + suffix, 1);
    }
    if (needs_outcome) {
        sys->layout.add("beta", sys->out_design.dim());
        if (sys->multilevel) sys->layout.add("sigma2", 2, /*nonneg=*/true);
    }
    if (request.kind == EstimatorKind::IPWLS) {
        for (std::size_t k = 0; k < request.alphas.size(); ++k) {
            const std::string suffix = "@" + std::to_string(k);
            for (int z = 0; z <= 1; ++z) {
                sys->layout.add("beta" + std::to_string(z) + suffix, sys->out_design.arm_dim());
                if (sys->multilevel)
                    sys->layout.add("sigma2_" + std::to_string(z) + suffix, 2, /*nonneg=*/true);
            }
        }
    }
    if (needs_prop) {
        sys->layout.add("gamma", sys->prop_model.dim());
        sys->layout.add("phi_b", 1, /*nonneg=*/true);
    }

    // Assemble theta_hat from the fitted models and the implied pooled means.
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(sys->layout.dim);
    if (needs_outcome)
        theta.segment(sys->layout.block("beta").offset, sys->out_design.dim()) =
            fits.outcome->beta;
    if (needs_outcome && sys->multilevel) {
        theta(sys->layout.index("sigma2", 0)) = fits.outcome->sigma2_eps;
        theta(sys->layout.index("sigma2", 1)) = fits.outcome->sigma2_c;
    }
    if (request.kind == EstimatorKind::IPWLS) {
        for (std::size_t k = 0; k < request.alphas.size(); ++k) {
            const std::string suffix = "@" + std::to_string(k);
            for (int z = 0; z <= 1; ++z) {
                const OutcomeFit* f = fits.wls_fits[k][z];
                if (!f || f->arm != z || f->alpha != request.alphas[k])
                    throw ConfigError("build_system: arm fit mismatch at alpha index " +
                                      std::to_string(k));
                theta.segment(sys->layout.block("beta" + std::to_string(z) + suffix).offset,
                              sys->out_design.arm_dim()) = f->beta;
                if (sys->multilevel) {
                    theta(sys->layout.index("sigma2_" + std::to_string(z) + suffix, 0)) =
                        f->sigma2_eps;
                    theta(sys->layout.index("sigma2_" + std::to_string(z) + suffix, 1)) =
                        f->sigma2_c;
                }
            }
        }
    }
    if (needs_prop) {
        theta.segment(sys->layout.block("gamma").offset, sys->prop_model.dim()) =
            fits.propensity->gamma;
        theta(sys->layout.block("phi_b").offset) = fits.propensity->phi_b;
    }

    // Pooled means at the fitted nuisances: evaluate the component means once
    // and average; these are the first slots of theta.
    sys->theta_hat = theta;
    Eigen::MatrixXd psi0 = sys->psi_components(theta);
    for (std::size_t k = 0; k < request.alphas.size(); ++k) {
        const std::string suffix = "@" + std::to_string(k);
        int i0 = sys->layout.block("mu0" + suffix).offset;
        int i1 = sys->layout.block("mu1" + suffix).offset;
        theta(i0) = psi0.col(i0).mean();
        theta(i1) = psi0.col(i1).mean();
        if (request.marginal) {
            int im = sys->layout.block("mu" + suffix).offset;
            theta(im) = psi0.col(im).mean();
        }
    }
    sys->theta_hat = theta;
    return sys;
}

namespace {
Eigen::VectorXd zero_tau(const EstimatingSystem& sys) {
    return Eigen::VectorXd::Zero(sys.layout.dim);
}
}  // namespace

Eigen::VectorXd de_contrast(const EstimatingSystem& sys, int alpha_index) {
    Eigen::VectorXd tau = zero_tau(sys);
    const std::string suffix = "@" + std::to_string(alpha_index);
    tau(sys.layout.block("mu1" + suffix).offset) = 1.0;
    tau(sys.layout.block("mu0" + suffix).offset) = -1.0;
    return tau;
}

Eigen::VectorXd ie_contrast(const EstimatingSystem& sys, int alpha_index, int alpha_prime_index) {
    Eigen::VectorXd tau = zero_tau(sys);
    tau(sys.layout.block("mu0@" + std::to_string(alpha_index)).offset) += 1.0;
    tau(sys.layout.block("mu0@" + std::to_string(alpha_prime_index)).offset) -= 1.0;
    return tau;
}

Eigen::VectorXd te_contrast(const EstimatingSystem& sys, int alpha_index, int alpha_prime_index) {
    Eigen::VectorXd tau = zero_tau(sys);
    tau(sys.layout.block("mu1@" + std::to_string(alpha_index)).offset) += 1.0;
    tau(sys.layout.block("mu0@" + std::to_string(alpha_prime_index)).offset) -= 1.0;
    return tau;
}

Eigen::VectorXd oe_contrast(const EstimatingSystem& sys, int alpha_index, int alpha_prime_index) {
    Eigen::VectorXd tau = zero_tau(sys);
    tau(sys.layout.block("mu@" + std::to_string(alpha_index)).offset) += 1.0;
    tau(sys.layout.block("mu@" + std::to_string(alpha_prime_index)).offset) -= 1.0;
    return tau;
}

}  // namespace netcause
