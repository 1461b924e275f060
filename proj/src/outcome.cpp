#include "netcause/outcome.hpp"

#include <cmath>
#include <numeric>

#include "netcause/errors.hpp"
#include "netcause/optimize.hpp"

namespace netcause {

std::vector<std::string> OutcomeDesign::labels() const {
    std::vector<std::string> out{"(intercept)"};
    if (treatment_term) out.push_back("z");
    if (exposure_term) out.push_back("h");
    if (interaction) out.push_back("z*h");
    for (const auto& l : covariates.labels()) out.push_back(l);
    return out;
}

std::vector<std::string> OutcomeDesign::arm_labels() const {
    std::vector<std::string> out{"(intercept)"};
    if (exposure_term || interaction) out.push_back("h");
    for (const auto& l : covariates.labels()) out.push_back(l);
    return out;
}

Eigen::VectorXd OutcomeDesign::row_raw(const Eigen::Ref<const Eigen::RowVectorXd>& xraw,
                                       double z, int s, int d_eff) const {
    Eigen::VectorXd out(dim());
    int k = 0;
    out(k++) = 1.0;
    double hv = exposure.h(s, d_eff);
    if (treatment_term) out(k++) = z;
    if (exposure_term) out(k++) = hv;
    if (interaction) out(k++) = z * hv;
    if (covariates.dim() > 0) out.tail(covariates.dim()) = covariates.row(xraw);
    return out;
}

Eigen::VectorXd OutcomeDesign::row(const NodeData& data, const ComponentGraph& g, int i,
                                   double z, int s) const {
    return row_raw(data.X.row(i), z, s, exposure.eff_degree(g, i));
}

Eigen::VectorXd OutcomeDesign::arm_row_raw(const Eigen::Ref<const Eigen::RowVectorXd>& xraw,
                                           int s, int d_eff) const {
    Eigen::VectorXd out(arm_dim());
    int k = 0;
    out(k++) = 1.0;
    if (exposure_term || interaction) out(k++) = exposure.h(s, d_eff);
    if (covariates.dim() > 0) out.tail(covariates.dim()) = covariates.row(xraw);
    return out;
}

Eigen::VectorXd OutcomeDesign::arm_row(const NodeData& data, const ComponentGraph& g,
                                       int i, int s) const {
    return arm_row_raw(data.X.row(i), s, exposure.eff_degree(g, i));
}

double RankOneBlock::loglik(const Eigen::VectorXd& beta, double s2e, double s2c,
                            bool weighted) const {
    if (n == 0) return 0.0;
    double c = s2c / (s2e + s2c * sw);
    double rtr = yty - 2.0 * beta.dot(dty) + beta.dot(dtd * beta);
    double otr = oty - dt1.dot(beta);
    double quad = (rtr - c * otr * otr) / s2e;
    double logdet = n * std::log(s2e) - sum_log_w + std::log1p(s2c * sw / s2e);
    double ll = -0.5 * (n * std::log(2.0 * M_PI) + logdet + quad);
    if (weighted)
        ll += sum_one_minus_w * (0.5 * std::log(s2e) + 0.5 * std::log(2.0 * M_PI))
              - 0.5 * sum_log_w;
    return ll;
}

Eigen::VectorXd RankOneBlock::beta_score(const Eigen::VectorXd& beta, double s2e,
                                         double s2c) const {
    if (n == 0) return Eigen::VectorXd::Zero(dtd.rows());
    double c = s2c / (s2e + s2c * sw);
    double otr = oty - dt1.dot(beta);
    return (dty - dtd * beta - c * otr * dt1) / s2e;
}

std::vector<RankOneBlock> rank_one_blocks(const ComponentGraph& g, const Eigen::MatrixXd& D,
                                          const Eigen::VectorXd& y, const Eigen::VectorXd* w) {
    std::vector<RankOneBlock> blocks(g.num_components());
    const int p = static_cast<int>(D.cols());
    for (int c = 0; c < g.num_components(); ++c) {
        RankOneBlock& gr = blocks[c];
        gr.dtd = Eigen::MatrixXd::Zero(p, p);
        gr.dt1 = Eigen::VectorXd::Zero(p);
        gr.dty = Eigen::VectorXd::Zero(p);
        for (int i : g.component_nodes[c]) {
            double wi = w ? (*w)(i) : 1.0;
            if (wi <= 0.0) continue;
            Eigen::VectorXd row = D.row(i).transpose();
            gr.dtd.noalias() += wi * row * row.transpose();
            gr.dt1.noalias() += wi * row;
            gr.dty.noalias() += wi * row * y(i);
            gr.yty += wi * y(i) * y(i);
            gr.oty += wi * y(i);
            gr.sw += wi;
            gr.sum_log_w += std::log(wi);
            gr.sum_one_minus_w += 1.0 - wi;
            ++gr.n;
        }
    }
    return blocks;
}

namespace {

// Least squares with a rank check that names the redundant columns.
Eigen::VectorXd solve_ls(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                         const std::vector<std::string>& labels) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
    qr.setThreshold(1e-10);
    if (qr.rank() < D.cols()) {
        std::string cols;
        const auto& perm = qr.colsPermutation().indices();
        for (int k = qr.rank(); k < D.cols(); ++k) {
            if (!cols.empty()) cols += ", ";
            cols += labels[perm(k)];
        }
        throw FitError("outcome design is rank deficient; redundant columns: " + cols);
    }
    return qr.solve(y);
}

// Observed full-design matrix at (Z_i, S_i).
Eigen::MatrixXd observed_design(const ComponentGraph& g, const NodeData& data,
                                const OutcomeDesign& design, const ExposureState& st) {
    Eigen::MatrixXd D(data.n(), design.dim());
    for (int i = 0; i < data.n(); ++i)
        D.row(i) = design.row_raw(data.X.row(i), data.Z(i), st.count[i], st.eff_deg[i]).transpose();
    return D;
}

// Profiled GLS coefficients for V_nu = s2e W^-1 + s2c 11' via Sherman-Morrison.
Eigen::VectorXd profiled_beta(const std::vector<RankOneBlock>& blocks, double s2e, double s2c) {
    const int p = static_cast<int>(blocks.front().dtd.rows());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    for (const auto& gr : blocks) {
        if (gr.n == 0) continue;
        double c = s2c / (s2e + s2c * gr.sw);
        A.noalias() += (gr.dtd - c * gr.dt1 * gr.dt1.transpose()) / s2e;
        b.noalias() += (gr.dty - c * gr.dt1 * gr.oty) / s2e;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (ldlt.info() != Eigen::Success)
        throw FitError("mixed-model coefficient solve failed (singular weighted Gram)");
    return ldlt.solve(b);
}

struct MixedFitResult {
    Eigen::VectorXd beta;
    double s2e, s2c, loglik;
    bool converged, boundary;
};

MixedFitResult fit_rank_one_mixed(const std::vector<RankOneBlock>& blocks, double init_s2e,
                                  double init_s2c, bool weighted, const OutcomeOptions& opts) {
    auto profile_nll = [&](const Eigen::VectorXd& th) {
        double s2e = std::exp(th(0)), s2c = std::exp(th(1));
        Eigen::VectorXd beta = profiled_beta(blocks, s2e, s2c);
        double ll = 0.0;
        for (const auto& gr : blocks) ll += gr.loglik(beta, s2e, s2c, weighted);
        return -ll;
    };
    Eigen::VectorXd th0(2);
    th0 << std::log(std::max(init_s2e, 1e-8)), std::log(std::max(init_s2c, 1e-4));
    OptimOptions oo;
    oo.rel_tol = opts.rel_tol;
    oo.max_iter = opts.max_iter;
    OptimResult res = minimize(profile_nll, th0, oo);

    MixedFitResult out;
    out.s2e = std::exp(res.x(0));
    out.s2c = std::exp(res.x(1));
    out.converged = res.converged;
    out.boundary = false;
    if (out.s2c < opts.boundary_ratio * out.s2e) {
        out.s2c = 0.0;
        out.boundary = true;
    }
    out.beta = profiled_beta(blocks, out.s2e, out.s2c);
    out.loglik = 0.0;
    for (const auto& gr : blocks) out.loglik += gr.loglik(out.beta, out.s2e, out.s2c, weighted);
    return out;
}

Eigen::VectorXd wls_weights(const NodeData& data, const WeightContext& wc, int z, double alpha) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(data.n());
    for (int i = 0; i < data.n(); ++i) w(i) = wc.arm_weight(i, z, alpha, data.Z);
    if (!w.allFinite()) throw FitError("weighted outcome fit: non-finite weight");
    return w;
}

}  // namespace

OutcomeFit fit_ols(const ComponentGraph& g, const NodeData& data, const OutcomeDesign& design) {
    validate_node_data(g, data);
    ExposureState st = ExposureState::build(g, data.Z, design.exposure);
    Eigen::MatrixXd D = observed_design(g, data, design, st);

    OutcomeFit fit;
    fit.variant = OutcomeVariant::OLS;
    fit.design = design;
    fit.beta = solve_ls(D, data.Y, design.labels());
    Eigen::VectorXd r = data.Y - D * fit.beta;
    fit.sigma2_eps = r.squaredNorm() / data.n();
    return fit;
}

OutcomeFit fit_wls(const ComponentGraph& g, const NodeData& data, const OutcomeDesign& design,
                   const WeightContext& wc, int z, double alpha) {
    validate_node_data(g, data);
    ExposureState st = ExposureState::build(g, data.Z, design.exposure);
    Eigen::VectorXd w = wls_weights(data, wc, z, alpha);

    std::vector<int> rows;
    for (int i = 0; i < data.n(); ++i)
        if (w(i) > 0.0) rows.push_back(i);
    const int p = design.arm_dim();
    if (static_cast<int>(rows.size()) < p + 1)
        throw FitError("fit_wls: only " + std::to_string(rows.size()) + " nodes with Z=" +
                       std::to_string(z) + " and positive weight (need " +
                       std::to_string(p + 1) + ")");

    Eigen::MatrixXd D(rows.size(), p);
    Eigen::VectorXd y(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        int i = rows[k];
        double sw = std::sqrt(w(i));
        D.row(k) = sw * design.arm_row_raw(data.X.row(i), st.count[i], st.eff_deg[i]).transpose();
        y(k) = sw * data.Y(i);
    }
    OutcomeFit fit;
    fit.variant = OutcomeVariant::WLS;
    fit.design = design;
    fit.arm = z;
    fit.alpha = alpha;
    fit.beta = solve_ls(D, y, design.arm_labels());
    return fit;
}

OutcomeFit fit_wls(const ComponentGraph& g, const NodeData& data, const OutcomeDesign& design,
                   const PropensityFit& fit_p, int z, double alpha) {
    return fit_wls(g, data, design, WeightContext::from_fit(g, data, fit_p), z, alpha);
}

OutcomeFit fit_lmm(const ComponentGraph& g, const NodeData& data, const OutcomeDesign& design,
                   const OutcomeOptions& opts) {
    validate_node_data(g, data);
    if (g.num_components() < 2)
        throw FitError("fit_lmm: at least 2 components required");
    ExposureState st = ExposureState::build(g, data.Z, design.exposure);
    Eigen::MatrixXd D = observed_design(g, data, design, st);
    auto blocks = rank_one_blocks(g, D, data.Y, nullptr);

    // Moment-style starting values from the OLS residuals (also rank-checks).
    Eigen::VectorXd beta0 = solve_ls(D, data.Y, design.labels());
    Eigen::VectorXd r = data.Y - D * beta0;
    double s2_tot = r.squaredNorm() / data.n();
    double between = 0.0;
    for (int c = 0; c < g.num_components(); ++c) {
        double mean = 0.0;
        for (int i : g.component_nodes[c]) mean += r(i);
        mean /= g.component_sizes[c];
        between += mean * mean;
    }
    between /= g.num_components();
    double s2c0 = std::min(std::max(between, 1e-4), 0.9 * s2_tot);

    MixedFitResult res = fit_rank_one_mixed(blocks, std::max(s2_tot - s2c0, 1e-4), s2c0,
                                            /*weighted=*/false, opts);
    OutcomeFit fit;
    fit.variant = OutcomeVariant::LMM;
    fit.design = design;
    fit.beta = res.beta;
    fit.sigma2_eps = res.s2e;
    fit.sigma2_c = res.s2c;
    fit.loglik = res.loglik;
    fit.converged = res.converged;
    fit.boundary_sigma2c = res.boundary;
    if (!fit.converged) throw FitError("fit_lmm: variance-component search did not converge");
    return fit;
}

OutcomeFit fit_wlmm(const ComponentGraph& g, const NodeData& data, const OutcomeDesign& design,
                    const WeightContext& wc, int z, double alpha, const OutcomeOptions& opts) {
    validate_node_data(g, data);
    if (g.num_components() < 2)
        throw FitError("fit_wlmm: at least 2 components required");
    ExposureState st = ExposureState::build(g, data.Z, design.exposure);
    Eigen::VectorXd w = wls_weights(data, wc, z, alpha);

    int qualifying = 0;
    for (int i = 0; i < data.n(); ++i)
        if (w(i) > 0.0) ++qualifying;
    const int p = design.arm_dim();
    if (qualifying < p + 1)
        throw FitError("fit_wlmm: only " + std::to_string(qualifying) + " nodes with Z=" +
                       std::to_string(z) + " and positive weight (need " +
                       std::to_string(p + 1) + ")");

    Eigen::MatrixXd D(data.n(), p);
    for (int i = 0; i < data.n(); ++i)
        D.row(i) = design.arm_row_raw(data.X.row(i), st.count[i], st.eff_deg[i]).transpose();
    auto blocks = rank_one_blocks(g, D, data.Y, &w);

    // Starting values from the plain weighted LS residuals.
    Eigen::VectorXd beta0 = profiled_beta(blocks, 1.0, 0.0);
    double wss = 0.0, swt = 0.0;
    for (int i = 0; i < data.n(); ++i) {
        if (w(i) <= 0.0) continue;
        double r = data.Y(i) - D.row(i).dot(beta0);
        wss += w(i) * r * r;
        swt += w(i);
    }
    double s2_tot = std::max(wss / std::max(swt, 1e-12), 1e-6);

    MixedFitResult res = fit_rank_one_mixed(blocks, 0.75 * s2_tot, 0.25 * s2_tot,
                                            /*weighted=*/true, opts);
    OutcomeFit fit;
    fit.variant = OutcomeVariant::WLMM;
    fit.design = design;
    fit.arm = z;
    fit.alpha = alpha;
    fit.beta = res.beta;
    fit.sigma2_eps = res.s2e;
    fit.sigma2_c = res.s2c;
    fit.loglik = res.loglik;
    fit.converged = res.converged;
    fit.boundary_sigma2c = res.boundary;
    if (!fit.converged) throw FitError("fit_wlmm: variance-component search did not converge");
    return fit;
}

OutcomeFit fit_wlmm(const ComponentGraph& g, const NodeData& data, const OutcomeDesign& design,
                    const PropensityFit& fit_p, int z, double alpha, const OutcomeOptions& opts) {
    return fit_wlmm(g, data, design, WeightContext::from_fit(g, data, fit_p), z, alpha, opts);
}

double predict_marginal(const OutcomeFit& fit, int z, int s, int d,
                        const Eigen::Ref<const Eigen::RowVectorXd>& xraw) {
    if (fit.is_arm_fit())
        return fit.design.arm_row_raw(xraw, s, d).dot(fit.beta);
    return fit.design.row_raw(xraw, z, s, d).dot(fit.beta);
}

double predict_node(const OutcomeFit& fit, const NodeData& data, const ComponentGraph& g,
                    int i, int z, int s) {
    return predict_marginal(fit, z, s, fit.design.exposure.eff_degree(g, i), data.X.row(i));
}

double lmm_component_loglik(const ComponentGraph& g, const NodeData& data,
                            const OutcomeDesign& design, const Eigen::VectorXd& beta,
                            double sigma2_eps, double sigma2_c, int component) {
    ExposureState st = ExposureState::build(g, data.Z, design.exposure);
    Eigen::MatrixXd D = observed_design(g, data, design, st);
    auto blocks = rank_one_blocks(g, D, data.Y, nullptr);
    return blocks[component].loglik(beta, sigma2_eps, sigma2_c, /*weighted=*/false);
}

double wlmm_component_loglik(const ComponentGraph& g, const NodeData& data,
                             const OutcomeDesign& design, const Eigen::VectorXd& beta_arm,
                             double sigma2_eps, double sigma2_c,
                             const Eigen::VectorXd& omega, int component) {
    ExposureState st = ExposureState::build(g, data.Z, design.exposure);
    Eigen::MatrixXd D(data.n(), design.arm_dim());
    for (int i = 0; i < data.n(); ++i)
        D.row(i) = design.arm_row_raw(data.X.row(i), st.count[i], st.eff_deg[i]).transpose();
    auto blocks = rank_one_blocks(g, D, data.Y, &omega);
    return blocks[component].loglik(beta_arm, sigma2_eps, sigma2_c, /*weighted=*/true);
}

}  // namespace netcause
