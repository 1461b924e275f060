#include "netcause/analysis.hpp"

#include <json.hpp>

#include "netcause/errors.hpp"
#include "netcause/mestimation.hpp"

namespace netcause {

using nlohmann::json;

namespace {

json config_to_json(const AnalysisConfig& c) {
    json j;
    j["edges"] = c.edges_path;
    j["nodes"] = c.nodes_path;
    j["edge_header"] = c.edge_header;
    j["drop_isolates"] = c.drop_isolates;
    j["propensity_terms"] = c.propensity_terms;
    j["outcome_terms"] = c.outcome_terms;
    j["outcome_interaction"] = c.outcome_interaction;
    j["outcome_exposure"] = c.outcome_exposure;
    j["outcome_variant"] = c.outcome_variant;
    j["estimators"] = c.estimators;
    j["alpha_grid"] = c.alpha_grid;
    j["alpha_ref"] = c.alpha_ref;
    j["level"] = c.level;
    j["gh_points"] = c.gh_points;
    j["threads"] = c.threads;
    j["seed"] = c.seed;
    j["pooling"] = c.pooling;
    j["out_dir"] = c.out_dir;
    return j;
}

template <typename T>
void maybe(const json& j, const char* key, T& into) {
    if (j.contains(key)) into = j.at(key).get<T>();
}

}  // namespace

std::string AnalysisConfig::to_json_string() const { return config_to_json(*this).dump(); }

AnalysisConfig AnalysisConfig::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad analysis config JSON: ") + e.what());
    }
    AnalysisConfig c;
    maybe(j, "edges", c.edges_path);
    maybe(j, "nodes", c.nodes_path);
    maybe(j, "edge_header", c.edge_header);
    maybe(j, "drop_isolates", c.drop_isolates);
    maybe(j, "propensity_terms", c.propensity_terms);
    maybe(j, "outcome_terms", c.outcome_terms);
    maybe(j, "outcome_interaction", c.outcome_interaction);
    maybe(j, "outcome_exposure", c.outcome_exposure);
    maybe(j, "outcome_variant", c.outcome_variant);
    maybe(j, "estimators", c.estimators);
    maybe(j, "alpha_grid", c.alpha_grid);
    maybe(j, "alpha_ref", c.alpha_ref);
    maybe(j, "level", c.level);
    maybe(j, "gh_points", c.gh_points);
    maybe(j, "threads", c.threads);
    maybe(j, "seed", c.seed);
    maybe(j, "pooling", c.pooling);
    maybe(j, "out_dir", c.out_dir);
    return c;
}

AnalysisResult run_analysis(const AnalysisConfig& config) {
    if (config.estimators.empty()) throw ConfigError("analysis: at least one estimator required");
    for (double a : config.alpha_grid)
        if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("analysis: alpha grid outside [0,1]");
    if (!(config.alpha_ref >= 0.0 && config.alpha_ref <= 1.0))
        throw ConfigError("analysis: alpha_ref outside [0,1]");
    if (!(config.level > 0.0 && config.level < 1.0))
        throw ConfigError("analysis: confidence level outside (0,1)");
    const bool canonical = config.pooling == "component-average";
    if (!canonical && config.pooling != "global-average")
        throw ConfigError("analysis: unknown pooling '" + config.pooling + "'");
    const Pooling pooling = canonical ? Pooling::ComponentAverage : Pooling::GlobalAverage;

    AnalysisResult result;
    result.config_echo = config.to_json_string();

    LoadedDataset ds = load_dataset(config.edges_path, config.nodes_path, config.edge_header);
    if (config.drop_isolates) {
        std::vector<int> keep;
        for (int i = 0; i < ds.graph.n_nodes; ++i)
            if (ds.graph.degree[i] > 0) keep.push_back(i);
        if (keep.empty()) throw DataError("analysis: --drop-isolates removed every node");
        SubsetResult sub = subset_nodes(ds.graph, ds.data, keep);
        std::vector<std::string> labels;
        for (int orig : sub.kept) labels.push_back(ds.id_map[orig]);
        ds.graph = std::move(sub.graph);
        ds.data = std::move(sub.data);
        ds.id_map = std::move(labels);
    }
    result.id_map = ds.id_map;

    std::vector<EstimatorKind> kinds;
    for (const auto& name : config.estimators) kinds.push_back(parse_estimator(name));
    bool need_prop = false, need_outcome = false;
    for (EstimatorKind k : kinds) {
        need_prop |= k != EstimatorKind::REG;
        need_outcome |= k == EstimatorKind::REG || k == EstimatorKind::DRBC;
    }
    const bool multilevel = config.outcome_variant == "multilevel";
    if (config.outcome_variant != "fixed" && config.outcome_variant != "multilevel")
        throw ConfigError("analysis: outcome_variant must be 'fixed' or 'multilevel'");

    PropensityModel prop_model;
    prop_model.covariates =
        CovariateSpec::parse(config.propensity_terms, ds.data.column_names);
    OutcomeDesign out_design;
    out_design.treatment_term = true;
    out_design.exposure_term = true;
    out_design.interaction = config.outcome_interaction;
    out_design.covariates = CovariateSpec::parse(config.outcome_terms, ds.data.column_names);
    if (config.outcome_exposure == "count")
        out_design.exposure.scale = ExposureScale::Count;
    else if (config.outcome_exposure != "proportion")
        throw ConfigError("analysis: outcome_exposure must be 'proportion' or 'count'");

    PropensityEvalStats stats;
    std::optional<PropensityFit> prop;
    if (need_prop) {
        PropensityOptions popts;
        popts.gh_points = config.gh_points;
        PropensityFit f = fit_propensity(ds.graph, ds.data, prop_model, popts);
        if (!f.converged)
            throw NumericalError("analysis: treatment model likelihood did not converge");
        prop = std::move(f);
    }
    std::optional<OutcomeFit> outcome;
    if (need_outcome)
        outcome = multilevel ? fit_lmm(ds.graph, ds.data, out_design)
                             : fit_ols(ds.graph, ds.data, out_design);

    std::optional<WeightContext> wc;
    if (prop) wc = WeightContext::from_fit(ds.graph, ds.data, *prop, {}, &stats);

    const double critical =
        config.level == 0.95 ? 1.96 : normal_quantile(0.5 + config.level / 2.0);
    if (!canonical)
        result.warnings.push_back("global-average pooling is non-canonical; no SEs attached");

    const bool ipwls_requested =
        std::find(kinds.begin(), kinds.end(), EstimatorKind::IPWLS) != kinds.end();
    if (ipwls_requested && multilevel)
        result.warnings.push_back(
            "IP-WLS with a multilevel outcome carries no double-robustness guarantee");

    for (double alpha : config.alpha_grid) {
        std::vector<double> alphas{alpha};
        const bool two = alpha != config.alpha_ref;
        if (two) alphas.push_back(config.alpha_ref);
        const int ka = 0, kp = two ? 1 : 0;

        for (EstimatorKind est : kinds) {
            MeansTable means;
            std::vector<std::array<OutcomeFit, 2>> arm_fits;
            for (double a : alphas) {
                switch (est) {
                    case EstimatorKind::IPW:
                        means[{0, a}] = pool_components(
                            ipw_component_means(ds.graph, ds.data, *wc, 0, a), ds.graph, pooling);
                        means[{1, a}] = pool_components(
                            ipw_component_means(ds.graph, ds.data, *wc, 1, a), ds.graph, pooling);
                        means[{2, a}] = pool_components(
                            ipw_component_means_marginal(ds.graph, ds.data, *wc, a), ds.graph,
                            pooling);
                        break;
                    case EstimatorKind::REG: {
                        OutcomePredictor pred = OutcomePredictor::from_fit(*outcome);
                        means[{0, a}] = pool_components(
                            reg_component_means(ds.graph, ds.data, pred, 0, a), ds.graph, pooling);
                        means[{1, a}] = pool_components(
                            reg_component_means(ds.graph, ds.data, pred, 1, a), ds.graph, pooling);
                        means[{2, a}] = pool_components(
                            reg_component_means_marginal(ds.graph, ds.data, pred, a), ds.graph,
                            pooling);
                        break;
                    }
                    case EstimatorKind::DRBC: {
                        OutcomePredictor pred = OutcomePredictor::from_fit(*outcome);
                        means[{0, a}] = pool_components(
                            drbc_component_means(ds.graph, ds.data, pred, *wc, 0, a), ds.graph,
                            pooling);
                        means[{1, a}] = pool_components(
                            drbc_component_means(ds.graph, ds.data, pred, *wc, 1, a), ds.graph,
                            pooling);
                        means[{2, a}] = pool_components(
                            drbc_component_means_marginal(ds.graph, ds.data, pred, *wc, a),
                            ds.graph, pooling);
                        break;
                    }
                    case EstimatorKind::IPWLS: {
                        std::array<OutcomeFit, 2> fits;
                        for (int z = 0; z <= 1; ++z)
                            fits[z] = multilevel
                                          ? fit_wlmm(ds.graph, ds.data, out_design, *wc, z, a)
                                          : fit_wls(ds.graph, ds.data, out_design, *wc, z, a);
                        OutcomePredictor pred = OutcomePredictor::from_arm_fits(fits[0], fits[1]);
                        means[{0, a}] = pool_components(
                            reg_component_means(ds.graph, ds.data, pred, 0, a), ds.graph, pooling);
                        means[{1, a}] = pool_components(
                            reg_component_means(ds.graph, ds.data, pred, 1, a), ds.graph, pooling);
                        means[{2, a}] = pool_components(
                            reg_component_means_marginal(ds.graph, ds.data, pred, a), ds.graph,
                            pooling);
                        arm_fits.push_back(std::move(fits));
                        break;
                    }
                }
            }

            std::unique_ptr<EstimatingSystem> sys;
            std::optional<SandwichResult> sw;
            if (canonical) {
                StackRequest req;
                req.kind = est;
                req.alphas = alphas;
                req.marginal = true;
                FittedModels fm;
                if (est != EstimatorKind::REG) fm.propensity = &*prop;
                if (est == EstimatorKind::REG || est == EstimatorKind::DRBC)
                    fm.outcome = &*outcome;
                if (est == EstimatorKind::IPWLS)
                    for (auto& af : arm_fits) fm.wls_fits.push_back({&af[0], &af[1]});
                sys = build_system(ds.graph, ds.data, req, fm);
                sw = sandwich(*sys);
            }

            std::string diag;
            if (sw) diag = "bread_cond=" + format_double(sw->condition);
            if (est == EstimatorKind::IPWLS && multilevel)
                diag += std::string(diag.empty() ? "" : ";") + "no-DR-guarantee-multilevel";

            auto add_row = [&](EffectKind kind, double point, const Eigen::VectorXd* tau) {
                EstimateRow row;
                row.estimator = estimator_name(est);
                row.estimand = effect_name(kind);
                row.alpha = alpha;
                row.alpha_prime = config.alpha_ref;
                row.point = point;
                if (sw && tau) {
                    ContrastInterval ci = contrast_se(*sw, *tau, point, critical);
                    row.se = ci.se;
                    row.ci_lo = ci.lo;
                    row.ci_hi = ci.hi;
                }
                row.diagnostics = diag;
                result.rows.push_back(std::move(row));
            };

            auto effs = effects(means, alpha, config.alpha_ref);
            for (const auto& e : effs) {
                Eigen::VectorXd tau;
                if (sys) {
                    switch (e.kind) {
                        case EffectKind::DE: tau = de_contrast(*sys, ka); break;
                        case EffectKind::IE: tau = ie_contrast(*sys, ka, kp); break;
                        case EffectKind::TE: tau = te_contrast(*sys, ka, kp); break;
                        case EffectKind::OE: tau = oe_contrast(*sys, ka, kp); break;
                    }
                }
                add_row(e.kind, e.point, sys ? &tau : nullptr);
            }
        }
    }
    result.floored_weights = stats.floored.load();
    if (result.floored_weights > 0)
        result.warnings.push_back("joint propensity floored " +
                                  std::to_string(result.floored_weights) +
                                  " times at fit-time weight evaluation");
    return result;
}

}  // namespace netcause
