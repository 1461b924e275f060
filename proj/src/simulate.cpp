#include "netcause/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "netcause/allocation.hpp"
#include "netcause/errors.hpp"
#include "netcause/mestimation.hpp"
#include "netcause/outcome.hpp"
#include "netcause/propensity.hpp"

namespace netcause {

namespace {
inline double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }
}

SimNetwork gen_network(const DgpConfig& cfg, std::mt19937_64& rng) {
    if (cfg.m < 2) throw ConfigError("gen_network: need m >= 2 components");
    std::vector<int> sizes(cfg.m);
    if (cfg.scheme == DgpConfig::Scheme::Balanced) {
        std::fill(sizes.begin(), sizes.end(), cfg.fixed_component_size);
    } else {
        int n_large = static_cast<int>(std::lround(cfg.large_fraction * cfg.m));
        for (int v = 0; v < cfg.m; ++v) {
            double mean = v < n_large ? cfg.poisson_large_mean : cfg.poisson_small_mean;
            std::poisson_distribution<int> pois(mean);
            int draw = 0;
            do { draw = pois(rng); } while (draw < 1);  // empty components are meaningless
            sizes[v] = draw;
        }
    }

    int n = 0;
    for (int s : sizes) n += s;
    SimNetwork net;
    net.H.resize(n);
    std::bernoulli_distribution coin(0.5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // The edges + attribute-match model is dyad-independent, so each
    // within-component pair is an independent Bernoulli draw.
    std::vector<std::pair<int, int>> edges;
    std::vector<int> block_of(n);
    int offset = 0;
    const double p_match = logistic(cfg.edge_intercept + cfg.edge_match);
    const double p_mismatch = logistic(cfg.edge_intercept);
    for (int v = 0; v < cfg.m; ++v) {
        for (int i = 0; i < sizes[v]; ++i) {
            net.H(offset + i) = coin(rng) ? 1.0 : 0.0;
            block_of[offset + i] = v;
        }
        for (int i = 0; i < sizes[v]; ++i) {
            for (int j = i + 1; j < sizes[v]; ++j) {
                double p = net.H(offset + i) == net.H(offset + j) ? p_match : p_mismatch;
                if (unif(rng) < p) edges.emplace_back(offset + i, offset + j);
            }
        }
        offset += sizes[v];
    }
    // The generated blocks are the independent units (a block with an isolated
    // node is still one unit), so the component structure is the block
    // partition rather than the realized maximal connected subgraphs.
    net.graph = graph_from_partition(edges, n, block_of);
    net.second_order.resize(n);
    for (int i = 0; i < n; ++i) net.second_order[i] = second_order_neighbors(net.graph, i);
    return net;
}

ExposureSpec make_exposure(InterferenceKind kind, const SimNetwork& net,
                           const Eigen::MatrixXd& X) {
    ExposureSpec spec;
    spec.scale = ExposureScale::Proportion;
    const int n = net.graph.n_nodes;
    switch (kind) {
        case InterferenceKind::FirstOrder:
            break;  // graph neighbourhoods
        case InterferenceKind::MatchedX2: {
            std::vector<std::vector<int>> sets(n);
            for (int i = 0; i < n; ++i)
                for (int j : net.graph.neighbors[i])
                    if (X(i, 1) == X(j, 1)) sets[i].push_back(j);
            spec.sets = std::move(sets);
            break;
        }
        case InterferenceKind::SecondOrder: {
            std::vector<std::vector<int>> sets(n);
            for (int i = 0; i < n; ++i) {
                sets[i] = net.graph.neighbors[i];
                sets[i].insert(sets[i].end(), net.second_order[i].begin(),
                               net.second_order[i].end());
                std::sort(sets[i].begin(), sets[i].end());
            }
            spec.sets = std::move(sets);
            break;
        }
    }
    return spec;
}

PotentialOutcomeOracle gen_potential_outcomes(const DgpConfig& cfg, const SimNetwork& net,
                                              const Eigen::MatrixXd& X, std::mt19937_64& rng) {
    const int n = net.graph.n_nodes;
    PotentialOutcomeOracle oracle;
    oracle.exposure = make_exposure(cfg.interference, net, X);
    oracle.eff_degree.resize(n);
    for (int i = 0; i < n; ++i) oracle.eff_degree[i] = oracle.exposure.eff_degree(net.graph, i);

    std::normal_distribution<double> noise(0.0, std::sqrt(cfg.sigma_eps));
    Eigen::VectorXd c = Eigen::VectorXd::Zero(net.graph.num_components());
    if (cfg.multilevel_outcome()) {
        std::normal_distribution<double> comp_noise(0.0, 1.0);
        for (int v = 0; v < net.graph.num_components(); ++v) c(v) = comp_noise(rng);
    }
    oracle.base.resize(n);
    for (int i = 0; i < n; ++i) {
        double x1 = X(i, 0), x2 = X(i, 1);
        oracle.base(i) = 2.0 - 1.5 * std::abs(x1) + 2.0 * x2 - 3.0 * std::abs(x1) * x2 +
                         c(net.graph.component_of[i]) + noise(rng);
    }
    return oracle;
}

Eigen::VectorXi gen_treatment(const DgpConfig& cfg, const SimNetwork& net,
                              const Eigen::MatrixXd& X, std::mt19937_64& rng) {
    const int n = net.graph.n_nodes;
    std::normal_distribution<double> bdist(0.0, std::sqrt(cfg.treat_phi_b));
    Eigen::VectorXd b(net.graph.num_components());
    for (int v = 0; v < net.graph.num_components(); ++v) b(v) = bdist(rng);

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXi Z(n);
    for (int i = 0; i < n; ++i) {
        double x1 = X(i, 0), x2 = X(i, 1);
        double eta = 0.1 + 0.2 * std::abs(x1) + 0.2 * x2 * std::abs(x1) - net.H(i) +
                     b(net.graph.component_of[i]);
        Z(i) = unif(rng) < logistic(eta) ? 1 : 0;
    }
    return Z;
}

Replicate gen_replicate(const DgpConfig& cfg, const SimNetwork& net, std::mt19937_64& rng) {
    const int n = net.graph.n_nodes;
    Eigen::MatrixXd X(n, 3);
    std::normal_distribution<double> stdnorm(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = stdnorm(rng);
        X(i, 1) = coin(rng) ? 1.0 : 0.0;
        X(i, 2) = net.H(i);
    }

    Replicate rep;
    rep.oracle = gen_potential_outcomes(cfg, net, X, rng);
    Eigen::VectorXi Z = gen_treatment(cfg, net, X, rng);

    ExposureState st = ExposureState::build(net.graph, Z, rep.oracle.exposure);
    Eigen::VectorXd Y(n);
    for (int i = 0; i < n; ++i) Y(i) = rep.oracle.value(i, Z(i), st.count[i]);

    rep.data.X = std::move(X);
    rep.data.Z = std::move(Z);
    rep.data.Y = std::move(Y);
    rep.data.column_names = {"X1", "X2", "H"};
    return rep;
}

std::string EstimandSpec::label() const {
    char buf[64];
    if (kind == EffectKind::DE)
        std::snprintf(buf, sizeof buf, "DE(%g)", alpha);
    else
        std::snprintf(buf, sizeof buf, "%s(%g,%g)", effect_name(kind), alpha, alpha_prime);
    return buf;
}

double TruthTable::effect(EffectKind kind, double alpha, double alpha_prime) const {
    auto get = [&](int arm, double a) {
        auto it = mu.find({arm, a});
        if (it == mu.end()) throw ConfigError("TruthTable: missing mean for requested contrast");
        return it->second;
    };
    switch (kind) {
        case EffectKind::DE: return get(1, alpha) - get(0, alpha);
        case EffectKind::IE: return get(0, alpha) - get(0, alpha_prime);
        case EffectKind::TE: return get(1, alpha) - get(0, alpha_prime);
        case EffectKind::OE: return get(2, alpha) - get(2, alpha_prime);
    }
    return 0.0;
}

TruthTable compute_truth(const PotentialOutcomeOracle& oracle, const ComponentGraph& g,
                         const std::vector<double>& alphas, bool with_marginal) {
    TruthTable table;
    for (double alpha : alphas) {
        Eigen::Vector3d pooled = Eigen::Vector3d::Zero();  // mu0, mu1, marginal
        for (int c = 0; c < g.num_components(); ++c) {
            Eigen::Vector3d comp = Eigen::Vector3d::Zero();
            for (int i : g.component_nodes[c]) {
                int d = oracle.eff_degree[i];
                double y0 = 0.0, y1 = 0.0;
                for (int s = 0; s <= d; ++s) {
                    double pw = pi_neighborhood(s, d, alpha);
                    y0 += oracle.value(i, 0, s) * pw;
                    y1 += oracle.value(i, 1, s) * pw;
                }
                comp(0) += y0;
                comp(1) += y1;
                comp(2) += (1.0 - alpha) * y0 + alpha * y1;
            }
            pooled += comp / g.component_sizes[c];
        }
        pooled /= g.num_components();
        table.mu[{0, alpha}] = pooled(0);
        table.mu[{1, alpha}] = pooled(1);
        if (with_marginal) table.mu[{2, alpha}] = pooled(2);
    }
    return table;
}

const std::vector<ScenarioSpec>& scenario_menu() {
    static const std::vector<std::string> treat_ok = {"abs(X1)", "abs(X1)*X2", "H"};
    static const std::vector<std::string> treat_bad = {"X1", "H"};
    static const std::vector<std::string> treat_noh = {"abs(X1)", "abs(X1)*X2"};
    static const std::vector<std::string> out_ok = {"abs(X1)", "X2", "abs(X1)*X2"};
    static const std::vector<std::string> out_bad = {"X1", "X2"};
    static const std::vector<ScenarioSpec> menu = {
        {"a", treat_ok, out_ok, true, InterferenceKind::FirstOrder, InterferenceKind::FirstOrder, false},
        {"b", treat_ok, out_bad, true, InterferenceKind::FirstOrder, InterferenceKind::FirstOrder, false},
        {"c", treat_bad, out_ok, true, InterferenceKind::FirstOrder, InterferenceKind::FirstOrder, false},
        {"d", treat_bad, out_bad, true, InterferenceKind::FirstOrder, InterferenceKind::FirstOrder, false},
        {"latent-homophily", treat_noh, out_ok, true, InterferenceKind::FirstOrder,
         InterferenceKind::FirstOrder, false},
        {"em-correct", treat_ok, out_ok, true, InterferenceKind::MatchedX2,
         InterferenceKind::MatchedX2, false},
        {"em-incorrect", treat_ok, out_ok, true, InterferenceKind::MatchedX2,
         InterferenceKind::FirstOrder, false},
        {"so-a", treat_ok, out_ok, true, InterferenceKind::SecondOrder,
         InterferenceKind::SecondOrder, true},
        {"so-b", treat_ok, out_ok, true, InterferenceKind::SecondOrder,
         InterferenceKind::FirstOrder, true},
        {"so-c", treat_ok, out_ok, true, InterferenceKind::SecondOrder,
         InterferenceKind::SecondOrder, false},
        {"so-d", treat_ok, out_ok, true, InterferenceKind::SecondOrder,
         InterferenceKind::FirstOrder, false},
    };
    return menu;
}

const ScenarioSpec& find_scenario(const std::string& name) {
    for (const auto& s : scenario_menu())
        if (s.name == name) return s;
    throw ConfigError("unknown scenario '" + name + "'");
}

namespace {

struct ReplicateOutcome {
    bool have_truth = false;
    std::map<std::pair<int, double>, double> truth_mu;
    // per estimator per estimand label: point, se (NaN if none)
    struct Cell {
        bool ok = false;
        double point = 0.0;
        double se = std::numeric_limits<double>::quiet_NaN();
        double lo = 0.0, hi = 0.0;
    };
    std::map<EstimatorKind, std::map<std::string, Cell>> cells;
    std::map<EstimatorKind, std::string> failures;  // cause per excluded estimator
};

struct ScenarioPlan {
    ScenarioSpec spec;
    DgpConfig dgp;
    std::vector<double> alphas;   // distinct, order fixed
    bool need_marginal = false;
    std::vector<EstimandSpec> estimands;
    std::vector<EstimatorKind> estimators;
    bool with_se = true;
    int gh_points = 10;

    int alpha_index(double a) const {
        for (std::size_t k = 0; k < alphas.size(); ++k)
            if (alphas[k] == a) return static_cast<int>(k);
        throw ConfigError("internal: alpha not in plan");
    }
};

ScenarioPlan make_plan(const SimConfig& config, const ScenarioSpec& spec) {
    ScenarioPlan plan;
    plan.spec = spec;
    plan.dgp = config.dgp;
    plan.dgp.interference = spec.dgp_interference;
    plan.estimands = config.estimands;
    plan.estimators = config.estimators;
    plan.with_se = config.with_se;
    plan.gh_points = config.gh_points;
    for (const auto& e : config.estimands) {
        auto push = [&](double a) {
            if (std::find(plan.alphas.begin(), plan.alphas.end(), a) == plan.alphas.end())
                plan.alphas.push_back(a);
        };
        push(e.alpha);
        if (e.kind != EffectKind::DE) push(e.alpha_prime);
        if (e.kind == EffectKind::OE) plan.need_marginal = true;
    }
    return plan;
}

ReplicateOutcome run_replicate(const ScenarioPlan& plan, const SimNetwork& net,
                               std::mt19937_64& rng) {
    ReplicateOutcome out;
    Replicate rep = gen_replicate(plan.dgp, net, rng);
    const ComponentGraph& g = net.graph;

    TruthTable truth = compute_truth(rep.oracle, g, plan.alphas, plan.need_marginal);
    out.truth_mu = truth.mu;
    out.have_truth = true;

    // Designs for this scenario.
    PropensityModel prop_model;
    prop_model.covariates = CovariateSpec::parse(plan.spec.treat_terms, rep.data.column_names);
    OutcomeDesign out_design;
    out_design.treatment_term = true;
    out_design.exposure_term = true;
    out_design.interaction = plan.spec.outcome_interaction;
    out_design.covariates = CovariateSpec::parse(plan.spec.outcome_terms, rep.data.column_names);
    out_design.exposure = make_exposure(plan.spec.outcome_exposure, net, rep.data.X);

    const bool multilevel = plan.dgp.multilevel_outcome();

    bool need_prop = false, need_outcome = false, need_wls = false;
    for (EstimatorKind est : plan.estimators) {
        need_prop |= est != EstimatorKind::REG;
        need_outcome |= est == EstimatorKind::REG || est == EstimatorKind::DRBC;
        need_wls |= est == EstimatorKind::IPWLS;
    }

    // Propensity fit (shared by IPW / DR-BC / IP-WLS).
    std::optional<PropensityFit> prop;
    std::string prop_failure;
    if (need_prop) {
        try {
            PropensityOptions popts;
            popts.gh_points = plan.gh_points;
            PropensityFit f = fit_propensity(g, rep.data, prop_model, popts);
            if (!f.converged) throw FitError("propensity likelihood did not converge");
            prop = std::move(f);
        } catch (const std::exception& e) {
            prop_failure = std::string("propensity: ") + e.what();
        }
    }
    std::optional<std::vector<std::vector<int>>> prop_sets;
    if (plan.spec.second_order_propensity) {
        std::vector<std::vector<int>> sets(g.n_nodes);
        for (int i = 0; i < g.n_nodes; ++i) {
            sets[i] = g.neighbors[i];
            sets[i].insert(sets[i].end(), net.second_order[i].begin(), net.second_order[i].end());
            std::sort(sets[i].begin(), sets[i].end());
        }
        prop_sets = std::move(sets);
    }

    // Outcome fit (shared by REG / DR-BC).
    std::optional<OutcomeFit> outcome;
    std::string outcome_failure;
    if (need_outcome) {
        try {
            outcome = multilevel ? fit_lmm(g, rep.data, out_design)
                                 : fit_ols(g, rep.data, out_design);
        } catch (const std::exception& e) {
            outcome_failure = std::string("outcome: ") + e.what();
        }
    }

    std::optional<WeightContext> wc;
    if (prop) wc = WeightContext::from_fit(g, rep.data, *prop, prop_sets);

    for (EstimatorKind est : plan.estimators) {
        const bool uses_prop = est != EstimatorKind::REG;
        const bool uses_outcome = est == EstimatorKind::REG || est == EstimatorKind::DRBC;
        if (uses_prop && !prop) { out.failures[est] = prop_failure; continue; }
        if (uses_outcome && !outcome) { out.failures[est] = outcome_failure; continue; }

        try {
            // Point estimates for every alpha in the plan.
            MeansTable means;
            std::vector<std::array<OutcomeFit, 2>> arm_fits;  // IP-WLS only
            for (double alpha : plan.alphas) {
                switch (est) {
                    case EstimatorKind::IPW: {
                        means[{0, alpha}] =
                            ipw_component_means(g, rep.data, *wc, 0, alpha).mean();
                        means[{1, alpha}] =
                            ipw_component_means(g, rep.data, *wc, 1, alpha).mean();
                        if (plan.need_marginal)
                            means[{2, alpha}] =
                                ipw_component_means_marginal(g, rep.data, *wc, alpha).mean();
                        break;
                    }
                    case EstimatorKind::REG: {
                        OutcomePredictor pred = OutcomePredictor::from_fit(*outcome);
                        means[{0, alpha}] =
                            reg_component_means(g, rep.data, pred, 0, alpha).mean();
                        means[{1, alpha}] =
                            reg_component_means(g, rep.data, pred, 1, alpha).mean();
                        if (plan.need_marginal)
                            means[{2, alpha}] =
                                reg_component_means_marginal(g, rep.data, pred, alpha).mean();
                        break;
                    }
                    case EstimatorKind::DRBC: {
                        OutcomePredictor pred = OutcomePredictor::from_fit(*outcome);
                        means[{0, alpha}] =
                            drbc_component_means(g, rep.data, pred, *wc, 0, alpha).mean();
                        means[{1, alpha}] =
                            drbc_component_means(g, rep.data, pred, *wc, 1, alpha).mean();
                        if (plan.need_marginal)
                            means[{2, alpha}] = drbc_component_means_marginal(g, rep.data, pred,
                                                                              *wc, alpha)
                                                    .mean();
                        break;
                    }
                    case EstimatorKind::IPWLS: {
                        std::array<OutcomeFit, 2> fits;
                        for (int z = 0; z <= 1; ++z)
                            fits[z] = multilevel
                                          ? fit_wlmm(g, rep.data, out_design, *wc, z, alpha)
                                          : fit_wls(g, rep.data, out_design, *wc, z, alpha);
                        OutcomePredictor pred = OutcomePredictor::from_arm_fits(fits[0], fits[1]);
                        means[{0, alpha}] =
                            reg_component_means(g, rep.data, pred, 0, alpha).mean();
                        means[{1, alpha}] =
                            reg_component_means(g, rep.data, pred, 1, alpha).mean();
                        if (plan.need_marginal)
                            means[{2, alpha}] =
                                reg_component_means_marginal(g, rep.data, pred, alpha).mean();
                        arm_fits.push_back(std::move(fits));
                        break;
                    }
                }
            }

            // Optional sandwich SEs from one stacked system per estimator.
            std::unique_ptr<EstimatingSystem> sys;
            std::optional<SandwichResult> sw;
            if (plan.with_se) {
                StackRequest req;
                req.kind = est;
                req.alphas = plan.alphas;
                req.marginal = plan.need_marginal;
                FittedModels fm;
                if (uses_prop) fm.propensity = &*prop;
                if (uses_outcome) fm.outcome = &*outcome;
                fm.prop_sets = prop_sets;
                if (est == EstimatorKind::IPWLS)
                    for (auto& af : arm_fits) fm.wls_fits.push_back({&af[0], &af[1]});
                sys = build_system(g, rep.data, req, fm);
                sw = sandwich(*sys);
            }

            for (const auto& spec : plan.estimands) {
                ReplicateOutcome::Cell cell;
                auto eff = effects(means, spec.alpha,
                                   spec.kind == EffectKind::DE ? spec.alpha : spec.alpha_prime);
                for (const auto& e : eff)
                    if (e.kind == spec.kind) cell.point = e.point;
                if (sw) {
                    int ka = plan.alpha_index(spec.alpha);
                    int kp = plan.alpha_index(spec.kind == EffectKind::DE ? spec.alpha
                                                                          : spec.alpha_prime);
                    Eigen::VectorXd tau;
                    switch (spec.kind) {
                        case EffectKind::DE: tau = de_contrast(*sys, ka); break;
                        case EffectKind::IE: tau = ie_contrast(*sys, ka, kp); break;
                        case EffectKind::TE: tau = te_contrast(*sys, ka, kp); break;
                        case EffectKind::OE: tau = oe_contrast(*sys, ka, kp); break;
                    }
                    ContrastInterval ci = contrast_se(*sw, tau, cell.point);
                    cell.se = ci.se;
                    cell.lo = ci.lo;
                    cell.hi = ci.hi;
                }
                cell.ok = true;
                out.cells[est][spec.label()] = cell;
            }
        } catch (const std::exception& e) {
            out.cells.erase(est);
            out.failures[est] = e.what();
        }
    }
    return out;
}

}  // namespace

const ScenarioRow& ScenarioReport::find(const std::string& scenario, EstimatorKind est,
                                        const std::string& estimand_label) const {
    for (const auto& r : rows)
        if (r.scenario == scenario && r.estimator == est && r.estimand.label() == estimand_label)
            return r;
    throw ConfigError("ScenarioReport: no row for " + scenario + "/" + estimator_name(est) +
                      "/" + estimand_label);
}

TruthTable aggregate_truth(const SimConfig& config, const ScenarioSpec& spec) {
    std::size_t sc = 0;
    for (std::size_t k = 0; k < config.scenarios.size(); ++k)
        if (config.scenarios[k] == spec.name) sc = k;
    ScenarioPlan plan = make_plan(config, spec);
    std::seed_seq net_seq{config.seed, static_cast<std::uint64_t>(sc), std::uint64_t{0xae5e17}};
    std::mt19937_64 net_rng(net_seq);
    SimNetwork net = gen_network(plan.dgp, net_rng);

    TruthTable agg;
    for (int r = 0; r < config.replicates; ++r) {
        std::seed_seq seq{config.seed, static_cast<std::uint64_t>(sc),
                          static_cast<std::uint64_t>(r + 1)};
        std::mt19937_64 rng(seq);
        Replicate rep = gen_replicate(plan.dgp, net, rng);
        TruthTable t = compute_truth(rep.oracle, net.graph, plan.alphas, true);
        for (const auto& [key, v] : t.mu) agg.mu[key] += v / config.replicates;
    }
    return agg;
}

ScenarioReport run_scenarios(const SimConfig& config) {
    if (config.replicates < 2) throw ConfigError("run_scenarios: need at least 2 replicates");
    if (config.estimators.empty()) throw ConfigError("run_scenarios: no estimators requested");
    for (const auto& name : config.scenarios) find_scenario(name);  // validate up front

    ScenarioReport report;
    report.config = config;

    for (std::size_t sc = 0; sc < config.scenarios.size(); ++sc) {
        const ScenarioSpec& spec = find_scenario(config.scenarios[sc]);
        ScenarioPlan plan = make_plan(config, spec);

        std::seed_seq net_seq{config.seed, static_cast<std::uint64_t>(sc),
                              std::uint64_t{0xae5e17}};
        std::mt19937_64 net_rng(net_seq);
        SimNetwork net = gen_network(plan.dgp, net_rng);

        const int S = config.replicates;
        std::vector<ReplicateOutcome> outcomes(S);
        std::atomic<int> next{0};
        int n_threads = config.threads > 0
                            ? config.threads
                            : static_cast<int>(std::thread::hardware_concurrency());
        n_threads = std::max(1, std::min(n_threads, S));
        auto worker = [&]() {
            for (;;) {
                int r = next.fetch_add(1);
                if (r >= S) break;
                std::seed_seq seq{config.seed, static_cast<std::uint64_t>(sc),
                                  static_cast<std::uint64_t>(r + 1)};
                std::mt19937_64 rng(seq);
                outcomes[r] = run_replicate(plan, net, rng);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();

        // Aggregate truth over all replicates (fits do not affect it).
        std::map<std::pair<int, double>, double> truth_mu;
        for (const auto& o : outcomes)
            for (const auto& [key, v] : o.truth_mu) truth_mu[key] += v / S;
        TruthTable truth;
        truth.mu = truth_mu;

        for (EstimatorKind est : plan.estimators) {
            auto& causes = report.exclusions[spec.name + "/" + estimator_name(est)];
            for (const auto& o : outcomes) {
                auto it = o.failures.find(est);
                if (it != o.failures.end()) ++causes[it->second];
            }
            for (const auto& espec : plan.estimands) {
                ScenarioRow row;
                row.scenario = spec.name;
                row.estimator = est;
                row.estimand = espec;
                row.truth = truth.effect(espec.kind, espec.alpha,
                                         espec.kind == EffectKind::DE ? espec.alpha
                                                                      : espec.alpha_prime);
                std::vector<double> points, ses;
                int covered = 0, with_ci = 0;
                for (const auto& o : outcomes) {
                    auto eit = o.cells.find(est);
                    if (eit == o.cells.end()) continue;
                    auto cit = eit->second.find(espec.label());
                    if (cit == eit->second.end() || !cit->second.ok) continue;
                    points.push_back(cit->second.point);
                    if (std::isfinite(cit->second.se)) {
                        ses.push_back(cit->second.se);
                        ++with_ci;
                        if (row.truth >= cit->second.lo && row.truth <= cit->second.hi)
                            ++covered;
                    }
                }
                row.used = static_cast<int>(points.size());
                row.excluded = S - row.used;
                if (!points.empty()) {
                    double mean = 0.0;
                    for (double p : points) mean += p;
                    mean /= points.size();
                    row.bias = mean - row.truth;
                    double mse = 0.0, var = 0.0;
                    for (double p : points) {
                        mse += (p - row.truth) * (p - row.truth);
                        var += (p - mean) * (p - mean);
                    }
                    row.mse = mse / points.size();
                    row.ese = points.size() > 1 ? std::sqrt(var / (points.size() - 1)) : 0.0;
                }
                if (!ses.empty()) {
                    double s = 0.0;
                    for (double v : ses) s += v;
                    row.ase = s / ses.size();
                    row.coverage = static_cast<double>(covered) / with_ci;
                } else {
                    row.ase = std::numeric_limits<double>::quiet_NaN();
                    row.coverage = std::numeric_limits<double>::quiet_NaN();
                }
                report.rows.push_back(row);
            }
        }
    }
    return report;
}

}  // namespace netcause
