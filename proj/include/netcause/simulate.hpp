// Simulation engine: homophilous network generation, covariate / potential
// outcome / treatment draws, replicated scenario matrices, and the bias /
// MSE / ESE / ASE / coverage summaries.
#ifndef NETCAUSE_SIMULATE_HPP
#define NETCAUSE_SIMULATE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "netcause/estimators.hpp"
#include "netcause/graph.hpp"

namespace netcause {

// Which neighbourhood summary drives the potential outcomes.
enum class InterferenceKind { FirstOrder, MatchedX2, SecondOrder };

struct DgpConfig {
    enum class Scheme { Balanced, UnbalancedMultilevel };
    Scheme scheme = Scheme::Balanced;
    int m = 30;
    int fixed_component_size = 30;       // balanced scheme
    double poisson_large_mean = 35.0;    // unbalanced scheme, first 60% of components
    double poisson_small_mean = 12.0;
    double large_fraction = 0.6;
    double edge_intercept = -2.5;        // dyad log-odds = intercept + match * 1{H_i = H_j}
    double edge_match = 1.5;
    double treat_phi_b = 1.0;            // variance of the treatment random intercept
    double sigma_eps = 1.0;              // outcome noise SD^2 = 1 (SD is sqrt of this)
    InterferenceKind interference = InterferenceKind::FirstOrder;

    bool multilevel_outcome() const { return scheme == Scheme::UnbalancedMultilevel; }
};

// Network and the latent trait vector; drawn once, replicates redraw the rest.
struct SimNetwork {
    ComponentGraph graph;
    Eigen::VectorXd H;
    std::vector<std::vector<int>> second_order;  // cached second-order neighbourhoods
};

SimNetwork gen_network(const DgpConfig& cfg, std::mt19937_64& rng);

// Queryable y_i(z, s) for s in {0..d_i} under the DGP's own exposure mapping;
// one shared noise draw per node (and one intercept per component when the
// outcomes are multilevel).
struct PotentialOutcomeOracle {
    Eigen::VectorXd base;          // everything not involving (z, s)
    ExposureSpec exposure;
    std::vector<int> eff_degree;

    double value(int i, int z, int s) const {
        double h = exposure.h(s, eff_degree[i]);
        return base(i) + 2.0 * z + h + z * h;
    }
};

// Exposure spec for a given interference kind on this network/covariates.
ExposureSpec make_exposure(InterferenceKind kind, const SimNetwork& net,
                           const Eigen::MatrixXd& X);

PotentialOutcomeOracle gen_potential_outcomes(const DgpConfig& cfg, const SimNetwork& net,
                                              const Eigen::MatrixXd& X, std::mt19937_64& rng);

Eigen::VectorXi gen_treatment(const DgpConfig& cfg, const SimNetwork& net,
                              const Eigen::MatrixXd& X, std::mt19937_64& rng);

// Steps 2-4 bundled: covariates, potential outcomes, treatments, observed
// outcomes; data columns are X1, X2, H.
struct Replicate {
    NodeData data;
    PotentialOutcomeOracle oracle;
};
Replicate gen_replicate(const DgpConfig& cfg, const SimNetwork& net, std::mt19937_64& rng);

struct EstimandSpec {
    EffectKind kind = EffectKind::DE;
    double alpha = 0.5;
    double alpha_prime = 0.5;  // ignored for DE
    std::string label() const;
};

// Truth from direct averaging of the generated potential outcomes.
struct TruthTable {
    MeansTable mu;  // (arm 0/1/2, alpha) -> truth
    double effect(EffectKind kind, double alpha, double alpha_prime) const;
};
TruthTable compute_truth(const PotentialOutcomeOracle& oracle, const ComponentGraph& g,
                         const std::vector<double>& alphas, bool with_marginal);

// A fitted-model menu entry: which designs each scenario fits.
struct ScenarioSpec {
    std::string name;
    std::vector<std::string> treat_terms;
    std::vector<std::string> outcome_terms;
    bool outcome_interaction = true;
    InterferenceKind dgp_interference = InterferenceKind::FirstOrder;
    InterferenceKind outcome_exposure = InterferenceKind::FirstOrder;
    bool second_order_propensity = false;
};
const std::vector<ScenarioSpec>& scenario_menu();
const ScenarioSpec& find_scenario(const std::string& name);

struct SimConfig {
    DgpConfig dgp;
    int replicates = 200;
    std::vector<std::string> scenarios = {"a", "b", "c", "d"};
    std::vector<EstimatorKind> estimators = {EstimatorKind::IPW, EstimatorKind::REG,
                                             EstimatorKind::DRBC, EstimatorKind::IPWLS};
    std::vector<EstimandSpec> estimands = {{EffectKind::DE, 0.6, 0.6}};
    bool with_se = true;
    int gh_points = 10;
    int threads = 0;  // 0 = hardware concurrency
    std::uint64_t seed = 1;
};

struct ScenarioRow {
    std::string scenario;
    EstimatorKind estimator = EstimatorKind::IPW;
    EstimandSpec estimand;
    double truth = 0.0;
    double bias = 0.0;
    double mse = 0.0;
    double ese = 0.0;       // SD of point estimates
    double ase = 0.0;       // mean of sandwich SEs (NaN when not computed)
    double coverage = 0.0;  // NaN when SEs not computed
    int used = 0;
    int excluded = 0;
};

struct ScenarioReport {
    SimConfig config;
    std::vector<ScenarioRow> rows;
    // per (scenario, estimator): exclusion cause -> count
    std::map<std::string, std::map<std::string, int>> exclusions;

    const ScenarioRow& find(const std::string& scenario, EstimatorKind est,
                            const std::string& estimand_label) const;
};

ScenarioReport run_scenarios(const SimConfig& config);

// Truth for one scenario aggregated over the configured replicates, using the
// same RNG streams as run_scenarios but skipping every model fit.
TruthTable aggregate_truth(const SimConfig& config, const ScenarioSpec& spec);

}  // namespace netcause

#endif
