// Command-line entry points: `analyze` for user-supplied network datasets and
// `simulate` for the replicated scenario studies.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "netcause/analysis.hpp"
#include "netcause/errors.hpp"
#include "netcause/io.hpp"
#include "netcause/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace netcause;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json sim_config_to_json(const SimConfig& c) {
    json j;
    j["scheme"] = c.dgp.scheme == DgpConfig::Scheme::Balanced ? "balanced"
                                                              : "unbalanced-multilevel";
    j["m"] = c.dgp.m;
    j["component_size"] = c.dgp.fixed_component_size;
    j["replicates"] = c.replicates;
    j["scenarios"] = c.scenarios;
    std::vector<std::string> ests;
    for (auto e : c.estimators) ests.push_back(estimator_name(e));
    j["estimators"] = ests;
    json est = json::array();
    for (const auto& e : c.estimands) {
        json o;
        o["kind"] = effect_name(e.kind);
        o["alpha"] = e.alpha;
        if (e.kind != EffectKind::DE) o["alpha_prime"] = e.alpha_prime;
        est.push_back(o);
    }
    j["estimands"] = est;
    j["with_se"] = c.with_se;
    j["gh_points"] = c.gh_points;
    j["threads"] = c.threads;
    j["seed"] = c.seed;
    return j;
}

SimConfig sim_config_from_json(const json& j) {
    SimConfig c;
    if (j.contains("scheme")) {
        std::string s = j.at("scheme").get<std::string>();
        if (s == "balanced")
            c.dgp.scheme = DgpConfig::Scheme::Balanced;
        else if (s == "unbalanced-multilevel")
            c.dgp.scheme = DgpConfig::Scheme::UnbalancedMultilevel;
        else
            throw ConfigError("unknown scheme '" + s + "'");
    }
    if (j.contains("m")) c.dgp.m = j.at("m").get<int>();
    if (j.contains("component_size"))
        c.dgp.fixed_component_size = j.at("component_size").get<int>();
    if (j.contains("replicates")) c.replicates = j.at("replicates").get<int>();
    if (j.contains("scenarios")) c.scenarios = j.at("scenarios").get<std::vector<std::string>>();
    if (j.contains("estimators")) {
        c.estimators.clear();
        for (const auto& s : j.at("estimators")) c.estimators.push_back(parse_estimator(s));
    }
    if (j.contains("estimands")) {
        c.estimands.clear();
        for (const auto& o : j.at("estimands")) {
            EstimandSpec e;
            std::string k = o.at("kind").get<std::string>();
            e.kind = k == "DE"   ? EffectKind::DE
                     : k == "IE" ? EffectKind::IE
                     : k == "TE" ? EffectKind::TE
                     : k == "OE" ? EffectKind::OE
                                 : throw ConfigError("unknown estimand kind '" + k + "'");
            e.alpha = o.at("alpha").get<double>();
            e.alpha_prime = o.value("alpha_prime", e.alpha);
            c.estimands.push_back(e);
        }
    }
    if (j.contains("with_se")) c.with_se = j.at("with_se").get<bool>();
    if (j.contains("gh_points")) c.gh_points = j.at("gh_points").get<int>();
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

int cmd_analyze(const AnalysisConfig& config) {
    AnalysisResult res = run_analysis(config);
    fs::create_directories(config.out_dir);
    write_estimates_csv((fs::path(config.out_dir) / "estimates.csv").string(), res.config_echo,
                        res.rows);
    write_id_map((fs::path(config.out_dir) / "id_map.csv").string(), res.id_map);
    std::cout << render_estimates_table(res.rows);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int cmd_simulate(const SimConfig& config, const std::string& out_dir, bool dump_truth) {
    fs::create_directories(out_dir);
    const std::string echo = sim_config_to_json(config).dump();
    if (dump_truth) {
        const ScenarioSpec& spec = find_scenario(config.scenarios.front());
        TruthTable truth = aggregate_truth(config, spec);
        std::vector<double> alphas, refs;
        for (const auto& e : config.estimands) {
            if (std::find(alphas.begin(), alphas.end(), e.alpha) == alphas.end())
                alphas.push_back(e.alpha);
            if (e.kind != EffectKind::DE &&
                std::find(refs.begin(), refs.end(), e.alpha_prime) == refs.end())
                refs.push_back(e.alpha_prime);
        }
        for (double r : refs)
            if (std::find(alphas.begin(), alphas.end(), r) == alphas.end()) alphas.push_back(r);
        write_truth_csv((fs::path(out_dir) / "truth.csv").string(), truth, alphas, refs);
        std::cout << "wrote " << (fs::path(out_dir) / "truth.csv").string() << "\n";
        return 0;
    }
    ScenarioReport report = run_scenarios(config);
    for (const auto& name : config.scenarios) {
        ScenarioReport sub;
        sub.config = report.config;
        for (const auto& r : report.rows)
            if (r.scenario == name) sub.rows.push_back(r);
        for (const auto& [key, causes] : report.exclusions)
            if (key.rfind(name + "/", 0) == 0) sub.exclusions[key] = causes;
        write_scenario_csv((fs::path(out_dir) / ("scenario_" + name + ".csv")).string(), echo,
                           sub);
    }
    std::cout << render_scenario_table(report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"doubly robust causal effect estimation under network interference"};
    app.require_subcommand(1);

    // analyze
    auto* an = app.add_subcommand("analyze", "estimate effects on a network dataset");
    std::string an_config_path, an_edges, an_nodes, an_out, an_variant, an_pooling;
    std::vector<std::string> an_prop_terms, an_out_terms, an_estimators;
    std::vector<double> an_grid;
    double an_ref = -1.0, an_level = -1.0;
    int an_gh = 0, an_threads = -1;
    bool an_header = false, an_drop = false;
    an->add_option("--config", an_config_path, "JSON config file");
    an->add_option("--edges", an_edges, "edge list file");
    an->add_option("--nodes", an_nodes, "node attribute CSV");
    an->add_flag("--header", an_header, "edge list has a header line");
    an->add_flag("--drop-isolates", an_drop, "drop degree-0 nodes before analysis");
    an->add_option("--propensity-term", an_prop_terms, "treatment model design term");
    an->add_option("--outcome-term", an_out_terms, "outcome model design term");
    an->add_option("--estimator", an_estimators, "estimator to run (IPW/REG/DRBC/IPWLS)");
    an->add_option("--alpha", an_grid, "allocation grid value (repeatable)");
    an->add_option("--alpha-ref", an_ref, "reference allocation for IE/TE/OE");
    an->add_option("--level", an_level, "confidence level");
    an->add_option("--outcome-variant", an_variant, "fixed | multilevel");
    an->add_option("--pooling", an_pooling, "component-average | global-average");
    an->add_option("--gh-points", an_gh, "Gauss-Hermite points");
    an->add_option("--threads", an_threads, "worker threads (0 = all cores)");
    an->add_option("--out", an_out, "output directory");

    // simulate
    auto* sim = app.add_subcommand("simulate", "run replicated simulation scenarios");
    std::string sim_config_path, sim_scheme, sim_out = "simout";
    std::vector<std::string> sim_scenarios, sim_estimators;
    int sim_m = 0, sim_S = 0, sim_gh = 0, sim_threads = -1;
    std::uint64_t sim_seed = 0;
    bool sim_seed_set = false, sim_no_se = false, sim_dump_truth = false;
    sim->add_option("--config", sim_config_path, "JSON config file");
    sim->add_option("--scheme", sim_scheme, "balanced | unbalanced-multilevel");
    sim->add_option("--m", sim_m, "number of network components");
    sim->add_option("--S,--replicates", sim_S, "simulation replicates");
    sim->add_option("--scenario", sim_scenarios, "scenario name (repeatable)");
    sim->add_option("--estimator", sim_estimators, "estimator (repeatable)");
    sim->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& v) { sim_seed = v; sim_seed_set = true; }, "RNG seed");
    sim->add_flag("--no-se", sim_no_se, "skip sandwich variances (points only)");
    sim->add_flag("--dump-truth", sim_dump_truth, "write the truth table and exit");
    sim->add_option("--gh-points", sim_gh, "Gauss-Hermite points");
    sim->add_option("--threads", sim_threads, "worker threads (0 = all cores)");
    sim->add_option("--out", sim_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (an->parsed()) {
            AnalysisConfig config;
            if (!an_config_path.empty())
                config = AnalysisConfig::from_json_string(read_file(an_config_path));
            if (!an_edges.empty()) config.edges_path = an_edges;
            if (!an_nodes.empty()) config.nodes_path = an_nodes;
            if (an_header) config.edge_header = true;
            if (an_drop) config.drop_isolates = true;
            if (!an_prop_terms.empty()) config.propensity_terms = an_prop_terms;
            if (!an_out_terms.empty()) config.outcome_terms = an_out_terms;
            if (!an_estimators.empty()) config.estimators = an_estimators;
            if (!an_grid.empty()) config.alpha_grid = an_grid;
            if (an_ref >= 0.0) config.alpha_ref = an_ref;
            if (an_level > 0.0) config.level = an_level;
            if (!an_variant.empty()) config.outcome_variant = an_variant;
            if (!an_pooling.empty()) config.pooling = an_pooling;
            if (an_gh > 0) config.gh_points = an_gh;
            if (an_threads >= 0) config.threads = an_threads;
            if (!an_out.empty()) config.out_dir = an_out;
            if (config.edges_path.empty() || config.nodes_path.empty())
                throw ConfigError("analyze: --edges and --nodes (or a config file) required");
            return cmd_analyze(config);
        }
        SimConfig config;
        if (!sim_config_path.empty())
            config = sim_config_from_json(json::parse(read_file(sim_config_path)));
        if (!sim_scheme.empty()) {
            if (sim_scheme == "balanced")
                config.dgp.scheme = DgpConfig::Scheme::Balanced;
            else if (sim_scheme == "unbalanced-multilevel")
                config.dgp.scheme = DgpConfig::Scheme::UnbalancedMultilevel;
            else
                throw ConfigError("unknown scheme '" + sim_scheme + "'");
        }
        if (sim_m > 0) config.dgp.m = sim_m;
        if (sim_S > 0) config.replicates = sim_S;
        if (!sim_scenarios.empty()) config.scenarios = sim_scenarios;
        if (!sim_estimators.empty()) {
            config.estimators.clear();
            for (const auto& s : sim_estimators) config.estimators.push_back(parse_estimator(s));
        }
        if (sim_seed_set) config.seed = sim_seed;
        if (sim_no_se) config.with_se = false;
        if (sim_gh > 0) config.gh_points = sim_gh;
        if (sim_threads >= 0) config.threads = sim_threads;
        return cmd_simulate(config, sim_out, sim_dump_truth);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    }
}
