// End-to-end analysis of a user-supplied network dataset: fit the nuisance
// models, sweep the allocation grid, and assemble effect estimates with
// sandwich confidence intervals.
#ifndef NETCAUSE_ANALYSIS_HPP
#define NETCAUSE_ANALYSIS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "netcause/io.hpp"

namespace netcause {

struct AnalysisConfig {
    std::string edges_path;
    std::string nodes_path;
    bool edge_header = false;
    bool drop_isolates = false;
    std::vector<std::string> propensity_terms;
    std::vector<std::string> outcome_terms;
    bool outcome_interaction = true;
    std::string outcome_exposure = "proportion";  // or "count"
    std::string outcome_variant = "fixed";        // or "multilevel"
    std::vector<std::string> estimators = {"IPW", "REG", "DRBC"};
    std::vector<double> alpha_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    double alpha_ref = 0.4;
    double level = 0.95;
    int gh_points = 10;
    int threads = 0;
    std::uint64_t seed = 1;
    std::string pooling = "component-average";  // "global-average" is non-canonical
    std::string out_dir = ".";

    std::string to_json_string() const;  // fully-resolved echo
    static AnalysisConfig from_json_string(const std::string& text);
};

struct AnalysisResult {
    std::vector<EstimateRow> rows;
    std::string config_echo;
    std::vector<std::string> id_map;
    std::vector<std::string> warnings;
    long long floored_weights = 0;
};

AnalysisResult run_analysis(const AnalysisConfig& config);

}  // namespace netcause

#endif
