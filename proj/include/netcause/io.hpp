// File formats: edge lists, node attribute tables, and the CSV reports.
// Report CSVs are written with 17 significant digits so identical runs are
// byte-identical and re-parsing reproduces the in-memory values exactly.
#ifndef NETCAUSE_IO_HPP
#define NETCAUSE_IO_HPP

#include <optional>
#include <string>
#include <vector>

#include "netcause/graph.hpp"
#include "netcause/simulate.hpp"

namespace netcause {

std::string format_double(double v);  // %.17g

struct LoadedDataset {
    ComponentGraph graph;
    NodeData data;
    std::vector<std::string> id_map;  // dense id -> original label (may be numeric)
};

// Edge list: one `src,dst` pair per line (comma or whitespace separated),
// optional header line. Node table: CSV with a header; columns Z, Y, then
// covariates; an `id` column is required when the edge file uses non-integer
// ids, and must then cover every id appearing in the edge file.
LoadedDataset load_dataset(const std::string& edge_path, const std::string& node_path,
                           bool edge_header);

struct EstimateRow {
    std::string estimator;
    std::string estimand;  // DE / IE / TE / OE
    double alpha = 0.0;
    double alpha_prime = 0.0;
    double point = 0.0;
    std::optional<double> se, ci_lo, ci_hi;
    std::string diagnostics;

    bool operator==(const EstimateRow&) const = default;
};

void write_estimates_csv(const std::string& path, const std::string& config_echo,
                         const std::vector<EstimateRow>& rows);
std::vector<EstimateRow> read_estimates_csv(const std::string& path,
                                            std::string* config_echo = nullptr);
std::string render_estimates_table(const std::vector<EstimateRow>& rows);

void write_scenario_csv(const std::string& path, const std::string& config_echo,
                        const ScenarioReport& report);
std::vector<ScenarioRow> read_scenario_csv(const std::string& path,
                                           std::string* config_echo = nullptr);
std::string render_scenario_table(const ScenarioReport& report);

void write_truth_csv(const std::string& path, const TruthTable& truth,
                     const std::vector<double>& alphas, const std::vector<double>& alpha_refs);

void write_id_map(const std::string& path, const std::vector<std::string>& id_map);

}  // namespace netcause

#endif
