// Undirected network decomposed into disjoint components, plus per-node data.
// Everything downstream treats components as the independent data unit, so the
// decomposition happens once at load and the structure is immutable afterwards.
#ifndef NETCAUSE_GRAPH_HPP
#define NETCAUSE_GRAPH_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace netcause {

struct ComponentGraph {
    int n_nodes = 0;
    std::vector<std::pair<int, int>> edges;          // deduplicated, stored with first < second
    std::vector<std::vector<int>> neighbors;         // sorted adjacency lists
    std::vector<int> degree;
    std::vector<int> component_of;                   // node -> component index
    std::vector<int> component_sizes;                // component -> N_nu
    std::vector<std::vector<int>> component_nodes;   // component -> sorted member ids

    int num_components() const { return static_cast<int>(component_sizes.size()); }
};

// Build from an edge list; pairs may repeat or appear in either order.
// Self-loops and out-of-range ids are rejected. Component indices are assigned
// in order of the smallest contained node id.
ComponentGraph load_graph(const std::vector<std::pair<int, int>>& edge_list, int n_nodes);

// Build with an explicit disjoint grouping (e.g. schools, or generated blocks)
// as the component structure instead of re-deriving maximal connected
// subgraphs; edges crossing groups are rejected. A group that happens to be
// internally disconnected still counts as one unit.
ComponentGraph graph_from_partition(const std::vector<std::pair<int, int>>& edge_list,
                                    int n_nodes, const std::vector<int>& group_of);

// Number of treated first-order neighbours of i.
int neighborhood_treatment_sum(const ComponentGraph& g, const Eigen::VectorXi& Z, int i);

// Nodes at shortest-path distance exactly 2 from i, sorted.
std::vector<int> second_order_neighbors(const ComponentGraph& g, int i);

// Per-node covariates, binary treatment and outcome, aligned with the graph.
struct NodeData {
    Eigen::MatrixXd X;                       // n x p covariates
    Eigen::VectorXi Z;                       // entries in {0,1}
    Eigen::VectorXd Y;
    std::vector<std::string> column_names;   // labels for X columns

    int n() const { return static_cast<int>(Y.size()); }
    int column(const std::string& name) const;  // throws DataError if absent
};

// Alignment / domain checks shared by the fitting entry points.
void validate_node_data(const ComponentGraph& g, const NodeData& data);

// Restrict graph + data to the given nodes (used by --drop-isolates); ids are
// re-densified in ascending order of the kept original ids.
struct SubsetResult {
    ComponentGraph graph;
    NodeData data;
    std::vector<int> kept;  // new id -> original id
};
SubsetResult subset_nodes(const ComponentGraph& g, const NodeData& data,
                          const std::vector<int>& keep);

}  // namespace netcause

#endif
