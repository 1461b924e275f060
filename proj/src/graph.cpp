#include "netcause/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "netcause/errors.hpp"

namespace netcause {

ComponentGraph load_graph(const std::vector<std::pair<int, int>>& edge_list, int n_nodes) {
    if (n_nodes < 0) throw DataError("load_graph: negative node count");
    ComponentGraph g;
    g.n_nodes = n_nodes;

    std::set<std::pair<int, int>> uniq;
    for (auto [a, b] : edge_list) {
        if (a < 0 || a >= n_nodes || b < 0 || b >= n_nodes)
            throw DataError("load_graph: edge (" + std::to_string(a) + "," + std::to_string(b) +
                            ") references a node outside [0," + std::to_string(n_nodes) + ")");
        if (a == b)
            throw DataError("load_graph: self-loop at node " + std::to_string(a));
        uniq.emplace(std::min(a, b), std::max(a, b));
    }
    g.edges.assign(uniq.begin(), uniq.end());

    g.neighbors.assign(n_nodes, {});
    for (auto [a, b] : g.edges) {
        g.neighbors[a].push_back(b);
        g.neighbors[b].push_back(a);
    }
    g.degree.resize(n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
        std::sort(g.neighbors[i].begin(), g.neighbors[i].end());
        g.degree[i] = static_cast<int>(g.neighbors[i].size());
    }

    // BFS from ascending start ids: components come out keyed by smallest member.
    g.component_of.assign(n_nodes, -1);
    for (int start = 0; start < n_nodes; ++start) {
        if (g.component_of[start] >= 0) continue;
        int comp = static_cast<int>(g.component_sizes.size());
        g.component_nodes.emplace_back();
        std::deque<int> queue{start};
        g.component_of[start] = comp;
        int count = 0;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            ++count;
            g.component_nodes[comp].push_back(u);
            for (int v : g.neighbors[u]) {
                if (g.component_of[v] < 0) {
                    g.component_of[v] = comp;
                    queue.push_back(v);
                }
            }
        }
        std::sort(g.component_nodes[comp].begin(), g.component_nodes[comp].end());
        g.component_sizes.push_back(count);
    }
    return g;
}

ComponentGraph graph_from_partition(const std::vector<std::pair<int, int>>& edge_list,
                                    int n_nodes, const std::vector<int>& group_of) {
    if (static_cast<int>(group_of.size()) != n_nodes)
        throw DataError("graph_from_partition: grouping not aligned with node count");
    ComponentGraph g = load_graph(edge_list, n_nodes);

    int n_groups = 0;
    for (int v : group_of) {
        if (v < 0) throw DataError("graph_from_partition: negative group index");
        n_groups = std::max(n_groups, v + 1);
    }
    for (auto [a, b] : g.edges)
        if (group_of[a] != group_of[b])
            throw DataError("graph_from_partition: edge (" + std::to_string(a) + "," +
                            std::to_string(b) + ") crosses groups");

    g.component_of = group_of;
    g.component_sizes.assign(n_groups, 0);
    g.component_nodes.assign(n_groups, {});
    for (int i = 0; i < n_nodes; ++i) {
        ++g.component_sizes[group_of[i]];
        g.component_nodes[group_of[i]].push_back(i);
    }
    for (int v = 0; v < n_groups; ++v)
        if (g.component_sizes[v] == 0)
            throw DataError("graph_from_partition: empty group " + std::to_string(v));
    return g;
}

int neighborhood_treatment_sum(const ComponentGraph& g, const Eigen::VectorXi& Z, int i) {
    if (Z.size() != g.n_nodes) throw DataError("neighborhood_treatment_sum: Z not aligned with graph");
    if (i < 0 || i >= g.n_nodes) throw DataError("neighborhood_treatment_sum: node out of range");
    int s = 0;
    for (int j : g.neighbors[i]) s += Z(j);
    return s;
}

std::vector<int> second_order_neighbors(const ComponentGraph& g, int i) {
    if (i < 0 || i >= g.n_nodes) throw DataError("second_order_neighbors: node out of range");
    std::set<int> out;
    for (int j : g.neighbors[i])
        for (int k : g.neighbors[j]) out.insert(k);
    out.erase(i);
    for (int j : g.neighbors[i]) out.erase(j);
    return {out.begin(), out.end()};
}

int NodeData::column(const std::string& name) const {
    for (std::size_t k = 0; k < column_names.size(); ++k)
        if (column_names[k] == name) return static_cast<int>(k);
    throw DataError("NodeData: no covariate column named '" + name + "'");
}

void validate_node_data(const ComponentGraph& g, const NodeData& data) {
    if (data.Y.size() != g.n_nodes || data.Z.size() != g.n_nodes ||
        data.X.rows() != g.n_nodes)
        throw DataError("node data row count does not match the graph node count");
    if (static_cast<int>(data.column_names.size()) != data.X.cols())
        throw DataError("covariate column labels do not match the covariate matrix");
    for (int i = 0; i < g.n_nodes; ++i) {
        if (data.Z(i) != 0 && data.Z(i) != 1)
            throw DataError("treatment must be 0/1 (node " + std::to_string(i) + ")");
        if (!std::isfinite(data.Y(i)))
            throw DataError("missing or non-finite outcome at node " + std::to_string(i));
    }
    if (!data.X.allFinite())
        throw DataError("missing or non-finite covariate value");
}

SubsetResult subset_nodes(const ComponentGraph& g, const NodeData& data,
                          const std::vector<int>& keep) {
    SubsetResult out;
    out.kept = keep;
    std::sort(out.kept.begin(), out.kept.end());
    std::vector<int> new_id(g.n_nodes, -1);
    for (std::size_t k = 0; k < out.kept.size(); ++k) new_id[out.kept[k]] = static_cast<int>(k);

    std::vector<std::pair<int, int>> edges;
    for (auto [a, b] : g.edges)
        if (new_id[a] >= 0 && new_id[b] >= 0) edges.emplace_back(new_id[a], new_id[b]);
    out.graph = load_graph(edges, static_cast<int>(out.kept.size()));

    const int n = static_cast<int>(out.kept.size());
    out.data.X.resize(n, data.X.cols());
    out.data.Z.resize(n);
    out.data.Y.resize(n);
    out.data.column_names = data.column_names;
    for (int k = 0; k < n; ++k) {
        out.data.X.row(k) = data.X.row(out.kept[k]);
        out.data.Z(k) = data.Z(out.kept[k]);
        out.data.Y(k) = data.Y(out.kept[k]);
    }
    return out;
}

}  // namespace netcause
