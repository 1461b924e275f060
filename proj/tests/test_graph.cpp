#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "netcause/errors.hpp"
#include "netcause/graph.hpp"
#include "oracles.hpp"

using namespace netcause;

TEST_CASE("duplicate and reversed edges collapse") {
    ComponentGraph g = load_graph({{0, 1}, {1, 0}}, 3);
    CHECK(g.edges.size() == 1);
    CHECK(g.num_components() == 2);
    CHECK(g.component_of[0] == g.component_of[1]);
    CHECK(g.component_of[2] != g.component_of[0]);
    CHECK(g.degree == std::vector<int>{1, 1, 0});
}

TEST_CASE("empty graph is all singletons") {
    ComponentGraph g = load_graph({}, 4);
    CHECK(g.num_components() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(g.degree[i] == 0);
        CHECK(g.component_sizes[g.component_of[i]] == 1);
    }
}

TEST_CASE("two components, degrees per hand-checked BFS") {
    ComponentGraph g = load_graph({{0, 1}, {1, 2}, {3, 4}}, 5);
    CHECK(g.num_components() == 2);
    CHECK(g.component_of[0] == 0);
    CHECK(g.component_of[1] == 0);
    CHECK(g.component_of[2] == 0);
    CHECK(g.component_of[3] == 1);
    CHECK(g.component_of[4] == 1);
    CHECK(g.degree[1] == 2);
    CHECK(g.component_sizes == std::vector<int>{3, 2});
}

TEST_CASE("self-loops and out-of-range ids are rejected") {
    CHECK_THROWS_AS(load_graph({{2, 2}}, 3), DataError);
    CHECK_THROWS_AS(load_graph({{0, 5}}, 3), DataError);
    CHECK_THROWS_AS(load_graph({{-1, 0}}, 3), DataError);
}

TEST_CASE("neighborhood treatment sums") {
    ComponentGraph g = load_graph({{0, 1}, {0, 2}}, 4);
    Eigen::VectorXi Z(4);
    Z << 0, 1, 0, 1;
    CHECK(neighborhood_treatment_sum(g, Z, 0) == 1);
    CHECK(neighborhood_treatment_sum(g, Z, 3) == 0);  // isolate
    // star with all four leaves treated
    ComponentGraph star = load_graph({{0, 1}, {0, 2}, {0, 3}, {0, 4}}, 5);
    Eigen::VectorXi Zs = Eigen::VectorXi::Ones(5);
    CHECK(neighborhood_treatment_sum(star, Zs, 0) == 4);
}

TEST_CASE("second-order neighborhoods") {
    ComponentGraph path3 = load_graph({{0, 1}, {1, 2}}, 3);
    CHECK(second_order_neighbors(path3, 0) == std::vector<int>{2});
    ComponentGraph tri = load_graph({{0, 1}, {1, 2}, {0, 2}}, 3);
    CHECK(second_order_neighbors(tri, 0).empty());
    ComponentGraph path5 = load_graph({{0, 1}, {1, 2}, {2, 3}, {3, 4}}, 5);
    CHECK(second_order_neighbors(path5, 2) == std::vector<int>{0, 4});
}

TEST_CASE("random graphs: symmetry, degree sum, component and distance invariants") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 25; ++trial) {
        int n = 2 + static_cast<int>(rng() % 30);
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng() % 5 == 0) edges.emplace_back(rng() % 2 ? std::pair{i, j}
                                                                 : std::pair{j, i});
        ComponentGraph g = load_graph(edges, n);

        // adjacency equals its transpose; degree sum = 2 |E|
        int degree_sum = 0;
        for (int i = 0; i < n; ++i) {
            degree_sum += g.degree[i];
            for (int j : g.neighbors[i]) {
                CHECK(std::binary_search(g.neighbors[j].begin(), g.neighbors[j].end(), i));
            }
        }
        CHECK(degree_sum == 2 * static_cast<int>(g.edges.size()));

        // component labels constant on BFS trees, membership matches distances
        for (int root : {0, n / 2}) {
            auto dist = oracles::bfs_distances(g.neighbors, root);
            for (int i = 0; i < n; ++i) {
                if (dist[i] >= 0) CHECK(g.component_of[i] == g.component_of[root]);
                else CHECK(g.component_of[i] != g.component_of[root]);
            }
        }

        // second-order sets exclude self and first-order neighbours, and match
        // the set of nodes at BFS distance exactly 2
        for (int i = 0; i < n; ++i) {
            auto second = second_order_neighbors(g, i);
            auto dist = oracles::bfs_distances(g.neighbors, i);
            std::vector<int> want;
            for (int j = 0; j < n; ++j)
                if (dist[j] == 2) want.push_back(j);
            CHECK(second == want);
        }

        int total = 0;
        for (int s : g.component_sizes) total += s;
        CHECK(total == n);
    }
}

TEST_CASE("partition-based construction keeps split groups together") {
    // group 0 = {0,1,2} with only 0-1 connected, group 1 = {3,4}
    std::vector<int> groups{0, 0, 0, 1, 1};
    ComponentGraph g = graph_from_partition({{0, 1}, {3, 4}}, 5, groups);
    CHECK(g.num_components() == 2);
    CHECK(g.component_sizes == std::vector<int>{3, 2});
    CHECK(g.component_of[2] == 0);
    CHECK_THROWS_AS(graph_from_partition({{2, 3}}, 5, groups), DataError);
}

TEST_CASE("node data validation") {
    ComponentGraph g = load_graph({{0, 1}}, 2);
    NodeData d;
    d.X = Eigen::MatrixXd::Zero(2, 1);
    d.Z = Eigen::VectorXi::Zero(2);
    d.Y = Eigen::VectorXd::Zero(2);
    d.column_names = {"X1"};
    CHECK_NOTHROW(validate_node_data(g, d));
    d.Z(0) = 2;
    CHECK_THROWS_AS(validate_node_data(g, d), DataError);
    d.Z(0) = 1;
    d.Y(1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(validate_node_data(g, d), DataError);
}

TEST_CASE("subset_nodes renumbers and filters edges") {
    ComponentGraph g = load_graph({{0, 1}, {1, 2}, {3, 4}}, 5);
    NodeData d;
    d.X = Eigen::MatrixXd::Random(5, 2);
    d.Z = Eigen::VectorXi::Zero(5);
    d.Y = Eigen::VectorXd::LinSpaced(5, 0, 4);
    d.column_names = {"a", "b"};
    SubsetResult sub = subset_nodes(g, d, {1, 2, 4});
    CHECK(sub.graph.n_nodes == 3);
    CHECK(sub.graph.edges.size() == 1);  // only 1-2 survives
    CHECK(sub.data.Y(0) == 1.0);
    CHECK(sub.data.Y(2) == 4.0);
}
