#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace evmod {

enum class NeighborSearch { automatic, kdtree, brute_force };

// Undirected, unweighted k-NN graph. An edge (i, j) exists iff j is among i's
// k nearest neighbors or i is among j's (the symmetric-OR rule), so every
// degree is at least k when the points are distinct.
struct NeighborGraph {
    std::size_t node_count = 0;
    int knn_k = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // i < j, sorted
    std::vector<std::vector<std::uint32_t>> adjacency;           // sorted neighbor lists
    std::vector<std::uint32_t> degrees;
};

// L = D - A, dense. Row sums are exactly zero by construction.
struct LaplacianMatrix {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd degrees;
};

// Duplicate normalized points collapsed to single graph vertices. `origin`
// maps each input row to its unique-point index so cluster labels can fan
// back out to every source event.
struct DedupedPoints {
    Eigen::MatrixXd points;
    std::vector<std::uint32_t> multiplicity;
    std::vector<std::uint32_t> origin;
};

DedupedPoints collapse_duplicates(const Eigen::MatrixXd& points);

// Builds the k-NN graph over point rows. Points must be pairwise distinct and
// 1 <= k < N. Neighbor ties at equal distance go to the smaller index.
NeighborGraph build_knn_graph(const Eigen::MatrixXd& points, int k,
                              NeighborSearch search = NeighborSearch::automatic);

LaplacianMatrix laplacian(const NeighborGraph& graph);

// Component label per node; two nodes share a label iff a path connects them.
// Labels are dense, 0-based, ordered by first appearance.
std::vector<std::uint32_t> connected_components(const NeighborGraph& graph);

// Edge list as "i j" lines, ascending, for diff-based golden tests.
std::string dump_edges(const NeighborGraph& graph);

}  // namespace evmod
