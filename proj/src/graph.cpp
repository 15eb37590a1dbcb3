#include "evmod/graph.hpp"

#include <algorithm>
#include <numeric>

#include "evmod/error.hpp"
#include "evmod/kdtree.hpp"

namespace evmod {

namespace {

constexpr std::size_t kBruteForceCutoff = 64;

std::vector<std::uint32_t> brute_force_nearest(const Eigen::MatrixXd& points,
                                               std::uint32_t query, std::size_t k) {
    const std::uint32_t n = std::uint32_t(points.rows());
    std::vector<std::pair<double, std::uint32_t>> cand;
    cand.reserve(n - 1);
    for (std::uint32_t j = 0; j < n; ++j) {
        if (j == query) continue;
        cand.emplace_back((points.row(j) - points.row(query)).squaredNorm(), j);
    }
    std::partial_sort(cand.begin(), cand.begin() + std::ptrdiff_t(k), cand.end());
    std::vector<std::uint32_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = cand[i].second;
    return out;
}

}  // namespace

DedupedPoints collapse_duplicates(const Eigen::MatrixXd& points) {
    const std::uint32_t n = std::uint32_t(points.rows());
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    auto row_less = [&](std::uint32_t a, std::uint32_t b) {
        for (Eigen::Index c = 0; c < points.cols(); ++c) {
            if (points(a, c) != points(b, c)) return points(a, c) < points(b, c);
        }
        return a < b;
    };
    auto row_equal = [&](std::uint32_t a, std::uint32_t b) {
        return (points.row(a).array() == points.row(b).array()).all();
    };
    std::sort(order.begin(), order.end(), row_less);

    // Group equal rows; within a group `order` is sorted by index, so the
    // first element is the earliest source row and becomes the representative.
    std::vector<std::uint32_t> sorted_group(n);
    std::vector<std::uint32_t> representative;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0 || !row_equal(order[i], order[i - 1])) representative.push_back(order[i]);
        sorted_group[order[i]] = std::uint32_t(representative.size() - 1);
    }

    // Renumber groups into first-appearance order of their representatives.
    const std::uint32_t unique_count = std::uint32_t(representative.size());
    std::vector<std::uint32_t> by_rep(unique_count);
    std::iota(by_rep.begin(), by_rep.end(), 0u);
    std::sort(by_rep.begin(), by_rep.end(), [&](std::uint32_t a, std::uint32_t b) {
        return representative[a] < representative[b];
    });
    std::vector<std::uint32_t> new_id(unique_count);
    for (std::uint32_t u = 0; u < unique_count; ++u) new_id[by_rep[u]] = u;

    DedupedPoints out;
    out.points.resize(Eigen::Index(unique_count), points.cols());
    out.multiplicity.assign(unique_count, 0);
    out.origin.resize(n);
    for (std::uint32_t u = 0; u < unique_count; ++u) {
        out.points.row(Eigen::Index(u)) = points.row(representative[by_rep[u]]);
    }
    for (std::uint32_t i = 0; i < n; ++i) {
        std::uint32_t u = new_id[sorted_group[i]];
        out.origin[i] = u;
        out.multiplicity[u] += 1;
    }
    return out;
}

NeighborGraph build_knn_graph(const Eigen::MatrixXd& points, int k, NeighborSearch search) {
    const std::size_t n = std::size_t(points.rows());
    if (n < 2) throw InvalidArgument("k-NN graph needs at least 2 points");
    if (k < 1 || std::size_t(k) >= n) {
        throw InvalidArgument("k must satisfy 1 <= k < N (k=" + std::to_string(k) +
                              ", N=" + std::to_string(n) + ")");
    }
    {
        std::vector<std::uint32_t> order(n);
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            for (Eigen::Index c = 0; c < points.cols(); ++c) {
                if (points(a, c) != points(b, c)) return points(a, c) < points(b, c);
            }
            return a < b;
        });
        for (std::size_t i = 1; i < n; ++i) {
            if ((points.row(order[i - 1]).array() == points.row(order[i]).array()).all()) {
                throw InvalidArgument("duplicate points; collapse them before graph construction");
            }
        }
    }

    bool use_tree = search == NeighborSearch::kdtree ||
                    (search == NeighborSearch::automatic && n >= kBruteForceCutoff);

    std::vector<std::vector<std::uint32_t>> nearest(n);
    if (use_tree) {
        KdTree tree(points);
        for (std::uint32_t i = 0; i < n; ++i) nearest[i] = tree.nearest(i, std::size_t(k));
    } else {
        for (std::uint32_t i = 0; i < n; ++i) {
            nearest[i] = brute_force_nearest(points, i, std::size_t(k));
        }
    }

    NeighborGraph graph;
    graph.node_count = n;
    graph.knn_k = k;
    graph.adjacency.assign(n, {});
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j : nearest[i]) {
            graph.adjacency[i].push_back(j);
            graph.adjacency[j].push_back(i);
        }
    }
    for (std::uint32_t i = 0; i < n; ++i) {
        auto& adj = graph.adjacency[i];
        std::sort(adj.begin(), adj.end());
        adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
        for (std::uint32_t j : adj) {
            if (i < j) graph.edges.emplace_back(i, j);
        }
    }
    std::sort(graph.edges.begin(), graph.edges.end());
    graph.degrees.resize(n);
    for (std::size_t i = 0; i < n; ++i) graph.degrees[i] = std::uint32_t(graph.adjacency[i].size());
    return graph;
}

LaplacianMatrix laplacian(const NeighborGraph& graph) {
    const Eigen::Index n = Eigen::Index(graph.node_count);
    LaplacianMatrix lap;
    lap.matrix = Eigen::MatrixXd::Zero(n, n);
    lap.degrees.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        lap.degrees(i) = double(graph.degrees[std::size_t(i)]);
        lap.matrix(i, i) = lap.degrees(i);
    }
    for (const auto& [i, j] : graph.edges) {
        lap.matrix(i, j) = -1.0;
        lap.matrix(j, i) = -1.0;
    }
    return lap;
}

std::vector<std::uint32_t> connected_components(const NeighborGraph& graph) {
    const std::uint32_t unassigned = ~std::uint32_t(0);
    std::vector<std::uint32_t> labels(graph.node_count, unassigned);
    std::uint32_t next = 0;
    std::vector<std::uint32_t> stack;
    for (std::uint32_t start = 0; start < graph.node_count; ++start) {
        if (labels[start] != unassigned) continue;
        labels[start] = next;
        stack.push_back(start);
        while (!stack.empty()) {
            std::uint32_t v = stack.back();
            stack.pop_back();
            for (std::uint32_t w : graph.adjacency[v]) {
                if (labels[w] == unassigned) {
                    labels[w] = next;
                    stack.push_back(w);
                }
            }
        }
        ++next;
    }
    return labels;
}

std::string dump_edges(const NeighborGraph& graph) {
    std::string out;
    for (const auto& [i, j] : graph.edges) {
        out += std::to_string(i) + ' ' + std::to_string(j) + '\n';
    }
    return out;
}

}  // namespace evmod
