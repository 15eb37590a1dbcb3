#include "evmod/model_select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "evmod/error.hpp"
#include "evmod/rng.hpp"

namespace evmod {

SilhouetteReport silhouette(const Eigen::MatrixXd& points,
                            const std::vector<std::uint32_t>& labels,
                            SilhouetteSpace space) {
    const Eigen::Index n = points.rows();
    if (n == 0) throw InvalidArgument("silhouette of an empty point set");
    if (labels.size() != std::size_t(n)) {
        throw InvalidArgument("label count does not match point count");
    }
    if (n < 3) throw InvalidArgument("silhouette needs at least 3 points");

    // Compact the label values; ids may be sparse when callers pass a
    // filtered clustering.
    std::map<std::uint32_t, int> group_of;
    for (std::uint32_t l : labels) group_of.emplace(l, 0);
    const int groups = int(group_of.size());
    if (groups < 2) throw InvalidArgument("silhouette requires at least 2 clusters");
    {
        int next = 0;
        for (auto& kv : group_of) kv.second = next++;
    }
    std::vector<int> group(std::size_t(n), 0);
    std::vector<Eigen::Index> sizes(std::size_t(groups), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        group[std::size_t(i)] = group_of.at(labels[std::size_t(i)]);
        sizes[std::size_t(group[std::size_t(i)])] += 1;
    }

    SilhouetteReport report;
    report.k = groups;
    report.distance_space = space;
    report.per_point.resize(std::size_t(n));

    std::vector<double> cluster_sum(std::size_t(groups), 0.0);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        std::fill(cluster_sum.begin(), cluster_sum.end(), 0.0);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            cluster_sum[std::size_t(group[std::size_t(j)])] +=
                (points.row(i) - points.row(j)).norm();
        }
        const int own = group[std::size_t(i)];
        const Eigen::Index own_size = sizes[std::size_t(own)];
        const double a = own_size > 1 ? cluster_sum[std::size_t(own)] / double(own_size - 1) : 0.0;
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < groups; ++c) {
            if (c == own) continue;
            b = std::min(b, cluster_sum[std::size_t(c)] / double(sizes[std::size_t(c)]));
        }
        const double denom = std::max(a, b);
        const double s = denom > 0.0 ? (b - a) / denom : 0.0;
        if (s < -1.0 || s > 1.0) {
            throw Error("silhouette value " + std::to_string(s) + " out of range");
        }
        report.per_point[std::size_t(i)] = s;
        total += s;
    }
    report.mean = total / double(n);
    return report;
}

SweepResult sweep_k(const Eigen::MatrixXd& points, const NeighborGraph& graph,
                    KRange range, const SweepConfig& cfg) {
    const Eigen::Index n = points.rows();
    if (std::size_t(n) != graph.node_count) {
        throw InvalidArgument("point count does not match graph node count");
    }
    if (range.lo < 2 || range.lo > range.hi || Eigen::Index(range.hi) > n - 1) {
        throw InvalidArgument("sweep range must satisfy 2 <= lo <= hi <= N-1");
    }

    LaplacianMatrix lap = laplacian(graph);
    EigenSolution solution = solve_eigen(lap, range.hi, cfg.solver.mode);

    Rng sweep_rng(cfg.solver.seed);
    SweepResult result;
    bool have_best = false;
    for (int k = range.lo; k <= range.hi; ++k) {
        try {
            SpectralEmbedding embedding = embed(solution, k);
            std::uint64_t k_seed = sweep_rng.fork(std::uint64_t(k)).next_u64();
            ClusterAssignment assignment =
                kmeans(embedding.coords, k, k_seed, cfg.solver.kmeans);
            const Eigen::MatrixXd& space =
                cfg.silhouette_space == SilhouetteSpace::embedding ? embedding.coords
                                                                   : points;
            SilhouetteReport report =
                silhouette(space, assignment.labels, cfg.silhouette_space);
            result.candidates.push_back({k, report.mean});
            if (!have_best || report.mean > result.sc) {
                result.sc = report.mean;
                result.best_k = k;
                result.assignment = std::move(assignment);
                have_best = true;
            }
        } catch (const Error& e) {
            result.skipped.push_back({k, e.what()});
        }
    }
    if (!have_best) {
        std::string detail;
        for (const SkippedK& s : result.skipped) {
            detail += " k=" + std::to_string(s.k) + ": " + s.reason + ";";
        }
        throw Error("every k in the sweep failed:" + detail);
    }
    return result;
}

}  // namespace evmod
