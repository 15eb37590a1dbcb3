#include "evmod/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "evmod/error.hpp"
#include "evmod/rng.hpp"

namespace evmod {

namespace {

constexpr double kResidualBound = 1e-8;

std::size_t count_distinct_rows(const Eigen::MatrixXd& rows) {
    const std::uint32_t n = std::uint32_t(rows.rows());
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    auto less = [&](std::uint32_t a, std::uint32_t b) {
        for (Eigen::Index c = 0; c < rows.cols(); ++c) {
            if (rows(a, c) != rows(b, c)) return rows(a, c) < rows(b, c);
        }
        return false;
    };
    std::sort(order.begin(), order.end(), less);
    std::size_t distinct = n == 0 ? 0 : 1;
    for (std::size_t i = 1; i < n; ++i) {
        if (less(order[i - 1], order[i])) ++distinct;
    }
    return distinct;
}

struct LloydResult {
    ClusterAssignment assignment;
};

ClusterAssignment lloyd_once(const Eigen::MatrixXd& rows, int k, Rng rng,
                             const KMeansParams& params) {
    const Eigen::Index n = rows.rows();
    const Eigen::Index dim = rows.cols();

    // Careful seeding: first centroid uniform, the rest proportional to the
    // squared distance to the nearest centroid chosen so far.
    Eigen::MatrixXd centroids(k, dim);
    centroids.row(0) = rows.row(Eigen::Index(rng.next_below(std::uint64_t(n))));
    Eigen::VectorXd nearest_d2 =
        (rows.rowwise() - centroids.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        double total = nearest_d2.sum();
        Eigen::Index chosen = 0;
        if (total > 0.0) {
            double target = rng.next_unit() * total;
            double acc = 0.0;
            chosen = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += nearest_d2(i);
                if (acc > target) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = Eigen::Index(rng.next_below(std::uint64_t(n)));
        }
        centroids.row(c) = rows.row(chosen);
        nearest_d2 = nearest_d2.cwiseMin(
            (rows.rowwise() - centroids.row(c)).rowwise().squaredNorm());
    }

    std::vector<std::uint32_t> labels(std::size_t(n), 0);
    std::vector<std::uint32_t> prev_labels;
    std::vector<Eigen::Index> counts(std::size_t(k), 0);
    double inertia = 0.0;
    double prev_inertia = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;

    auto assign = [&]() {
        inertia = 0.0;
        std::fill(counts.begin(), counts.end(), Eigen::Index(0));
        for (Eigen::Index i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int best_c = 0;
            for (int c = 0; c < k; ++c) {
                double d2 = (rows.row(i) - centroids.row(c)).squaredNorm();
                if (d2 < best) {
                    best = d2;
                    best_c = c;
                }
            }
            labels[std::size_t(i)] = std::uint32_t(best_c);
            counts[std::size_t(best_c)] += 1;
            inertia += best;
        }
    };

    for (int iter = 0; iter < params.max_iterations; ++iter) {
        iterations = iter + 1;
        assign();

        // Repair empty clusters from the point farthest from its centroid.
        for (int c = 0; c < k; ++c) {
            if (counts[std::size_t(c)] != 0) continue;
            double worst = -1.0;
            Eigen::Index worst_i = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (counts[labels[std::size_t(i)]] <= 1) continue;
                double d2 = (rows.row(i) - centroids.row(int(labels[std::size_t(i)]))).squaredNorm();
                if (d2 > worst) {
                    worst = d2;
                    worst_i = i;
                }
            }
            if (worst < 0.0) break;  // nothing movable
            inertia -= worst;
            counts[labels[std::size_t(worst_i)]] -= 1;
            labels[std::size_t(worst_i)] = std::uint32_t(c);
            counts[std::size_t(c)] = 1;
            centroids.row(c) = rows.row(worst_i);
        }

        if (inertia > prev_inertia + 1e-9 * (1.0 + prev_inertia)) {
            throw Error("k-means inertia increased across iterations");
        }
        prev_inertia = inertia;

        if (iter > 0 && labels == prev_labels) {
            converged = true;
            break;
        }
        prev_labels = labels;

        // Update step: centroids become member means.
        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, dim);
        for (Eigen::Index i = 0; i < n; ++i) next.row(int(labels[std::size_t(i)])) += rows.row(i);
        double shift = 0.0;
        for (int c = 0; c < k; ++c) {
            next.row(c) /= double(counts[std::size_t(c)]);
            shift = std::max(shift, (next.row(c) - centroids.row(c)).norm());
        }
        centroids = next;
        if (shift < params.shift_tolerance) {
            converged = true;
            break;
        }
    }

    // Final inertia against the final centroids/labels pairing.
    inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        inertia += (rows.row(i) - centroids.row(int(labels[std::size_t(i)]))).squaredNorm();
    }

    ClusterAssignment out;
    out.labels = std::move(labels);
    out.centroids = std::move(centroids);
    out.inertia = inertia;
    out.iterations = iterations;
    out.converged = converged;
    return out;
}

}  // namespace

EigenSolution solve_eigen(const LaplacianMatrix& lap, int count, LaplacianMode mode) {
    const Eigen::Index n = lap.matrix.rows();
    if (count < 1 || Eigen::Index(count) > n) {
        throw InvalidArgument("eigenpair count must satisfy 1 <= count <= N");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    Eigen::MatrixXd vectors;
    if (mode == LaplacianMode::generalized) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (lap.degrees(i) <= 0.0) {
                throw InvalidArgument(
                    "zero-degree vertex " + std::to_string(i) +
                    ": generalized mode undefined; collapse the singleton or use "
                    "unnormalized mode");
            }
        }
        Eigen::VectorXd inv_sqrt = lap.degrees.cwiseSqrt().cwiseInverse();
        Eigen::MatrixXd sym = inv_sqrt.asDiagonal() * lap.matrix * inv_sqrt.asDiagonal();
        sym = 0.5 * (sym + sym.transpose());  // scrub round-off asymmetry
        solver.compute(sym);
        vectors = inv_sqrt.asDiagonal() * solver.eigenvectors();
    } else {
        solver.compute(lap.matrix);
        vectors = solver.eigenvectors();
    }
    if (solver.info() != Eigen::Success) throw Error("eigendecomposition failed to converge");

    EigenSolution out;
    out.mode = mode;
    out.eigenvalues = solver.eigenvalues().head(count);
    out.eigenvectors = vectors.leftCols(count);

    const double norm = lap.matrix.norm();
    const double bound = kResidualBound * std::max(norm, 1.0);
    for (int i = 0; i < count; ++i) {
        Eigen::VectorXd residual = lap.matrix * out.eigenvectors.col(i);
        if (mode == LaplacianMode::generalized) {
            residual -= out.eigenvalues(i) * lap.degrees.cwiseProduct(out.eigenvectors.col(i));
        } else {
            residual -= out.eigenvalues(i) * out.eigenvectors.col(i);
        }
        if (residual.norm() > bound) {
            throw Error("eigenpair " + std::to_string(i) + " residual " +
                        std::to_string(residual.norm()) + " exceeds bound");
        }
    }
    return out;
}

SpectralEmbedding embed(const EigenSolution& solution, int k) {
    if (k < 1 || k > solution.count()) {
        throw InvalidArgument("embedding width " + std::to_string(k) + " exceeds the " +
                              std::to_string(solution.count()) + " available eigenpairs");
    }
    SpectralEmbedding out;
    out.coords = solution.eigenvectors.leftCols(k);
    return out;
}

ClusterAssignment kmeans(const Eigen::MatrixXd& rows, int k, std::uint64_t seed,
                         const KMeansParams& params) {
    const Eigen::Index n = rows.rows();
    if (k < 1) throw InvalidArgument("k must be at least 1");
    if (Eigen::Index(k) > n) throw InvalidArgument("k exceeds the number of rows");
    if (params.restarts < 1 || params.max_iterations < 1) {
        throw InvalidArgument("restarts and max_iterations must be at least 1");
    }
    std::size_t distinct = count_distinct_rows(rows);
    if (std::size_t(k) > distinct) {
        throw InvalidArgument("k=" + std::to_string(k) + " exceeds the " +
                              std::to_string(distinct) + " distinct rows (" +
                              std::to_string(std::size_t(n) - distinct) + " duplicate rows)");
    }

    Rng root(seed);
    ClusterAssignment best;
    bool have_best = false;
    for (int r = 0; r < params.restarts; ++r) {
        ClusterAssignment run = lloyd_once(rows, k, root.fork(std::uint64_t(r)), params);
        if (!have_best || run.inertia < best.inertia) {
            best = std::move(run);
            have_best = true;
        }
    }
    return best;
}

ClusterAssignment cluster_events(const Eigen::MatrixXd& points, const NeighborGraph& graph,
                                 int k, const SolverConfig& cfg) {
    if (std::size_t(points.rows()) != graph.node_count) {
        throw InvalidArgument("point count does not match graph node count");
    }
    LaplacianMatrix lap = laplacian(graph);
    EigenSolution solution = solve_eigen(lap, k, cfg.mode);
    SpectralEmbedding embedding = embed(solution, k);
    return kmeans(embedding.coords, k, cfg.seed, cfg.kmeans);
}

}  // namespace evmod
