#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "evmod/graph.hpp"

namespace evmod {

// Which eigenproblem the embedding comes from: L u = lambda u, or the
// degree-generalized L u = lambda D u.
enum class LaplacianMode { unnormalized, generalized };

// Smallest eigenpairs, eigenvalues ascending. Every returned pair satisfies
// ||L u - lambda u|| (or ||L u - lambda D u||) <= 1e-8 ||L||_F.
struct EigenSolution {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;  // column i pairs with eigenvalues(i)
    LaplacianMode mode = LaplacianMode::generalized;

    int count() const { return int(eigenvalues.size()); }
};

// N x k matrix whose columns are the first k eigenvectors; row i is the
// spectral-space coordinate of point i.
struct SpectralEmbedding {
    Eigen::MatrixXd coords;
};

struct KMeansParams {
    int restarts = 10;
    int max_iterations = 300;
    double shift_tolerance = 1e-10;
};

struct ClusterAssignment {
    std::vector<std::uint32_t> labels;  // values in [0, k)
    Eigen::MatrixXd centroids;          // k x d
    double inertia = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct SolverConfig {
    LaplacianMode mode = LaplacianMode::generalized;
    KMeansParams kmeans;
    std::uint64_t seed = 1;
};

// Smallest `count` eigenpairs of the chosen problem. The generalized problem
// is reduced to the symmetric D^{-1/2} L D^{-1/2} form and eigenvectors are
// back-substituted; a zero-degree vertex makes that reduction impossible and
// is reported as an error.
EigenSolution solve_eigen(const LaplacianMatrix& lap, int count, LaplacianMode mode);

SpectralEmbedding embed(const EigenSolution& solution, int k);

// Lloyd iterations with probability-proportional-to-squared-distance seeding,
// best of `restarts` runs by inertia (ties: lowest restart index). Empty
// clusters are repaired by reseeding at the farthest point. Deterministic for
// a fixed seed.
ClusterAssignment kmeans(const Eigen::MatrixXd& rows, int k, std::uint64_t seed,
                         const KMeansParams& params = {});

// Full spectral clustering of graph vertices into k clusters: Laplacian,
// first k eigenvectors, rows as features, k-means. Point i receives the label
// of embedding row i.
ClusterAssignment cluster_events(const Eigen::MatrixXd& points, const NeighborGraph& graph,
                                 int k, const SolverConfig& cfg);

}  // namespace evmod
