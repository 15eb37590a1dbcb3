#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "evmod/graph.hpp"
#include "evmod/spectral.hpp"

namespace evmod {

// Distance space for silhouette evaluation. Means are only comparable across
// k when the space does not change with k, so original_spacetime is the
// default for sweeps.
enum class SilhouetteSpace {
    original_spacetime,
    embedding,
};

struct SilhouetteReport {
    std::vector<double> per_point;  // s(i), each in [-1, 1]
    double mean = 0.0;
    int k = 0;
    SilhouetteSpace distance_space = SilhouetteSpace::original_spacetime;
};

struct KRange {
    int lo = 2;
    int hi = 10;
};

struct SweepCandidate {
    int k = 0;
    double mean_silhouette = 0.0;
};

struct SkippedK {
    int k = 0;
    std::string reason;
};

struct SweepConfig {
    SolverConfig solver;
    SilhouetteSpace silhouette_space = SilhouetteSpace::original_spacetime;
};

struct SweepResult {
    std::vector<SweepCandidate> candidates;  // ascending k, failures omitted
    std::vector<SkippedK> skipped;
    int best_k = 0;
    double sc = 0.0;  // max over candidates of the mean silhouette
    ClusterAssignment assignment;  // the clustering at best_k, not recomputed
};

// Per-point silhouette over the given coordinates. Labels must cover at
// least two non-empty clusters and N >= 3. Singleton clusters get a(i) = 0;
// s(i) = 0 whenever max(a, b) = 0.
SilhouetteReport silhouette(const Eigen::MatrixXd& points,
                            const std::vector<std::uint32_t>& labels,
                            SilhouetteSpace space = SilhouetteSpace::original_spacetime);

// Clusters the graph vertices at every k in [range.lo, range.hi] and keeps
// the k with the highest mean silhouette (ties break toward smaller k). The
// eigensolve is shared across the sweep. A k whose clustering fails is
// recorded in `skipped` rather than aborting; the sweep only throws when no
// k succeeds. `points` must be the vertex coordinates the graph was built
// on; they double as the silhouette space in original_spacetime mode.
SweepResult sweep_k(const Eigen::MatrixXd& points, const NeighborGraph& graph,
                    KRange range, const SweepConfig& cfg);

}  // namespace evmod
