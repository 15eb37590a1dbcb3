#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <set>
#include <vector>

#include "evmod/error.hpp"
#include "evmod/graph.hpp"
#include "evmod/model_select.hpp"
#include "evmod/rng.hpp"
#include "oracles.hpp"

using namespace evmod;

namespace {

Eigen::MatrixXd line_points(std::initializer_list<double> xs) {
    Eigen::MatrixXd pts(Eigen::Index(xs.size()), 1);
    Eigen::Index i = 0;
    for (double x : xs) pts(i++, 0) = x;
    return pts;
}

Eigen::MatrixXd random_labeled_set(Eigen::Index n, Eigen::Index dims, int clusters,
                                   std::uint64_t seed, std::vector<std::uint32_t>& labels) {
    Rng rng(seed);
    Eigen::MatrixXd pts(n, dims);
    labels.resize(std::size_t(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        // Guarantee every cluster id appears at least once.
        labels[std::size_t(i)] = i < clusters ? std::uint32_t(i)
                                              : std::uint32_t(rng.next_below(std::uint64_t(clusters)));
        for (Eigen::Index d = 0; d < dims; ++d) pts(i, d) = rng.next_unit() * 4.0 - 2.0;
    }
    return pts;
}

}  // namespace

TEST_CASE("hand-worked one-dimensional silhouette") {
    // Points 0, 1 in one cluster; 5, 6 in the other.
    // For point 0: a = 1, b = (5 + 6) / 2 = 5.5, s = 4.5 / 5.5 = 9/11.
    Eigen::MatrixXd pts = line_points({0.0, 1.0, 5.0, 6.0});
    std::vector<std::uint32_t> labels{0, 0, 1, 1};
    SilhouetteReport r = silhouette(pts, labels);
    REQUIRE(r.per_point.size() == 4);
    CHECK(r.per_point[0] == doctest::Approx(9.0 / 11.0).epsilon(1e-12));
    CHECK(r.k == 2);

    std::vector<double> expected = oracle::silhouette_values(pts, labels);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(r.per_point[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }
}

TEST_CASE("two internally identical, far-apart clusters score 1") {
    Eigen::MatrixXd pts(6, 2);
    pts << 0, 0, 0, 0, 0, 0, 9, 9, 9, 9, 9, 9;
    std::vector<std::uint32_t> labels{0, 0, 0, 1, 1, 1};
    SilhouetteReport r = silhouette(pts, labels);
    for (double s : r.per_point) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.mean == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a point equidistant between clusters scores 0") {
    // Middle point: a = |1-0| = 1, b = |2-1| = 1, s = 0.
    Eigen::MatrixXd pts = line_points({0.0, 1.0, 2.0});
    std::vector<std::uint32_t> labels{0, 0, 1};
    SilhouetteReport r = silhouette(pts, labels);
    CHECK(r.per_point[1] == doctest::Approx(0.0));
}

TEST_CASE("singleton clusters take a = 0") {
    Eigen::MatrixXd pts = line_points({0.0, 10.0, 11.0});
    std::vector<std::uint32_t> labels{0, 1, 1};
    SilhouetteReport r = silhouette(pts, labels);
    // Point 0: a = 0, b = 10.5, s = 1.
    CHECK(r.per_point[0] == doctest::Approx(1.0));
}

TEST_CASE("silhouette rejects degenerate inputs") {
    Eigen::MatrixXd pts = line_points({0.0, 1.0, 2.0});
    CHECK_THROWS_AS(silhouette(pts, {0, 0, 0}), InvalidArgument);          // one cluster
    CHECK_THROWS_AS(silhouette(pts, {0, 1}), InvalidArgument);             // size mismatch
    CHECK_THROWS_AS(silhouette(line_points({0.0, 1.0}), {0, 1}), InvalidArgument);  // N < 3
    CHECK_THROWS_AS(silhouette(Eigen::MatrixXd(0, 2), {}), InvalidArgument);
}

TEST_CASE("silhouette matches the direct evaluation on random sets") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        std::vector<std::uint32_t> labels;
        const Eigen::Index n = 20 + Eigen::Index(seed * 3 % 180);
        const int clusters = 2 + int(seed % 5);
        Eigen::MatrixXd pts = random_labeled_set(n, 3, clusters, seed + 100, labels);

        SilhouetteReport r = silhouette(pts, labels);
        std::vector<double> expected = oracle::silhouette_values(pts, labels);
        REQUIRE(r.per_point.size() == expected.size());
        double mean = 0.0;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            CHECK(std::abs(r.per_point[i] - expected[i]) < 1e-10);
            CHECK(r.per_point[i] >= -1.0);
            CHECK(r.per_point[i] <= 1.0);
            mean += r.per_point[i];
        }
        CHECK(r.mean == doctest::Approx(mean / double(expected.size())).epsilon(1e-12));
    }
}

TEST_CASE("silhouette is invariant under uniform scaling") {
    std::vector<std::uint32_t> labels;
    Eigen::MatrixXd pts = random_labeled_set(120, 3, 4, 7, labels);
    SilhouetteReport base = silhouette(pts, labels);
    for (double c : {0.001, 7.3, 10000.0}) {
        SilhouetteReport scaled = silhouette((pts * c).eval(), labels);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            CHECK(std::abs(scaled.per_point[i] - base.per_point[i]) < 1e-10);
        }
    }
}

TEST_CASE("sparse label ids are accepted") {
    Eigen::MatrixXd pts = line_points({0.0, 1.0, 50.0, 51.0});
    std::vector<std::uint32_t> sparse{7, 7, 400, 400};
    std::vector<std::uint32_t> dense{0, 0, 1, 1};
    SilhouetteReport a = silhouette(pts, sparse);
    SilhouetteReport b = silhouette(pts, dense);
    CHECK(a.per_point == b.per_point);
}

TEST_CASE("a single-candidate sweep returns that k") {
    Rng rng(19);
    Eigen::MatrixXd pts(40, 3);
    for (Eigen::Index i = 0; i < 40; ++i) {
        const double base = i < 20 ? 0.0 : 5.0;
        for (int d = 0; d < 3; ++d) pts(i, d) = base + rng.next_unit();
    }
    NeighborGraph g = build_knn_graph(pts, 6);
    SweepResult r = sweep_k(pts, g, {3, 3}, {});
    CHECK(r.best_k == 3);
    REQUIRE(r.candidates.size() == 1);
    CHECK(r.sc == r.candidates[0].mean_silhouette);
    CHECK(r.assignment.labels.size() == 40);
}

TEST_CASE("the sweep picks the planted cluster count") {
    // Two tight, far-apart blobs: the silhouette peak must land on k = 2 and
    // the winning assignment must match the blobs.
    Rng rng(23);
    Eigen::MatrixXd pts(60, 3);
    std::vector<std::uint32_t> truth(60);
    for (Eigen::Index i = 0; i < 60; ++i) {
        const bool second = i >= 30;
        truth[std::size_t(i)] = second ? 1 : 0;
        for (int d = 0; d < 3; ++d) {
            pts(i, d) = (second && d == 0 ? 10.0 : 0.0) + rng.next_unit();
        }
    }
    NeighborGraph g = build_knn_graph(pts, 8);
    SweepResult r = sweep_k(pts, g, {2, 7}, {});
    CHECK(r.best_k == 2);
    CHECK(oracle::same_partition(r.assignment.labels, truth));

    // Structural invariants of the result.
    REQUIRE(!r.candidates.empty());
    double best = r.candidates[0].mean_silhouette;
    for (const SweepCandidate& c : r.candidates) best = std::max(best, c.mean_silhouette);
    CHECK(r.sc == best);
    // Ties break toward the smallest k: nothing smaller than best_k may
    // reach the winning score.
    for (const SweepCandidate& c : r.candidates) {
        if (c.k < r.best_k) CHECK(c.mean_silhouette < r.sc);
    }
}

TEST_CASE("sweep bounds are validated") {
    Rng rng(29);
    Eigen::MatrixXd pts(10, 2);
    for (Eigen::Index i = 0; i < 10; ++i)
        for (int d = 0; d < 2; ++d) pts(i, d) = rng.next_unit();
    NeighborGraph g = build_knn_graph(pts, 3);
    CHECK_THROWS_AS(sweep_k(pts, g, {1, 3}, {}), InvalidArgument);
    CHECK_THROWS_AS(sweep_k(pts, g, {5, 3}, {}), InvalidArgument);
    CHECK_THROWS_AS(sweep_k(pts, g, {2, 10}, {}), InvalidArgument);  // hi > N-1
}

TEST_CASE("a sweep where every k fails reports the reasons") {
    Rng rng(31);
    Eigen::MatrixXd pts(12, 2);
    for (Eigen::Index i = 0; i < 12; ++i)
        for (int d = 0; d < 2; ++d) pts(i, d) = rng.next_unit();
    NeighborGraph g = build_knn_graph(pts, 3);
    SweepConfig cfg;
    cfg.solver.kmeans.restarts = 0;  // clustering cannot run at any k
    CHECK_THROWS_AS(sweep_k(pts, g, {2, 4}, cfg), Error);
}

TEST_CASE("sweep is deterministic for a fixed solver seed") {
    Rng rng(37);
    Eigen::MatrixXd pts(50, 3);
    for (Eigen::Index i = 0; i < 50; ++i)
        for (int d = 0; d < 3; ++d)
            pts(i, d) = (i >= 25 && d == 1 ? 8.0 : 0.0) + rng.next_unit();
    NeighborGraph g = build_knn_graph(pts, 6);
    SweepResult a = sweep_k(pts, g, {2, 6}, {});
    SweepResult b = sweep_k(pts, g, {2, 6}, {});
    CHECK(a.best_k == b.best_k);
    CHECK(a.sc == b.sc);
    CHECK(a.assignment.labels == b.assignment.labels);
    REQUIRE(a.candidates.size() == b.candidates.size());
    for (std::size_t i = 0; i < a.candidates.size(); ++i) {
        CHECK(a.candidates[i].mean_silhouette == b.candidates[i].mean_silhouette);
    }
}
