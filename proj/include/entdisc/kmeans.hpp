#pragma once
// Lloyd's k-means with k-means++ seeding.
//
// Points only switch cluster on a strict distance improvement, so the
// assignment step can never raise the objective; the update step moves each
// centroid to its members' mean. objective_trace records the objective after
// every assignment step and any increase is counted as a violation.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "entdisc/clustering.hpp"
#include "entdisc/core.hpp"
#include "entdisc/rng.hpp"

namespace entdisc {

struct KMeansOptions {
    std::uint64_t seed = 0;
    std::size_t max_iters = 300;
    double tol = 1e-6;       // on the maximum centroid displacement
    std::size_t n_init = 1;  // restarts; the lowest objective wins
};

namespace detail {

inline Matrix kmeanspp_init(const Matrix& points, std::size_t k, Rng& rng) {
    const std::size_t n = points.rows();
    Matrix centroids(k, points.cols());
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::size_t pick = rng.below(n);
    for (std::size_t c = 0; c < k; ++c) {
        std::copy(points.row(pick).begin(), points.row(pick).end(), centroids.row(c).begin());
        if (c + 1 == k) break;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_distance(points.row(i), centroids.row(c)));
            total += d2[i];
        }
        pick = total > 0.0 ? rng.weighted(d2) : rng.below(n);
    }
    return centroids;
}

inline std::size_t nearest_centroid(std::span<const double> x, const Matrix& centroids,
                                    std::size_t current, double* best_out) {
    std::size_t best = current;
    double best_d = current < centroids.rows() ? squared_distance(x, centroids.row(current))
                                               : std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
        const double d = squared_distance(x, centroids.row(c));
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    if (best_out) *best_out = best_d;
    return best;
}

// Moves the point farthest from its centroid into every empty cluster.
inline void repair_empty_clusters(const Matrix& points, std::vector<std::size_t>& assignment,
                                  Matrix& centroids) {
    const std::size_t k = centroids.rows();
    std::vector<std::size_t> sizes(k, 0);
    for (auto a : assignment) ++sizes[a];
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] > 0) continue;
        std::size_t far = points.rows();
        double far_d = -1.0;
        for (std::size_t i = 0; i < points.rows(); ++i) {
            if (sizes[assignment[i]] < 2) continue;
            const double d = squared_distance(points.row(i), centroids.row(assignment[i]));
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        if (far == points.rows()) continue;
        --sizes[assignment[far]];
        assignment[far] = c;
        ++sizes[c];
        std::copy(points.row(far).begin(), points.row(far).end(), centroids.row(c).begin());
    }
}

inline ClusterAssignment lloyd(const Matrix& points, Matrix centroids, const KMeansOptions& opt) {
    const std::size_t n = points.rows();
    const std::size_t k = centroids.rows();
    ClusterAssignment out;
    out.k = k;
    out.assignment.assign(n, k);  // k = "unassigned"
    for (std::size_t i = 0; i < n; ++i)
        out.assignment[i] = nearest_centroid(points.row(i), centroids, k, nullptr);
    double prev = objective_against(points, out.assignment, centroids);
    out.objective_trace.push_back(prev);

    for (std::size_t it = 0; it < opt.max_iters; ++it) {
        repair_empty_clusters(points, out.assignment, centroids);
        Matrix updated = cluster_means(points, out.assignment, k);
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c)
            shift = std::max(shift, std::sqrt(squared_distance(updated.row(c), centroids.row(c))));
        centroids = std::move(updated);

        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = nearest_centroid(points.row(i), centroids, out.assignment[i], nullptr);
            if (c != out.assignment[i]) {
                out.assignment[i] = c;
                changed = true;
            }
        }
        const double obj = objective_against(points, out.assignment, centroids);
        if (obj > prev) ++out.monotonicity_violations;
        out.objective_trace.push_back(obj);
        prev = obj;
        out.iterations = it + 1;
        if (!changed || shift < opt.tol) break;
    }

    // Leave centroids at the exact means of the final partition.
    repair_empty_clusters(points, out.assignment, centroids);
    out.centroids = cluster_means(points, out.assignment, k);
    out.objective = objective_against(points, out.assignment, out.centroids);
    if (out.objective > prev) ++out.monotonicity_violations;
    if (out.objective != prev) out.objective_trace.push_back(out.objective);
    return out;
}

}  // namespace detail

// Lloyd iterations from caller-supplied initial centroids.
inline ClusterAssignment kmeans_from(const Matrix& points, Matrix initial_centroids,
                                     const KMeansOptions& opt = {}) {
    check_cluster_args(points, initial_centroids.rows(), "kmeans");
    if (initial_centroids.cols() != points.cols())
        throw ArgumentError("kmeans: centroid dimension mismatch");
    return detail::lloyd(points, std::move(initial_centroids), opt);
}

inline ClusterAssignment kmeans(const Matrix& points, std::size_t k, const KMeansOptions& opt = {}) {
    check_cluster_args(points, k, "kmeans");
    ClusterAssignment best;
    const std::size_t restarts = std::max<std::size_t>(opt.n_init, 1);
    for (std::size_t r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(r)));
        auto result = detail::lloyd(points, detail::kmeanspp_init(points, k, rng), opt);
        if (r == 0 || result.objective < best.objective) best = std::move(result);
    }
    return best;
}

}  // namespace entdisc
