#pragma once
// Shared result type and objective helpers for the clusterers.

#include <cstddef>
#include <vector>

#include "entdisc/core.hpp"
#include "entdisc/errors.hpp"

namespace entdisc {

struct ClusterAssignment {
    std::size_t k = 0;
    std::vector<std::size_t> assignment;  // point -> cluster in [0, k)
    Matrix centroids;                     // k x d; filled by k-means only
    double objective = 0.0;               // within-cluster sum of squared distances
    std::vector<double> objective_trace;  // per Lloyd iteration (k-means only)
    std::size_t iterations = 0;
    std::size_t monotonicity_violations = 0;
};

// Per-cluster means of the given partition; empty clusters get a zero row.
inline Matrix cluster_means(const Matrix& points, const std::vector<std::size_t>& assignment,
                            std::size_t k, std::vector<std::size_t>* sizes_out = nullptr) {
    Matrix means(k, points.cols());
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        const auto c = assignment[i];
        ++sizes[c];
        auto dst = means.row(c);
        auto src = points.row(i);
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
    for (std::size_t c = 0; c < k; ++c)
        if (sizes[c] > 0)
            for (auto& v : means.row(c)) v /= static_cast<double>(sizes[c]);
    if (sizes_out) *sizes_out = std::move(sizes);
    return means;
}

inline double objective_against(const Matrix& points, const std::vector<std::size_t>& assignment,
                                const Matrix& centroids) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.rows(); ++i)
        total += squared_distance(points.row(i), centroids.row(assignment[i]));
    return total;
}

// Sum of squared distances of each point to its cluster mean.
inline double partition_objective(const Matrix& points, const std::vector<std::size_t>& assignment,
                                  std::size_t k) {
    return objective_against(points, assignment, cluster_means(points, assignment, k));
}

// Renumbers clusters by first appearance in point order.
inline std::size_t canonicalize_labels(std::vector<std::size_t>& assignment) {
    std::vector<std::size_t> remap;
    std::size_t next = 0;
    for (auto& a : assignment) {
        if (a >= remap.size()) remap.resize(a + 1, static_cast<std::size_t>(-1));
        if (remap[a] == static_cast<std::size_t>(-1)) remap[a] = next++;
        a = remap[a];
    }
    return next;
}

inline void check_cluster_args(const Matrix& points, std::size_t k, const char* who) {
    if (points.empty()) throw ArgumentError(std::string(who) + ": empty input");
    if (k < 1) throw ArgumentError(std::string(who) + ": k must be >= 1");
    if (k > points.rows())
        throw ArgumentError(std::string(who) + ": k = " + std::to_string(k) + " exceeds n = " +
                            std::to_string(points.rows()));
}

}  // namespace entdisc
