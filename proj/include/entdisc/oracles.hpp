#pragma once
// Slow reference clusterers used to cross-check the fast ones.

#include <limits>
#include <vector>

#include "entdisc/clustering.hpp"
#include "entdisc/core.hpp"

namespace entdisc {

inline constexpr std::size_t kBruteForceMaxPoints = 10;

// Exhaustive search over set partitions into at most k blocks, enumerated
// as restricted growth strings. The first optimum found is kept, so the
// result is already in first-appearance label order.
inline ClusterAssignment brute_force_kmeans(const Matrix& points, std::size_t k) {
    check_cluster_args(points, k, "brute_force_kmeans");
    const std::size_t n = points.rows();
    if (n > kBruteForceMaxPoints)
        throw ArgumentError("brute_force_kmeans: n = " + std::to_string(n) + " exceeds " +
                            std::to_string(kBruteForceMaxPoints));
    ClusterAssignment best;
    best.objective = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> a(n, 0);
    auto visit = [&](auto&& self, std::size_t i, std::size_t blocks) -> void {
        if (i == n) {
            const double obj = partition_objective(points, a, blocks);
            if (obj < best.objective) {
                best.objective = obj;
                best.assignment = a;
                best.k = blocks;
            }
            return;
        }
        const std::size_t limit = i == 0 ? 1 : std::min(blocks + 1, k);
        for (std::size_t c = 0; c < limit; ++c) {
            a[i] = c;
            self(self, i + 1, std::max(blocks, c + 1));
        }
    };
    visit(visit, 0, 0);
    best.centroids = cluster_means(points, best.assignment, best.k);
    return best;
}

// Naive Ward agglomeration: every step recomputes cluster means and scans
// all pairs for the cheapest merge. Same tie and index conventions as
// agglomerative_ward.
inline ClusterAssignment reference_ward(const Matrix& points, std::size_t k) {
    check_cluster_args(points, k, "reference_ward");
    const std::size_t n = points.rows();
    const std::size_t d = points.cols();
    std::vector<std::vector<std::size_t>> members(n);
    for (std::size_t i = 0; i < n; ++i) members[i] = {i};
    std::size_t clusters = n;
    while (clusters > k) {
        std::vector<std::vector<double>> mean(n);
        for (std::size_t c = 0; c < n; ++c) {
            if (members[c].empty()) continue;
            mean[c].assign(d, 0.0);
            for (auto p : members[c])
                for (std::size_t j = 0; j < d; ++j) mean[c][j] += points(p, j);
            for (auto& v : mean[c]) v /= static_cast<double>(members[c].size());
        }
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (members[i].empty()) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (members[j].empty()) continue;
                const double na = static_cast<double>(members[i].size());
                const double nb = static_cast<double>(members[j].size());
                const double cost = na * nb / (na + nb) * squared_distance(mean[i], mean[j]);
                if (cost < best) {
                    best = cost;
                    bi = i;
                    bj = j;
                }
            }
        }
        members[bi].insert(members[bi].end(), members[bj].begin(), members[bj].end());
        members[bj].clear();
        --clusters;
    }
    ClusterAssignment out;
    out.assignment.resize(n);
    for (std::size_t c = 0; c < n; ++c)
        for (auto p : members[c]) out.assignment[p] = c;
    out.k = canonicalize_labels(out.assignment);
    out.objective = partition_objective(points, out.assignment, out.k);
    return out;
}

}  // namespace entdisc
