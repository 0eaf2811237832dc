#pragma once
// Agglomerative clustering with Ward linkage.
//
// Distances are Ward merge costs |A||B|/(|A|+|B|) * ||mean_A - mean_B||^2,
// kept in a condensed upper-triangular matrix and updated with the
// Lance-Williams recurrence. Each active row caches its nearest neighbour
// among higher-indexed clusters, so the globally cheapest merge is found in
// O(n). Ties go to the lexicographically smallest (i, j) pair; the merged
// cluster keeps the smaller index. Memory is O(n^2).

#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "entdisc/clustering.hpp"
#include "entdisc/core.hpp"

namespace entdisc {

struct WardMerge {
    std::size_t kept;     // surviving cluster slot (smaller index)
    std::size_t removed;  // absorbed cluster slot
    double cost;
};

namespace detail {

class CondensedMatrix {
public:
    explicit CondensedMatrix(std::size_t n) : n_(n), data_(n < 2 ? 0 : n * (n - 1) / 2) {}

    double& at(std::size_t i, std::size_t j) { return data_[index(i, j)]; }
    double at(std::size_t i, std::size_t j) const { return data_[index(i, j)]; }

private:
    std::size_t index(std::size_t i, std::size_t j) const {
        if (i > j) std::swap(i, j);
        return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
    }

    std::size_t n_;
    std::vector<double> data_;
};

}  // namespace detail

inline ClusterAssignment agglomerative_ward(const Matrix& points, std::size_t k,
                                            std::vector<WardMerge>* merges_out = nullptr) {
    check_cluster_args(points, k, "agglomerative_ward");
    const std::size_t n = points.rows();
    constexpr auto kNone = static_cast<std::size_t>(-1);
    constexpr double kInf = std::numeric_limits<double>::infinity();

    detail::CondensedMatrix dist(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            dist.at(i, j) = 0.5 * squared_distance(points.row(i), points.row(j));

    std::vector<bool> active(n, true);
    std::vector<double> size(n, 1.0);
    std::vector<std::size_t> nn(n, kNone);
    std::vector<double> nn_dist(n, kInf);

    auto refresh = [&](std::size_t i) {
        nn[i] = kNone;
        nn_dist[i] = kInf;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!active[j]) continue;
            const double d = dist.at(i, j);
            if (d < nn_dist[i]) {
                nn_dist[i] = d;
                nn[i] = j;
            }
        }
    };
    for (std::size_t i = 0; i < n; ++i) refresh(i);

    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    std::size_t clusters = n;
    while (clusters > k) {
        std::size_t a = kNone;
        for (std::size_t i = 0; i < n; ++i)
            if (active[i] && nn[i] != kNone && (a == kNone || nn_dist[i] < nn_dist[a])) a = i;
        const std::size_t b = nn[a];
        const double cost = nn_dist[a];
        const double na = size[a], nb = size[b];

        for (std::size_t c = 0; c < n; ++c) {
            if (!active[c] || c == a || c == b) continue;
            const double nc = size[c];
            dist.at(a, c) = ((na + nc) * dist.at(a, c) + (nb + nc) * dist.at(b, c) - nc * cost) /
                            (na + nb + nc);
        }
        size[a] = na + nb;
        active[b] = false;
        parent[b] = a;
        --clusters;
        if (merges_out) merges_out->push_back({a, b, cost});

        refresh(a);
        for (std::size_t i = 0; i < b; ++i) {
            if (!active[i] || i == a) continue;
            if (nn[i] == a || nn[i] == b) {
                refresh(i);
            } else if (i < a) {
                const double d = dist.at(i, a);
                if (d < nn_dist[i] || (d == nn_dist[i] && a < nn[i])) {
                    nn_dist[i] = d;
                    nn[i] = a;
                }
            }
        }
    }

    ClusterAssignment out;
    out.assignment.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = i;
        while (parent[r] != r) r = parent[r];
        out.assignment[i] = r;
    }
    out.k = canonicalize_labels(out.assignment);
    out.objective = partition_objective(points, out.assignment, out.k);
    return out;
}

}  // namespace entdisc
