#pragma once
// Stage 2: over-cluster the embeddings and give every member of a cluster
// the weak label that cluster's members were matched to most often.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "entdisc/bipartite.hpp"
#include "entdisc/clustering.hpp"
#include "entdisc/kmeans.hpp"
#include "entdisc/vocab.hpp"
#include "entdisc/ward.hpp"

namespace entdisc {

enum class ClustererKind { Auto, KMeans, Ward };

inline ClustererKind parse_clusterer(const std::string& s) {
    if (s == "auto") return ClustererKind::Auto;
    if (s == "kmeans") return ClustererKind::KMeans;
    if (s == "ward") return ClustererKind::Ward;
    throw ConfigError("unknown clusterer '" + s + "' (expected auto, kmeans or ward)");
}

inline std::string to_string(ClustererKind k) {
    switch (k) {
        case ClustererKind::Auto: return "auto";
        case ClustererKind::KMeans: return "kmeans";
        case ClustererKind::Ward: return "ward";
    }
    return "auto";
}

// How a detection's weak-label multiset enters the cluster tally.
enum class VoteMultiplicity { Multiset, Set };

inline constexpr std::size_t kWardMaxPoints = 20000;
inline constexpr std::size_t kDefaultWardK = 20;
inline constexpr std::size_t kDefaultKMeansK = 30;

struct ClusterConfig {
    ClustererKind kind = ClustererKind::Auto;
    std::size_t k = 0;  // 0 -> default for the resolved clusterer
    std::uint64_t seed = 0;
    bool l2_normalize = false;
    std::size_t max_iters = 300;
    double tol = 1e-6;
    std::size_t n_init = 1;
    VoteMultiplicity votes = VoteMultiplicity::Multiset;

    // Fixes kind and k for a dataset of n points.
    ClusterConfig resolved(std::size_t n) const {
        ClusterConfig c = *this;
        if (c.kind == ClustererKind::Auto)
            c.kind = n <= kWardMaxPoints ? ClustererKind::Ward : ClustererKind::KMeans;
        if (c.k == 0) c.k = c.kind == ClustererKind::Ward ? kDefaultWardK : kDefaultKMeansK;
        return c;
    }
};

inline Matrix l2_normalized(Matrix m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        double norm = 0.0;
        for (double v : r) norm += v * v;
        norm = std::sqrt(norm);
        if (norm > 0.0)
            for (auto& v : r) v /= norm;
    }
    return m;
}

inline ClusterAssignment run_clusterer(const Matrix& points, const ClusterConfig& config) {
    const auto cfg = config.resolved(points.rows());
    if (cfg.l2_normalize) {
        ClusterConfig raw = cfg;
        raw.l2_normalize = false;
        return run_clusterer(l2_normalized(points), raw);
    }
    if (cfg.kind == ClustererKind::Ward) return agglomerative_ward(points, cfg.k);
    return kmeans(points, cfg.k, {cfg.seed, cfg.max_iters, cfg.tol, cfg.n_init});
}

struct CleansedLabels {
    Labels labels;                                             // per detection
    std::vector<std::string> cluster_labels;                   // per cluster
    std::vector<std::map<std::string, std::size_t>> cluster_votes;
};

// Majority vote per cluster. Ties fall to the higher global vocabulary
// frequency, then the lexicographically smaller name; a cluster with no
// votes at all becomes unknown. `weak` is aligned with the clustered points.
inline CleansedLabels majority_assign(const ClusterAssignment& clusters,
                                      const std::vector<WeakLabelSet>& weak,
                                      const EntityVocabulary& vocab,
                                      VoteMultiplicity multiplicity = VoteMultiplicity::Multiset) {
    if (clusters.assignment.size() != weak.size())
        throw ArgumentError("majority_assign: clusters and weak labels cover different detections");
    CleansedLabels out;
    out.cluster_votes.resize(clusters.k);
    for (std::size_t i = 0; i < weak.size(); ++i) {
        auto& tally = out.cluster_votes.at(clusters.assignment[i]);
        const auto& cands = weak[i].candidates;
        for (std::size_t j = 0; j < cands.size(); ++j) {
            // candidates are sorted, so duplicates are adjacent
            if (multiplicity == VoteMultiplicity::Set && j > 0 && cands[j] == cands[j - 1]) continue;
            ++tally[cands[j]];
        }
    }
    out.cluster_labels.reserve(clusters.k);
    for (const auto& tally : out.cluster_votes) {
        const std::string* best = nullptr;
        std::size_t best_count = 0;
        for (const auto& [name, count] : tally) {
            if (!best || count > best_count || (count == best_count && vocab.preferred(name, *best))) {
                best = &name;
                best_count = count;
            }
        }
        out.cluster_labels.push_back(best ? *best : vocab.unknown_name);
    }
    out.labels.reserve(weak.size());
    for (auto c : clusters.assignment) out.labels.push_back(out.cluster_labels[c]);
    return out;
}

}  // namespace entdisc
