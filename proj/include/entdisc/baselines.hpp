#pragma once
// Comparison methods: direct matching for frames with a single name
// (remaining detections go through cluster agreement) and uniform random
// labelling.

#include <string>
#include <vector>

#include "entdisc/bipartite.hpp"
#include "entdisc/cluster_agree.hpp"
#include "entdisc/core.hpp"
#include "entdisc/linear.hpp"
#include "entdisc/rng.hpp"
#include "entdisc/vocab.hpp"

namespace entdisc {

struct LimsiResult {
    Labels labels;
    std::vector<bool> direct;               // per detection
    std::vector<std::size_t> clustered;     // indices that went through clustering
    std::optional<ClusterAssignment> clusters;
};

// A detection whose weak candidates hold exactly one distinct name takes
// that name. Everything else is clustered on its own, with k clamped to the
// number of deferred detections.
inline LimsiResult limsi_assign(const Dataset& ds, const EntityVocabulary& vocab,
                                const std::vector<WeakLabelSet>& weak, const ClusterConfig& config) {
    if (weak.size() != ds.detections.size()) throw ArgumentError("limsi_assign: weak labels misaligned");
    LimsiResult r;
    r.labels.assign(ds.detections.size(), vocab.unknown_name);
    r.direct.assign(ds.detections.size(), false);
    for (std::size_t i = 0; i < weak.size(); ++i) {
        const auto& c = weak[i].candidates;
        if (!c.empty() && c.front() == c.back()) {
            r.labels[i] = c.front();
            r.direct[i] = true;
        } else {
            r.clustered.push_back(i);
        }
    }
    if (r.clustered.empty()) return r;
    auto cfg = config.resolved(r.clustered.size());
    cfg.k = std::min(cfg.k, r.clustered.size());
    r.clusters = run_clusterer(embedding_matrix(ds, r.clustered), cfg);
    std::vector<WeakLabelSet> sub;
    sub.reserve(r.clustered.size());
    for (auto i : r.clustered) sub.push_back(weak[i]);
    const auto cleansed = majority_assign(*r.clusters, sub, vocab, cfg.votes);
    for (std::size_t j = 0; j < r.clustered.size(); ++j) r.labels[r.clustered[j]] = cleansed.labels[j];
    return r;
}

inline LimsiResult limsi_assign(const Dataset& ds, const EntityVocabulary& vocab,
                                const std::vector<BipartiteGraph>& graphs, const ClusterConfig& config) {
    return limsi_assign(ds, vocab, weak_labels(ds, graphs), config);
}

inline Labels random_baseline(const std::vector<std::string>& classes, std::size_t n, std::uint64_t seed) {
    if (classes.empty()) throw ArgumentError("random_baseline: no classes");
    Rng rng(seed);
    Labels out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(classes[rng.below(classes.size())]);
    return out;
}

inline Labels random_baseline(const EntityVocabulary& vocab, std::size_t n, std::uint64_t seed) {
    return random_baseline(vocab.classes(), n, seed);
}

}  // namespace entdisc
