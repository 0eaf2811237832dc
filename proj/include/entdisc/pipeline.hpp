#pragma once
// End-to-end discovery: vocabulary -> bipartite alignment -> cluster
// agreement -> prototype refinement, plus the cluster-count sweep and the
// chronological evaluation split.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "entdisc/bipartite.hpp"
#include "entdisc/cluster_agree.hpp"
#include "entdisc/core.hpp"
#include "entdisc/metrics.hpp"
#include "entdisc/proto_refine.hpp"
#include "entdisc/rng.hpp"
#include "entdisc/vocab.hpp"

namespace entdisc {

enum class Stages { S1 = 1, S12 = 12, S123 = 123 };

inline Stages parse_stages(int v) {
    if (v == 1) return Stages::S1;
    if (v == 12) return Stages::S12;
    if (v == 123) return Stages::S123;
    throw ConfigError("stages must be one of 1, 12, 123 (got " + std::to_string(v) + ")");
}

struct PipelineConfig {
    CutoffPolicy vocab_policy = CutoffPolicy::min_fraction(0.1);
    int fuzzy_threshold = kDefaultFuzzyThreshold;
    std::map<std::string, std::string> taxonomy;
    WindowPolicy window = WindowPolicy::exact();
    ClusterConfig cluster;
    Stages stages = Stages::S123;
    std::uint64_t seed = 42;
    // The sweep deliberately explores k <= |E|; discovery does not.
    bool enforce_overclustering = true;
};

struct DiscoveryResult {
    EntityVocabulary vocab;
    std::vector<MentionRecord> mentions;  // normalized
    std::vector<BipartiteGraph> graphs;
    std::vector<WeakLabelSet> weak;
    Labels stage1;
    std::optional<ClusterAssignment> clusters;
    std::optional<CleansedLabels> cleansed;
    PrototypeTable prototypes;
    std::optional<RefinedLabels> refined;
    ClusterConfig cluster_used;

    const Labels& final_labels() const {
        if (refined) return refined->labels;
        if (cleansed) return cleansed->labels;
        return stage1;
    }
};

struct AlignmentResult {
    EntityVocabulary vocab;
    Dataset normalized;
    std::vector<BipartiteGraph> graphs;
    std::vector<WeakLabelSet> weak;
};

// Stage 1 without the random draw.
inline AlignmentResult align(const Dataset& ds, const PipelineConfig& cfg) {
    AlignmentResult a;
    a.vocab = build_vocabulary(ds.mentions, cfg.vocab_policy, cfg.taxonomy, cfg.fuzzy_threshold);
    a.normalized.embedding_dim = ds.embedding_dim;
    a.normalized.detections = ds.detections;
    a.normalized.mentions = normalize_mentions(ds.mentions, a.vocab, cfg.fuzzy_threshold);
    a.graphs = build_graphs(a.normalized, a.vocab, cfg.window);
    a.weak = weak_labels(a.normalized, a.graphs);
    return a;
}

inline ClusterConfig cluster_config_for(const PipelineConfig& cfg, std::size_t n_points,
                                        std::size_t n_entities) {
    ClusterConfig c = cfg.cluster.resolved(n_points);
    c.seed = derive_seed(cfg.seed, "cluster");
    if (cfg.enforce_overclustering && c.k <= n_entities)
        throw ConfigError("over-clustering requires k > |E| (k = " + std::to_string(c.k) +
                          ", |E| = " + std::to_string(n_entities) + ")");
    return c;
}

inline Matrix clustering_space(const Dataset& ds, const ClusterConfig& c) {
    auto m = embedding_matrix(ds);
    return c.l2_normalize ? l2_normalized(std::move(m)) : m;
}

inline void run_stage2(const Dataset& ds, const PipelineConfig& cfg, DiscoveryResult& r) {
    r.cluster_used = cluster_config_for(cfg, ds.detections.size(), r.vocab.entities.size());
    ClusterConfig raw = r.cluster_used;
    raw.l2_normalize = false;
    r.clusters = run_clusterer(clustering_space(ds, r.cluster_used), raw);
    r.cleansed = majority_assign(*r.clusters, r.weak, r.vocab, r.cluster_used.votes);
}

// Prototypes live in the same space the clusterer saw.
inline void run_stage3(const Dataset& ds, DiscoveryResult& r) {
    if (!r.cleansed) throw StateError("stage 3 needs stage 2 labels");
    const Matrix points = clustering_space(ds, r.cluster_used);
    r.prototypes = compute_prototypes(points, r.cleansed->labels);
    r.refined = refine(r.cleansed->labels, r.prototypes, points);
}

inline void run_stages_after_alignment(const Dataset& ds, const PipelineConfig& cfg, DiscoveryResult& r) {
    if (cfg.stages == Stages::S1) return;
    run_stage2(ds, cfg, r);
    if (cfg.stages == Stages::S12) return;
    run_stage3(ds, r);
}

inline DiscoveryResult run_discovery(const Dataset& ds, const PipelineConfig& cfg) {
    if (ds.detections.empty()) throw EmptyDatasetError("dataset has no detections");
    cfg.window.validate();
    DiscoveryResult r;
    auto a = align(ds, cfg);
    r.vocab = std::move(a.vocab);
    r.mentions = std::move(a.normalized.mentions);
    r.graphs = std::move(a.graphs);
    r.weak = std::move(a.weak);
    r.stage1 = stage1_labels(r.weak, derive_seed(cfg.seed, "stage1"), r.vocab.unknown_name);
    run_stages_after_alignment(ds, cfg, r);
    return r;
}

// Ground-truth labels as stored on detections; missing labels are an error.
inline Labels gt_labels(const Dataset& ds) {
    Labels out;
    out.reserve(ds.detections.size());
    for (const auto& d : ds.detections) {
        if (!d.gt_label) throw EvaluationError("detection '" + d.id + "' has no gt_label");
        out.push_back(*d.gt_label);
    }
    return out;
}

inline Labels subset(const Labels& labels, const std::vector<std::size_t>& idx) {
    Labels out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(labels.at(i));
    return out;
}

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// The first `train_fraction` of distinct frames, ordered by (video, frame
// index), form the training split.
inline Split chronological_split(const Dataset& ds, double train_fraction = 0.8) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must be in (0, 1)");
    std::map<FrameRef, std::size_t> order;
    for (const auto& d : ds.detections) order.emplace(d.frame, 0);
    std::size_t rank = 0;
    for (auto& [f, r] : order) r = rank++;
    const auto cut = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(order.size())));
    Split s;
    for (std::size_t i = 0; i < ds.detections.size(); ++i)
        (order.at(ds.detections[i].frame) < cut ? s.train : s.test).push_back(i);
    return s;
}

struct SweepRow {
    std::size_t k;
    MetricReport report;
};

// Stage 1+2 macro metrics for each cluster count.
inline std::vector<SweepRow> sweep_clusters(const Dataset& ds, const PipelineConfig& cfg,
                                            const std::vector<std::size_t>& ks) {
    for (auto k : ks)
        if (k < 1) throw ConfigError("sweep: cluster counts must be >= 1");
    const auto gt = gt_labels(ds);
    const auto a = align(ds, cfg);
    std::vector<SweepRow> rows;
    for (auto k : ks) {
        PipelineConfig c = cfg;
        c.cluster.k = k;
        c.enforce_overclustering = false;
        auto cc = cluster_config_for(c, ds.detections.size(), a.vocab.entities.size());
        ClusterConfig raw = cc;
        raw.l2_normalize = false;
        const auto clusters = run_clusterer(clustering_space(ds, cc), raw);
        const auto cleansed = majority_assign(clusters, a.weak, a.vocab, cc.votes);
        rows.push_back({k, evaluate(gt, cleansed.labels, a.vocab.classes())});
    }
    return rows;
}

}  // namespace entdisc
