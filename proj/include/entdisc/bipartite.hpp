#pragma once
// Stage 1: per-frame dense bipartite graphs between detections and the
// unique canonical entities mentioned for that frame, and the weak labels
// they induce.
//
// Graphs are stored as (detections, entities) lists; the edge set is their
// full product and is never materialized.

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "entdisc/core.hpp"
#include "entdisc/rng.hpp"
#include "entdisc/vocab.hpp"

namespace entdisc {

// A mention at frame t attaches to frames t .. t+W-1 of the same video,
// with W chosen by whether the mention resolved to a known entity.
struct WindowPolicy {
    std::int64_t known = 1;
    std::int64_t unknown = 1;

    static WindowPolicy exact() { return {1, 1}; }
    static WindowPolicy scene() { return {4, 1}; }

    bool is_exact() const { return known == 1 && unknown == 1; }

    void validate() const {
        if (known < 1 || unknown < 1) throw ConfigError("window lengths must be >= 1");
    }
};

struct BipartiteGraph {
    FrameRef frame;                       // frame whose detections are connected
    FrameRef source;                      // frame the mentions came from
    std::vector<std::size_t> detections;  // indices into Dataset::detections
    std::vector<std::string> entities;    // deduplicated canonical names

    std::size_t edge_count() const { return detections.size() * entities.size(); }
};

struct WeakLabelSet {
    std::string detection_id;
    std::vector<std::string> candidates;  // multiset, kept sorted
};

inline std::vector<BipartiteGraph> build_graphs(const Dataset& ds, const EntityVocabulary& vocab,
                                                const WindowPolicy& window = WindowPolicy::exact()) {
    window.validate();
    std::map<FrameRef, std::vector<std::size_t>> frame_dets;
    for (std::size_t i = 0; i < ds.detections.size(); ++i)
        frame_dets[ds.detections[i].frame].push_back(i);

    std::map<FrameRef, std::set<std::string>> frame_names;
    for (const auto& m : ds.mentions)
        frame_names[m.frame].insert(m.normalized ? *m.normalized : vocab.resolve(m.surface));

    std::vector<BipartiteGraph> graphs;
    std::set<FrameRef> covered;
    const std::int64_t span = std::max(window.known, window.unknown);
    for (const auto& [source, names] : frame_names) {
        for (std::int64_t offset = 0; offset < span; ++offset) {
            BipartiteGraph g;
            g.source = source;
            g.frame = {source.video_id, source.frame_index + offset};
            for (const auto& n : names) {
                const auto w = n == vocab.unknown_name ? window.unknown : window.known;
                if (offset < w) g.entities.push_back(n);
            }
            if (g.entities.empty()) continue;
            if (auto it = frame_dets.find(g.frame); it != frame_dets.end()) g.detections = it->second;
            if (offset > 0 && g.detections.empty()) continue;
            covered.insert(g.frame);
            graphs.push_back(std::move(g));
        }
    }
    // Frames with detections but no attached mentions still get an (edgeless) graph.
    for (const auto& [frame, dets] : frame_dets) {
        if (covered.contains(frame)) continue;
        graphs.push_back({frame, frame, dets, {}});
    }
    std::stable_sort(graphs.begin(), graphs.end(), [](const auto& a, const auto& b) {
        return a.frame != b.frame ? a.frame < b.frame : a.source < b.source;
    });
    return graphs;
}

// Multiset union of entity lists over every graph containing each detection.
inline std::vector<WeakLabelSet> weak_labels(const Dataset& ds, const std::vector<BipartiteGraph>& graphs) {
    std::vector<WeakLabelSet> out(ds.detections.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i].detection_id = ds.detections[i].id;
    for (const auto& g : graphs)
        for (auto d : g.detections)
            out.at(d).candidates.insert(out[d].candidates.end(), g.entities.begin(), g.entities.end());
    for (auto& w : out) std::sort(w.candidates.begin(), w.candidates.end());
    return out;
}

// Uniform draw from the candidates; unknown when there are none.
inline std::string stage1_predict(const WeakLabelSet& weak, std::uint64_t seed,
                                  const std::string& unknown_name = kUnknownName) {
    if (weak.candidates.empty()) return unknown_name;
    Rng rng(seed);
    return weak.candidates[rng.below(weak.candidates.size())];
}

// Per-detection draws with sub-seeds derived from the detection position.
inline Labels stage1_labels(const std::vector<WeakLabelSet>& weak, std::uint64_t seed,
                            const std::string& unknown_name = kUnknownName) {
    Labels out;
    out.reserve(weak.size());
    for (std::size_t i = 0; i < weak.size(); ++i)
        out.push_back(stage1_predict(weak[i], derive_seed(seed, static_cast<std::uint64_t>(i)), unknown_name));
    return out;
}

inline void write_graphs(std::ostream& out, const Dataset& ds, const std::vector<BipartiteGraph>& graphs) {
    for (const auto& g : graphs) {
        nlohmann::ordered_json j;
        j["video_id"] = g.frame.video_id;
        j["frame_index"] = g.frame.frame_index;
        auto ids = nlohmann::ordered_json::array();
        for (auto d : g.detections) ids.push_back(ds.detections[d].id);
        j["detections"] = std::move(ids);
        j["entities"] = g.entities;
        if (g.source != g.frame) j["source_frame_index"] = g.source.frame_index;
        out << j.dump() << '\n';
    }
}

}  // namespace entdisc
