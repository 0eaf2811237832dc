#pragma once
// Stage 3: per-entity mean prototypes, and nearest-prototype relabelling of
// the detections that carry the most frequent cleansed label.

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "entdisc/core.hpp"
#include "entdisc/errors.hpp"

namespace entdisc {

struct EntityPrototype {
    std::string entity;
    EmbeddingVector vector;
    std::size_t member_count = 0;
};

using PrototypeTable = std::map<std::string, EntityPrototype>;

struct RefinedLabels {
    Labels labels;
    std::vector<std::size_t> reassigned;  // detection indices whose label changed
    std::string most_frequent;
};

// Entities without members get no prototype.
inline PrototypeTable compute_prototypes(const Matrix& points, const Labels& labels) {
    if (labels.size() != points.rows()) throw ArgumentError("compute_prototypes: size mismatch");
    PrototypeTable table;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto& p = table[labels[i]];
        if (p.member_count == 0) {
            p.entity = labels[i];
            p.vector.assign(points.cols(), 0.0);
        }
        ++p.member_count;
        const auto x = points.row(i);
        for (std::size_t j = 0; j < x.size(); ++j) p.vector[j] += x[j];
    }
    for (auto& [name, p] : table)
        for (auto& v : p.vector) v /= static_cast<double>(p.member_count);
    return table;
}

// Label with the highest count; ties go to the lexicographically smallest.
inline std::string find_most_frequent(const Labels& labels) {
    if (labels.empty()) throw ArgumentError("find_most_frequent: no labels");
    std::map<std::string, std::size_t> counts;
    for (const auto& l : labels) ++counts[l];
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it)
        if (it->second > best->second) best = it;
    return best->first;
}

inline std::string nearest_prototype(std::span<const double> x, const PrototypeTable& prototypes) {
    const std::string* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& [name, p] : prototypes) {
        const double d = squared_distance(x, p.vector);
        if (d < best_d) {
            best_d = d;
            best = &name;
        }
    }
    return best ? *best : std::string{};
}

// Relabels every detection labelled `most_frequent` to its nearest prototype
// (the most frequent entity's own prototype included); leaves the rest alone.
inline RefinedLabels refine(const Labels& labels, const PrototypeTable& prototypes,
                            const Matrix& points, const std::string& most_frequent) {
    if (prototypes.empty()) throw StateError("refine: no prototypes available");
    if (labels.size() != points.rows()) throw ArgumentError("refine: size mismatch");
    RefinedLabels out;
    out.most_frequent = most_frequent;
    out.labels = labels;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != most_frequent) continue;
        auto nearest = nearest_prototype(points.row(i), prototypes);
        if (nearest != labels[i]) {
            out.labels[i] = std::move(nearest);
            out.reassigned.push_back(i);
        }
    }
    return out;
}

inline RefinedLabels refine(const Labels& labels, const PrototypeTable& prototypes, const Matrix& points) {
    if (prototypes.empty()) throw StateError("refine: no prototypes available");
    return refine(labels, prototypes, points, find_most_frequent(labels));
}

}  // namespace entdisc
