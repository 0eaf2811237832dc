#pragma once
// Domain types for entity discovery: detections, mentions and the dataset
// container that binds them, plus frame grouping.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "entdisc/errors.hpp"

namespace entdisc {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kUnknownName = "unknown";

using EmbeddingVector = std::vector<double>;

// Label per detection, aligned with Dataset::detections.
using Labels = std::vector<std::string>;

struct BoundingBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }

    bool valid() const {
        return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
               std::isfinite(y_max) && x_min >= 0.0 && y_min >= 0.0 && x_min < x_max &&
               y_min < y_max;
    }

    bool operator==(const BoundingBox&) const = default;
};

struct FrameRef {
    std::string video_id;
    std::int64_t frame_index = 0;

    auto operator<=>(const FrameRef&) const = default;
    bool operator==(const FrameRef&) const = default;
};

inline std::string to_string(const FrameRef& f) {
    return f.video_id + "#" + std::to_string(f.frame_index);
}

struct DetectionRecord {
    std::string id;
    FrameRef frame;
    BoundingBox box;
    EmbeddingVector embedding;
    std::optional<std::string> gt_label;

    bool operator==(const DetectionRecord&) const = default;
};

struct MentionRecord {
    FrameRef frame;
    std::string surface;
    std::optional<std::string> normalized;

    bool operator==(const MentionRecord&) const = default;
};

// Row-major n x d matrix of embeddings.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) return {};
        Matrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_) throw ArgumentError("Matrix::from_rows: ragged rows");
            std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
        }
        return m;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

struct Dataset {
    std::vector<DetectionRecord> detections;
    std::vector<MentionRecord> mentions;
    std::size_t embedding_dim = 0;

    bool operator==(const Dataset&) const = default;
};

struct ValidationReport {
    // Mentions whose video_id has no detection frames at all.
    std::size_t orphan_mentions = 0;
};

// Checks every type invariant; throws SchemaError naming the offending record.
inline ValidationReport validate(const Dataset& ds) {
    std::unordered_set<std::string> ids;
    std::set<std::string> videos;
    for (const auto& det : ds.detections) {
        if (det.id.empty()) throw SchemaError("detection with empty id");
        if (!ids.insert(det.id).second) throw SchemaError("duplicate detection id '" + det.id + "'");
        if (det.frame.video_id.empty()) throw SchemaError("detection '" + det.id + "': empty video_id");
        if (det.frame.frame_index < 0)
            throw SchemaError("detection '" + det.id + "': negative frame_index");
        if (!det.box.valid())
            throw SchemaError("detection '" + det.id +
                              "': box must satisfy 0 <= x_min < x_max and 0 <= y_min < y_max");
        if (det.embedding.size() != ds.embedding_dim)
            throw SchemaError("detection '" + det.id + "': embedding has dimension " +
                              std::to_string(det.embedding.size()) + ", expected " +
                              std::to_string(ds.embedding_dim));
        for (double v : det.embedding)
            if (!std::isfinite(v))
                throw SchemaError("detection '" + det.id + "': non-finite embedding component");
        if (det.gt_label && det.gt_label->empty())
            throw SchemaError("detection '" + det.id + "': gt_label must be non-empty or null");
        videos.insert(det.frame.video_id);
    }
    ValidationReport report;
    for (const auto& m : ds.mentions) {
        if (m.surface.empty())
            throw SchemaError("mention at " + to_string(m.frame) + ": empty surface");
        if (m.frame.frame_index < 0)
            throw SchemaError("mention at " + to_string(m.frame) + ": negative frame_index");
        if (!videos.contains(m.frame.video_id)) ++report.orphan_mentions;
    }
    return report;
}

inline Matrix embedding_matrix(const Dataset& ds) {
    Matrix m(ds.detections.size(), ds.embedding_dim);
    for (std::size_t i = 0; i < ds.detections.size(); ++i)
        std::copy(ds.detections[i].embedding.begin(), ds.detections[i].embedding.end(),
                  m.row(i).begin());
    return m;
}

inline Matrix embedding_matrix(const Dataset& ds, std::span<const std::size_t> subset) {
    Matrix m(subset.size(), ds.embedding_dim);
    for (std::size_t i = 0; i < subset.size(); ++i) {
        const auto& e = ds.detections[subset[i]].embedding;
        std::copy(e.begin(), e.end(), m.row(i).begin());
    }
    return m;
}

struct FrameGroup {
    std::vector<std::size_t> detections;  // indices into Dataset::detections
    std::vector<std::string> mentions;    // unique surfaces, first-seen order
};

// Groups detections and deduplicated mention surfaces by frame. Uses the
// normalized mention name when present, the raw surface otherwise.
inline std::map<FrameRef, FrameGroup> frame_groups(const Dataset& ds) {
    std::map<FrameRef, FrameGroup> groups;
    for (std::size_t i = 0; i < ds.detections.size(); ++i)
        groups[ds.detections[i].frame].detections.push_back(i);
    for (const auto& m : ds.mentions) {
        auto& names = groups[m.frame].mentions;
        const std::string& name = m.normalized ? *m.normalized : m.surface;
        if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
    }
    return groups;
}

}  // namespace entdisc
