#pragma once
// Line-delimited JSON interchange files.
//
// Writers emit a canonical form (fixed key order, shortest round-trip
// doubles, one record per line, trailing newline), so load followed by
// write reproduces canonical input byte for byte.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "entdisc/core.hpp"
#include "entdisc/errors.hpp"

namespace entdisc::io {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

// Calls fn(json, line_number) for every non-blank line of a JSONL file.
inline void for_each_json_line(const std::filesystem::path& path,
                               const std::function<void(const Json&, std::size_t)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw ParseError(path.string(), line_no, std::string("malformed JSON: ") + e.what());
        }
        if (!j.is_object()) throw ParseError(path.string(), line_no, "record is not a JSON object");
        try {
            fn(j, line_no);
        } catch (const Json::exception& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
    }
}

// Writes to a sibling temporary file and renames on success, so a failed
// write never leaves a partial file behind.
inline void write_atomically(const std::filesystem::path& path,
                             const std::function<void(std::ostream&)>& fn) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write '" + path.string() + "'");
        fn(out);
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp);
            throw DataError("write failed for '" + path.string() + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace detail {

inline void require_schema(const Json& j, const std::string& file, std::size_t line) {
    if (!j.contains("schema"))
        throw ParseError(file, line, "missing 'schema' field");
    if (!j.at("schema").is_number_integer() || j.at("schema").get<int>() != kSchemaVersion)
        throw ParseError(file, line,
                         "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");
}

inline BoundingBox parse_box(const Json& j, const std::string& file, std::size_t line) {
    if (!j.is_array() || j.size() != 4) throw ParseError(file, line, "'box' must be an array of 4 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

inline OrderedJson box_json(const BoundingBox& b) {
    return OrderedJson::array({b.x_min, b.y_min, b.x_max, b.y_max});
}

inline FrameRef parse_frame(const Json& j) {
    return {j.at("video_id").get<std::string>(), j.at("frame_index").get<std::int64_t>()};
}

}  // namespace detail

inline DetectionRecord parse_detection(const Json& j, const std::string& file, std::size_t line) {
    detail::require_schema(j, file, line);
    DetectionRecord d;
    d.id = j.at("id").get<std::string>();
    d.frame = detail::parse_frame(j);
    d.box = detail::parse_box(j.at("box"), file, line);
    const auto& emb = j.at("embedding");
    if (!emb.is_array()) throw ParseError(file, line, "'embedding' must be an array");
    d.embedding.reserve(emb.size());
    for (const auto& v : emb) d.embedding.push_back(v.get<double>());
    if (j.contains("gt_label") && !j.at("gt_label").is_null())
        d.gt_label = j.at("gt_label").get<std::string>();
    return d;
}

inline OrderedJson detection_json(const DetectionRecord& d) {
    OrderedJson j;
    j["id"] = d.id;
    j["video_id"] = d.frame.video_id;
    j["frame_index"] = d.frame.frame_index;
    j["box"] = detail::box_json(d.box);
    j["embedding"] = d.embedding;
    j["gt_label"] = d.gt_label ? OrderedJson(*d.gt_label) : OrderedJson(nullptr);
    j["schema"] = kSchemaVersion;
    return j;
}

inline MentionRecord parse_mention(const Json& j, const std::string& file, std::size_t line) {
    detail::require_schema(j, file, line);
    MentionRecord m;
    m.frame = detail::parse_frame(j);
    m.surface = j.at("surface").get<std::string>();
    return m;
}

inline OrderedJson mention_json(const MentionRecord& m) {
    OrderedJson j;
    j["video_id"] = m.frame.video_id;
    j["frame_index"] = m.frame.frame_index;
    j["surface"] = m.surface;
    j["schema"] = kSchemaVersion;
    return j;
}

inline std::vector<DetectionRecord> load_detections(const std::filesystem::path& path) {
    std::vector<DetectionRecord> out;
    std::size_t dim = 0;
    for_each_json_line(path, [&](const Json& j, std::size_t line) {
        auto d = parse_detection(j, path.string(), line);
        if (out.empty()) {
            dim = d.embedding.size();
        } else if (d.embedding.size() != dim) {
            throw SchemaError(path.string() + ":" + std::to_string(line) + ": detection '" + d.id +
                              "' has embedding dimension " + std::to_string(d.embedding.size()) +
                              ", expected " + std::to_string(dim));
        }
        out.push_back(std::move(d));
    });
    return out;
}

inline std::vector<MentionRecord> load_mentions(const std::filesystem::path& path) {
    std::vector<MentionRecord> out;
    for_each_json_line(path, [&](const Json& j, std::size_t line) {
        out.push_back(parse_mention(j, path.string(), line));
    });
    return out;
}

inline Dataset load_dataset(const std::filesystem::path& detections_path,
                            const std::filesystem::path& mentions_path) {
    Dataset ds;
    ds.detections = load_detections(detections_path);
    if (ds.detections.empty())
        throw EmptyDatasetError("'" + detections_path.string() + "' contains no detections");
    ds.embedding_dim = ds.detections.front().embedding.size();
    if (ds.embedding_dim == 0) throw SchemaError("embeddings must have at least one component");
    ds.mentions = load_mentions(mentions_path);
    validate(ds);
    return ds;
}

inline void write_detections(const std::filesystem::path& path, const Dataset& ds) {
    write_atomically(path, [&](std::ostream& out) {
        for (const auto& d : ds.detections) out << detection_json(d).dump() << '\n';
    });
}

inline void write_mentions(const std::filesystem::path& path, const Dataset& ds) {
    write_atomically(path, [&](std::ostream& out) {
        for (const auto& m : ds.mentions) out << mention_json(m).dump() << '\n';
    });
}

// ---- label files -----------------------------------------------------------

struct LabelRecord {
    std::string id;
    FrameRef frame;
    BoundingBox box;
    std::string label;
    std::optional<std::size_t> cluster;
};

inline void write_labels(const std::filesystem::path& path, const Dataset& ds, const Labels& labels,
                         const std::vector<std::size_t>* clusters = nullptr) {
    if (labels.size() != ds.detections.size())
        throw ArgumentError("write_labels: label count does not match detections");
    write_atomically(path, [&](std::ostream& out) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const auto& d = ds.detections[i];
            OrderedJson j;
            j["id"] = d.id;
            j["video_id"] = d.frame.video_id;
            j["frame_index"] = d.frame.frame_index;
            j["box"] = detail::box_json(d.box);
            j["label"] = labels[i];
            if (clusters) j["cluster"] = (*clusters)[i];
            j["schema"] = kSchemaVersion;
            out << j.dump() << '\n';
        }
    });
}

inline std::vector<LabelRecord> load_labels(const std::filesystem::path& path) {
    std::vector<LabelRecord> out;
    for_each_json_line(path, [&](const Json& j, std::size_t line) {
        detail::require_schema(j, path.string(), line);
        LabelRecord r;
        r.id = j.at("id").get<std::string>();
        r.frame = detail::parse_frame(j);
        r.box = detail::parse_box(j.at("box"), path.string(), line);
        r.label = j.at("label").get<std::string>();
        if (j.contains("cluster")) r.cluster = j.at("cluster").get<std::size_t>();
        out.push_back(std::move(r));
    });
    return out;
}

// ---- ground-truth boxes ----------------------------------------------------

struct GtBox {
    FrameRef frame;
    BoundingBox box;
    std::string label;
};

inline std::vector<GtBox> load_gt_boxes(const std::filesystem::path& path) {
    std::vector<GtBox> out;
    for_each_json_line(path, [&](const Json& j, std::size_t line) {
        GtBox g;
        g.frame = detail::parse_frame(j);
        g.box = detail::parse_box(j.at("box"), path.string(), line);
        if (!g.box.valid()) throw ParseError(path.string(), line, "invalid box");
        g.label = j.at("label").get<std::string>();
        if (g.label.empty()) throw ParseError(path.string(), line, "empty label");
        out.push_back(std::move(g));
    });
    return out;
}

inline void write_gt_boxes(const std::filesystem::path& path, const std::vector<GtBox>& boxes) {
    write_atomically(path, [&](std::ostream& out) {
        for (const auto& g : boxes) {
            OrderedJson j;
            j["video_id"] = g.frame.video_id;
            j["frame_index"] = g.frame.frame_index;
            j["box"] = detail::box_json(g.box);
            j["label"] = g.label;
            out << j.dump() << '\n';
        }
    });
}

// surface -> canonical name overrides, as a flat JSON object.
inline std::map<std::string, std::string> load_taxonomy(const std::filesystem::path& path) {
    Json j;
    try {
        j = Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
        throw ParseError(path.string(), 1, std::string("malformed taxonomy: ") + e.what());
    }
    if (!j.is_object()) throw DataError("taxonomy '" + path.string() + "' must be a JSON object");
    std::map<std::string, std::string> out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_string() || it.value().get<std::string>().empty())
            throw DataError("taxonomy entry '" + it.key() + "' must map to a non-empty string");
        out[it.key()] = it.value().get<std::string>();
    }
    return out;
}

}  // namespace entdisc::io
