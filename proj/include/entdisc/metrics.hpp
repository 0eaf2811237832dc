#pragma once
// Confusion matrices, per-class and aggregate classification metrics, and
// IoU-based pairing of predicted boxes with ground-truth boxes.

#include <algorithm>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "entdisc/core.hpp"
#include "entdisc/errors.hpp"

namespace entdisc {

// Rows are ground truth, columns are predictions.
struct ConfusionMatrix {
    std::vector<std::string> classes;
    std::vector<std::vector<std::size_t>> counts;

    std::size_t index_of(const std::string& c) const {
        auto it = std::find(classes.begin(), classes.end(), c);
        if (it == classes.end()) throw ArgumentError("unknown class '" + c + "'");
        return static_cast<std::size_t>(it - classes.begin());
    }

    std::size_t total() const {
        std::size_t t = 0;
        for (const auto& r : counts)
            for (auto v : r) t += v;
        return t;
    }
};

// Class order: `base_classes` first, then any other label seen in either
// input, sorted.
inline ConfusionMatrix confusion(const Labels& gt, const Labels& predicted,
                                 const std::vector<std::string>& base_classes = {}) {
    if (gt.size() != predicted.size()) throw ArgumentError("confusion: label vectors differ in length");
    ConfusionMatrix cm;
    cm.classes = base_classes;
    std::set<std::string> extra;
    for (const auto* v : {&gt, &predicted})
        for (const auto& l : *v)
            if (std::find(base_classes.begin(), base_classes.end(), l) == base_classes.end()) extra.insert(l);
    cm.classes.insert(cm.classes.end(), extra.begin(), extra.end());
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < cm.classes.size(); ++i) index[cm.classes[i]] = i;
    cm.counts.assign(cm.classes.size(), std::vector<std::size_t>(cm.classes.size(), 0));
    for (std::size_t i = 0; i < gt.size(); ++i) ++cm.counts[index.at(gt[i])][index.at(predicted[i])];
    return cm;
}

// Id-keyed variant; both maps must cover exactly the same ids.
inline ConfusionMatrix confusion(const std::map<std::string, std::string>& gt,
                                 const std::map<std::string, std::string>& predicted,
                                 const std::vector<std::string>& base_classes = {}) {
    if (gt.size() != predicted.size()) throw ArgumentError("confusion: id sets differ");
    Labels g, p;
    g.reserve(gt.size());
    p.reserve(gt.size());
    for (const auto& [id, label] : gt) {
        auto it = predicted.find(id);
        if (it == predicted.end()) throw ArgumentError("confusion: no prediction for id '" + id + "'");
        g.push_back(label);
        p.push_back(it->second);
    }
    return confusion(g, p, base_classes);
}

struct MetricReport {
    std::vector<std::string> classes;
    std::map<std::string, double> per_class_accuracy;  // recall per ground-truth row
    std::map<std::string, double> per_class_precision;
    std::map<std::string, double> per_class_f1;
    std::map<std::string, std::size_t> support;
    double micro_accuracy = 0.0;
    double macro_accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::vector<std::string> zero_support;    // no ground-truth rows
    std::vector<std::string> zero_predicted;  // no predictions in column
    std::size_t total = 0;
};

inline MetricReport metrics(const ConfusionMatrix& cm) {
    const std::size_t n = cm.classes.size();
    const std::size_t total = cm.total();
    if (n == 0 || total == 0) throw ArgumentError("metrics: empty confusion matrix");
    MetricReport r;
    r.classes = cm.classes;
    r.total = total;
    std::size_t trace = 0;
    double sum_rec = 0.0, sum_prec = 0.0, sum_f1 = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t row = 0, col = 0;
        for (std::size_t j = 0; j < n; ++j) {
            row += cm.counts[c][j];
            col += cm.counts[j][c];
        }
        const auto tp = cm.counts[c][c];
        trace += tp;
        const double rec = row ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
        const double prec = col ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
        const double f1 = rec + prec > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
        if (!row) r.zero_support.push_back(cm.classes[c]);
        if (!col) r.zero_predicted.push_back(cm.classes[c]);
        r.per_class_accuracy[cm.classes[c]] = rec;
        r.per_class_precision[cm.classes[c]] = prec;
        r.per_class_f1[cm.classes[c]] = f1;
        r.support[cm.classes[c]] = row;
        sum_rec += rec;
        sum_prec += prec;
        sum_f1 += f1;
    }
    const auto nd = static_cast<double>(n);
    r.micro_accuracy = static_cast<double>(trace) / static_cast<double>(total);
    r.macro_accuracy = sum_rec / nd;
    r.macro_recall = r.macro_accuracy;
    r.macro_precision = sum_prec / nd;
    r.macro_f1 = sum_f1 / nd;
    return r;
}

inline MetricReport evaluate(const Labels& gt, const Labels& predicted,
                             const std::vector<std::string>& base_classes = {}) {
    return metrics(confusion(gt, predicted, base_classes));
}

// ---- boxes -----------------------------------------------------------------

inline double iou(const BoundingBox& a, const BoundingBox& b) {
    const double ix = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
    const double iy = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
    const double inter = ix * iy;
    if (inter <= 0.0) return 0.0;
    return inter / (a.area() + b.area() - inter);
}

struct LabeledBox {
    BoundingBox box;
    std::string label;
};

struct BoxPair {
    std::string gt_label;
    std::string predicted_label;
    std::size_t gt_index;
    std::optional<std::size_t> pred_index;
    double iou = 0.0;
};

// Greedy one-to-one pairing by descending IoU within a frame. A pair needs
// positive overlap and IoU >= threshold; unmatched ground truth is paired
// with `unknown_name`.
inline std::vector<BoxPair> match_frame(const std::vector<LabeledBox>& predicted,
                                        const std::vector<LabeledBox>& gt, double iou_threshold,
                                        const std::string& unknown_name = kUnknownName) {
    std::vector<std::tuple<double, std::size_t, std::size_t>> cand;
    for (std::size_t g = 0; g < gt.size(); ++g)
        for (std::size_t p = 0; p < predicted.size(); ++p) {
            const double v = iou(gt[g].box, predicted[p].box);
            if (v > 0.0 && v >= iou_threshold) cand.emplace_back(v, g, p);
        }
    std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
    });
    std::vector<bool> gt_used(gt.size(), false), pred_used(predicted.size(), false);
    std::vector<BoxPair> out(gt.size());
    for (std::size_t g = 0; g < gt.size(); ++g) out[g] = {gt[g].label, unknown_name, g, std::nullopt, 0.0};
    for (const auto& [v, g, p] : cand) {
        if (gt_used[g] || pred_used[p]) continue;
        gt_used[g] = pred_used[p] = true;
        out[g].predicted_label = predicted[p].label;
        out[g].pred_index = p;
        out[g].iou = v;
    }
    return out;
}

using FrameBoxes = std::map<FrameRef, std::vector<LabeledBox>>;

inline std::vector<BoxPair> match_predictions_to_gt(const FrameBoxes& predicted, const FrameBoxes& gt,
                                                    double iou_threshold = 0.0,
                                                    const std::string& unknown_name = kUnknownName) {
    std::vector<BoxPair> out;
    static const std::vector<LabeledBox> none;
    for (const auto& [frame, gboxes] : gt) {
        auto it = predicted.find(frame);
        auto pairs = match_frame(it == predicted.end() ? none : it->second, gboxes, iou_threshold, unknown_name);
        out.insert(out.end(), pairs.begin(), pairs.end());
    }
    return out;
}

// ---- serialization ---------------------------------------------------------

inline nlohmann::ordered_json report_json(const MetricReport& r) {
    nlohmann::ordered_json j;
    j["classes"] = r.classes;
    nlohmann::ordered_json per = nlohmann::ordered_json::object();
    for (const auto& c : r.classes) {
        nlohmann::ordered_json e;
        e["accuracy"] = r.per_class_accuracy.at(c);
        e["precision"] = r.per_class_precision.at(c);
        e["f1"] = r.per_class_f1.at(c);
        e["support"] = r.support.at(c);
        per[c] = std::move(e);
    }
    j["per_class"] = std::move(per);
    j["micro_accuracy"] = r.micro_accuracy;
    j["macro_accuracy"] = r.macro_accuracy;
    j["macro_precision"] = r.macro_precision;
    j["macro_recall"] = r.macro_recall;
    j["macro_f1"] = r.macro_f1;
    j["zero_support"] = r.zero_support;
    j["zero_predicted"] = r.zero_predicted;
    j["total"] = r.total;
    return j;
}

inline MetricReport report_from_json(const nlohmann::json& j) {
    MetricReport r;
    r.classes = j.at("classes").get<std::vector<std::string>>();
    for (const auto& c : r.classes) {
        const auto& e = j.at("per_class").at(c);
        r.per_class_accuracy[c] = e.at("accuracy").get<double>();
        r.per_class_precision[c] = e.at("precision").get<double>();
        r.per_class_f1[c] = e.at("f1").get<double>();
        r.support[c] = e.at("support").get<std::size_t>();
    }
    r.micro_accuracy = j.at("micro_accuracy").get<double>();
    r.macro_accuracy = j.at("macro_accuracy").get<double>();
    r.macro_precision = j.at("macro_precision").get<double>();
    r.macro_recall = j.at("macro_recall").get<double>();
    r.macro_f1 = j.at("macro_f1").get<double>();
    r.zero_support = j.at("zero_support").get<std::vector<std::string>>();
    r.zero_predicted = j.at("zero_predicted").get<std::vector<std::string>>();
    r.total = j.at("total").get<std::size_t>();
    return r;
}

// One row per class plus the aggregates, as CSV.
inline void write_report_csv(std::ostream& out, const MetricReport& r) {
    out << "class,accuracy,precision,f1,support\n";
    out << std::setprecision(17);
    for (const auto& c : r.classes)
        out << c << ',' << r.per_class_accuracy.at(c) << ',' << r.per_class_precision.at(c) << ','
            << r.per_class_f1.at(c) << ',' << r.support.at(c) << '\n';
    out << "micro_accuracy," << r.micro_accuracy << ",,,\n";
    out << "macro_accuracy," << r.macro_accuracy << ",,,\n";
    out << "macro_precision," << r.macro_precision << ",,,\n";
    out << "macro_recall," << r.macro_recall << ",,,\n";
    out << "macro_f1," << r.macro_f1 << ",,,\n";
}

inline void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm) {
    out << "gt\\pred";
    for (const auto& c : cm.classes) out << ',' << c;
    out << '\n';
    for (std::size_t i = 0; i < cm.classes.size(); ++i) {
        out << cm.classes[i];
        for (auto v : cm.counts[i]) out << ',' << v;
        out << '\n';
    }
}

inline void print_report(std::ostream& out, const MetricReport& r) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(3);
    std::size_t width = 8;
    for (const auto& c : r.classes) width = std::max(width, c.size() + 2);
    s << std::left << std::setw(static_cast<int>(width)) << "class" << std::right << std::setw(10)
      << "accuracy" << std::setw(11) << "precision" << std::setw(8) << "f1" << std::setw(9) << "support"
      << '\n';
    for (const auto& c : r.classes) {
        s << std::left << std::setw(static_cast<int>(width)) << c << std::right << std::setw(10)
          << r.per_class_accuracy.at(c) << std::setw(11) << r.per_class_precision.at(c) << std::setw(8)
          << r.per_class_f1.at(c) << std::setw(9) << r.support.at(c);
        if (std::find(r.zero_support.begin(), r.zero_support.end(), c) != r.zero_support.end()) s << "  (no support)";
        s << '\n';
    }
    s << "micro accuracy  " << r.micro_accuracy << '\n'
      << "macro accuracy  " << r.macro_accuracy << '\n'
      << "macro precision " << r.macro_precision << '\n'
      << "macro recall    " << r.macro_recall << '\n'
      << "macro f1        " << r.macro_f1 << '\n';
    out << s.str();
}

}  // namespace entdisc
