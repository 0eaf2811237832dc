#pragma once
// Subcommand implementations behind tools/entdisc. Kept in a header so the
// tests can drive them in-process.
//
// Option precedence: built-in defaults, then command-line flags, then the
// --config file (a value present in the file wins over the flag).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "entdisc/baselines.hpp"
#include "entdisc/io.hpp"
#include "entdisc/linear.hpp"
#include "entdisc/metrics.hpp"
#include "entdisc/pipeline.hpp"
#include "entdisc/synth.hpp"

namespace entdisc::cli {

namespace fs = std::filesystem;
using OrderedJson = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";

struct RunConfig {
    std::string detections;
    std::string mentions;
    std::string gt_boxes;
    std::string labels;
    std::string vocabulary;
    std::string taxonomy;
    std::string out_dir = "out";
    PipelineConfig pipeline;
    TrainConfig train;
    std::string baseline = "limsi";
    double train_fraction = 0.8;
    std::string split = "all";  // all | test
    double iou_threshold = 0.0;
    std::vector<std::size_t> sweep_k;
    bool dump_graphs = false;
};

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string to_string(VoteMultiplicity v) { return v == VoteMultiplicity::Set ? "set" : "multiset"; }

inline VoteMultiplicity parse_votes(const std::string& s) {
    if (s == "multiset") return VoteMultiplicity::Multiset;
    if (s == "set") return VoteMultiplicity::Set;
    throw ConfigError("votes must be multiset or set (got '" + s + "')");
}

inline OrderedJson pipeline_json(const PipelineConfig& p) {
    OrderedJson j;
    j["seed"] = p.seed;
    j["stages"] = static_cast<int>(p.stages);
    OrderedJson v;
    if (p.vocab_policy.kind == CutoffPolicy::Kind::TopK)
        v["top_k"] = p.vocab_policy.k;
    else
        v["min_fraction"] = p.vocab_policy.tau;
    j["vocab"] = v;
    j["fuzzy_threshold"] = p.fuzzy_threshold;
    j["window"] = {{"known", p.window.known}, {"unknown", p.window.unknown}};
    OrderedJson c;
    c["kind"] = entdisc::to_string(p.cluster.kind);
    c["k"] = p.cluster.k;
    c["l2_normalize"] = p.cluster.l2_normalize;
    c["max_iters"] = p.cluster.max_iters;
    c["tol"] = p.cluster.tol;
    c["n_init"] = p.cluster.n_init;
    c["votes"] = to_string(p.cluster.votes);
    j["cluster"] = c;
    j["enforce_overclustering"] = p.enforce_overclustering;
    return j;
}

inline OrderedJson run_config_json(const RunConfig& rc) {
    OrderedJson j;
    j["detections"] = rc.detections;
    j["mentions"] = rc.mentions;
    j["gt_boxes"] = rc.gt_boxes;
    j["labels"] = rc.labels;
    j["vocabulary"] = rc.vocabulary;
    j["taxonomy"] = rc.taxonomy;
    j["out_dir"] = rc.out_dir;
    const auto pj = pipeline_json(rc.pipeline);
    for (auto it = pj.begin(); it != pj.end(); ++it) j[it.key()] = it.value();
    j["train"] = train_config_json(rc.train);
    j["baseline"] = rc.baseline;
    j["train_fraction"] = rc.train_fraction;
    j["split"] = rc.split;
    j["iou_threshold"] = rc.iou_threshold;
    j["sweep_k"] = rc.sweep_k;
    j["dump_graphs"] = rc.dump_graphs;
    return j;
}

namespace detail {

inline std::string resolve_path(const std::string& p, const fs::path& base) {
    if (p.empty() || fs::path(p).is_absolute() || base.empty()) return p;
    return (base / p).lexically_normal().string();
}

}  // namespace detail

// Overlays the keys present in `j` onto `rc`. Relative paths are taken
// relative to `base_dir`.
inline void apply_config_json(RunConfig& rc, const nlohmann::json& j, const fs::path& base_dir = {}) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    auto& p = rc.pipeline;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        const auto& v = it.value();
        try {
            if (k == "detections") rc.detections = detail::resolve_path(v.get<std::string>(), base_dir);
            else if (k == "mentions") rc.mentions = detail::resolve_path(v.get<std::string>(), base_dir);
            else if (k == "gt_boxes") rc.gt_boxes = detail::resolve_path(v.get<std::string>(), base_dir);
            else if (k == "labels") rc.labels = detail::resolve_path(v.get<std::string>(), base_dir);
            else if (k == "vocabulary") rc.vocabulary = detail::resolve_path(v.get<std::string>(), base_dir);
            else if (k == "taxonomy") rc.taxonomy = detail::resolve_path(v.get<std::string>(), base_dir);
            else if (k == "out_dir") rc.out_dir = detail::resolve_path(v.get<std::string>(), base_dir);
            else if (k == "seed") p.seed = v.get<std::uint64_t>();
            else if (k == "stages") p.stages = parse_stages(v.get<int>());
            else if (k == "fuzzy_threshold") p.fuzzy_threshold = v.get<int>();
            else if (k == "enforce_overclustering") p.enforce_overclustering = v.get<bool>();
            else if (k == "vocab") {
                if (v.contains("top_k") && v.contains("min_fraction"))
                    throw ConfigError("vocab: give either top_k or min_fraction, not both");
                for (auto vi = v.begin(); vi != v.end(); ++vi) {
                    if (vi.key() == "top_k") p.vocab_policy = CutoffPolicy::top_k(vi->get<std::size_t>());
                    else if (vi.key() == "min_fraction") p.vocab_policy = CutoffPolicy::min_fraction(vi->get<double>());
                    else throw ConfigError("unknown vocab option '" + vi.key() + "'");
                }
            } else if (k == "window") {
                for (auto wi = v.begin(); wi != v.end(); ++wi) {
                    if (wi.key() == "known") p.window.known = wi->get<std::int64_t>();
                    else if (wi.key() == "unknown") p.window.unknown = wi->get<std::int64_t>();
                    else throw ConfigError("unknown window option '" + wi.key() + "'");
                }
            } else if (k == "cluster") {
                for (auto ci = v.begin(); ci != v.end(); ++ci) {
                    const auto& ck = ci.key();
                    if (ck == "kind") p.cluster.kind = parse_clusterer(ci->get<std::string>());
                    else if (ck == "k") p.cluster.k = ci->get<std::size_t>();
                    else if (ck == "l2_normalize") p.cluster.l2_normalize = ci->get<bool>();
                    else if (ck == "max_iters") p.cluster.max_iters = ci->get<std::size_t>();
                    else if (ck == "tol") p.cluster.tol = ci->get<double>();
                    else if (ck == "n_init") p.cluster.n_init = ci->get<std::size_t>();
                    else if (ck == "votes") p.cluster.votes = parse_votes(ci->get<std::string>());
                    else throw ConfigError("unknown cluster option '" + ck + "'");
                }
            } else if (k == "train") rc.train = train_config_from_json(v, rc.train);
            else if (k == "baseline") rc.baseline = v.get<std::string>();
            else if (k == "train_fraction") rc.train_fraction = v.get<double>();
            else if (k == "split") rc.split = v.get<std::string>();
            else if (k == "iou_threshold") rc.iou_threshold = v.get<double>();
            else if (k == "sweep_k") rc.sweep_k = v.get<std::vector<std::size_t>>();
            else if (k == "dump_graphs") rc.dump_graphs = v.get<bool>();
            else throw ConfigError("unknown config key '" + k + "'");
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config key '" + k + "': " + e.what());
        }
    }
}

inline nlohmann::json read_json_file(const fs::path& path, bool config) {
    const auto text = io::read_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        if (config) throw ConfigError("'" + path.string() + "': " + e.what());
        throw ParseError(path.string(), 1, e.what());
    }
}

inline void load_config_file(RunConfig& rc, const fs::path& path) {
    if (!fs::exists(path)) throw ConfigError("config file '" + path.string() + "' not found");
    apply_config_json(rc, read_json_file(path, true), path.parent_path());
}

inline void validate(const RunConfig& rc) {
    rc.pipeline.vocab_policy.validate();
    rc.pipeline.window.validate();
    rc.train.validate();
    if (rc.pipeline.fuzzy_threshold < 0 || rc.pipeline.fuzzy_threshold > 100)
        throw ConfigError("fuzzy_threshold must be in [0, 100]");
    if (!(rc.train_fraction > 0.0 && rc.train_fraction < 1.0)) throw ConfigError("train_fraction must be in (0, 1)");
    if (rc.split != "all" && rc.split != "test") throw ConfigError("split must be all or test");
    if (!(rc.iou_threshold >= 0.0 && rc.iou_threshold <= 1.0)) throw ConfigError("iou_threshold must be in [0, 1]");
    if (rc.out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

// ---- run bookkeeping --------------------------------------------------------

class Manifest {
public:
    Manifest(std::string command, const OrderedJson& config) {
        j_["tool"] = "entdisc";
        j_["version"] = kVersion;
        j_["command"] = std::move(command);
        j_["config"] = config;
        j_["config_hash"] = hex64(fnv1a64(config.dump()));
        j_["seeds"] = OrderedJson::object();
        j_["inputs"] = OrderedJson::object();
        j_["outputs"] = OrderedJson::array();
        j_["timings_ms"] = OrderedJson::object();
    }

    void seed(const std::string& name, std::uint64_t v) { j_["seeds"][name] = v; }

    void input(const std::string& role, const fs::path& path) {
        const auto bytes = io::read_file(path);
        j_["inputs"][role] = {{"path", path.string()}, {"fnv1a64", hex64(fnv1a64(bytes))}, {"bytes", bytes.size()}};
    }

    void output(const std::string& name) { j_["outputs"].push_back(name); }
    void note(const std::string& key, OrderedJson v) { j_[key] = std::move(v); }

    template <class F>
    auto timed(const std::string& name, F&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        auto finish = [&] {
            j_["timings_ms"][name] =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        };
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            finish();
        } else {
            auto r = fn();
            finish();
            return r;
        }
    }

    void write(const fs::path& dir) {
        output("manifest.json");
        const auto text = j_.dump(2) + "\n";
        io::write_atomically(dir / "manifest.json", [&](std::ostream& o) { o << text; });
    }

    const OrderedJson& json() const { return j_; }

private:
    OrderedJson j_;
};

inline void write_text(const fs::path& path, const std::string& text) {
    io::write_atomically(path, [&](std::ostream& o) { o << text; });
}

inline OrderedJson vocabulary_json(const EntityVocabulary& v) {
    OrderedJson j;
    j["schema"] = kSchemaVersion;
    j["unknown"] = v.unknown_name;
    j["entities"] = v.entities;
    OrderedJson f;
    for (const auto& e : v.classes()) f[e] = v.frequency(e);
    j["frequencies"] = f;
    j["fuzzy_threshold"] = v.fuzzy_threshold;
    j["normalization"] = v.normalization;
    return j;
}

// Class order recorded by discover: entities then unknown.
inline std::vector<std::string> classes_from_vocabulary_file(const fs::path& path) {
    const auto j = read_json_file(path, false);
    try {
        auto out = j.at("entities").get<std::vector<std::string>>();
        out.push_back(j.at("unknown").get<std::string>());
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("'" + path.string() + "': " + e.what());
    }
}

inline Dataset load_inputs(const RunConfig& rc, Manifest& m) {
    if (rc.detections.empty()) throw ConfigError("--detections is required");
    if (rc.mentions.empty()) throw ConfigError("--mentions is required");
    return m.timed("load", [&] {
        auto ds = io::load_dataset(rc.detections, rc.mentions);
        m.input("detections", rc.detections);
        m.input("mentions", rc.mentions);
        return ds;
    });
}

inline PipelineConfig pipeline_with_taxonomy(const RunConfig& rc, Manifest& m) {
    PipelineConfig p = rc.pipeline;
    if (!rc.taxonomy.empty()) {
        p.taxonomy = io::load_taxonomy(rc.taxonomy);
        m.input("taxonomy", rc.taxonomy);
    }
    return p;
}

// ---- synth --------------------------------------------------------------------

// Validates and generates everything before the first file is written.
inline SynthDataset cmd_synth(const SynthConfig& cfg, const fs::path& out_dir, std::ostream& log) {
    cfg.validate();
    const auto cfg_json = synth_config_json(cfg);
    Manifest m("synth", cfg_json);
    m.seed("root", cfg.seed);
    auto sd = m.timed("generate", [&] { return generate(cfg); });
    std::vector<io::GtBox> boxes;
    boxes.reserve(sd.dataset.detections.size());
    for (const auto& d : sd.dataset.detections) boxes.push_back({d.frame, d.box, d.gt_label.value_or(kUnknownName)});
    m.timed("write", [&] {
        io::write_detections(out_dir / "detections.jsonl", sd.dataset);
        io::write_mentions(out_dir / "mentions.jsonl", sd.dataset);
        io::write_gt_boxes(out_dir / "gt_boxes.jsonl", boxes);
        io::write_atomically(out_dir / "truth.jsonl", [&](std::ostream& o) { write_truth(o, sd.truth); });
        write_text(out_dir / "synth_config.json", cfg_json.dump(2) + "\n");
    });
    for (const char* f : {"detections.jsonl", "mentions.jsonl", "gt_boxes.jsonl", "truth.jsonl", "synth_config.json"})
        m.output(f);
    m.note("counts", {{"detections", sd.dataset.detections.size()},
                      {"mentions", sd.dataset.mentions.size()},
                      {"entities", sd.truth.size()}});
    m.write(out_dir);
    log << m.json().dump(2) << '\n';
    return sd;
}

// ---- discover -----------------------------------------------------------------

inline DiscoveryResult cmd_discover(const RunConfig& rc, std::ostream& log) {
    validate(rc);
    Manifest m("discover", run_config_json(rc));
    const fs::path out = rc.out_dir;
    const auto ds = load_inputs(rc, m);
    const auto cfg = pipeline_with_taxonomy(rc, m);
    m.seed("root", cfg.seed);

    DiscoveryResult r;
    m.timed("stage1", [&] {
        auto a = align(ds, cfg);
        r.vocab = std::move(a.vocab);
        r.mentions = std::move(a.normalized.mentions);
        r.graphs = std::move(a.graphs);
        r.weak = std::move(a.weak);
        const auto s = derive_seed(cfg.seed, "stage1");
        m.seed("stage1", s);
        r.stage1 = stage1_labels(r.weak, s, r.vocab.unknown_name);
    });
    write_text(out / "vocabulary.json", vocabulary_json(r.vocab).dump(2) + "\n");
    m.output("vocabulary.json");
    io::write_labels(out / "labels_stage1.jsonl", ds, r.stage1);
    m.output("labels_stage1.jsonl");
    if (rc.dump_graphs) {
        io::write_atomically(out / "graphs.jsonl", [&](std::ostream& o) { write_graphs(o, ds, r.graphs); });
        m.output("graphs.jsonl");
    }
    log << "vocabulary: " << r.vocab.entities.size() << " entities + " << r.vocab.unknown_name << '\n';

    if (cfg.stages != Stages::S1) {
        m.timed("stage2", [&] { run_stage2(ds, cfg, r); });
        m.seed("cluster", r.cluster_used.seed);
        m.note("clusterer", {{"kind", entdisc::to_string(r.cluster_used.kind)},
                             {"k", r.cluster_used.k},
                             {"objective", r.clusters->objective},
                             {"iterations", r.clusters->iterations}});
        io::write_labels(out / "labels_stage12.jsonl", ds, r.cleansed->labels, &r.clusters->assignment);
        m.output("labels_stage12.jsonl");
        log << "stage 2: " << entdisc::to_string(r.cluster_used.kind) << " k=" << r.cluster_used.k << '\n';
    }
    if (cfg.stages == Stages::S123) {
        m.timed("stage3", [&] { run_stage3(ds, r); });
        io::write_labels(out / "labels_stage123.jsonl", ds, r.refined->labels);
        m.output("labels_stage123.jsonl");
        OrderedJson protos = OrderedJson::object();
        for (const auto& [name, p] : r.prototypes)
            protos[name] = {{"members", p.member_count}, {"vector", p.vector}};
        write_text(out / "prototypes.json", protos.dump() + "\n");
        m.output("prototypes.json");
        m.note("refinement", {{"most_frequent", r.refined->most_frequent},
                              {"reassigned", r.refined->reassigned.size()}});
        log << "stage 3: relabelled " << r.refined->reassigned.size() << " '" << r.refined->most_frequent
            << "' detections\n";
    }
    m.write(out);
    return r;
}

// ---- baseline -----------------------------------------------------------------

inline Labels cmd_baseline(const RunConfig& rc, std::ostream& log) {
    validate(rc);
    Manifest m("baseline", run_config_json(rc));
    const fs::path out = rc.out_dir;
    const auto ds = load_inputs(rc, m);
    const auto cfg = pipeline_with_taxonomy(rc, m);
    m.seed("root", cfg.seed);
    const auto a = m.timed("align", [&] { return align(ds, cfg); });
    write_text(out / "vocabulary.json", vocabulary_json(a.vocab).dump(2) + "\n");
    m.output("vocabulary.json");
    const auto split = chronological_split(ds, rc.train_fraction);
    Labels labels;
    const std::string name = rc.baseline;
    if (name == "random") {
        const auto s = derive_seed(cfg.seed, "random");
        m.seed("random", s);
        labels = random_baseline(a.vocab, ds.detections.size(), s);
    } else if (name == "limsi") {
        auto cc = cfg.cluster.resolved(ds.detections.size());
        cc.seed = derive_seed(cfg.seed, "cluster");
        m.seed("cluster", cc.seed);
        auto res = m.timed("limsi", [&] { return limsi_assign(ds, a.vocab, a.weak, cc); });
        m.note("direct_matched", ds.detections.size() - res.clustered.size());
        labels = std::move(res.labels);
    } else if (name == "multilabel" || name == "oracle") {
        TrainConfig tc = rc.train;
        tc.seed = derive_seed(cfg.seed, "train");
        m.seed("train", tc.seed);
        auto trained = m.timed("train", [&] {
            return name == "oracle" ? train_oracle(ds, tc, split.train)
                                    : train_multilabel_weak(ds, a.weak, a.vocab.classes(), tc, split.train);
        });
        save_classifier(out / ("model_" + name + ".json"), trained.model);
        m.output("model_" + name + ".json");
        m.note("train_samples", trained.used_samples);
        m.note("final_loss", trained.loss_trace.back());
        labels = predict_dataset(trained.model, ds);
    } else {
        throw ConfigError("unknown baseline '" + name + "' (expected random, limsi, multilabel or oracle)");
    }
    io::write_labels(out / ("labels_" + name + ".jsonl"), ds, labels);
    m.output("labels_" + name + ".jsonl");
    m.write(out);
    log << "baseline " << name << ": " << labels.size() << " labels\n";
    return labels;
}

// ---- eval ---------------------------------------------------------------------

struct EvalOutcome {
    ConfusionMatrix confusion;
    MetricReport report;
};

inline void write_report_files(const fs::path& out, const EvalOutcome& e, Manifest& m) {
    write_text(out / "report.json", report_json(e.report).dump(2) + "\n");
    std::ostringstream csv, conf;
    write_report_csv(csv, e.report);
    write_confusion_csv(conf, e.confusion);
    write_text(out / "report.csv", csv.str());
    write_text(out / "confusion.csv", conf.str());
    for (const char* f : {"report.json", "report.csv", "confusion.csv"}) m.output(f);
}

// Inline mode joins labels to each detection's gt_label by id; box mode
// pairs labelled boxes with ground-truth boxes by IoU.
inline EvalOutcome cmd_eval(const RunConfig& rc, std::ostream& log) {
    validate(rc);
    if (rc.labels.empty()) throw ConfigError("--labels is required");
    if (rc.gt_boxes.empty() && rc.detections.empty())
        throw ConfigError("eval needs --detections (inline gt_label) or --gt-boxes");
    Manifest m("eval", run_config_json(rc));
    const fs::path out = rc.out_dir;
    auto records = m.timed("load", [&] { return io::load_labels(rc.labels); });
    m.input("labels", rc.labels);
    std::vector<std::string> base;
    if (!rc.vocabulary.empty()) {
        base = classes_from_vocabulary_file(rc.vocabulary);
        m.input("vocabulary", rc.vocabulary);
    }
    if (rc.split == "test") {
        Dataset frames;
        for (const auto& r : records) frames.detections.push_back({r.id, r.frame, r.box, {}, std::nullopt});
        const auto s = chronological_split(frames, rc.train_fraction);
        std::vector<io::LabelRecord> kept;
        for (auto i : s.test) kept.push_back(records[i]);
        records = std::move(kept);
    }
    if (records.empty()) throw EvaluationError("no labelled detections to evaluate");

    EvalOutcome e;
    if (!rc.gt_boxes.empty()) {
        const auto gt = io::load_gt_boxes(rc.gt_boxes);
        m.input("gt_boxes", rc.gt_boxes);
        std::set<FrameRef> frames;
        FrameBoxes pred, truth;
        for (const auto& r : records) {
            pred[r.frame].push_back({r.box, r.label});
            frames.insert(r.frame);
        }
        for (const auto& g : gt)
            if (frames.count(g.frame)) truth[g.frame].push_back({g.box, g.label});
        if (truth.empty()) throw EvaluationError("ground-truth boxes share no frame with the labels");
        const auto pairs = match_predictions_to_gt(pred, truth, rc.iou_threshold);
        Labels g, p;
        for (const auto& bp : pairs) {
            g.push_back(bp.gt_label);
            p.push_back(bp.predicted_label);
        }
        e.confusion = confusion(g, p, base);
    } else {
        Dataset ds;
        ds.detections = io::load_detections(rc.detections);
        m.input("detections", rc.detections);
        std::map<std::string, std::string> gt, pred;
        for (const auto& d : ds.detections)
            if (d.gt_label) gt[d.id] = *d.gt_label;
        std::size_t overlap = 0;
        for (const auto& r : records) {
            if (!pred.emplace(r.id, r.label).second) throw EvaluationError("duplicate label id '" + r.id + "'");
            overlap += gt.count(r.id);
        }
        if (overlap == 0) throw EvaluationError("labels and ground truth share no detection id");
        if (overlap != pred.size())
            throw EvaluationError(std::to_string(pred.size() - overlap) + " labelled detections have no gt_label");
        std::map<std::string, std::string> gt_used;
        for (const auto& [id, l] : pred) gt_used[id] = gt.at(id);
        e.confusion = confusion(gt_used, pred, base);
    }
    e.report = metrics(e.confusion);
    write_report_files(out, e, m);
    m.write(out);
    print_report(log, e.report);
    return e;
}

// ---- sweep --------------------------------------------------------------------

inline std::vector<SweepRow> cmd_sweep(const RunConfig& rc, std::ostream& log) {
    validate(rc);
    Manifest m("sweep", run_config_json(rc));
    const fs::path out = rc.out_dir;
    const auto ds = load_inputs(rc, m);
    const auto cfg = pipeline_with_taxonomy(rc, m);
    m.seed("root", cfg.seed);
    m.seed("cluster", derive_seed(cfg.seed, "cluster"));
    auto ks = rc.sweep_k;
    if (ks.empty()) {
        const auto E = build_vocabulary(ds.mentions, cfg.vocab_policy, cfg.taxonomy, cfg.fuzzy_threshold).entities.size();
        for (std::size_t k = std::max<std::size_t>(E, 1); k <= 4 * std::max<std::size_t>(E, 1); ++k) ks.push_back(k);
    }
    for (auto k : ks)
        if (k > ds.detections.size()) throw ConfigError("sweep: k = " + std::to_string(k) + " exceeds the detection count");
    const auto rows = m.timed("sweep", [&] { return sweep_clusters(ds, cfg, ks); });
    std::ostringstream csv;
    csv << "k,macro_accuracy,micro_accuracy,macro_precision,macro_recall,macro_f1\n";
    csv << std::setprecision(6) << std::fixed;
    for (const auto& r : rows)
        csv << r.k << ',' << r.report.macro_accuracy << ',' << r.report.micro_accuracy << ','
            << r.report.macro_precision << ',' << r.report.macro_recall << ',' << r.report.macro_f1 << '\n';
    write_text(out / "sweep.csv", csv.str());
    m.output("sweep.csv");
    m.write(out);
    log << csv.str();
    return rows;
}

// ---- report -------------------------------------------------------------------

struct MethodRow {
    std::string method;
    MetricReport report;
};

// Every method on the same held-out chronological split. Unsupervised
// methods see all detections; the trainers see only the training split.
inline std::vector<MethodRow> cmd_report(const RunConfig& rc, std::ostream& log) {
    validate(rc);
    RunConfig full = rc;
    full.pipeline.stages = Stages::S123;
    Manifest m("report", run_config_json(full));
    const fs::path out = rc.out_dir;
    const auto ds = load_inputs(rc, m);
    const auto cfg = pipeline_with_taxonomy(full, m);
    m.seed("root", cfg.seed);
    const auto gt = gt_labels(ds);
    const auto split = chronological_split(ds, rc.train_fraction);
    const auto gt_test = subset(gt, split.test);
    if (gt_test.empty()) throw EvaluationError("test split is empty");

    const auto r = m.timed("discover", [&] { return run_discovery(ds, cfg); });
    const auto classes = r.vocab.classes();
    std::vector<MethodRow> rows;
    auto add = [&](const std::string& name, const Labels& labels) {
        rows.push_back({name, evaluate(gt_test, subset(labels, split.test), classes)});
    };
    add("random", random_baseline(r.vocab, ds.detections.size(), derive_seed(cfg.seed, "random")));
    add("stage1", r.stage1);
    add("stage12", r.cleansed->labels);
    add("stage123", r.refined->labels);
    auto cc = cfg.cluster.resolved(ds.detections.size());
    cc.seed = derive_seed(cfg.seed, "cluster");
    add("limsi", m.timed("limsi", [&] { return limsi_assign(ds, r.vocab, r.weak, cc).labels; }));
    TrainConfig tc = rc.train;
    tc.seed = derive_seed(cfg.seed, "train");
    add("multilabel", m.timed("multilabel", [&] {
        return predict_dataset(train_multilabel_weak(ds, r.weak, classes, tc, split.train).model, ds);
    }));
    add("oracle", m.timed("oracle", [&] { return predict_dataset(train_oracle(ds, tc, split.train).model, ds); }));

    OrderedJson j;
    j["split"] = {{"train_fraction", rc.train_fraction}, {"train", split.train.size()}, {"test", split.test.size()}};
    j["methods"] = OrderedJson::object();
    for (const auto& row : rows) j["methods"][row.method] = report_json(row.report);
    write_text(out / "report.json", j.dump(2) + "\n");
    std::ostringstream csv;
    csv << "method,micro_accuracy,macro_accuracy,macro_precision,macro_recall,macro_f1\n" << std::fixed
        << std::setprecision(4);
    for (const auto& row : rows)
        csv << row.method << ',' << row.report.micro_accuracy << ',' << row.report.macro_accuracy << ','
            << row.report.macro_precision << ',' << row.report.macro_recall << ',' << row.report.macro_f1 << '\n';
    write_text(out / "report.csv", csv.str());
    m.output("report.json");
    m.output("report.csv");
    m.write(out);

    log << std::left << std::setw(12) << "method" << std::right << std::setw(9) << "micro" << std::setw(9)
        << "macro" << std::setw(9) << "prec" << std::setw(9) << "recall" << std::setw(9) << "f1" << '\n'
        << std::fixed << std::setprecision(3);
    for (const auto& row : rows)
        log << std::left << std::setw(12) << row.method << std::right << std::setw(9) << row.report.micro_accuracy
            << std::setw(9) << row.report.macro_accuracy << std::setw(9) << row.report.macro_precision
            << std::setw(9) << row.report.macro_recall << std::setw(9) << row.report.macro_f1 << '\n';
    return rows;
}

}  // namespace entdisc::cli
