#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "entdisc/cli.hpp"

using namespace entdisc;

namespace {

struct Flags {
    std::string config;
    int stages = 123;
    std::string clusterer = "auto";
    std::string votes = "multiset";
    double min_fraction = -1.0;
    std::size_t top_k = 0;
    bool scene_window = false;
};

void add_data_flags(CLI::App* c, cli::RunConfig& rc) {
    c->add_option("--detections", rc.detections, "detections JSONL");
    c->add_option("--mentions", rc.mentions, "mentions JSONL");
    c->add_option("--taxonomy", rc.taxonomy, "surface -> name overrides (JSON object)");
}

void add_pipeline_flags(CLI::App* c, cli::RunConfig& rc, Flags& f) {
    auto& p = rc.pipeline;
    c->add_option("--seed", p.seed, "root seed");
    c->add_option("--clusterer", f.clusterer, "auto, kmeans or ward");
    c->add_option("-k,--clusters", p.cluster.k, "cluster count (0: clusterer default)");
    c->add_option("--votes", f.votes, "multiset or set");
    c->add_flag("--l2-normalize", p.cluster.l2_normalize, "cluster L2-normalized embeddings");
    c->add_option("--max-iters", p.cluster.max_iters);
    c->add_option("--n-init", p.cluster.n_init);
    auto* mf = c->add_option("--min-fraction", f.min_fraction, "keep names with count >= tau * max count");
    auto* tk = c->add_option("--top-k", f.top_k, "keep the k most frequent names");
    mf->excludes(tk);
    c->add_option("--fuzzy-threshold", p.fuzzy_threshold);
    c->add_option("--window-known", p.window.known, "frames a named mention covers");
    c->add_option("--window-unknown", p.window.unknown, "frames an unknown mention covers");
    c->add_flag("--scene-window", f.scene_window, "known/unknown windows of 4/1 frames");
}

void finish_flags(cli::RunConfig& rc, const Flags& f) {
    auto& p = rc.pipeline;
    p.stages = parse_stages(f.stages);
    p.cluster.kind = parse_clusterer(f.clusterer);
    p.cluster.votes = cli::parse_votes(f.votes);
    if (f.top_k > 0) p.vocab_policy = CutoffPolicy::top_k(f.top_k);
    if (f.min_fraction >= 0.0) p.vocab_policy = CutoffPolicy::min_fraction(f.min_fraction);
    if (f.scene_window) p.window = WindowPolicy::scene();
    if (!f.config.empty()) cli::load_config_file(rc, f.config);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entity discovery in captioned video: align names to faces, agree over clusters, refine with prototypes."};
    app.set_version_flag("--version", std::string("entdisc ") + cli::kVersion);
    app.require_subcommand(1);

    cli::RunConfig rc;
    Flags f;

    std::string synth_config, preset = "canonical";
    std::uint64_t synth_seed = 0;
    bool synth_seed_set = false;
    auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark");
    synth->add_option("--config", synth_config, "synthetic config JSON");
    synth->add_option("--preset", preset, "canonical, unknown_dominant, named_dominant, noise_free, penny");
    synth->add_option("--seed", synth_seed)->each([&](const std::string&) { synth_seed_set = true; });
    synth->add_option("-o,--out-dir", rc.out_dir);

    auto* discover = app.add_subcommand("discover", "run the discovery stages");
    discover->add_option("--config", f.config, "run config JSON (its values override flags)");
    add_data_flags(discover, rc);
    add_pipeline_flags(discover, rc, f);
    discover->add_option("--stages", f.stages, "1, 12 or 123");
    discover->add_flag("--dump-graphs", rc.dump_graphs, "also write the per-frame bipartite graphs");
    discover->add_option("-o,--out-dir", rc.out_dir);

    auto* baseline = app.add_subcommand("baseline", "run a comparison method");
    baseline->add_option("--config", f.config);
    add_data_flags(baseline, rc);
    add_pipeline_flags(baseline, rc, f);
    baseline->add_option("--kind", rc.baseline, "random, limsi, multilabel or oracle");
    baseline->add_option("--train-fraction", rc.train_fraction);
    baseline->add_option("--epochs", rc.train.epochs);
    baseline->add_option("--learning-rate", rc.train.learning_rate);
    baseline->add_option("-o,--out-dir", rc.out_dir);

    auto* eval = app.add_subcommand("eval", "score a labels file");
    eval->add_option("--config", f.config);
    eval->add_option("--labels", rc.labels, "labels JSONL")->required();
    eval->add_option("--detections", rc.detections, "detections JSONL carrying gt_label");
    eval->add_option("--gt-boxes", rc.gt_boxes, "ground-truth boxes JSONL (IoU matching)");
    eval->add_option("--vocabulary", rc.vocabulary, "vocabulary.json fixing the class order");
    eval->add_option("--iou-threshold", rc.iou_threshold);
    eval->add_option("--split", rc.split, "all or test");
    eval->add_option("--train-fraction", rc.train_fraction);
    eval->add_option("-o,--out-dir", rc.out_dir);

    auto* sweep = app.add_subcommand("sweep", "stage 1+2 accuracy against the cluster count");
    sweep->add_option("--config", f.config);
    add_data_flags(sweep, rc);
    add_pipeline_flags(sweep, rc, f);
    sweep->add_option("--ks", rc.sweep_k, "cluster counts (default |E| .. 4|E|)")->delimiter(',');
    sweep->add_option("-o,--out-dir", rc.out_dir);

    auto* report = app.add_subcommand("report", "every method on the held-out split");
    report->add_option("--config", f.config);
    add_data_flags(report, rc);
    add_pipeline_flags(report, rc, f);
    report->add_option("--train-fraction", rc.train_fraction);
    report->add_option("--epochs", rc.train.epochs);
    report->add_option("-o,--out-dir", rc.out_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) {
            SynthConfig cfg = presets::by_name(preset);
            if (synth_seed_set) cfg.seed = synth_seed;
            if (!synth_config.empty()) cfg = synth_config_from_json(cli::read_json_file(synth_config, true), cfg);
            cli::cmd_synth(cfg, rc.out_dir, std::cout);
            return 0;
        }
        finish_flags(rc, f);
        if (discover->parsed()) cli::cmd_discover(rc, std::cout);
        else if (baseline->parsed()) cli::cmd_baseline(rc, std::cout);
        else if (eval->parsed()) cli::cmd_eval(rc, std::cout);
        else if (sweep->parsed()) cli::cmd_sweep(rc, std::cout);
        else if (report->parsed()) cli::cmd_report(rc, std::cout);
        return 0;
    } catch (const Error& e) {
        std::cerr << "entdisc: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "entdisc: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "entdisc: internal error: " << e.what() << '\n';
        return 3;
    }
}
