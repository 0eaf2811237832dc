#include <gtest/gtest.h>

#include <sstream>

#include "entdisc/baselines.hpp"
#include "entdisc/linear.hpp"
#include "entdisc/pipeline.hpp"
#include "entdisc/synth.hpp"
#include "test_util.hpp"

using namespace entdisc;

namespace {

std::map<std::string, std::size_t> histogram(const Dataset& ds) {
    std::map<std::string, std::size_t> h;
    for (const auto& d : ds.detections) ++h[*d.gt_label];
    return h;
}

double macro(const Dataset& ds, const Labels& pred, const EntityVocabulary& v) {
    return evaluate(gt_labels(ds), pred, v.classes()).macro_accuracy;
}

}  // namespace

TEST(SynthConfig, CanonicalDefaults) {
    const auto c = presets::canonical();
    EXPECT_EQ(c.n_entities, 7u);
    EXPECT_EQ(c.embedding_dim, 32u);
    EXPECT_EQ(c.n_frames, 1500u);
    EXPECT_EQ(c.faces_min, 1u);
    EXPECT_EQ(c.faces_max, 4u);
    EXPECT_DOUBLE_EQ(c.p_mention, 0.5);
    EXPECT_DOUBLE_EQ(c.p_spurious, 0.2);
    EXPECT_DOUBLE_EQ(c.zipf_s, 1.0);
    EXPECT_EQ(c.unknown_tail_entities, 30u);
    EXPECT_EQ(c.seed, 42u);
    EXPECT_DOUBLE_EQ(c.within_entity_stddev, 1.0);
}

TEST(SynthConfig, Validation) {
    auto c = presets::canonical();
    c.p_mention = 1.5;
    EXPECT_THROW(c.validate(), ConfigError);
    c = presets::canonical();
    c.within_entity_stddev = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = presets::canonical();
    c.n_entities = 1;
    EXPECT_THROW(c.validate(), ConfigError);
    c = presets::canonical();
    c.prototype_separation = -1;
    EXPECT_THROW(generate(c), ConfigError);
    EXPECT_THROW(presets::by_name("friends"), ConfigError);
}

TEST(SynthConfig, JsonRoundTripAndPresets) {
    const auto c = presets::penny();
    const auto back = synth_config_from_json(nlohmann::json::parse(synth_config_json(c).dump()));
    EXPECT_EQ(synth_config_json(back).dump(), synth_config_json(c).dump());
    const auto p = synth_config_from_json(nlohmann::json{{"preset", "noise_free"}, {"seed", 3}});
    EXPECT_EQ(p.faces_max, 1u);
    EXPECT_EQ(p.seed, 3u);
    EXPECT_THROW(synth_config_from_json(nlohmann::json{{"n_entitys", 3}}), ConfigError);
}

TEST(Synth, BitDeterministic) {
    const auto a = generate(presets::canonical());
    const auto b = generate(presets::canonical());
    EXPECT_EQ(a.dataset, b.dataset);
    std::ostringstream ta, tb;
    write_truth(ta, a.truth);
    write_truth(tb, b.truth);
    EXPECT_EQ(ta.str(), tb.str());
    auto other = presets::canonical();
    other.seed = 43;
    EXPECT_NE(generate(other).dataset, a.dataset);
}

TEST(Synth, RegenerationReproducesSizesAndHistogram) {
    const auto a = generate(presets::canonical());
    const auto b = generate(presets::canonical());
    EXPECT_EQ(a.dataset.detections.size(), b.dataset.detections.size());
    EXPECT_EQ(a.dataset.mentions.size(), b.dataset.mentions.size());
    EXPECT_EQ(histogram(a.dataset), histogram(b.dataset));
    EXPECT_NO_THROW(validate(a.dataset));
    EXPECT_EQ(histogram(a.dataset).size(), 8u);
}

TEST(Synth, PrototypeSeparationHonored) {
    for (double sep : {3.0, 5.0, 8.0}) {
        auto c = presets::canonical();
        c.prototype_separation = sep;
        c.n_frames = 50;
        const auto sd = generate(c);
        ASSERT_EQ(sd.truth.size(), 37u);
        for (std::size_t i = 0; i < sd.truth.size(); ++i)
            for (std::size_t j = i + 1; j < sd.truth.size(); ++j)
                ASSERT_GE(std::sqrt(squared_distance(sd.truth[i].prototype, sd.truth[j].prototype)), sep);
    }
}

TEST(Synth, InfeasibleSeparationIsGenerationError) {
    auto c = presets::canonical();
    c.embedding_dim = 1;
    c.prototype_separation = 10;
    EXPECT_THROW(generate(c), GenerationError);
}

TEST(Synth, TailNamesStayAwayFromEntities) {
    const auto tails = synth_tail_names(60);
    ASSERT_EQ(tails.size(), 60u);
    for (std::size_t i = 0; i < tails.size(); ++i) {
        for (std::size_t e = 0; e < 8; ++e) EXPECT_LT(fuzzy_ratio(tails[i], synth_entity_name(e)), 70) << tails[i];
        for (std::size_t j = 0; j < i; ++j) EXPECT_LT(fuzzy_ratio(tails[i], tails[j]), 70);
    }
    const auto shorter = synth_tail_names(10);
    EXPECT_TRUE(std::equal(shorter.begin(), shorter.end(), tails.begin()));
}

TEST(Synth, NoMentionsMeansAllUnknown) {
    auto c = presets::canonical();
    c.p_mention = 0;
    c.p_spurious = 0;
    c.n_frames = 200;
    const auto sd = generate(c);
    EXPECT_TRUE(sd.dataset.mentions.empty());
    PipelineConfig pc;
    pc.stages = Stages::S1;
    const auto r = run_discovery(sd.dataset, pc);
    for (const auto& w : r.weak) EXPECT_TRUE(w.candidates.empty());
    EXPECT_EQ(r.stage1, Labels(sd.dataset.detections.size(), "unknown"));
}

TEST(Synth, NoiseFreeWeakLabelsAreExact) {
    const auto sd = generate(presets::noise_free());
    PipelineConfig pc;
    pc.stages = Stages::S1;
    const auto r = run_discovery(sd.dataset, pc);
    EXPECT_EQ(r.vocab.entities.size(), 7u);
    for (std::size_t i = 0; i < r.weak.size(); ++i) {
        ASSERT_EQ(r.weak[i].candidates, (std::vector<std::string>{*sd.dataset.detections[i].gt_label}));
        EXPECT_EQ(r.stage1[i], *sd.dataset.detections[i].gt_label);
    }
}

TEST(Synth, PennyModeSuppressesOneEntity) {
    const auto base = generate(presets::canonical());
    const auto penny = generate(presets::penny());
    const std::string name = synth_entity_name(2);
    auto count = [&](const Dataset& ds) {
        return std::count_if(ds.mentions.begin(), ds.mentions.end(), [&](const auto& m) { return m.surface == name; });
    };
    EXPECT_LT(double(count(penny.dataset)), 0.15 * double(count(base.dataset)));
    EXPECT_EQ(histogram(penny.dataset).count(name), 1u);
}

TEST(Synth, UnknownDominantPresetShape) {
    const auto sd = generate(presets::unknown_dominant());
    const auto h = histogram(sd.dataset);
    std::size_t named = 0;
    for (const auto& [n, c] : h)
        if (n != "unknown") named = std::max(named, c);
    EXPECT_GT(h.at("unknown"), named);
    PipelineConfig pc;
    pc.stages = Stages::S1;
    EXPECT_EQ(run_discovery(sd.dataset, pc).vocab.entities.size(), 6u);
}

TEST(Pipeline, StagesParsing) {
    EXPECT_EQ(parse_stages(12), Stages::S12);
    EXPECT_THROW(parse_stages(2), ConfigError);
}

TEST(Pipeline, OverclusteringEnforced) {
    const auto sd = generate(presets::canonical());
    PipelineConfig pc;
    pc.cluster.k = 7;
    EXPECT_THROW(run_discovery(sd.dataset, pc), ConfigError);
    pc.cluster.k = 8;
    EXPECT_NO_THROW(run_discovery(sd.dataset, pc));
}

TEST(Pipeline, EmptyDatasetRejected) {
    EXPECT_THROW(run_discovery(Dataset{}, PipelineConfig{}), EmptyDatasetError);
}

TEST(Pipeline, Stage3OnlyTouchesMostFrequent) {
    const auto sd = generate(presets::canonical());
    const auto r = run_discovery(sd.dataset, PipelineConfig{});
    ASSERT_TRUE(r.refined && r.cleansed);
    for (std::size_t i = 0; i < r.refined->labels.size(); ++i)
        if (r.refined->labels[i] != r.cleansed->labels[i]) {
            EXPECT_EQ(r.cleansed->labels[i], r.refined->most_frequent);
        }
    DiscoveryResult empty;
    EXPECT_THROW(run_stage3(sd.dataset, empty), StateError);
}

TEST(Pipeline, Stage2BeatsStage1OnCanonical) {
    const auto sd = generate(presets::canonical());
    const auto r = run_discovery(sd.dataset, PipelineConfig{});
    EXPECT_GT(macro(sd.dataset, r.cleansed->labels, r.vocab), macro(sd.dataset, r.stage1, r.vocab));
}

TEST(Pipeline, RefinementTradesPrecisionForRecall) {
    const auto sd = generate(presets::canonical());
    const auto r = run_discovery(sd.dataset, PipelineConfig{});
    const auto gt = gt_labels(sd.dataset);
    const auto s2 = evaluate(gt, r.cleansed->labels, r.vocab.classes());
    const auto s3 = evaluate(gt, r.refined->labels, r.vocab.classes());
    EXPECT_GE(s3.macro_recall, s2.macro_recall);
    EXPECT_LE(s3.macro_precision, s2.macro_precision);
}

TEST(Pipeline, SpuriousMentionsDoNotHelpStage2) {
    double prev = 2.0;
    for (double ps : {0.0, 0.2, 0.4, 0.6}) {
        double total = 0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            auto c = presets::canonical();
            c.p_spurious = ps;
            c.seed = seed;
            const auto sd = generate(c);
            PipelineConfig pc;
            pc.stages = Stages::S12;
            const auto r = run_discovery(sd.dataset, pc);
            total += macro(sd.dataset, r.cleansed->labels, r.vocab);
        }
        const double mean = total / 5;
        EXPECT_LE(mean, prev) << "p_spurious " << ps;
        prev = mean;
    }
}

TEST(Pipeline, ChronologicalSplit) {
    const auto sd = generate(presets::canonical());
    const auto& ds = sd.dataset;
    const auto s = chronological_split(ds, 0.8);
    EXPECT_EQ(s.train.size() + s.test.size(), ds.detections.size());
    FrameRef last_train{"", -1};
    for (auto i : s.train) last_train = std::max(last_train, ds.detections[i].frame);
    for (auto i : s.test) EXPECT_LT(last_train, ds.detections[i].frame);
    std::set<FrameRef> train_frames, all_frames;
    for (auto i : s.train) train_frames.insert(ds.detections[i].frame);
    for (const auto& d : ds.detections) all_frames.insert(d.frame);
    EXPECT_EQ(train_frames.size(), static_cast<std::size_t>(std::floor(0.8 * double(all_frames.size()))));
    EXPECT_THROW(chronological_split(ds, 1.0), ConfigError);
}

TEST(Pipeline, SweepSingleK) {
    auto c = presets::canonical();
    c.n_frames = 300;
    const auto sd = generate(c);
    const auto rows = sweep_clusters(sd.dataset, PipelineConfig{}, {9});
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].k, 9u);
    EXPECT_THROW(sweep_clusters(sd.dataset, PipelineConfig{}, {0}), ConfigError);
}

// Oracle >= Stage 1+2+3 >= Stage 1+2 >= Stage 1 > random on the held-out split.
TEST(Pipeline, MethodOrderingOnCanonical) {
    const auto sd = generate(presets::canonical());
    const auto& ds = sd.dataset;
    PipelineConfig pc;
    const auto r = run_discovery(ds, pc);
    const auto split = chronological_split(ds);
    const auto gt = subset(gt_labels(ds), split.test);
    const auto cls = r.vocab.classes();
    auto score = [&](const Labels& l) { return evaluate(gt, subset(l, split.test), cls).macro_accuracy; };
    TrainConfig tc;
    tc.seed = derive_seed(pc.seed, "train");
    const double oracle = score(predict_dataset(train_oracle(ds, tc, split.train).model, ds));
    const double s123 = score(r.refined->labels);
    const double s12 = score(r.cleansed->labels);
    const double s1 = score(r.stage1);
    const double rnd = score(random_baseline(r.vocab, ds.detections.size(), derive_seed(pc.seed, "random")));
    EXPECT_GT(s1, rnd);
    EXPECT_GE(s12, s1);
    EXPECT_GE(s123, s12);
    EXPECT_GE(oracle, s123);
}
