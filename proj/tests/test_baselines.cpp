#include <gtest/gtest.h>

#include "entdisc/baselines.hpp"
#include "entdisc/linear.hpp"
#include "entdisc/metrics.hpp"
#include "entdisc/pipeline.hpp"
#include "entdisc/synth.hpp"
#include "test_util.hpp"

using namespace entdisc;
using testutil::det;
using testutil::mention;

namespace {

LinearClassifier random_model(Rng& rng, std::size_t C, std::size_t d, LossKind loss) {
    LinearClassifier m;
    for (std::size_t c = 0; c < C; ++c) m.classes.push_back("c" + std::to_string(c));
    m.weights = testutil::random_points(rng, C, d, 0.7);
    for (std::size_t c = 0; c < C; ++c) m.bias.push_back(0.3 * rng.normal());
    m.loss = loss;
    return m;
}

std::vector<std::vector<double>> random_targets(Rng& rng, std::size_t n, std::size_t C, LossKind loss) {
    std::vector<std::vector<double>> t(n, std::vector<double>(C, 0.0));
    for (auto& row : t) {
        if (loss == LossKind::Softmax) {
            row[rng.below(C)] = 1.0;
        } else {
            for (auto& v : row) v = rng.bernoulli(0.4) ? 1.0 : 0.0;
        }
    }
    return t;
}

// Largest relative deviation between analytic and central-difference gradients.
double gradient_check(LossKind loss, std::uint64_t seed, double wd) {
    Rng rng(seed);
    const std::size_t C = 4, d = 3, n = 5;
    auto m = random_model(rng, C, d, loss);
    const auto x = testutil::random_points(rng, n, d);
    const auto y = random_targets(rng, n, C, loss);
    const auto rows = detail::all_rows(n);
    Gradient g;
    loss_and_gradient(m, x, y, rows, wd, &g);
    const double h = 1e-5;
    double worst = 0.0;
    auto compare = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + h;
        const double up = loss_and_gradient(m, x, y, rows, wd);
        param = saved - h;
        const double down = loss_and_gradient(m, x, y, rows, wd);
        param = saved;
        const double numeric = (up - down) / (2 * h);
        const double scale = std::max(std::abs(numeric), std::abs(analytic));
        if (scale > 1e-10) worst = std::max(worst, std::abs(numeric - analytic) / scale);
    };
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t j = 0; j < d; ++j) compare(m.weights(c, j), g.weights(c, j));
        compare(m.bias[c], g.bias[c]);
    }
    return worst;
}

// Two well-separated Gaussian identities with clean single-name weak labels.
struct Separable {
    Dataset ds;
    std::vector<WeakLabelSet> weak;
};

Separable separable(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Separable s;
    s.ds.embedding_dim = 8;
    for (std::size_t i = 0; i < n; ++i) {
        const bool a = i % 2 == 0;
        std::vector<double> e(8);
        for (std::size_t j = 0; j < 8; ++j) e[j] = (j < 4 ? (a ? 3.0 : -3.0) : 0.0) + rng.normal();
        s.ds.detections.push_back(det("d" + std::to_string(i), "v", static_cast<std::int64_t>(i), e, a ? "A" : "B"));
        s.weak.push_back({s.ds.detections.back().id, {a ? "A" : "B"}});
    }
    return s;
}

double accuracy_on(const Labels& pred, const Dataset& ds, const std::vector<std::size_t>& idx) {
    std::size_t ok = 0;
    for (auto i : idx) ok += pred[i] == *ds.detections[i].gt_label;
    return double(ok) / double(idx.size());
}

}  // namespace

TEST(LinearGradient, OneVsRestMatchesFiniteDifferences) {
    for (std::uint64_t s = 1; s <= 5; ++s) EXPECT_LT(gradient_check(LossKind::OneVsRest, s, 1e-2), 1e-4);
}

TEST(LinearGradient, SoftmaxMatchesFiniteDifferences) {
    for (std::uint64_t s = 1; s <= 5; ++s) EXPECT_LT(gradient_check(LossKind::Softmax, s, 1e-2), 1e-4);
}

TEST(LinearGradient, SmallStepsDecreaseLoss) {
    for (auto loss : {LossKind::OneVsRest, LossKind::Softmax}) {
        Rng rng(3);
        auto m = random_model(rng, 3, 4, loss);
        const auto x = testutil::random_points(rng, 5, 4);
        const auto y = random_targets(rng, 5, 3, loss);
        const auto rows = detail::all_rows(5);
        double prev = loss_and_gradient(m, x, y, rows, 1e-4);
        for (int step = 0; step < 100; ++step) {
            Gradient g;
            loss_and_gradient(m, x, y, rows, 1e-4, &g);
            for (std::size_t c = 0; c < 3; ++c) {
                for (std::size_t j = 0; j < 4; ++j) m.weights(c, j) -= 0.05 * g.weights(c, j);
                m.bias[c] -= 0.05 * g.bias[c];
            }
            const double cur = loss_and_gradient(m, x, y, rows, 1e-4);
            ASSERT_LT(cur, prev) << to_string(loss) << " step " << step;
            prev = cur;
        }
    }
}

TEST(TrainConfig, ValidationAndSchedule) {
    TrainConfig c;
    EXPECT_DOUBLE_EQ(c.rate_at(0), 0.0012);
    EXPECT_DOUBLE_EQ(c.rate_at(94), 0.0012);
    EXPECT_NEAR(c.rate_at(95), 0.00012, 1e-18);
    c.epochs = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_THROW(train_config_from_json(nlohmann::json{{"lr", 1.0}}), ConfigError);
    EXPECT_EQ(train_config_from_json(nlohmann::json{{"epochs", 7}}).epochs, 7u);
}

TEST(MultilabelWeak, SeparableDataHeldOutAccuracy) {
    auto s = separable(400, 1);
    const auto split = chronological_split(s.ds);
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.learning_rate = 0.01;
    const auto t = train_multilabel_weak(s.ds, s.weak, {"A", "B", "unknown"}, cfg, split.train);
    EXPECT_EQ(t.used_samples, split.train.size());
    EXPECT_GE(accuracy_on(predict_dataset(t.model, s.ds), s.ds, split.test), 0.95);
    EXPECT_LT(t.loss_trace.back(), t.loss_trace.front());
}

TEST(MultilabelWeak, DefaultScheduleAlsoSeparates) {
    auto s = separable(400, 2);
    const auto split = chronological_split(s.ds);
    const auto t = train_multilabel_weak(s.ds, s.weak, {"A", "B", "unknown"}, TrainConfig{}, split.train);
    EXPECT_GE(accuracy_on(predict_dataset(t.model, s.ds), s.ds, split.test), 0.95);
}

TEST(MultilabelWeak, UnknownDominatedLabelsCollapseToUnknown) {
    Rng rng(7);
    auto s = separable(400, 3);
    for (auto& w : s.weak) {
        const auto name = w.candidates.front();
        w.candidates = {"unknown"};
        if (rng.bernoulli(0.2)) w.candidates.push_back(name);
        std::sort(w.candidates.begin(), w.candidates.end());
    }
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.learning_rate = 0.01;
    const auto t = train_multilabel_weak(s.ds, s.weak, {"A", "B", "unknown"}, cfg);
    const auto pred = predict_dataset(t.model, s.ds);
    const auto unknown = std::count(pred.begin(), pred.end(), "unknown");
    EXPECT_GE(double(unknown) / double(pred.size()), 0.9);
}

TEST(MultilabelWeak, EmptyWeakSetsSkippedAndAllEmptyFails) {
    auto s = separable(20, 4);
    s.weak[0].candidates.clear();
    TrainConfig cfg;
    cfg.epochs = 2;
    EXPECT_EQ(train_multilabel_weak(s.ds, s.weak, {"A", "B", "unknown"}, cfg).used_samples, 19u);
    for (auto& w : s.weak) w.candidates.clear();
    EXPECT_THROW(train_multilabel_weak(s.ds, s.weak, {"A", "B", "unknown"}, cfg), TrainingError);
    EXPECT_THROW(train_multilabel_weak(s.ds, {}, {"A"}, cfg), ArgumentError);
}

TEST(Oracle, SeparableDataHeldOutAccuracy) {
    auto s = separable(400, 5);
    const auto split = chronological_split(s.ds);
    const auto t = train_oracle(s.ds, TrainConfig{}, split.train);
    EXPECT_EQ(t.model.classes, (std::vector<std::string>{"A", "B"}));
    EXPECT_GE(accuracy_on(predict_dataset(t.model, s.ds), s.ds, split.test), 0.95);
}

TEST(Oracle, AtLeastEveryUnsupervisedStageOnSeparableSynthetic) {
    auto c = presets::canonical();
    c.n_entities = 2;
    c.unknown_mass = 0.0;
    c.prototype_separation = 8.0;
    c.n_frames = 600;
    const auto sd = generate(c);
    const auto& ds = sd.dataset;
    const auto r = run_discovery(ds, PipelineConfig{});
    const auto split = chronological_split(ds);
    const auto gt = subset(gt_labels(ds), split.test);
    auto score = [&](const Labels& l) { return evaluate(gt, subset(l, split.test), r.vocab.classes()).micro_accuracy; };
    TrainConfig tc;
    tc.seed = 5;
    const double oracle = score(predict_dataset(train_oracle(ds, tc, split.train).model, ds));
    EXPECT_GE(oracle, score(r.stage1));
    EXPECT_GE(oracle, score(r.cleansed->labels));
    EXPECT_GE(oracle, score(r.refined->labels));
}

TEST(Oracle, SingleClassIsPerfect) {
    auto s = separable(40, 6);
    for (auto& d : s.ds.detections) d.gt_label = "A";
    TrainConfig cfg;
    cfg.epochs = 3;
    const auto t = train_oracle(s.ds, cfg);
    const auto pred = predict_dataset(t.model, s.ds);
    EXPECT_EQ(pred, Labels(40, "A"));
}

TEST(Oracle, MissingGroundTruthRejected) {
    auto s = separable(10, 7);
    s.ds.detections[3].gt_label.reset();
    EXPECT_THROW(train_oracle(s.ds, TrainConfig{}), ArgumentError);
}

TEST(Oracle, DeterministicUnderSeed) {
    auto s = separable(100, 8);
    TrainConfig cfg;
    cfg.epochs = 5;
    const auto a = train_oracle(s.ds, cfg), b = train_oracle(s.ds, cfg);
    EXPECT_EQ(classifier_json(a.model).dump(), classifier_json(b.model).dump());
}

TEST(Checkpoint, SaveLoadRoundTrip) {
    auto s = separable(50, 9);
    TrainConfig cfg;
    cfg.epochs = 3;
    const auto t = train_multilabel_weak(s.ds, s.weak, {"A", "B", "unknown"}, cfg);
    testutil::TempDir dir;
    save_classifier(dir / "m.json", t.model);
    const auto back = load_classifier(dir / "m.json");
    EXPECT_EQ(back.classes, t.model.classes);
    EXPECT_EQ(back.loss, LossKind::OneVsRest);
    EXPECT_EQ(predict_dataset(back, s.ds), predict_dataset(t.model, s.ds));
    Dataset wrong;
    wrong.embedding_dim = 3;
    wrong.detections = {det("x", "v", 0, {1, 2, 3})};
    EXPECT_THROW(predict_dataset(back, wrong), ArgumentError);
    testutil::spit(dir / "bad.json", R"({"schema":1,"loss":"softmax","classes":["A"],"weights":[[1,2]],"bias":[]})");
    EXPECT_THROW(load_classifier(dir / "bad.json"), SchemaError);
}

TEST(Limsi, SingleMentionFrameLabelledDirectly) {
    Dataset ds;
    ds.embedding_dim = 2;
    ds.detections = {det("a", "v", 0, {0, 0}), det("b", "v", 1, {5, 5}), det("c", "v", 1, {5, 6}),
                     det("d", "v", 2, {9, 9})};
    ds.mentions = {mention("v", 0, "Ross"), mention("v", 1, "Ross"), mention("v", 1, "Rachel")};
    const auto vocab = build_vocabulary(ds.mentions, CutoffPolicy::top_k(5));
    const auto weak = weak_labels(ds, build_graphs(ds, vocab));
    ClusterConfig cc;
    cc.kind = ClustererKind::Ward;
    cc.k = 20;
    const auto r = limsi_assign(ds, vocab, weak, cc);
    EXPECT_EQ(r.labels[0], "Ross");
    EXPECT_TRUE(r.direct[0]);
    EXPECT_FALSE(r.direct[1]);
    EXPECT_FALSE(r.direct[2]);
    EXPECT_EQ(r.clustered, (std::vector<std::size_t>{1, 2, 3}));
    ASSERT_TRUE(r.clusters.has_value());
    EXPECT_EQ(r.clusters->k, 3u);  // clamped to the deferred count
    EXPECT_EQ(r.labels[3], "unknown");
}

TEST(Limsi, DirectMatchesNeverClustered) {
    const auto sd = generate(presets::canonical());
    PipelineConfig pc;
    const auto a = align(sd.dataset, pc);
    const auto r = limsi_assign(sd.dataset, a.vocab, a.weak, cluster_config_for(pc, sd.dataset.detections.size(), a.vocab.entities.size()));
    std::set<std::size_t> clustered(r.clustered.begin(), r.clustered.end());
    std::size_t direct = 0;
    for (std::size_t i = 0; i < r.direct.size(); ++i) {
        EXPECT_NE(r.direct[i], clustered.contains(i));
        direct += r.direct[i];
    }
    EXPECT_GT(direct, 0u);
    EXPECT_EQ(direct + r.clustered.size(), sd.dataset.detections.size());
}

TEST(Limsi, NoiseFreeDirectSubsetIsExact) {
    const auto sd = generate(presets::noise_free());
    PipelineConfig pc;
    const auto a = align(sd.dataset, pc);
    const auto r = limsi_assign(sd.dataset, a.vocab, a.weak, ClusterConfig{});
    std::size_t n = 0, ok = 0;
    for (std::size_t i = 0; i < r.direct.size(); ++i)
        if (r.direct[i]) {
            ++n;
            ok += r.labels[i] == *sd.dataset.detections[i].gt_label;
        }
    EXPECT_GT(n, 0u);
    EXPECT_EQ(ok, n);
}

TEST(Random, CalibratedToClassCount) {
    const std::vector<std::string> cls{"a", "b", "c", "d", "e", "f", "unknown"};
    Rng rng(1);
    Labels gt;
    for (int i = 0; i < 100000; ++i) gt.push_back(cls[rng.below(7)]);
    const auto pred = random_baseline(cls, gt.size(), 42);
    EXPECT_NEAR(evaluate(gt, pred, cls).macro_accuracy, 1.0 / 7.0, 0.01);
}

TEST(Random, SingleClassAndDeterminism) {
    const auto one = random_baseline(std::vector<std::string>{"unknown"}, 50, 3);
    EXPECT_DOUBLE_EQ(evaluate(Labels(50, "unknown"), one).micro_accuracy, 1.0);
    const std::vector<std::string> cls{"a", "b", "c"};
    EXPECT_EQ(random_baseline(cls, 100, 9), random_baseline(cls, 100, 9));
    EXPECT_NE(random_baseline(cls, 100, 9), random_baseline(cls, 100, 10));
    EXPECT_THROW(random_baseline(std::vector<std::string>{}, 3, 1), ArgumentError);
}
