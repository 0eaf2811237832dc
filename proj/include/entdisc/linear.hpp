#pragma once
// Linear classifiers over frozen embeddings: a one-vs-rest logistic model
// trained on weak-label multisets, and a softmax model trained on ground
// truth. Both use minibatch Adam with an L2 penalty.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "entdisc/bipartite.hpp"
#include "entdisc/core.hpp"
#include "entdisc/errors.hpp"
#include "entdisc/io.hpp"
#include "entdisc/rng.hpp"

namespace entdisc {

enum class LossKind { OneVsRest, Softmax };

inline std::string to_string(LossKind k) { return k == LossKind::Softmax ? "softmax" : "one_vs_rest"; }

inline LossKind parse_loss(const std::string& s) {
    if (s == "softmax") return LossKind::Softmax;
    if (s == "one_vs_rest") return LossKind::OneVsRest;
    throw ConfigError("unknown loss '" + s + "'");
}

struct TrainConfig {
    double learning_rate = 0.0012;
    std::size_t epochs = 100;
    std::size_t batch_size = 256;
    double weight_decay = 1e-4;
    std::size_t decay_epoch = 95;  // learning rate is multiplied by decay_factor from here on
    double decay_factor = 0.1;
    std::uint64_t seed = 42;
    bool l2_normalize = true;

    void validate() const {
        if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
        if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
        if (!(decay_factor > 0.0 && decay_factor <= 1.0)) throw ConfigError("decay_factor must be in (0, 1]");
    }

    double rate_at(std::size_t epoch) const { return epoch >= decay_epoch ? learning_rate * decay_factor : learning_rate; }
};

struct LinearClassifier {
    std::vector<std::string> classes;
    Matrix weights;  // classes x d
    std::vector<double> bias;
    LossKind loss = LossKind::Softmax;
    TrainConfig config;

    std::size_t dim() const { return weights.cols(); }

    void check() const {
        if (weights.rows() != classes.size() || bias.size() != classes.size())
            throw StateError("LinearClassifier: weights do not match the label count");
    }

    void check_input(std::size_t d) const {
        if (d != dim())
            throw ArgumentError("LinearClassifier: embedding_dim " + std::to_string(d) + " != model dim " +
                                std::to_string(dim()));
    }

    std::vector<double> scores(std::span<const double> x) const {
        check_input(x.size());
        std::vector<double> z(classes.size());
        for (std::size_t c = 0; c < classes.size(); ++c) {
            const auto w = weights.row(c);
            double s = bias[c];
            for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
            z[c] = s;
        }
        return z;
    }

    // Argmax score; ties go to the earlier class.
    const std::string& predict(std::span<const double> x) const {
        const auto z = scores(x);
        return classes[static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin())];
    }

    Labels predict(const Matrix& points) const {
        Labels out;
        out.reserve(points.rows());
        for (std::size_t i = 0; i < points.rows(); ++i) out.push_back(predict(points.row(i)));
        return out;
    }
};

// Inputs as the classifier sees them.
inline Matrix classifier_inputs(Matrix m, bool l2_normalize) {
    if (!l2_normalize) return m;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        double n = 0.0;
        for (double v : r) n += v * v;
        n = std::sqrt(n);
        if (n > 0.0)
            for (auto& v : r) v /= n;
    }
    return m;
}

inline Labels predict_dataset(const LinearClassifier& model, const Dataset& ds) {
    if (ds.detections.empty()) return {};
    return model.predict(classifier_inputs(embedding_matrix(ds), model.config.l2_normalize));
}

struct Gradient {
    Matrix weights;
    std::vector<double> bias;
};

// Mean loss over `rows` plus weight_decay/2 * ||W||^2. Targets are per-class
// values in [0, 1]: multi-hot for one-vs-rest, a distribution for softmax.
inline double loss_and_gradient(const LinearClassifier& model, const Matrix& x,
                                const std::vector<std::vector<double>>& targets,
                                std::span<const std::size_t> rows, double weight_decay,
                                Gradient* grad = nullptr) {
    const std::size_t C = model.classes.size();
    const std::size_t d = model.dim();
    if (rows.empty()) throw ArgumentError("loss_and_gradient: empty batch");
    if (grad) {
        grad->weights = Matrix(C, d);
        grad->bias.assign(C, 0.0);
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    double loss = 0.0;
    std::vector<double> delta(C);
    for (auto i : rows) {
        const auto xi = x.row(i);
        const auto z = model.scores(xi);
        const auto& y = targets.at(i);
        if (model.loss == LossKind::OneVsRest) {
            for (std::size_t c = 0; c < C; ++c) {
                loss += std::max(z[c], 0.0) - z[c] * y[c] + std::log1p(std::exp(-std::abs(z[c])));
                delta[c] = 1.0 / (1.0 + std::exp(-z[c])) - y[c];
            }
        } else {
            const double m = *std::max_element(z.begin(), z.end());
            double sum = 0.0;
            for (double v : z) sum += std::exp(v - m);
            const double lse = m + std::log(sum);
            double ysum = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
                loss -= y[c] * (z[c] - lse);
                ysum += y[c];
            }
            for (std::size_t c = 0; c < C; ++c) delta[c] = ysum * std::exp(z[c] - lse) - y[c];
        }
        if (!grad) continue;
        for (std::size_t c = 0; c < C; ++c) {
            if (delta[c] == 0.0) continue;
            auto g = grad->weights.row(c);
            for (std::size_t j = 0; j < d; ++j) g[j] += inv * delta[c] * xi[j];
            grad->bias[c] += inv * delta[c];
        }
    }
    loss *= inv;
    double sq = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
        const auto w = model.weights.row(c);
        for (std::size_t j = 0; j < d; ++j) {
            sq += w[j] * w[j];
            if (grad) grad->weights(c, j) += weight_decay * w[j];
        }
    }
    return loss + 0.5 * weight_decay * sq;
}

namespace detail {

class Adam {
public:
    Adam(std::size_t C, std::size_t d) : mw_(C, d), vw_(C, d), mb_(C, 0.0), vb_(C, 0.0) {}

    void step(LinearClassifier& model, const Gradient& g, double lr) {
        ++t_;
        const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
        auto update = [&](double& p, double& m, double& v, double gi) {
            m = b1_ * m + (1.0 - b1_) * gi;
            v = b2_ * v + (1.0 - b2_) * gi * gi;
            p -= lr * (m / c1) / (std::sqrt(v / c2) + eps_);
        };
        for (std::size_t c = 0; c < model.weights.rows(); ++c) {
            for (std::size_t j = 0; j < model.weights.cols(); ++j)
                update(model.weights(c, j), mw_(c, j), vw_(c, j), g.weights(c, j));
            update(model.bias[c], mb_[c], vb_[c], g.bias[c]);
        }
    }

private:
    Matrix mw_, vw_;
    std::vector<double> mb_, vb_;
    std::size_t t_ = 0;
    double b1_ = 0.9, b2_ = 0.999, eps_ = 1e-8;
};

inline LinearClassifier init_classifier(std::vector<std::string> classes, std::size_t d, LossKind loss,
                                        const TrainConfig& cfg) {
    LinearClassifier m;
    m.classes = std::move(classes);
    m.loss = loss;
    m.config = cfg;
    m.weights = Matrix(m.classes.size(), d);
    m.bias.assign(m.classes.size(), 0.0);
    Rng rng(derive_seed(cfg.seed, "init"));
    for (std::size_t c = 0; c < m.classes.size(); ++c)
        for (std::size_t j = 0; j < d; ++j) m.weights(c, j) = 0.01 * rng.normal();
    return m;
}

// Minibatch Adam over `rows`, reshuffled every epoch. Returns the mean
// training loss per epoch.
inline std::vector<double> fit(LinearClassifier& model, const Matrix& x,
                               const std::vector<std::vector<double>>& targets, std::vector<std::size_t> rows) {
    const auto& cfg = model.config;
    Adam adam(model.weights.rows(), model.weights.cols());
    Rng rng(derive_seed(cfg.seed, "shuffle"));
    std::vector<double> trace;
    Gradient g;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng.below(i)]);
        double total = 0.0;
        for (std::size_t start = 0; start < rows.size(); start += cfg.batch_size) {
            const auto len = std::min(cfg.batch_size, rows.size() - start);
            std::span<const std::size_t> batch(rows.data() + start, len);
            total += loss_and_gradient(model, x, targets, batch, cfg.weight_decay, &g) * static_cast<double>(len);
            adam.step(model, g, cfg.rate_at(epoch));
        }
        trace.push_back(total / static_cast<double>(rows.size()));
    }
    return trace;
}

inline std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> r(n);
    std::iota(r.begin(), r.end(), std::size_t{0});
    return r;
}

}  // namespace detail

struct TrainedClassifier {
    LinearClassifier model;
    std::vector<double> loss_trace;
    std::size_t used_samples = 0;
};

// Multi-hot targets from each detection's weak-label candidates over
// `classes`; detections with no candidates are left out of training.
inline TrainedClassifier train_multilabel_weak(const Dataset& ds, const std::vector<WeakLabelSet>& weak,
                                               const std::vector<std::string>& classes, const TrainConfig& cfg,
                                               std::span<const std::size_t> subset = {}) {
    cfg.validate();
    if (weak.size() != ds.detections.size()) throw ArgumentError("train_multilabel_weak: weak labels misaligned");
    if (classes.empty()) throw ArgumentError("train_multilabel_weak: no classes");
    const auto idx = subset.empty() ? detail::all_rows(ds.detections.size())
                                    : std::vector<std::size_t>(subset.begin(), subset.end());
    std::map<std::string, std::size_t> pos;
    for (std::size_t c = 0; c < classes.size(); ++c) pos[classes[c]] = c;
    std::vector<std::vector<double>> targets(ds.detections.size());
    std::vector<std::size_t> rows;
    for (auto i : idx) {
        if (weak.at(i).candidates.empty()) continue;
        auto& t = targets[i];
        t.assign(classes.size(), 0.0);
        for (const auto& c : weak[i].candidates) {
            auto it = pos.find(c);
            if (it == pos.end()) throw ArgumentError("train_multilabel_weak: candidate '" + c + "' is not a class");
            t[it->second] = 1.0;
        }
        rows.push_back(i);
    }
    if (rows.empty()) throw TrainingError("train_multilabel_weak: every weak-label set is empty");
    TrainedClassifier out;
    out.model = detail::init_classifier(classes, ds.embedding_dim, LossKind::OneVsRest, cfg);
    const auto x = classifier_inputs(embedding_matrix(ds), cfg.l2_normalize);
    out.used_samples = rows.size();
    out.loss_trace = detail::fit(out.model, x, targets, std::move(rows));
    return out;
}

// Softmax over the sorted set of ground-truth labels in the subset.
inline TrainedClassifier train_oracle(const Dataset& ds, const TrainConfig& cfg,
                                      std::span<const std::size_t> subset = {}) {
    cfg.validate();
    const auto idx = subset.empty() ? detail::all_rows(ds.detections.size())
                                    : std::vector<std::size_t>(subset.begin(), subset.end());
    if (idx.empty()) throw ArgumentError("train_oracle: no training detections");
    std::set<std::string> names;
    for (auto i : idx) {
        const auto& d = ds.detections.at(i);
        if (!d.gt_label) throw ArgumentError("train_oracle: detection '" + d.id + "' has no gt_label");
        names.insert(*d.gt_label);
    }
    std::vector<std::string> classes(names.begin(), names.end());
    std::map<std::string, std::size_t> pos;
    for (std::size_t c = 0; c < classes.size(); ++c) pos[classes[c]] = c;
    std::vector<std::vector<double>> targets(ds.detections.size());
    for (auto i : idx) {
        targets[i].assign(classes.size(), 0.0);
        targets[i][pos.at(*ds.detections[i].gt_label)] = 1.0;
    }
    TrainedClassifier out;
    out.model = detail::init_classifier(classes, ds.embedding_dim, LossKind::Softmax, cfg);
    const auto x = classifier_inputs(embedding_matrix(ds), cfg.l2_normalize);
    out.used_samples = idx.size();
    out.loss_trace = detail::fit(out.model, x, targets, idx);
    return out;
}

inline nlohmann::ordered_json train_config_json(const TrainConfig& c) {
    nlohmann::ordered_json j;
    j["learning_rate"] = c.learning_rate;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["weight_decay"] = c.weight_decay;
    j["decay_epoch"] = c.decay_epoch;
    j["decay_factor"] = c.decay_factor;
    j["seed"] = c.seed;
    j["l2_normalize"] = c.l2_normalize;
    return j;
}

inline TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c = {}) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        if (k == "learning_rate") c.learning_rate = it->get<double>();
        else if (k == "epochs") c.epochs = it->get<std::size_t>();
        else if (k == "batch_size") c.batch_size = it->get<std::size_t>();
        else if (k == "weight_decay") c.weight_decay = it->get<double>();
        else if (k == "decay_epoch") c.decay_epoch = it->get<std::size_t>();
        else if (k == "decay_factor") c.decay_factor = it->get<double>();
        else if (k == "seed") c.seed = it->get<std::uint64_t>();
        else if (k == "l2_normalize") c.l2_normalize = it->get<bool>();
        else throw ConfigError("unknown training option '" + k + "'");
    }
    c.validate();
    return c;
}

inline nlohmann::ordered_json classifier_json(const LinearClassifier& m) {
    m.check();
    nlohmann::ordered_json j;
    j["schema"] = kSchemaVersion;
    j["loss"] = to_string(m.loss);
    j["classes"] = m.classes;
    auto w = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < m.weights.rows(); ++c) {
        const auto r = m.weights.row(c);
        w.push_back(std::vector<double>(r.begin(), r.end()));
    }
    j["weights"] = std::move(w);
    j["bias"] = m.bias;
    j["config"] = train_config_json(m.config);
    return j;
}

inline LinearClassifier classifier_from_json(const nlohmann::json& j) {
    try {
        if (j.at("schema").get<int>() != kSchemaVersion) throw SchemaError("checkpoint: unsupported schema version");
        LinearClassifier m;
        m.loss = parse_loss(j.at("loss").get<std::string>());
        m.classes = j.at("classes").get<std::vector<std::string>>();
        m.weights = Matrix::from_rows(j.at("weights").get<std::vector<std::vector<double>>>());
        m.bias = j.at("bias").get<std::vector<double>>();
        m.config = train_config_from_json(j.at("config"));
        if (m.classes.empty()) throw SchemaError("checkpoint: no classes");
        m.check();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("checkpoint: ") + e.what());
    } catch (const StateError& e) {
        throw SchemaError(std::string("checkpoint: ") + e.what());
    }
}

inline void save_classifier(const std::filesystem::path& path, const LinearClassifier& m) {
    const auto text = classifier_json(m).dump(1) + "\n";
    io::write_atomically(path, [&](std::ostream& out) { out << text; });
}

inline LinearClassifier load_classifier(const std::filesystem::path& path) {
    const auto text = io::read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string(), 1, e.what());
    }
    return classifier_from_json(j);
}

}  // namespace entdisc
