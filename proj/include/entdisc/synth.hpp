#pragma once
// Synthetic captioned-video benchmark generator.
//
// Every identity (named entity or long-tail extra) owns a prototype in
// embedding space; a face is its prototype plus isotropic Gaussian noise.
// Frames draw distinct identities (Zipf over named entities, uniform over
// the tail), mention each on-screen identity with p_mention and add a
// mention of an absent identity with p_spurious. This reproduces the three
// ways the frame-caption alignment goes wrong: several names per frame,
// missing names, and names of people who are not on screen.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "entdisc/core.hpp"
#include "entdisc/errors.hpp"
#include "entdisc/rng.hpp"
#include "entdisc/vocab.hpp"

namespace entdisc {

struct SynthConfig {
    std::size_t n_entities = 7;
    std::size_t embedding_dim = 32;
    std::size_t n_frames = 1500;
    std::size_t n_videos = 5;
    std::size_t faces_min = 1;
    std::size_t faces_max = 4;
    double prototype_separation = 5.0;
    double within_entity_stddev = 1.0;
    double p_mention = 0.5;
    double p_spurious = 0.2;
    double zipf_s = 1.0;
    std::size_t unknown_tail_entities = 30;
    double unknown_mass = 0.3;  // share of faces drawn from the tail
    // Penny mode: mentions of this named entity (0-based rank) are kept
    // only with probability suppression_factor. -1 disables.
    long suppressed_entity = -1;
    double suppression_factor = 0.05;
    double p_surface_noise = 0.0;  // chance a mention surface is misspelt
    std::uint64_t seed = 42;

    void validate() const {
        auto prob = [](double p, const char* name) {
            if (!(p >= 0.0 && p <= 1.0))
                throw ConfigError(std::string(name) + " must be a probability in [0, 1]");
        };
        prob(p_mention, "p_mention");
        prob(p_spurious, "p_spurious");
        prob(suppression_factor, "suppression_factor");
        prob(p_surface_noise, "p_surface_noise");
        if (!(unknown_mass >= 0.0 && unknown_mass < 1.0)) throw ConfigError("unknown_mass must be in [0, 1)");
        if (unknown_mass > 0.0 && unknown_tail_entities == 0)
            throw ConfigError("unknown_mass > 0 requires unknown_tail_entities > 0");
        if (!(within_entity_stddev > 0.0)) throw ConfigError("within_entity_stddev must be > 0");
        if (!(prototype_separation > 0.0)) throw ConfigError("prototype_separation must be > 0");
        if (n_entities < 2) throw ConfigError("n_entities must be >= 2");
        if (embedding_dim < 1) throw ConfigError("embedding_dim must be >= 1");
        if (n_frames < 1) throw ConfigError("n_frames must be >= 1");
        if (n_videos < 1 || n_videos > n_frames) throw ConfigError("n_videos must be in [1, n_frames]");
        if (faces_min < 1 || faces_max < faces_min) throw ConfigError("need 1 <= faces_min <= faces_max");
        if (!(zipf_s >= 0.0)) throw ConfigError("zipf_s must be >= 0");
        if (suppressed_entity >= static_cast<long>(n_entities))
            throw ConfigError("suppressed_entity out of range");
    }
};

// Named presets. canonical is the reference benchmark; unknown_dominant and
// named_dominant mirror a tail-heavy and a main-character-heavy show.
namespace presets {

inline SynthConfig canonical() { return {}; }

inline SynthConfig unknown_dominant(std::uint64_t seed = 42) {
    SynthConfig c;
    c.n_entities = 6;
    c.faces_max = 2;
    c.unknown_mass = 0.5;
    c.unknown_tail_entities = 60;
    c.seed = seed;
    return c;
}

inline SynthConfig named_dominant(std::uint64_t seed = 42) {
    SynthConfig c;
    c.n_entities = 8;
    c.zipf_s = 1.3;
    c.unknown_mass = 0.15;
    c.seed = seed;
    return c;
}

// One face and exactly its own name per frame.
inline SynthConfig noise_free(std::uint64_t seed = 42) {
    SynthConfig c;
    c.faces_min = c.faces_max = 1;
    c.p_mention = 1.0;
    c.p_spurious = 0.0;
    c.unknown_tail_entities = 0;
    c.unknown_mass = 0.0;
    c.zipf_s = 0.5;
    c.seed = seed;
    return c;
}

inline SynthConfig penny(std::uint64_t seed = 42) {
    SynthConfig c;
    c.suppressed_entity = 2;
    c.seed = seed;
    return c;
}

inline SynthConfig by_name(const std::string& name) {
    if (name == "canonical") return canonical();
    if (name == "unknown_dominant") return unknown_dominant();
    if (name == "named_dominant") return named_dominant();
    if (name == "noise_free") return noise_free();
    if (name == "penny") return penny();
    throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace presets

inline nlohmann::ordered_json synth_config_json(const SynthConfig& c) {
    nlohmann::ordered_json j;
    j["n_entities"] = c.n_entities;
    j["embedding_dim"] = c.embedding_dim;
    j["n_frames"] = c.n_frames;
    j["n_videos"] = c.n_videos;
    j["faces_min"] = c.faces_min;
    j["faces_max"] = c.faces_max;
    j["prototype_separation"] = c.prototype_separation;
    j["within_entity_stddev"] = c.within_entity_stddev;
    j["p_mention"] = c.p_mention;
    j["p_spurious"] = c.p_spurious;
    j["zipf_s"] = c.zipf_s;
    j["unknown_tail_entities"] = c.unknown_tail_entities;
    j["unknown_mass"] = c.unknown_mass;
    j["suppressed_entity"] = c.suppressed_entity;
    j["suppression_factor"] = c.suppression_factor;
    j["p_surface_noise"] = c.p_surface_noise;
    j["seed"] = c.seed;
    return j;
}

// Missing keys keep `base` values; unknown keys are rejected.
inline SynthConfig synth_config_from_json(const nlohmann::json& j, SynthConfig base = {}) {
    if (!j.is_object()) throw ConfigError("synth config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        const auto& v = it.value();
        try {
            if (k == "preset") base = presets::by_name(v.get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("synth config key '" + k + "': " + e.what());
        }
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        const auto& v = it.value();
        try {
            if (k == "preset") continue;
            else if (k == "n_entities") base.n_entities = v.get<std::size_t>();
            else if (k == "embedding_dim") base.embedding_dim = v.get<std::size_t>();
            else if (k == "n_frames") base.n_frames = v.get<std::size_t>();
            else if (k == "n_videos") base.n_videos = v.get<std::size_t>();
            else if (k == "faces_min") base.faces_min = v.get<std::size_t>();
            else if (k == "faces_max") base.faces_max = v.get<std::size_t>();
            else if (k == "prototype_separation") base.prototype_separation = v.get<double>();
            else if (k == "within_entity_stddev") base.within_entity_stddev = v.get<double>();
            else if (k == "p_mention") base.p_mention = v.get<double>();
            else if (k == "p_spurious") base.p_spurious = v.get<double>();
            else if (k == "zipf_s") base.zipf_s = v.get<double>();
            else if (k == "unknown_tail_entities") base.unknown_tail_entities = v.get<std::size_t>();
            else if (k == "unknown_mass") base.unknown_mass = v.get<double>();
            else if (k == "suppressed_entity") base.suppressed_entity = v.get<long>();
            else if (k == "suppression_factor") base.suppression_factor = v.get<double>();
            else if (k == "p_surface_noise") base.p_surface_noise = v.get<double>();
            else if (k == "seed") base.seed = v.get<std::uint64_t>();
            else throw ConfigError("unknown synth config key '" + k + "'");
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("synth config key '" + k + "': " + e.what());
        }
    }
    return base;
}

struct TruthEntry {
    std::string entity;  // identity name as it appears in mentions
    std::string gt_label;  // entity name, or unknown for tail identities
    EmbeddingVector prototype;
};

struct SynthDataset {
    Dataset dataset;
    std::vector<TruthEntry> truth;  // named entities first, by Zipf rank
};

inline std::string synth_entity_name(std::size_t rank) {
    static const char* names[] = {"Avery", "Bianca", "Cedric", "Dolores", "Emeka", "Fiona",
                                  "Gustav", "Hiroko", "Ignacio", "Jasper", "Kalinda", "Lorenzo"};
    if (rank < std::size(names)) return names[rank];
    char buf[32];
    std::snprintf(buf, sizeof buf, "Entity%03zu", rank + 1);
    return buf;
}

// Pronounceable tail names, fixed across seeds and kept below a fuzzy
// ratio of 60 against every named entity and every earlier tail name.
// The sequence is prefix-stable: asking for more names never changes the
// earlier ones.
inline std::vector<std::string> synth_tail_names(std::size_t count) {
    static const char* onsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "sh", "tr"};
    static const char* vowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
    Rng rng(0x7A11AB1E5ULL);
    std::vector<std::string> names;
    std::vector<std::string> taken;
    for (std::size_t r = 0; r < 24; ++r) taken.push_back(synth_entity_name(r));
    std::size_t attempts = 0;
    while (names.size() < count) {
        if (++attempts > 1000000) throw GenerationError("cannot generate " + std::to_string(count) + " distinct tail names");
        std::string cand;
        const auto syllables = 2 + rng.below(2);
        for (std::size_t s = 0; s < syllables; ++s) {
            cand += onsets[rng.below(std::size(onsets))];
            cand += vowels[rng.below(std::size(vowels))];
        }
        cand[0] = static_cast<char>(cand[0] - 'a' + 'A');
        if (std::any_of(taken.begin(), taken.end(), [&](const std::string& o) { return fuzzy_ratio(cand, o) >= 60; }))
            continue;
        names.push_back(cand);
        taken.push_back(cand);
    }
    return names;
}

namespace detail {

inline std::string misspell(const std::string& s, Rng& rng) {
    if (s.size() < 2) return s;
    std::string out = s;
    if (rng.bernoulli(0.5)) {
        const auto i = rng.below(out.size() - 1);
        std::swap(out[i], out[i + 1]);
    } else {
        const auto i = rng.below(out.size());
        char& c = out[i];
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
        else if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

}  // namespace detail

inline SynthDataset generate(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const std::size_t n_named = cfg.n_entities;
    const std::size_t n_ids = n_named + cfg.unknown_tail_entities;
    const std::size_t d = cfg.embedding_dim;
    if (cfg.faces_max > n_ids) throw ConfigError("faces_max exceeds the number of identities");

    SynthDataset out;
    const auto tail_names = synth_tail_names(cfg.unknown_tail_entities);
    // Gaussian placement scaled so that typical pairwise distances sit a
    // little above the required minimum; rejection enforces the minimum.
    const double scale = 1.3 * cfg.prototype_separation / std::sqrt(2.0 * static_cast<double>(d));
    const double min_d2 = cfg.prototype_separation * cfg.prototype_separation;
    constexpr int kMaxAttempts = 2000;
    for (std::size_t id = 0; id < n_ids; ++id) {
        EmbeddingVector p(d);
        bool placed = false;
        for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
            for (auto& v : p) v = scale * rng.normal();
            placed = true;
            for (const auto& t : out.truth)
                if (squared_distance(p, t.prototype) < min_d2) {
                    placed = false;
                    break;
                }
        }
        if (!placed)
            throw GenerationError("cannot place " + std::to_string(n_ids) + " prototypes at separation " +
                                  std::to_string(cfg.prototype_separation) + " in dimension " +
                                  std::to_string(d));
        const bool tail = id >= n_named;
        out.truth.push_back({tail ? tail_names[id - n_named] : synth_entity_name(id),
                             tail ? std::string(kUnknownName) : synth_entity_name(id), std::move(p)});
    }

    std::vector<double> weights(n_ids, 0.0);
    double zipf_total = 0.0;
    for (std::size_t e = 0; e < n_named; ++e) zipf_total += std::pow(static_cast<double>(e + 1), -cfg.zipf_s);
    for (std::size_t e = 0; e < n_named; ++e)
        weights[e] = (1.0 - cfg.unknown_mass) * std::pow(static_cast<double>(e + 1), -cfg.zipf_s) / zipf_total;
    for (std::size_t t = n_named; t < n_ids; ++t)
        weights[t] = cfg.unknown_mass / static_cast<double>(cfg.unknown_tail_entities);

    auto mention_kept = [&](std::size_t id) {
        if (cfg.suppressed_entity >= 0 && id == static_cast<std::size_t>(cfg.suppressed_entity))
            return rng.bernoulli(cfg.suppression_factor);
        return true;
    };
    auto surface_of = [&](std::size_t id) {
        const auto& name = out.truth[id].entity;
        return cfg.p_surface_noise > 0.0 && rng.bernoulli(cfg.p_surface_noise) ? detail::misspell(name, rng) : name;
    };

    auto& ds = out.dataset;
    ds.embedding_dim = d;
    const std::size_t base = cfg.n_frames / cfg.n_videos;
    const std::size_t extra = cfg.n_frames % cfg.n_videos;
    for (std::size_t v = 0; v < cfg.n_videos; ++v) {
        char vid[16];
        std::snprintf(vid, sizeof vid, "ep%02zu", v + 1);
        const std::size_t frames = base + (v < extra ? 1 : 0);
        for (std::size_t f = 0; f < frames; ++f) {
            const FrameRef frame{vid, static_cast<std::int64_t>(f)};
            const auto nf = static_cast<std::size_t>(
                rng.between(static_cast<std::int64_t>(cfg.faces_min), static_cast<std::int64_t>(cfg.faces_max)));
            std::vector<double> w = weights;
            std::vector<std::size_t> present;
            auto remaining = [&w] {
                double t = 0.0;
                for (double x : w) t += x;
                return t > 0.0;
            };
            for (std::size_t s = 0; s < nf && remaining(); ++s) {
                const auto id = rng.weighted(w);
                w[id] = 0.0;
                present.push_back(id);
            }
            for (std::size_t s = 0; s < present.size(); ++s) {
                const auto id = present[s];
                DetectionRecord det;
                char buf[64];
                std::snprintf(buf, sizeof buf, "%s_f%05zu_d%zu", vid, f, s);
                det.id = buf;
                det.frame = frame;
                const double x0 = std::floor(rng.uniform(0.0, 1100.0));
                const double y0 = std::floor(rng.uniform(0.0, 540.0));
                const double side = std::floor(rng.uniform(60.0, 170.0));
                det.box = {x0, y0, x0 + side, y0 + side};
                det.embedding.resize(d);
                for (std::size_t j = 0; j < d; ++j)
                    det.embedding[j] = out.truth[id].prototype[j] + cfg.within_entity_stddev * rng.normal();
                det.gt_label = out.truth[id].gt_label;
                ds.detections.push_back(std::move(det));
            }
            for (auto id : present)
                if (rng.bernoulli(cfg.p_mention) && mention_kept(id))
                    ds.mentions.push_back({frame, surface_of(id), std::nullopt});
            if (rng.bernoulli(cfg.p_spurious) && remaining()) {
                const auto id = rng.weighted(w);
                if (mention_kept(id)) ds.mentions.push_back({frame, surface_of(id), std::nullopt});
            }
        }
    }
    return out;
}

inline void write_truth(std::ostream& out, const std::vector<TruthEntry>& truth) {
    for (const auto& t : truth) {
        nlohmann::ordered_json j;
        j["entity"] = t.entity;
        j["gt_label"] = t.gt_label;
        j["prototype"] = t.prototype;
        out << j.dump() << '\n';
    }
}

}  // namespace entdisc
