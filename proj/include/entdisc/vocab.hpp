#pragma once
// Closed entity vocabulary with a reserved unknown class, and fuzzy
// normalization of noisy mention surfaces onto canonical names.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "entdisc/core.hpp"
#include "entdisc/errors.hpp"

namespace entdisc {

struct CutoffPolicy {
    enum class Kind { TopK, MinFraction };

    Kind kind = Kind::MinFraction;
    long k = 0;
    double tau = 0.1;

    static CutoffPolicy top_k(long k) { return {Kind::TopK, k, 0.0}; }
    static CutoffPolicy min_fraction(double tau) { return {Kind::MinFraction, 0, tau}; }

    void validate() const {
        if (kind == Kind::TopK && k <= 0)
            throw ConfigError("top_k cutoff requires k > 0, got " + std::to_string(k));
        if (kind == Kind::MinFraction && !(tau > 0.0 && tau <= 1.0))
            throw ConfigError("min_fraction cutoff requires tau in (0, 1], got " + std::to_string(tau));
    }
};

inline constexpr int kDefaultFuzzyThreshold = 70;

// ---- fuzzy ratio -------------------------------------------------------------

namespace detail {

// Decodes UTF-8 into code points; stray bytes pass through as themselves.
inline std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        const auto c = static_cast<unsigned char>(s[i]);
        int len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
        bool ok = len > 0 && i + len <= s.size();
        char32_t cp = len == 1 ? c : len == 2 ? (c & 0x1F) : len == 3 ? (c & 0x0F) : (c & 0x07);
        for (int k = 1; ok && k < len; ++k) {
            const auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc >> 6) != 0x2) ok = false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (!ok) {
            out.push_back(c);
            ++i;
        } else {
            out.push_back(cp);
            i += len;
        }
    }
    return out;
}

inline std::u32string fold_case(std::string_view s) {
    auto cps = decode_utf8(s);
    for (auto& cp : cps)
        if (cp >= U'A' && cp <= U'Z') cp = cp - U'A' + U'a';
    return cps;
}

inline std::string fold_case_utf8(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

inline std::size_t lcs_length(const std::u32string& a, const std::u32string& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace detail

// Indel similarity on case-folded code points: round(100 * 2 LCS / (|a|+|b|)).
inline int fuzzy_ratio(std::string_view a, std::string_view b) {
    if (a.empty() || b.empty()) throw ArgumentError("fuzzy_ratio: empty string");
    const auto fa = detail::fold_case(a);
    const auto fb = detail::fold_case(b);
    const auto lcs = detail::lcs_length(fa, fb);
    const double ratio = 200.0 * static_cast<double>(lcs) / static_cast<double>(fa.size() + fb.size());
    return static_cast<int>(std::lround(ratio));
}

// ---- vocabulary --------------------------------------------------------------

struct EntityVocabulary {
    // Canonical names, by descending frequency then lexicographic.
    std::vector<std::string> entities;
    // Mention counts after normalization; includes unknown_name.
    std::map<std::string, std::size_t> frequencies;
    std::string unknown_name = kUnknownName;
    // Every observed surface -> canonical name or unknown_name.
    std::map<std::string, std::string> normalization;
    // Manual surface -> canonical overrides, consulted before fuzzy matching.
    std::map<std::string, std::string> taxonomy;
    int fuzzy_threshold = kDefaultFuzzyThreshold;

    bool contains(std::string_view name) const {
        return std::find(entities.begin(), entities.end(), name) != entities.end();
    }

    std::size_t frequency(const std::string& name) const {
        auto it = frequencies.find(name);
        return it == frequencies.end() ? 0 : it->second;
    }

    // Entities followed by unknown.
    std::vector<std::string> classes() const {
        auto out = entities;
        out.push_back(unknown_name);
        return out;
    }

    std::size_t class_count() const { return entities.size() + 1; }

    // Deterministic order used for tie-breaking: higher frequency first,
    // then lexicographically smaller name.
    bool preferred(const std::string& a, const std::string& b) const {
        const auto fa = frequency(a), fb = frequency(b);
        if (fa != fb) return fa > fb;
        return a < b;
    }

    // Maps a raw surface onto a canonical name or unknown.
    std::string resolve(const std::string& surface, int threshold) const {
        if (auto it = taxonomy.find(surface); it != taxonomy.end())
            return contains(it->second) ? it->second : unknown_name;
        if (surface.empty()) return unknown_name;
        const std::string* best = nullptr;
        int best_ratio = -1;
        for (const auto& e : entities) {
            const int r = fuzzy_ratio(surface, e);
            if (r < threshold) continue;
            if (r > best_ratio || (r == best_ratio && preferred(e, *best))) {
                best = &e;
                best_ratio = r;
            }
        }
        return best ? *best : unknown_name;
    }

    std::string resolve(const std::string& surface) const {
        if (auto it = normalization.find(surface); it != normalization.end()) return it->second;
        return resolve(surface, fuzzy_threshold);
    }
};

// Selects the entity set by the cutoff policy over mention counts. Surfaces
// are grouped case-insensitively (after taxonomy overrides); each group is
// named by its most frequent spelling.
inline EntityVocabulary build_vocabulary(const std::vector<MentionRecord>& mentions,
                                         const CutoffPolicy& policy,
                                         std::map<std::string, std::string> taxonomy = {},
                                         int fuzzy_threshold = kDefaultFuzzyThreshold) {
    policy.validate();
    EntityVocabulary vocab;
    vocab.taxonomy = std::move(taxonomy);
    vocab.fuzzy_threshold = fuzzy_threshold;

    struct Group {
        std::size_t count = 0;
        std::map<std::string, std::size_t> spellings;
    };
    std::map<std::string, Group> groups;
    for (const auto& m : mentions) {
        auto it = vocab.taxonomy.find(m.surface);
        const std::string& name = it != vocab.taxonomy.end() ? it->second : m.surface;
        if (name == vocab.unknown_name) continue;
        auto& g = groups[detail::fold_case_utf8(name)];
        ++g.count;
        ++g.spellings[name];
    }

    std::vector<std::pair<std::string, std::size_t>> ranked;
    ranked.reserve(groups.size());
    for (const auto& [key, g] : groups) {
        const auto best = std::max_element(
            g.spellings.begin(), g.spellings.end(),
            [](const auto& a, const auto& b) { return a.second < b.second || (a.second == b.second && a.first > b.first); });
        ranked.emplace_back(best->first, g.count);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });

    std::size_t keep = 0;
    if (policy.kind == CutoffPolicy::Kind::TopK) {
        keep = std::min<std::size_t>(static_cast<std::size_t>(policy.k), ranked.size());
    } else if (!ranked.empty()) {
        const double floor = policy.tau * static_cast<double>(ranked.front().second);
        while (keep < ranked.size() && static_cast<double>(ranked[keep].second) >= floor) ++keep;
    }
    for (std::size_t i = 0; i < keep; ++i) vocab.entities.push_back(ranked[i].first);

    // Provisional frequencies drive fuzzy tie-breaks; final ones are recounted.
    for (std::size_t i = 0; i < keep; ++i) vocab.frequencies[ranked[i].first] = ranked[i].second;

    for (const auto& m : mentions)
        if (!vocab.normalization.contains(m.surface))
            vocab.normalization[m.surface] = vocab.resolve(m.surface, fuzzy_threshold);

    std::map<std::string, std::size_t> recount;
    recount[vocab.unknown_name] = 0;
    for (const auto& e : vocab.entities) recount[e] = 0;
    for (const auto& m : mentions) ++recount[vocab.normalization.at(m.surface)];
    vocab.frequencies = std::move(recount);
    return vocab;
}

// Fills MentionRecord::normalized for every mention.
inline std::vector<MentionRecord> normalize_mentions(std::vector<MentionRecord> mentions,
                                                     const EntityVocabulary& vocab,
                                                     int threshold = kDefaultFuzzyThreshold) {
    std::map<std::string, std::string> cache;
    for (auto& m : mentions) {
        auto it = cache.find(m.surface);
        if (it == cache.end()) it = cache.emplace(m.surface, vocab.resolve(m.surface, threshold)).first;
        m.normalized = it->second;
    }
    return mentions;
}

}  // namespace entdisc
