#include <gtest/gtest.h>

#include <cmath>

#include "entdisc/vocab.hpp"
#include "test_util.hpp"

using namespace entdisc;
using testutil::mention;

namespace {

std::vector<MentionRecord> counted(const std::vector<std::pair<std::string, int>>& spec) {
    std::vector<MentionRecord> out;
    std::int64_t f = 0;
    for (const auto& [name, n] : spec)
        for (int i = 0; i < n; ++i) out.push_back(mention("v", f++, name));
    return out;
}

bool is_subsequence(const std::string& sub, const std::string& s) {
    std::size_t j = 0;
    for (char c : s)
        if (j < sub.size() && sub[j] == c) ++j;
    return j == sub.size();
}

// Longest common subsequence by exhausting every subsequence of `a`.
std::size_t brute_lcs(const std::string& a, const std::string& b) {
    std::size_t best = 0;
    for (unsigned mask = 0; mask < (1u << a.size()); ++mask) {
        std::string sub;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (mask & (1u << i)) sub += a[i];
        if (sub.size() > best && is_subsequence(sub, b)) best = sub.size();
    }
    return best;
}

int oracle_ratio(std::string a, std::string b) {
    for (auto& c : a) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (auto& c : b) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return static_cast<int>(std::lround(200.0 * brute_lcs(a, b) / double(a.size() + b.size())));
}

}  // namespace

TEST(CutoffPolicy, RejectsInvalidParameters) {
    EXPECT_THROW(CutoffPolicy::top_k(0).validate(), ConfigError);
    EXPECT_THROW(CutoffPolicy::top_k(-3).validate(), ConfigError);
    EXPECT_THROW(CutoffPolicy::min_fraction(0.0).validate(), ConfigError);
    EXPECT_THROW(CutoffPolicy::min_fraction(1.5).validate(), ConfigError);
    EXPECT_NO_THROW(CutoffPolicy::min_fraction(1.0).validate());
    EXPECT_THROW(build_vocabulary({}, CutoffPolicy::top_k(0)), ConfigError);
}

TEST(BuildVocabulary, TopKKeepsMostFrequent) {
    const auto v = build_vocabulary(counted({{"A", 10}, {"B", 9}, {"C", 1}}), CutoffPolicy::top_k(2));
    EXPECT_EQ(v.entities, (std::vector<std::string>{"A", "B"}));
    EXPECT_EQ(v.classes(), (std::vector<std::string>{"A", "B", "unknown"}));
    EXPECT_EQ(v.normalization.at("C"), "unknown");
    EXPECT_EQ(v.frequency("unknown"), 1u);
}

TEST(BuildVocabulary, MinFractionFloor) {
    const auto mentions = counted({{"Leonard", 100}, {"Penny", 50}, {"Raj", 10}, {"Stuart", 9}});
    const auto v = build_vocabulary(mentions, CutoffPolicy::min_fraction(0.1));
    EXPECT_EQ(v.entities, (std::vector<std::string>{"Leonard", "Penny", "Raj"}));
}

TEST(BuildVocabulary, EmptyMentionsGiveOnlyUnknown) {
    const auto v = build_vocabulary({}, CutoffPolicy::top_k(5));
    EXPECT_TRUE(v.entities.empty());
    EXPECT_EQ(v.classes(), (std::vector<std::string>{"unknown"}));
}

TEST(BuildVocabulary, CaseVariantsMergeIntoDominantSpelling) {
    const auto v = build_vocabulary(counted({{"Sheldon", 5}, {"sHeldon", 2}, {"Amy", 4}}), CutoffPolicy::top_k(5));
    EXPECT_EQ(v.entities, (std::vector<std::string>{"Sheldon", "Amy"}));
    EXPECT_EQ(v.normalization.at("sHeldon"), "Sheldon");
    EXPECT_EQ(v.frequency("Sheldon"), 7u);
}

TEST(BuildVocabulary, TaxonomyOverridesFuzzyMatching) {
    std::map<std::string, std::string> tax{{"Dr. Cooper", "Sheldon"}};
    const auto v = build_vocabulary(counted({{"Sheldon", 5}, {"Dr. Cooper", 3}}), CutoffPolicy::top_k(5), tax);
    EXPECT_EQ(v.entities, (std::vector<std::string>{"Sheldon"}));
    EXPECT_EQ(v.normalization.at("Dr. Cooper"), "Sheldon");
    EXPECT_EQ(v.frequency("Sheldon"), 8u);
}

TEST(BuildVocabulary, OrderingIndependentOfMentionOrder) {
    auto m = counted({{"A", 3}, {"B", 3}, {"C", 2}});
    const auto v1 = build_vocabulary(m, CutoffPolicy::top_k(3));
    std::reverse(m.begin(), m.end());
    const auto v2 = build_vocabulary(m, CutoffPolicy::top_k(3));
    EXPECT_EQ(v1.entities, v2.entities);
    EXPECT_EQ(v1.entities, (std::vector<std::string>{"A", "B", "C"}));
    EXPECT_EQ(v1.frequencies, v2.frequencies);
}

TEST(FuzzyRatio, KnownValues) {
    EXPECT_EQ(fuzzy_ratio("Sheldon", "Sheldon"), 100);
    EXPECT_EQ(fuzzy_ratio("Sheldon", "Shedlon"), oracle_ratio("Sheldon", "Shedlon"));
    EXPECT_EQ(fuzzy_ratio("Sheldon", "Shedlon"), 86);
    EXPECT_LT(fuzzy_ratio("Sheldon", "Penny"), 70);
    EXPECT_EQ(fuzzy_ratio("sHeldon", "Sheldon"), 100);
    EXPECT_THROW(fuzzy_ratio("", "x"), ArgumentError);
}

TEST(FuzzyRatio, AgreesWithBruteForceOracleAndIsSymmetric) {
    Rng rng(11);
    const std::string alphabet = "abcdeABCDE";
    for (int t = 0; t < 300; ++t) {
        std::string a, b;
        const auto la = 1 + rng.below(9), lb = 1 + rng.below(9);
        for (std::size_t i = 0; i < la; ++i) a += alphabet[rng.below(alphabet.size())];
        for (std::size_t i = 0; i < lb; ++i) b += alphabet[rng.below(alphabet.size())];
        ASSERT_EQ(fuzzy_ratio(a, b), oracle_ratio(a, b)) << a << " / " << b;
        ASSERT_EQ(fuzzy_ratio(a, b), fuzzy_ratio(b, a));
        ASSERT_GE(fuzzy_ratio(a, b), 0);
        ASSERT_LE(fuzzy_ratio(a, b), 100);
    }
}

TEST(Normalize, NearMissResolvesToCanonical) {
    const auto v = build_vocabulary(counted({{"Sheldon", 5}, {"Penny", 4}}), CutoffPolicy::top_k(2));
    EXPECT_EQ(v.resolve("Shedlon"), "Sheldon");
    EXPECT_EQ(v.resolve("sHeldon"), "Sheldon");
    EXPECT_EQ(v.resolve("Howard"), "unknown");
}

TEST(Normalize, EqualRatioTieGoesToMoreFrequentThenLexicographic) {
    ASSERT_EQ(oracle_ratio("Yeldon", "Xeldon"), oracle_ratio("Yeldon", "Weldon"));
    const auto v = build_vocabulary(counted({{"Xeldon", 5}, {"Weldon", 3}}), CutoffPolicy::top_k(2));
    EXPECT_EQ(v.resolve("Yeldon"), "Xeldon");
    const auto w = build_vocabulary(counted({{"Xeldon", 5}, {"Weldon", 5}}), CutoffPolicy::top_k(2));
    EXPECT_EQ(w.resolve("Yeldon"), "Weldon");
}

TEST(Normalize, IdempotentOnCanonicalNames) {
    const auto v =
        build_vocabulary(counted({{"Sheldon", 5}, {"Shedlon", 1}, {"Penny", 4}, {"Amy", 3}}), CutoffPolicy::top_k(3));
    for (const auto& e : v.entities) EXPECT_EQ(v.resolve(e), e);
    for (const auto& [surface, canon] : v.normalization) EXPECT_EQ(v.resolve(canon), canon);
    const auto normalized = normalize_mentions(counted({{"Shedlon", 1}, {"Zed", 1}}), v);
    EXPECT_EQ(normalized[0].normalized, std::optional<std::string>("Sheldon"));
    EXPECT_EQ(normalized[1].normalized, std::optional<std::string>("unknown"));
}

TEST(Normalize, FrequenciesSumToMentionCount) {
    const auto mentions = counted({{"A", 4}, {"B", 3}, {"Cxyzw", 2}, {"a", 1}});
    const auto v = build_vocabulary(mentions, CutoffPolicy::top_k(2));
    std::size_t total = 0;
    for (const auto& [n, c] : v.frequencies) total += c;
    EXPECT_EQ(total, mentions.size());
}
