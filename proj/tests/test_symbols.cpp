#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "rsf/error.hpp"
#include "rsf/symbols.hpp"

using namespace rsf;

namespace {

std::set<std::string> key_set(const FeatureSet& fs) {
    const auto k = fs.keys();
    return {k.begin(), k.end()};
}

DegreeConfig degrees(double beta, double deg_xi, std::map<std::string, double> init = {}) {
    DegreeConfig d;
    d.beta = beta;
    d.deg_xi = deg_xi;
    d.deg_initial = std::move(init);
    return d;
}

}  // namespace

TEST(Symbols, HeightOneWithDerivativesHasNineSymbols) {
    const auto fs = enumerate(1, Alpha{2, 2, 1, 1}, {"c"});
    const Symbol c = Symbol::initial("c");
    const std::set<std::string> expected = {
        c.key(),
        Symbol::integral(1, {}).key(),
        Symbol::integral(0, {factor(c)}).key(),
        Symbol::integral(0, {factor(c), factor(c)}).key(),
        Symbol::integral(1, {factor(c)}).key(),
        Symbol::integral(0, {factor(c, 1)}).key(),
        Symbol::integral(0, {factor(c), factor(c, 1)}).key(),
        Symbol::integral(0, {factor(c, 1), factor(c, 1)}).key(),
        Symbol::integral(1, {factor(c, 1)}).key(),
    };
    EXPECT_EQ(fs.size(), 9u);
    EXPECT_EQ(key_set(fs), expected);
}

TEST(Symbols, HeightOneWithoutDerivativesHasFiveSymbols) {
    const auto fs = enumerate(1, Alpha{2, 2, 1, 0}, {"c"});
    const Symbol c = Symbol::initial("c");
    const std::set<std::string> expected = {
        c.key(),
        Symbol::integral(1, {}).key(),
        Symbol::integral(0, {factor(c)}).key(),
        Symbol::integral(0, {factor(c), factor(c)}).key(),
        Symbol::integral(1, {factor(c)}).key(),
    };
    EXPECT_EQ(key_set(fs), expected);
}

TEST(Symbols, HeightZeroIsTheInitialisingSet) {
    for (const Alpha a : {Alpha{0, 0, 0, 0}, Alpha{3, 2, 1, 2}}) {
        const auto fs = enumerate(0, a, {"c"});
        ASSERT_EQ(fs.size(), 1u);
        EXPECT_EQ(fs.symbols[0].key(), "c");
    }
}

// One initialising symbol, factors with |a| <= 1, one or two factors per product:
// |S^1| = 1 + 2 + 3 = 6, |S^2| = 1 + 12 + 78 = 91, |S^3| = 1 + 182 + 183*182/2 = 16836.
TEST(Symbols, BurgersAlphaCountsByHeight) {
    const Alpha a{2, 0, 0, 1};
    EXPECT_EQ(enumerate(1, a, {"c"}).size(), 6u);
    EXPECT_EQ(enumerate(2, a, {"c"}).size(), 91u);
    EXPECT_EQ(enumerate(3, a, {"c"}).size(), 16836u);
}

TEST(Symbols, BurgersPresetFiltersToTwenty) {
    // deg c = beta + deg u0 = 2 - 1.5
    const auto d = degrees(2.0, -1.5, {{"c", 0.5}});
    const auto full = enumerate(3, Alpha{2, 0, 0, 1}, {"c"});
    const auto kept = filter_by_degree(full, d, 2.5);
    EXPECT_EQ(kept.size(), 20u);
    for (const auto& s : kept.symbols) EXPECT_LE(degree(s, d), 2.5 + 1e-12) << s.key();
}

TEST(Symbols, PrunedEnumerationEqualsEnumerateThenFilter) {
    const auto d = degrees(2.0, -1.5, {{"c", -0.5}});
    for (double gamma : {0.0, 1.5, 3.0}) {
        const auto full = filter_by_degree(enumerate(2, Alpha{2, 2, 1, 1}, {"c"}), d, gamma);
        EnumerateOptions o;
        o.degree = d;
        o.gamma = gamma;
        const auto pruned = enumerate(2, Alpha{2, 2, 1, 1}, {"c"}, o);
        EXPECT_EQ(full.keys(), pruned.keys()) << "gamma " << gamma;
    }
}

TEST(Symbols, DegreeRules) {
    const auto d = degrees(2.0, -1.5, {{"c", -1.5}});
    const Symbol c = Symbol::initial("c");
    EXPECT_DOUBLE_EQ(degree(Symbol::integral(1, {}), d), 0.5);
    EXPECT_DOUBLE_EQ(degree(c, d), -1.5);
    EXPECT_DOUBLE_EQ(degree(Symbol::integral(0, {factor(c, 1)}), d), -0.5);
    // Products add degrees, each xi contributes deg_xi.
    EXPECT_DOUBLE_EQ(degree(Symbol::integral(2, {factor(c), factor(c, 1)}), d), 2.0 - 3.0 - 1.5 - 2.5);
}

TEST(Symbols, DegreeNeedsEveryInitialisingSymbol) {
    const auto d = degrees(2.0, -1.5);
    EXPECT_THROW(degree(Symbol::initial("c"), d), ConfigError);
}

TEST(Symbols, InfiniteCutoffKeepsEverything) {
    const auto d = degrees(2.0, -1.5, {{"c", -0.5}});
    const auto fs = enumerate(2, Alpha{2, 2, 1, 1}, {"c"});
    EXPECT_EQ(filter_by_degree(fs, d, std::numeric_limits<double>::infinity()).keys(), fs.keys());
}

TEST(Symbols, CanonicalKeyIdentifiesCommutedProducts) {
    const Symbol c = Symbol::initial("c");
    const Symbol s = Symbol::initial("s");
    EXPECT_EQ(c.key(), "c");
    EXPECT_EQ(Symbol::integral(1, {factor(c)}).key(), canonical_key(Symbol::integral(1, {factor(c)})));
    EXPECT_EQ(Symbol::integral(0, {factor(c), factor(s, 1)}).key(), Symbol::integral(0, {factor(s, 1), factor(c)}).key());
    EXPECT_NE(Symbol::integral(0, {factor(c), factor(s, 1)}).key(), Symbol::integral(0, {factor(c, 1), factor(s)}).key());
}

TEST(Symbols, KeysAreDistinctAndSorted) {
    const auto fs = enumerate(2, Alpha{2, 2, 1, 1}, {"c", "s"});
    const auto k = fs.keys();
    EXPECT_TRUE(std::is_sorted(k.begin(), k.end()));
    EXPECT_EQ(std::set<std::string>(k.begin(), k.end()).size(), k.size());
}

TEST(Symbols, EnumerationIsIdempotent) {
    EXPECT_EQ(enumerate(3, Alpha{2, 1, 1, 1}, {"c"}).keys(), enumerate(3, Alpha{2, 1, 1, 1}, {"c"}).keys());
}

TEST(Symbols, MonotoneInHeightAndAlpha) {
    const auto small = key_set(enumerate(1, Alpha{1, 1, 1, 0}, {"c"}));
    for (const auto& [n, a] : {std::pair{2, Alpha{1, 1, 1, 0}}, std::pair{1, Alpha{2, 1, 1, 0}},
                               std::pair{1, Alpha{1, 2, 2, 1}}, std::pair{2, Alpha{2, 2, 2, 1}}}) {
        const auto big = key_set(enumerate(n, a, {"c"}));
        EXPECT_TRUE(std::includes(big.begin(), big.end(), small.begin(), small.end()));
    }
}

TEST(Symbols, WidthConstraintHoldsForEverySymbol) {
    const Alpha a{3, 2, 1, 1};
    for (const auto& s : enumerate(2, a, {"c"}).symbols) {
        EXPECT_TRUE(satisfies_width(s, a)) << s.key();
        if (s.is_initial()) continue;
        const int k = static_cast<int>(s.factors().size());
        const int j = s.forcing_power();
        EXPECT_GE(k + j, 1);
        EXPECT_LE(k + j, j == 0 ? a.m : a.l);
        EXPECT_LE(j, a.p);
        for (const auto& f : s.factors()) EXPECT_LE(f.derivative.order(), a.q);
    }
}

TEST(Symbols, SignatureCardinality) {
    for (int K : {1, 2, 3}) {
        EnumerateOptions o;
        o.dim = 0;
        o.channels = K;
        for (int n = 1; n <= 3; ++n) {
            std::size_t expected = 0, p = 1;
            for (int i = 1; i <= n; ++i) expected += (p *= static_cast<std::size_t>(K));
            EXPECT_EQ(enumerate(n, Alpha{0, 2, 1, 0}, {}, o).size(), expected) << "K=" << K << " n=" << n;
        }
    }
}

TEST(Symbols, NoDerivativesWhenDimensionIsZero) {
    EnumerateOptions o;
    o.dim = 0;
    for (const auto& s : enumerate(2, Alpha{2, 2, 1, 2}, {"c"}, o).symbols)
        for (const auto& f : s.factors()) EXPECT_EQ(f.derivative.order(), 0) << s.key();
}

TEST(Symbols, BudgetGuardsAgainstBlowup) {
    EnumerateOptions o;
    o.budget = 1000;
    EXPECT_THROW(enumerate(3, Alpha{2, 0, 0, 1}, {"c"}, o), ConfigError);
}

TEST(Symbols, InvalidParametersAreRejected) {
    EXPECT_THROW(enumerate(-1, Alpha{1, 1, 1, 1}, {"c"}), ConfigError);
    EXPECT_THROW(enumerate(1, Alpha{-1, 1, 1, 1}, {"c"}), ConfigError);
    DegreeConfig d;
    d.beta = 0.0;
    EXPECT_THROW(d.validate(), ConfigError);
}

TEST(Symbols, JsonCarriesKeysAndDegrees) {
    const auto d = degrees(2.0, -1.5, {{"c", -1.5}});
    const auto fs = enumerate(1, Alpha{2, 2, 1, 0}, {"c"});
    const std::string j = to_json(fs, &d);
    for (const auto& k : fs.keys()) EXPECT_NE(j.find("\"" + k + "\""), std::string::npos) << k;
    EXPECT_NE(j.find("\"degrees\""), std::string::npos);
    EXPECT_NE(j.find("\"alpha\""), std::string::npos);
}

TEST(Symbols, UniteMergesSets) {
    const auto a = enumerate(1, Alpha{1, 1, 1, 0}, {"c"});
    const auto b = enumerate(1, Alpha{2, 0, 0, 1}, {"c"});
    const auto u = key_set(unite({a, b}));
    for (const auto& k : a.keys()) EXPECT_TRUE(u.count(k));
    for (const auto& k : b.keys()) EXPECT_TRUE(u.count(k));
}
