#include <gtest/gtest.h>

#include "common.hpp"

using namespace incprune;
using testing_util::best_value;
using testing_util::dense_beliefs;
using testing_util::random_set;

namespace {

bool contains(const VectorSet& set, const Coeffs& c) {
    for (const auto& v : set)
        if (v.coeffs == c) return true;
    return false;
}

// Random sets with structure: a few near-duplicates and dominated vectors.
VectorSet messy_set(Rng& rng, std::size_t ns) {
    VectorSet f = random_set(rng, 3 + rng.index(15), ns);
    const std::size_t n = f.size();
    for (std::size_t k = 0; k < 3; ++k) {
        Coeffs c = f[rng.index(n)].coeffs;
        for (auto& v : c) v -= rng.uniform(0, 0.05);
        f.push_back(AlphaVector{c, {}, {}});
    }
    f.push_back(f[0]);
    return f;
}

}  // namespace

TEST(Evaluate, TieGoesToLexicographicWinner) {
    const auto v = VectorSet::from_coeffs({{0, 1}, {1, 0}});
    const auto e = evaluate(v, Belief({0.5, 0.5}));
    EXPECT_DOUBLE_EQ(e.value, 0.5);
    EXPECT_EQ(v[e.index].coeffs, (Coeffs{1, 0}));
}

TEST(Evaluate, SingletonAndDominance) {
    const auto one = VectorSet::from_coeffs({{0.3, -2}});
    const auto e = evaluate(one, Belief({0.25, 0.75}));
    EXPECT_DOUBLE_EQ(e.value, 0.25 * 0.3 - 0.75 * 2);
    EXPECT_EQ(e.index, 0u);
    const auto two = VectorSet::from_coeffs({{2, 2}, {1, 1}});
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
        const auto r = evaluate(two, Belief(rng.simplex_point(2)));
        EXPECT_NEAR(r.value, 2.0, 1e-15);
        EXPECT_EQ(r.index, 0u);
    }
}

TEST(Evaluate, ErrorsOnEmptyOrMismatch) {
    EXPECT_THROW(evaluate(VectorSet{}, Belief({1.0})), EmptySet);
    EXPECT_THROW(evaluate(VectorSet::from_coeffs({{1, 2}}), Belief({1.0})), UsageError);
}

TEST(CrossSum, Definition) {
    const auto r = cross_sum(VectorSet::from_coeffs({{1, 0}}), VectorSet::from_coeffs({{0, 1}, {1, 1}}));
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[0].coeffs, (Coeffs{1, 1}));
    EXPECT_EQ(r[1].coeffs, (Coeffs{2, 1}));
}

TEST(CrossSum, ZeroIsIdentity) {
    const auto a = VectorSet::from_coeffs({{1, 2}, {3, -4}, {0.5, 0.5}});
    const auto r = cross_sum(a, VectorSet::zero(2));
    ASSERT_EQ(r.size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(r[i].coeffs, a[i].coeffs);
}

TEST(CrossSum, DuplicatesMergeWithProvenance) {
    const auto ab = VectorSet::from_coeffs({{1, 0}, {0, 1}});
    const auto t = cross_sum_tracked(ab, ab);
    ASSERT_EQ(t.set.size(), 3u);
    EXPECT_EQ(t.set[0].coeffs, (Coeffs{2, 0}));
    EXPECT_EQ(t.set[1].coeffs, (Coeffs{1, 1}));
    EXPECT_EQ(t.set[2].coeffs, (Coeffs{0, 2}));
    ASSERT_EQ(t.origins[1].size(), 2u);
    EXPECT_EQ(t.index_of(0, 1), 1u);
    EXPECT_EQ(t.index_of(1, 0), 1u);
}

TEST(CrossSum, ActionTagAndParents) {
    VectorSet a({AlphaVector{{1, 0}, 2, {5}}});
    VectorSet b({AlphaVector{{0, 1}, 2, {7}}, AlphaVector{{0, 2}, 1, {8}}});
    const auto r = cross_sum(a, b);
    EXPECT_EQ(r[0].action, std::optional<std::size_t>(2));
    EXPECT_FALSE(r[1].action.has_value());
    EXPECT_EQ(r[0].parents, (std::vector<std::size_t>{5, 7}));
}

TEST(RemoveDuplicates, ExactOnly) {
    EXPECT_EQ(remove_duplicates(VectorSet::from_coeffs({{1, 2}, {1, 2}})).size(), 1u);
    EXPECT_EQ(remove_duplicates(VectorSet{}).size(), 0u);
    EXPECT_EQ(remove_duplicates(VectorSet::from_coeffs({{1, 0}, {1, 0 + 1e-15}})).size(), 2u);
}

TEST(Purge, DropsInteriorVector) {
    const auto r = purge(VectorSet::from_coeffs({{1, 0}, {0, 1}, {0.4, 0.4}}));
    ASSERT_EQ(r.set.size(), 2u);
    EXPECT_TRUE(contains(r.set, {1, 0}));
    EXPECT_TRUE(contains(r.set, {0, 1}));
}

TEST(Purge, SingletonNeedsNoLp) {
    const auto r = purge(VectorSet::from_coeffs({{0.2, 0.9, 0.1}}));
    EXPECT_EQ(r.set.size(), 1u);
    EXPECT_EQ(r.stats.lp_count, 0u);
    EXPECT_EQ(r.stats.corner_seeds, 1u);
}

TEST(Purge, LpCountIsSizeMinusCornerWinners) {
    std::vector<Coeffs> rows{{1, 0}, {0, 1}};
    for (int k = 1; k <= 8; ++k) rows.push_back({0.05 * k, 0.05 * k});
    const auto r = purge(VectorSet::from_coeffs(rows));
    EXPECT_EQ(r.stats.input_size, 10u);
    EXPECT_EQ(r.stats.corner_seeds, 2u);
    EXPECT_EQ(r.stats.lp_count, 8u);
    EXPECT_EQ(r.set.size(), 2u);
}

TEST(Purge, EmptyInput) {
    const auto r = purge(VectorSet{});
    EXPECT_TRUE(r.set.empty());
    EXPECT_EQ(r.stats.lp_count, 0u);
}

TEST(Purge, LpCountLawOnRandomSets) {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const VectorSet f = remove_duplicates(messy_set(rng, 2 + rng.index(4)));
        const auto r = purge(f);
        EXPECT_EQ(r.stats.lp_count, f.size() - r.stats.corner_seeds);
        EXPECT_EQ(r.stats.input_size, f.size());
        EXPECT_EQ(r.stats.output_size, r.set.size());
    }
}

TEST(Purge, ExtensionallyCorrect) {
    Rng rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t ns = 2 + rng.index(3);
        const VectorSet f = messy_set(rng, ns);
        const auto r = purge(f);
        for (const auto& x : dense_beliefs(ns, trial)) ASSERT_NEAR(best_value(r.set, x), best_value(f, x), 1e-9);
    }
}

TEST(Purge, Idempotent) {
    Rng rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        const VectorSet f = messy_set(rng, 2 + rng.index(4));
        const auto once = purge(f);
        const auto twice = purge(once.set);
        EXPECT_TRUE(canonically_equal(once.set, twice.set, 0.0));
    }
}

TEST(Purge, ComponentwiseDominatedNeverSurvive) {
    Rng rng(47);
    for (int trial = 0; trial < 100; ++trial) {
        const VectorSet f = messy_set(rng, 2 + rng.index(4));
        const auto r = purge(f);
        for (const auto& lo : r.set)
            for (const auto& hi : f) {
                if (hi.coeffs == lo.coeffs) continue;
                bool geq = true;
                for (std::size_t s = 0; s < lo.size(); ++s) geq = geq && hi[s] >= lo[s];
                EXPECT_FALSE(geq);
            }
    }
}

TEST(Purge, WitnessSoundWithCornerExemption) {
    Rng rng(53);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t ns = 2 + rng.index(3);
        const VectorSet f = messy_set(rng, ns);
        const auto r = purge(f);
        std::vector<std::size_t> all(r.set.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        for (std::size_t i = 0; i < r.set.size(); ++i) {
            std::vector<std::span<const double>> others;
            for (std::size_t j = 0; j < r.set.size(); ++j)
                if (j != i) others.push_back(r.set[j].coeffs);
            if (dominate(r.set[i].coeffs, others)) continue;
            bool corner_winner = false;
            for (std::size_t s = 0; s < ns; ++s) {
                const Belief e = Belief::corner(ns, s);
                corner_winner = corner_winner || lex_argmax(r.set, e.span(), all) == i;
            }
            EXPECT_TRUE(corner_winner) << "trial " << trial << " vector " << i;
        }
    }
}

TEST(Purge, Deterministic) {
    Rng rng(59);
    for (int trial = 0; trial < 30; ++trial) {
        const VectorSet f = messy_set(rng, 3);
        const auto a = purge(f), b = purge(f);
        EXPECT_EQ(a.kept, b.kept);
        EXPECT_EQ(a.stats.constraint_total, b.stats.constraint_total);
    }
}

TEST(Filter, TimeoutIsCooperative) {
    Rng rng(61);
    const VectorSet f = random_set(rng, 50, 3);
    RunControl c;
    c.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
    EXPECT_THROW(purge(f, c), TimeoutExpired);
}

TEST(AlphaFile, ExactFormatAndRoundTrip) {
    const std::vector<std::string> names{"a0", "a1"};
    VectorSet set({AlphaVector{{1, 0}, 0, {}}, AlphaVector{{0.1, -2.5e-7}, std::nullopt, {}}});
    const std::string text = alpha_file_text(set, names);
    EXPECT_EQ(text, "a0\n1 0\n\n-\n0.10000000000000001 -2.4999999999999999e-07\n\n");
    std::istringstream in(text);
    const auto back = read_alpha_file(in, names, 2);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].coeffs, set[1].coeffs);
    EXPECT_EQ(back[0].action, std::optional<std::size_t>(0));
    EXPECT_FALSE(back[1].action.has_value());
    EXPECT_EQ(alpha_file_text(back, names), text);
}

TEST(AlphaFile, RandomRoundTripIsByteIdentical) {
    Rng rng(67);
    const std::vector<std::string> names{"north", "south", "east"};
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<AlphaVector> v;
        for (int k = 0; k < 5; ++k) {
            Coeffs c(4);
            for (auto& x : c) x = rng.uniform(-1e4, 1e4) * std::pow(10.0, rng.uniform(-12, 3));
            v.push_back(AlphaVector{c, rng.index(3), {}});
        }
        const std::string text = alpha_file_text(VectorSet(v), names);
        std::istringstream in(text);
        EXPECT_EQ(alpha_file_text(read_alpha_file(in, names), names), text);
    }
}

TEST(AlphaFile, MalformedInput) {
    const std::vector<std::string> names{"a0"};
    auto read = [&](const std::string& text) {
        std::istringstream in(text);
        return read_alpha_file(in, names, 2);
    };
    EXPECT_THROW(read("b9\n1 0\n\n"), ParseError);
    EXPECT_THROW(read("a0\n1 0 3\n\n"), ParseError);
    EXPECT_THROW(read("a0\n1 x\n\n"), ParseError);
    EXPECT_THROW(read("a0\n"), ParseError);
    EXPECT_THROW(read("a0\n1 0\nzz\n"), ParseError);
}
