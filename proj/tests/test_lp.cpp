#include <gtest/gtest.h>

#include "common.hpp"

using namespace incprune;
using testing_util::random_set;
using testing_util::simplex_grid;

namespace {

std::vector<std::span<const double>> spans(const VectorSet& set) {
    std::vector<std::span<const double>> out;
    for (const auto& v : set) out.push_back(v.coeffs);
    return out;
}

// Exact max over p in [0,1] of min_k (x . (alpha - o_k)), x = (1-p, p): the
// optimum of a concave piecewise-linear function sits at an end point or
// where two pieces cross.
double exact_margin_2d(std::span<const double> alpha, const std::vector<std::span<const double>>& others) {
    std::vector<double> d0, d1;
    for (auto o : others) {
        d0.push_back(alpha[0] - o[0]);
        d1.push_back(alpha[1] - o[1]);
    }
    auto f = [&](long double p) {
        long double m = INFINITY;
        for (std::size_t k = 0; k < d0.size(); ++k) m = std::min(m, (1 - p) * d0[k] + p * d1[k]);
        return m;
    };
    std::vector<long double> ps{0.0L, 1.0L};
    for (std::size_t i = 0; i < d0.size(); ++i)
        for (std::size_t j = i + 1; j < d0.size(); ++j) {
            const long double slope = (static_cast<long double>(d1[i]) - d0[i]) - (static_cast<long double>(d1[j]) - d0[j]);
            if (slope == 0) continue;
            const long double p = (static_cast<long double>(d0[j]) - d0[i]) / slope;
            if (p > 0 && p < 1) ps.push_back(p);
        }
    long double best = -INFINITY;
    for (auto p : ps) best = std::max(best, f(p));
    return static_cast<double>(best);
}

double margin_at(std::span<const double> x, std::span<const double> alpha, const std::vector<std::span<const double>>& others) {
    double m = INFINITY;
    for (auto o : others) m = std::min(m, dot(x, alpha) - dot(x, o));
    return m;
}

}  // namespace

TEST(SolveLp, SingleBound) {
    LpProblem p;
    p.objective = {1.0};
    p.bounds = {Bound::Free};
    p.constraints = {{{1.0}, Relation::LessEqual, 3.0}};
    const auto r = solve_lp(p);
    ASSERT_EQ(r.status, LpStatus::Optimal);
    EXPECT_NEAR(r.assignment[0], 3.0, 1e-12);
    EXPECT_NEAR(r.objective, 3.0, 1e-12);
}

TEST(SolveLp, ContradictoryBounds) {
    LpProblem p;
    p.objective = {1.0};
    p.bounds = {Bound::Free};
    p.constraints = {{{1.0}, Relation::LessEqual, 1.0}, {{1.0}, Relation::GreaterEqual, 2.0}};
    EXPECT_EQ(solve_lp(p).status, LpStatus::Infeasible);
}

TEST(SolveLp, UnboundedRay) {
    LpProblem p;
    p.objective = {1.0};
    p.bounds = {Bound::Free};
    p.constraints = {{{1.0}, Relation::GreaterEqual, 0.0}};
    EXPECT_EQ(solve_lp(p).status, LpStatus::Unbounded);
    LpProblem none;
    none.objective = {1.0};
    EXPECT_EQ(solve_lp(none).status, LpStatus::Unbounded);
}

TEST(SolveLp, EqualityAndNegativeBounds) {
    // max x + 2y  s.t. x + y = 4, y <= 3, x - y >= -5, x,y >= 0  -> (1, 3), 7
    LpProblem p;
    p.objective = {1.0, 2.0};
    p.constraints = {{{1, 1}, Relation::Equal, 4}, {{0, 1}, Relation::LessEqual, 3}, {{1, -1}, Relation::GreaterEqual, -5}};
    const auto r = solve_lp(p);
    ASSERT_EQ(r.status, LpStatus::Optimal);
    EXPECT_NEAR(r.assignment[0], 1.0, 1e-12);
    EXPECT_NEAR(r.assignment[1], 3.0, 1e-12);
    EXPECT_NEAR(r.objective, 7.0, 1e-12);
}

TEST(SolveLp, DegenerateCycleProneInstance) {
    // Cycles under the textbook largest-coefficient rule.
    LpProblem p;
    p.objective = {10, -57, -9, -24};
    p.constraints = {{{0.5, -5.5, -2.5, 9}, Relation::LessEqual, 0},
                     {{0.5, -1.5, -0.5, 1}, Relation::LessEqual, 0},
                     {{1, 0, 0, 0}, Relation::LessEqual, 1}};
    const auto r = solve_lp(p);
    ASSERT_EQ(r.status, LpStatus::Optimal);
    EXPECT_NEAR(r.objective, 1.0, 1e-12);
}

TEST(SolveLp, WidthMismatchIsUsageError) {
    LpProblem p;
    p.objective = {1.0, 1.0};
    p.constraints = {{{1.0}, Relation::LessEqual, 1.0}};
    EXPECT_THROW(solve_lp(p), UsageError);
}

TEST(Dominate, CornerWitness) {
    const Coeffs alpha{1, 0};
    const auto a = VectorSet::from_coeffs({{0, 1}});
    const auto w = dominate(alpha, spans(a));
    ASSERT_TRUE(w);
    EXPECT_EQ(w->x.probs(), (std::vector<double>{1, 0}));
    EXPECT_NEAR(w->delta, 1.0, 1e-12);
}

TEST(Dominate, MidpointIsNotDominant) {
    const Coeffs alpha{0.5, 0.5};
    const auto a = VectorSet::from_coeffs({{1, 0}, {0, 1}});
    EXPECT_FALSE(dominate(alpha, spans(a)));
}

TEST(Dominate, ConstantMarginPicksFirstCorner) {
    const Coeffs alpha{1, 1};
    const auto a = VectorSet::from_coeffs({{0.5, 0.5}});
    const auto w = dominate(alpha, spans(a));
    ASSERT_TRUE(w);
    EXPECT_EQ(w->x.probs(), (std::vector<double>{1, 0}));
    EXPECT_NEAR(w->delta, 0.5, 1e-12);
}

TEST(Dominate, EmptyComparisonGivesSentinel) {
    const Coeffs alpha{0.3, 0.1, 0.2};
    LpTally tally;
    const auto w = dominate(alpha, {}, &tally);
    ASSERT_TRUE(w);
    EXPECT_EQ(w->delta, kMaxMargin);
    EXPECT_EQ(w->x.probs(), (std::vector<double>{1, 0, 0}));
    EXPECT_EQ(tally.lp_count, 0u);
    // alpha itself in the comparison set is skipped
    const auto self = VectorSet::from_coeffs({alpha});
    EXPECT_EQ(dominate(alpha, spans(self), &tally)->delta, kMaxMargin);
    EXPECT_EQ(tally.lp_count, 0u);
}

TEST(Dominate, TallyCountsRegionAndSimplexRows) {
    const Coeffs alpha{1, 0, 0};
    const auto a = VectorSet::from_coeffs({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}, {0.2, 0.2, 0.2}});
    LpTally tally;
    dominate(alpha, spans(a), &tally);
    EXPECT_EQ(tally.lp_count, 1u);
    EXPECT_EQ(tally.constraint_total, 3u + 2u);  // alpha itself excluded
}

TEST(Dominate, EpsilonIsStrict) {
    const Coeffs alpha{1e-9, 1e-9};
    const auto a = VectorSet::from_coeffs({{0, 0}});
    EXPECT_FALSE(dominate(alpha, spans(a)));
    EXPECT_TRUE(dominate(alpha, spans(a), nullptr, 1e-10));
}

TEST(Dominate, SoundAndOptimalInTwoStates) {
    Rng rng(11);
    for (int trial = 0; trial < 3000; ++trial) {
        const std::size_t n = 1 + rng.index(8);
        VectorSet set = random_set(rng, n, 2, -1, 1);
        if (trial % 3 == 0) {
            // near-duplicates of a random member
            const auto base = set[rng.index(n)].coeffs;
            for (int k = 0; k < 3; ++k)
                set.push_back(AlphaVector{{base[0] + rng.uniform(-1e-7, 1e-7), base[1] + rng.uniform(-1e-7, 1e-7)}, {}, {}});
        }
        Coeffs alpha = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        if (trial % 5 == 0) alpha = {set[0][0] + 1e-8, set[0][1] - 1e-8};
        const auto others = spans(set);
        const double exact = exact_margin_2d(alpha, others);
        const auto w = max_margin(alpha, others);
        EXPECT_NEAR(w.delta, exact, 1e-10) << "trial " << trial;
        EXPECT_NEAR(margin_at(w.x.span(), alpha, others), w.delta, 1e-12);
        const auto d = dominate(alpha, others);
        EXPECT_EQ(d.has_value(), w.delta > kMarginEpsilon);
        if (d) EXPECT_GE(margin_at(d->x.span(), alpha, others), d->delta - 1e-9);
    }
}

TEST(Dominate, CompleteOnGrid) {
    Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t ns = 2 + rng.index(2);
        const auto grid = simplex_grid(ns, ns == 2 ? 10000 : 140);
        const VectorSet set = random_set(rng, 2 + rng.index(6), ns);
        Coeffs alpha(ns);
        for (auto& v : alpha) v = rng.uniform(0.2, 0.8);
        const auto others = spans(set);
        const auto d = dominate(alpha, others);
        if (d) {
            EXPECT_GT(d->delta, kMarginEpsilon);
            EXPECT_GE(margin_at(d->x.span(), alpha, others), d->delta - 1e-9);
            continue;
        }
        for (const auto& x : grid) ASSERT_LE(margin_at(x, alpha, others), 1e-6) << "trial " << trial;
    }
}

TEST(Dominate, HigherDimensionsSoundAgainstSampling) {
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t ns = 4 + rng.index(3);
        const VectorSet set = random_set(rng, 3 + rng.index(10), ns);
        Coeffs alpha(ns);
        for (auto& v : alpha) v = rng.uniform(0.3, 0.9);
        const auto others = spans(set);
        const auto w = max_margin(alpha, others);
        EXPECT_NEAR(margin_at(w.x.span(), alpha, others), w.delta, 1e-12);
        // no sampled belief beats the LP optimum
        for (int k = 0; k < 2000; ++k) {
            const auto x = rng.simplex_point(ns);
            ASSERT_LE(margin_at(x, alpha, others), w.delta + 1e-9);
        }
    }
}

TEST(Dominate, Deterministic) {
    Rng rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const VectorSet set = random_set(rng, 6, 3);
        const Coeffs alpha{rng.uniform(), rng.uniform(), rng.uniform()};
        const auto a = max_margin(alpha, spans(set));
        const auto b = max_margin(alpha, spans(set));
        EXPECT_EQ(a.x, b.x);
        EXPECT_EQ(a.delta, b.delta);
    }
}
