#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <future>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "lp.hpp"
#include "model.hpp"
#include "pwlc.hpp"
#include "vectors.hpp"

namespace incprune {

enum class Algorithm { Exhaustive, IncrementalPruning, RestrictedRegion, RestrictedRegionMin };
enum class ObservationOrder { Natural, SmallestFirst };

struct UpdateVariant {
    Algorithm kind = Algorithm::IncrementalPruning;
    ObservationOrder order = ObservationOrder::Natural;
};

inline std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Exhaustive: return "exhaustive";
        case Algorithm::IncrementalPruning: return "ip";
        case Algorithm::RestrictedRegion: return "rr";
        case Algorithm::RestrictedRegionMin: return "rr-min";
    }
    return "?";
}

inline Algorithm parse_algorithm(const std::string& name) {
    for (Algorithm a : {Algorithm::Exhaustive, Algorithm::IncrementalPruning, Algorithm::RestrictedRegion,
                        Algorithm::RestrictedRegionMin})
        if (to_string(a) == name) return a;
    throw UsageError("unknown algorithm '" + name + "' (expected exhaustive, ip, rr or rr-min)");
}

inline std::string to_string(ObservationOrder o) { return o == ObservationOrder::Natural ? "natural" : "smallest-first"; }

inline ObservationOrder parse_order(const std::string& name) {
    if (name == "natural") return ObservationOrder::Natural;
    if (name == "smallest-first") return ObservationOrder::SmallestFirst;
    throw UsageError("unknown observation order '" + name + "' (expected natural or smallest-first)");
}

/// Comparison set used by a restricted dominance check of phi = alpha + beta
/// while filtering A (+) B with winners W found so far.
enum class ComparisonSet {
    CrossSum,  ///< all of A (+) B
    Winners,   ///< W
    FixAlpha,  ///< ({alpha} (+) B) with the winners built from beta
    FixBeta,   ///< (A (+) {beta}) with the winners built from alpha
    RrRule,    ///< FixAlpha when |B| < |A|, FixBeta otherwise
    Smallest,  ///< smallest of Winners, FixAlpha, FixBeta (ties in that order)
};

enum class Phase { SzaBuild, SaBuild, UnionPurge };

inline const char* to_string(Phase p) {
    switch (p) {
        case Phase::SzaBuild: return "sza_build";
        case Phase::SaBuild: return "sa_build";
        case Phase::UnionPurge: return "union_purge";
    }
    return "?";
}

struct PhaseStats {
    std::uint64_t lp_count = 0;
    std::uint64_t constraint_total = 0;
    double seconds = 0.0;

    void add(const FilterStats& f) {
        lp_count += f.lp_count;
        constraint_total += f.constraint_total;
    }
    PhaseStats& operator+=(const PhaseStats& o) {
        lp_count += o.lp_count;
        constraint_total += o.constraint_total;
        seconds += o.seconds;
        return *this;
    }
};

/// One FILTER invocation. For incremental-pruning fold steps the operand
/// sizes |A| and |B| are recorded too.
struct FilterRecord {
    Phase phase = Phase::SzaBuild;
    std::size_t action = 0;
    FilterStats stats;
    std::optional<std::size_t> left_size;
    std::optional<std::size_t> right_size;
};

struct UpdateStats {
    PhaseStats sza_build;
    PhaseStats sa_build;
    PhaseStats union_purge;
    std::vector<std::vector<std::size_t>> sza_sizes;  // [action][observation]
    std::vector<std::size_t> sa_sizes;                // [action]
    std::size_t result_size = 0;
    std::vector<FilterRecord> filters;
    /// Fold steps whose filtered size fell below max(|A|, |B|).
    std::size_t monotonicity_violations = 0;
    std::vector<Belief> witnesses;
    /// LPs of the final marginal-vector pass; counted in union_purge but
    /// not in any FilterRecord.
    LpTally cleanup;

    PhaseStats total() const {
        PhaseStats t;
        t += sza_build;
        t += sa_build;
        t += union_purge;
        return t;
    }
};

/// tau(alpha, a, z)(s) = r^a(s) / |Z| + gamma * sum_{s'} alpha(s') Pr(z|s',a) Pr(s'|s,a)
inline AlphaVector tau(const PomdpModel& model, const AlphaVector& alpha, std::size_t a, std::size_t z) {
    model.check_action(a);
    model.check_observation(z);
    const std::size_t ns = model.num_states();
    if (alpha.size() != ns) throw UsageError("alpha vector dimension does not match the state count");
    const double share = 1.0 / static_cast<double>(model.num_observations());
    AlphaVector out;
    out.coeffs.resize(ns);
    out.action = a;
    for (std::size_t s = 0; s < ns; ++s) {
        double future = 0.0;
        for (std::size_t next = 0; next < ns; ++next)
            future += alpha[next] * model.observation(a, next, z) * model.transition(a, s, next);
        out.coeffs[s] = share * model.reward(a, s) + model.discount() * future;
    }
    return out;
}

/// S_z^a = purge({tau(alpha, a, z) | alpha in S}); each vector's parents
/// hold the index of its source in S.
inline FilterResult build_sza(const PomdpModel& model, const VectorSet& set, std::size_t a, std::size_t z,
                              const RunControl& control = {}, double epsilon = kMarginEpsilon) {
    if (set.empty()) throw EmptySet("build_sza needs a non-empty vector set");
    std::vector<AlphaVector> image;
    image.reserve(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        AlphaVector v = tau(model, set[i], a, z);
        v.parents = {i};
        image.push_back(std::move(v));
    }
    return purge(VectorSet(std::move(image)), control, epsilon);
}

/// Dominance oracle for FILTER(A (+) B) with a restricted comparison set.
/// Keeps, per operand index, the winners built from it; the lists grow as
/// FILTER appends to W, so each call only looks at the new winners.
class RestrictedOracle {
public:
    RestrictedOracle(const TrackedCrossSum& cs, ComparisonSet choice, double epsilon = kMarginEpsilon)
        : cs_(&cs), choice_(choice), epsilon_(epsilon), by_a_(cs.a_size), by_b_(cs.b_size), stamp_(cs.set.size(), 0) {
        if (cs.origins.size() != cs.set.size() || cs.pair_index.size() != cs.a_size * cs.b_size)
            throw ProvenanceMissing("restricted comparison sets need cross-sum provenance");
    }

    std::optional<DominanceWitness> operator()(const VectorSet& f, std::size_t phi, std::span<const std::size_t> winners,
                                               LpTally& tally) {
        const std::vector<std::size_t>& d = comparison(phi, winners);
        comparison_spans_.clear();
        for (std::size_t i : d) comparison_spans_.push_back(f[i].coeffs);
        return dominate(f[phi].coeffs, comparison_spans_, &tally, epsilon_);
    }

    /// Indices into A (+) B of D \ {phi} for the configured choice.
    const std::vector<std::size_t>& comparison(std::size_t phi, std::span<const std::size_t> winners) {
        sync(winners);
        const TrackedCrossSum& cs = *cs_;
        if (cs.origins[phi].empty()) throw ProvenanceMissing("cross-sum vector without an origin");
        const Origin o = cs.origins[phi].front();
        ComparisonSet choice = choice_;
        if (choice == ComparisonSet::RrRule) choice = cs.b_size < cs.a_size ? ComparisonSet::FixAlpha : ComparisonSet::FixBeta;
        if (choice == ComparisonSet::Smallest) {
            const std::size_t w = winners.size();
            const std::size_t d1 = cs.b_size + by_b_[o.b].size();
            const std::size_t d2 = cs.a_size + by_a_[o.a].size();
            choice = ComparisonSet::Winners;
            std::size_t best = w;
            if (d1 < best) {
                choice = ComparisonSet::FixAlpha;
                best = d1;
            }
            if (d2 < best) choice = ComparisonSet::FixBeta;
        }
        ++generation_;
        members_.clear();
        auto add = [&](std::size_t i) {
            if (i == phi || stamp_[i] == generation_) return;
            stamp_[i] = generation_;
            members_.push_back(i);
        };
        switch (choice) {
            case ComparisonSet::CrossSum:
                for (std::size_t i = 0; i < cs.set.size(); ++i) add(i);
                break;
            case ComparisonSet::Winners:
                for (std::size_t w : winners) add(w);
                break;
            case ComparisonSet::FixAlpha:
                for (std::size_t j = 0; j < cs.b_size; ++j) add(cs.index_of(o.a, j));
                for (std::size_t w : by_b_[o.b]) add(w);
                break;
            case ComparisonSet::FixBeta:
                for (std::size_t i = 0; i < cs.a_size; ++i) add(cs.index_of(i, o.b));
                for (std::size_t w : by_a_[o.a]) add(w);
                break;
            default: break;
        }
        last_choice_ = choice;
        return members_;
    }

    ComparisonSet last_choice() const noexcept { return last_choice_; }

private:
    void sync(std::span<const std::size_t> winners) {
        for (; synced_ < winners.size(); ++synced_) {
            const std::size_t w = winners[synced_];
            for (const Origin& o : cs_->origins[w]) {
                if (by_a_[o.a].empty() || by_a_[o.a].back() != w) by_a_[o.a].push_back(w);
                if (by_b_[o.b].empty() || by_b_[o.b].back() != w) by_b_[o.b].push_back(w);
            }
        }
    }

    const TrackedCrossSum* cs_;
    ComparisonSet choice_;
    double epsilon_;
    std::vector<std::vector<std::size_t>> by_a_;
    std::vector<std::vector<std::size_t>> by_b_;
    std::size_t synced_ = 0;
    std::vector<std::uint64_t> stamp_;
    std::uint64_t generation_ = 0;
    std::vector<std::size_t> members_;
    std::vector<std::span<const double>> comparison_spans_;
    ComparisonSet last_choice_ = ComparisonSet::Winners;
};

/// One-shot restricted dominance check of cs.set[phi] against D \ {phi}.
inline std::optional<DominanceWitness> restricted_dominate(const TrackedCrossSum& cs, std::size_t phi,
                                                           std::span<const std::size_t> winners, ComparisonSet choice,
                                                           LpTally* tally = nullptr) {
    RestrictedOracle oracle(cs, choice);
    LpTally local;
    auto result = oracle(cs.set, phi, winners, local);
    if (tally) *tally += local;
    return result;
}

/// Result of building one S^a from its S_z^a sets.
struct SaBuild {
    VectorSet set;
    std::vector<FilterRecord> filters;  // phase SaBuild, action left 0
    std::vector<Belief> witnesses;
    std::size_t monotonicity_violations = 0;
    /// Position i of the fold consumed sets[order[i]].
    std::vector<std::size_t> order;
};

namespace detail {

inline std::vector<std::size_t> fold_order(std::span<const VectorSet> sets, ObservationOrder order) {
    std::vector<std::size_t> idx(sets.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (order == ObservationOrder::SmallestFirst)
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return sets[x].size() < sets[y].size(); });
    return idx;
}

}  // namespace detail

/// purge(S_1 (+) ... (+) S_k) by materializing the whole cross sum first.
inline SaBuild exhaustive_sa(std::span<const VectorSet> sets, ObservationOrder order = ObservationOrder::Natural,
                             const RunControl& control = {}, std::size_t cap = 1000000, double epsilon = kMarginEpsilon) {
    if (sets.empty()) throw EmptySet("exhaustive_sa needs at least one set");
    SaBuild out;
    out.order = detail::fold_order(sets, order);
    VectorSet all = sets[out.order[0]];
    if (sets.size() == 1) {
        out.set = all;
        return out;
    }
    for (std::size_t i = 1; i < out.order.size(); ++i) {
        const VectorSet& next = sets[out.order[i]];
        if (all.size() * next.size() > cap)
            throw CombinatorialBlowup("exhaustive cross sum would hold " + std::to_string(all.size() * next.size()) +
                                      " vectors (cap " + std::to_string(cap) + ")");
        all = cross_sum(all, next);
        control.check();
    }
    FilterResult filtered = filter(all, WinnerSetOracle{epsilon}, control);
    out.filters.push_back(FilterRecord{Phase::SaBuild, 0, filtered.stats, std::nullopt, std::nullopt});
    out.witnesses = std::move(filtered.witnesses);
    out.set = std::move(filtered.set);
    return out;
}

inline ComparisonSet comparison_for(Algorithm kind) {
    switch (kind) {
        case Algorithm::RestrictedRegion: return ComparisonSet::RrRule;
        case Algorithm::RestrictedRegionMin: return ComparisonSet::Smallest;
        default: return ComparisonSet::Winners;
    }
}

/// Incremental pruning: W <- FILTER(W (+) S_i) folded left over the sets.
/// The dominance check's comparison set follows the variant. Every fold step
/// is checked against |W'| >= max(|W|, |S_i|).
inline SaBuild inc_prune(std::span<const VectorSet> sets, const UpdateVariant& variant, const RunControl& control = {},
                         double epsilon = kMarginEpsilon) {
    if (sets.empty()) throw EmptySet("inc_prune needs at least one set");
    if (variant.kind == Algorithm::Exhaustive) return exhaustive_sa(sets, variant.order, control, 1000000, epsilon);
    SaBuild out;
    out.order = detail::fold_order(sets, variant.order);
    VectorSet w = sets[out.order[0]];
    const ComparisonSet choice = comparison_for(variant.kind);
    for (std::size_t i = 1; i < out.order.size(); ++i) {
        const VectorSet& next = sets[out.order[i]];
        TrackedCrossSum cs = cross_sum_tracked(w, next);
        FilterResult filtered = filter(cs.set, RestrictedOracle(cs, choice, epsilon), control);
        if (filtered.set.size() < std::max(w.size(), next.size())) ++out.monotonicity_violations;
        out.filters.push_back(FilterRecord{Phase::SaBuild, 0, filtered.stats, w.size(), next.size()});
        for (auto& x : filtered.witnesses) out.witnesses.push_back(std::move(x));
        w = std::move(filtered.set);
    }
    out.set = std::move(w);
    return out;
}

struct UpdateOptions {
    bool parallel_actions = false;
    std::size_t exhaustive_cap = 1000000;
    /// Threshold of the FILTER passes that build S^a and S'; the result is
    /// cut at kMarginEpsilon afterwards. S_z^a purges always use kMarginEpsilon.
    double filter_epsilon = kFilterEpsilon;
    RunControl control;
};

struct UpdateResult {
    VectorSet set;
    UpdateStats stats;
};

namespace detail {

struct ActionBuild {
    VectorSet sa;
    std::vector<std::size_t> sza_sizes;
    PhaseStats sza;
    PhaseStats sa_phase;
    std::vector<FilterRecord> filters;
    std::vector<Belief> witnesses;
    std::size_t monotonicity_violations = 0;
};

// Final pass over S' in canonical order: a vector whose best margin against
// the others still kept is at most kMarginEpsilon goes. The FILTER passes can
// keep such vectors when a witness lands within round-off of a facet, and
// which ones survive then depends on the variant.
inline VectorSet drop_marginal(const VectorSet& set, LpTally& tally, const RunControl& control) {
    VectorSet c = canonical(set);
    std::vector<bool> keep(c.size(), true);
    std::vector<std::span<const double>> others;
    for (std::size_t i = 0; i < c.size(); ++i) {
        control.check();
        others.clear();
        for (std::size_t j = 0; j < c.size(); ++j)
            if (j != i && keep[j]) others.push_back(c[j].coeffs);
        if (others.empty()) continue;
        tally.lp_count += 1;
        tally.constraint_total += others.size() + 2;
        if (max_margin(c[i].coeffs, others).delta <= kMarginEpsilon) keep[i] = false;
    }
    std::vector<AlphaVector> kept;
    kept.reserve(c.size());
    for (std::size_t i = 0; i < c.size(); ++i)
        if (keep[i]) kept.push_back(c[i]);
    return VectorSet(std::move(kept), true);
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline ActionBuild build_action(const PomdpModel& model, const VectorSet& set, std::size_t a, const UpdateVariant& variant,
                                const UpdateOptions& options) {
    ActionBuild out;
    const std::size_t nz = model.num_observations();
    auto t0 = std::chrono::steady_clock::now();
    std::vector<VectorSet> sza;
    sza.reserve(nz);
    for (std::size_t z = 0; z < nz; ++z) {
        FilterResult r = build_sza(model, set, a, z, options.control);
        out.sza.add(r.stats);
        out.filters.push_back(FilterRecord{Phase::SzaBuild, a, r.stats, std::nullopt, std::nullopt});
        for (auto& x : r.witnesses) out.witnesses.push_back(std::move(x));
        out.sza_sizes.push_back(r.set.size());
        sza.push_back(std::move(r.set));
    }
    out.sza.seconds = seconds_since(t0);

    auto t1 = std::chrono::steady_clock::now();
    SaBuild built = variant.kind == Algorithm::Exhaustive
                        ? exhaustive_sa(sza, variant.order, options.control, options.exhaustive_cap, options.filter_epsilon)
                        : inc_prune(sza, variant, options.control, options.filter_epsilon);
    out.sa_phase.seconds = seconds_since(t1);
    for (auto& rec : built.filters) {
        rec.action = a;
        out.sa_phase.add(rec.stats);
        out.filters.push_back(rec);
    }
    for (auto& x : built.witnesses) out.witnesses.push_back(std::move(x));
    out.monotonicity_violations = built.monotonicity_violations;

    // Parents were concatenated in fold order; store them per observation.
    std::vector<AlphaVector> vectors;
    vectors.reserve(built.set.size());
    for (const auto& v : built.set) {
        AlphaVector copy = v;
        copy.action = a;
        if (copy.parents.size() == nz) {
            for (std::size_t i = 0; i < nz; ++i) copy.parents[built.order[i]] = v.parents[i];
        }
        vectors.push_back(std::move(copy));
    }
    out.sa = VectorSet(std::move(vectors), true);
    return out;
}

}  // namespace detail

/// One DP backup S -> S': all S_z^a, all S^a through the variant, then
/// S' = purge(union of the S^a). Stats are kept per phase.
inline UpdateResult dp_update(const PomdpModel& model, const VectorSet& set, const UpdateVariant& variant,
                              const UpdateOptions& options = {}) {
    if (set.empty()) throw EmptySet("dp_update needs a non-empty vector set");
    if (set.dimension() != model.num_states()) throw UsageError("vector set dimension does not match the state count");
    const std::size_t na = model.num_actions();
    std::vector<detail::ActionBuild> builds(na);
    if (options.parallel_actions && na > 1) {
        std::vector<std::future<detail::ActionBuild>> jobs;
        for (std::size_t a = 0; a < na; ++a)
            jobs.push_back(std::async(std::launch::async, [&, a] { return detail::build_action(model, set, a, variant, options); }));
        for (std::size_t a = 0; a < na; ++a) builds[a] = jobs[a].get();
    } else {
        for (std::size_t a = 0; a < na; ++a) builds[a] = detail::build_action(model, set, a, variant, options);
    }

    UpdateResult result;
    UpdateStats& stats = result.stats;
    std::vector<AlphaVector> united;
    for (std::size_t a = 0; a < na; ++a) {
        auto& b = builds[a];
        stats.sza_build += b.sza;
        stats.sa_build += b.sa_phase;
        stats.sza_sizes.push_back(b.sza_sizes);
        stats.sa_sizes.push_back(b.sa.size());
        stats.monotonicity_violations += b.monotonicity_violations;
        for (auto& rec : b.filters) stats.filters.push_back(rec);
        for (auto& x : b.witnesses) stats.witnesses.push_back(std::move(x));
        for (const auto& v : b.sa) united.push_back(v);
    }

    auto t0 = std::chrono::steady_clock::now();
    FilterResult final_set = purge(VectorSet(std::move(united)), options.control, options.filter_epsilon);
    stats.union_purge.seconds = detail::seconds_since(t0);
    stats.union_purge.add(final_set.stats);
    stats.filters.push_back(FilterRecord{Phase::UnionPurge, 0, final_set.stats, std::nullopt, std::nullopt});
    for (auto& x : final_set.witnesses) stats.witnesses.push_back(std::move(x));
    result.set = detail::drop_marginal(final_set.set, stats.cleanup, options.control);
    stats.union_purge.lp_count += stats.cleanup.lp_count;
    stats.union_purge.constraint_total += stats.cleanup.constraint_total;
    stats.union_purge.seconds = detail::seconds_since(t0);
    stats.result_size = result.set.size();
    return result;
}

}  // namespace incprune
