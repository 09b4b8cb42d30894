#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <optional>
#include <thread>
#include <vector>

#include "dpupdate.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "pwlc.hpp"
#include "rng.hpp"
#include "vectors.hpp"

namespace incprune {

inline constexpr std::size_t kDefaultStageCap = 100;

struct SolveConfig {
    UpdateVariant variant;
    std::size_t max_stages = kDefaultStageCap;
    std::optional<double> residual_target;
    std::uint64_t seed = 0;
    std::size_t grid_resolution = 20;
    bool parallel_actions = false;
    std::size_t exhaustive_cap = 1000000;
    RunControl control;
    /// Called with (stage, S_stage) after every completed stage.
    std::function<void(std::size_t, const VectorSet&)> on_stage;
};

struct Solution {
    VectorSet value_function;
    std::size_t stages_run = 0;
    std::vector<UpdateStats> stage_stats;
    std::vector<double> residuals;
    /// The deadline in config.control passed; the fields above hold the
    /// stages completed before it.
    bool timed_out = false;
};

namespace detail {

inline double max_value(const VectorSet& set, std::span<const double> x) {
    double best = -INFINITY;
    for (const auto& v : set) best = std::max(best, dot(x, v.coeffs));
    return best;
}

// Beliefs where two vectors of a 2-state set cross inside (0, 1).
inline void add_crossings(const VectorSet& set, std::vector<std::vector<double>>& points) {
    for (std::size_t i = 0; i < set.size(); ++i) {
        for (std::size_t j = i + 1; j < set.size(); ++j) {
            // x0 * u0 + (1 - x0) * u1 = x0 * v0 + (1 - x0) * v1
            const double slope = (set[i][0] - set[i][1]) - (set[j][0] - set[j][1]);
            if (slope == 0.0) continue;
            const double x0 = (set[j][1] - set[i][1]) / slope;
            if (x0 > 0.0 && x0 < 1.0) points.push_back({x0, 1.0 - x0});
        }
    }
}

// Every point of the simplex grid {k / r}, k summing to r.
inline void add_grid(std::size_t ns, std::size_t r, std::vector<std::vector<double>>& points) {
    std::vector<std::size_t> k(ns, 0);
    auto recurse = [&](auto&& self, std::size_t s, std::size_t left) -> void {
        if (s + 1 == ns) {
            k[s] = left;
            std::vector<double> p(ns);
            for (std::size_t i = 0; i < ns; ++i) p[i] = static_cast<double>(k[i]) / static_cast<double>(r);
            points.push_back(std::move(p));
            return;
        }
        for (std::size_t v = 0; v <= left; ++v) {
            k[s] = v;
            self(self, s + 1, left - v);
        }
    };
    recurse(recurse, 0, r);
}

}  // namespace detail

inline constexpr std::size_t kResidualRandomBeliefs = 1000;
inline constexpr std::size_t kCrossingLimit = 2000;

/// max |V_new(x) - V_old(x)| over corners, the given witnesses, and a uniform
/// grid (|S| <= 3) or 1000 seeded random beliefs (|S| > 3). This is a lower
/// bound on the sup-norm distance. For two states all pairwise crossing
/// points of both sets are added as well, which makes it exact there.
inline double residual_estimate(const VectorSet& v_old, const VectorSet& v_new, std::size_t grid_resolution,
                                std::span<const Belief> witnesses = {}, std::uint64_t seed = 0) {
    if (v_old.empty() || v_new.empty()) throw EmptySet("residual needs two non-empty vector sets");
    if (v_old.dimension() != v_new.dimension()) throw UsageError("residual of sets with different dimensions");
    const std::size_t ns = v_old.dimension();
    std::vector<std::vector<double>> points;
    for (std::size_t s = 0; s < ns; ++s) points.push_back(Belief::corner(ns, s).probs());
    for (const auto& w : witnesses)
        if (w.size() == ns) points.push_back(w.probs());
    if (ns <= 3) {
        detail::add_grid(ns, std::max<std::size_t>(grid_resolution, 1), points);
    } else {
        Rng rng(seed);
        for (std::size_t i = 0; i < kResidualRandomBeliefs; ++i) points.push_back(rng.simplex_point(ns));
    }
    if (ns == 2 && v_old.size() <= kCrossingLimit && v_new.size() <= kCrossingLimit) {
        detail::add_crossings(v_old, points);
        detail::add_crossings(v_new, points);
    }
    double worst = 0.0;
    for (const auto& x : points)
        worst = std::max(worst, std::abs(detail::max_value(v_new, x) - detail::max_value(v_old, x)));
    return worst;
}

/// S_0 = {0}, S_{t+1} = dp_update(S_t), until max_stages or the residual
/// estimate drops to residual_target. A deadline in config.control ends the
/// run early with timed_out set instead of throwing.
inline Solution value_iterate(const PomdpModel& model, const SolveConfig& config) {
    if (config.max_stages < 1) throw UsageError("max_stages must be at least 1");
    if (config.residual_target && model.discount() >= 1.0)
        throw NonConvergent("a residual target needs a discount below 1");
    UpdateOptions options;
    options.parallel_actions = config.parallel_actions;
    options.exhaustive_cap = config.exhaustive_cap;
    options.control = config.control;

    Solution solution;
    solution.value_function = VectorSet::zero(model.num_states());
    for (std::size_t t = 0; t < config.max_stages; ++t) {
        UpdateResult next;
        try {
            next = dp_update(model, solution.value_function, config.variant, options);
        } catch (const TimeoutExpired&) {
            solution.timed_out = true;
            break;
        }
        const double residual = residual_estimate(solution.value_function, next.set, config.grid_resolution,
                                                  next.stats.witnesses, Rng::derive(config.seed, t));
        solution.residuals.push_back(residual);
        solution.stage_stats.push_back(std::move(next.stats));
        solution.value_function = std::move(next.set);
        solution.stages_run = t + 1;
        if (config.on_stage) config.on_stage(t + 1, solution.value_function);
        if (config.residual_target && residual <= *config.residual_target) break;
    }
    return solution;
}

/// Action tag of the vector evaluate() picks at x.
inline std::size_t policy_action(const VectorSet& value_function, const Belief& x) {
    const Evaluation e = evaluate(value_function, x);
    const auto& tag = value_function[e.index].action;
    if (!tag) throw UsageError("winning vector carries no action tag");
    return *tag;
}

inline std::size_t policy_action(const Solution& solution, const Belief& x) {
    return policy_action(solution.value_function, x);
}

struct SimulationResult {
    double mean = 0.0;
    double standard_error = 0.0;
    std::vector<double> returns;
};

/// One rollout: s_0 ~ x0, act greedily on the tracked belief, accrue
/// gamma^t r^a(s_t), sample s' and z, update the belief.
inline double simulate_trial(const PomdpModel& model, const VectorSet& value_function, const Belief& x0,
                             std::size_t horizon, Rng& rng) {
    Belief belief = x0;
    std::size_t s = rng.categorical(x0.probs());
    double total = 0.0;
    double weight = 1.0;
    for (std::size_t t = 0; t < horizon; ++t) {
        const std::size_t a = policy_action(value_function, belief);
        total += weight * model.reward(a, s);
        const std::size_t next = rng.categorical(model.transition_row(a, s));
        const std::size_t z = rng.categorical(model.observation_row(a, next));
        belief = belief_update(model, belief, a, z);
        s = next;
        weight *= model.discount();
    }
    return total;
}

/// Seeded Monte-Carlo estimate of the discounted return of the greedy policy.
/// Trial i draws from Rng(derive(seed, i)), so results do not depend on the
/// thread count.
inline SimulationResult simulate(const PomdpModel& model, const VectorSet& value_function, const Belief& x0,
                                 std::size_t trials, std::size_t horizon, std::uint64_t seed, unsigned threads = 1) {
    model.check_belief(x0);
    if (trials == 0) throw UsageError("simulate needs at least one trial");
    if (model.discount() >= 1.0 && horizon == 0) throw UsageError("an undiscounted simulation needs a finite horizon");
    SimulationResult result;
    result.returns.assign(trials, 0.0);
    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng(Rng::derive(seed, i));
            result.returns[i] = simulate_trial(model, value_function, x0, horizon, rng);
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(trials)));
    if (threads == 1) {
        run_range(0, trials);
    } else {
        std::vector<std::future<void>> jobs;
        const std::size_t chunk = (trials + threads - 1) / threads;
        for (std::size_t b = 0; b < trials; b += chunk)
            jobs.push_back(std::async(std::launch::async, run_range, b, std::min(trials, b + chunk)));
        for (auto& j : jobs) j.get();
    }
    double sum = 0.0;
    for (double r : result.returns) sum += r;
    result.mean = sum / static_cast<double>(trials);
    if (trials > 1) {
        double sq = 0.0;
        for (double r : result.returns) sq += (r - result.mean) * (r - result.mean);
        result.standard_error = std::sqrt(sq / static_cast<double>(trials - 1) / static_cast<double>(trials));
    }
    return result;
}

inline SimulationResult simulate(const PomdpModel& model, const Solution& solution, const Belief& x0, std::size_t trials,
                                 std::size_t horizon, std::uint64_t seed, unsigned threads = 1) {
    return simulate(model, solution.value_function, x0, trials, horizon, seed, threads);
}

}  // namespace incprune
