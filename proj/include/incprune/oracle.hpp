#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace incprune {

// Brute-force t-stage optimal value by expectimax over actions and
// observations. Deliberately independent of the vector pipeline: its own
// Bayes update, no alpha vectors, no LPs. Cost grows as (|A||Z|)^t.

namespace detail {

inline double expectimax(const PomdpModel& m, const std::vector<double>& x, std::size_t t) {
    if (t == 0) return 0.0;
    const std::size_t ns = m.num_states(), nz = m.num_observations();
    double best = -INFINITY;
    std::vector<double> next(ns);
    for (std::size_t a = 0; a < m.num_actions(); ++a) {
        double value = 0.0;
        for (std::size_t s = 0; s < ns; ++s) value += m.reward(a, s) * x[s];
        for (std::size_t z = 0; z < nz; ++z) {
            double pz = 0.0;
            for (std::size_t n = 0; n < ns; ++n) {
                double reach = 0.0;
                for (std::size_t s = 0; s < ns; ++s) reach += m.transition(a, s, n) * x[s];
                next[n] = m.observation(a, n, z) * reach;
                pz += next[n];
            }
            if (pz <= 0.0) continue;
            std::vector<double> posterior(ns);
            for (std::size_t n = 0; n < ns; ++n) posterior[n] = next[n] / pz;
            value += m.discount() * pz * expectimax(m, posterior, t - 1);
        }
        best = std::max(best, value);
    }
    return best;
}

}  // namespace detail

inline double oracle_value(const PomdpModel& model, const Belief& x, std::size_t horizon) {
    model.check_belief(x);
    return detail::expectimax(model, x.probs(), horizon);
}

}  // namespace incprune
