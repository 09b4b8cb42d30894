#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace incprune {

inline constexpr double kStochasticTolerance = 1e-9;

/// Probability distribution over states (the agent's information state).
class Belief {
public:
    Belief() = default;

    /// Checks non-negativity and unit mass within `tolerance`; stores as given.
    explicit Belief(std::vector<double> probs, double tolerance = kStochasticTolerance)
        : probs_(std::move(probs)) {
        if (probs_.empty()) throw UsageError("belief must have at least one entry");
        double total = 0.0;
        for (double p : probs_) {
            if (!(p >= 0.0) || !std::isfinite(p)) throw UsageError("belief entries must be finite and non-negative");
            total += p;
        }
        if (std::abs(total - 1.0) > tolerance) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "belief entries sum to " << total << ", expected 1";
            throw UsageError(msg.str());
        }
    }

    static Belief corner(std::size_t num_states, std::size_t s) {
        std::vector<double> p(num_states, 0.0);
        p.at(s) = 1.0;
        return Belief(std::move(p));
    }

    static Belief uniform(std::size_t num_states) {
        return Belief(std::vector<double>(num_states, 1.0 / static_cast<double>(num_states)));
    }

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t s) const { return probs_[s]; }
    const std::vector<double>& probs() const noexcept { return probs_; }
    std::span<const double> span() const noexcept { return probs_; }

    friend bool operator==(const Belief&, const Belief&) = default;

private:
    std::vector<double> probs_;
};

/// Finite POMDP with dense tables.
///
/// Layout (row-major):
///   transition  [a][s][s']  = Pr(s' | s, a)
///   observation [a][s'][z]  = Pr(z | s', a)
///   reward      [a][s]      = r^a(s)
/// Construction validates every stochasticity invariant; the object is
/// immutable afterwards.
class PomdpModel {
public:
    PomdpModel(std::vector<std::string> states, std::vector<std::string> actions,
               std::vector<std::string> observations, std::vector<double> transition,
               std::vector<double> observation, std::vector<double> reward, double discount)
        : states_(std::move(states)), actions_(std::move(actions)),
          observations_(std::move(observations)), transition_(std::move(transition)),
          observation_(std::move(observation)), reward_(std::move(reward)), discount_(discount) {
        validate();
    }

    std::size_t num_states() const noexcept { return states_.size(); }
    std::size_t num_actions() const noexcept { return actions_.size(); }
    std::size_t num_observations() const noexcept { return observations_.size(); }

    const std::vector<std::string>& state_names() const noexcept { return states_; }
    const std::vector<std::string>& action_names() const noexcept { return actions_; }
    const std::vector<std::string>& observation_names() const noexcept { return observations_; }

    double discount() const noexcept { return discount_; }

    double transition(std::size_t a, std::size_t s, std::size_t next) const {
        return transition_[(a * num_states() + s) * num_states() + next];
    }
    double observation(std::size_t a, std::size_t next, std::size_t z) const {
        return observation_[(a * num_states() + next) * num_observations() + z];
    }
    double reward(std::size_t a, std::size_t s) const { return reward_[a * num_states() + s]; }

    std::span<const double> transition_row(std::size_t a, std::size_t s) const {
        return std::span<const double>(transition_).subspan((a * num_states() + s) * num_states(), num_states());
    }
    std::span<const double> observation_row(std::size_t a, std::size_t next) const {
        return std::span<const double>(observation_)
            .subspan((a * num_states() + next) * num_observations(), num_observations());
    }
    std::span<const double> reward_row(std::size_t a) const {
        return std::span<const double>(reward_).subspan(a * num_states(), num_states());
    }

    const std::vector<double>& transition_table() const noexcept { return transition_; }
    const std::vector<double>& observation_table() const noexcept { return observation_; }
    const std::vector<double>& reward_table() const noexcept { return reward_; }

    void check_action(std::size_t a) const {
        if (a >= num_actions()) throw UsageError("action index " + std::to_string(a) + " out of range");
    }
    void check_observation(std::size_t z) const {
        if (z >= num_observations()) throw UsageError("observation index " + std::to_string(z) + " out of range");
    }
    void check_belief(const Belief& x) const {
        if (x.size() != num_states()) throw UsageError("belief dimension does not match the state count");
    }

private:
    static std::string fmt(double v) {
        std::ostringstream out;
        out.precision(17);
        out << v;
        return out.str();
    }

    static void check_probability(double p, const std::string& where) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(where + " has probability " + fmt(p) + " outside [0,1]");
    }

    void validate() const {
        const std::size_t ns = num_states(), na = num_actions(), nz = num_observations();
        if (ns == 0 || na == 0 || nz == 0) throw ValidationError("states, actions and observations must be non-empty");
        if (transition_.size() != na * ns * ns) throw ValidationError("transition table has the wrong size");
        if (observation_.size() != na * ns * nz) throw ValidationError("observation table has the wrong size");
        if (reward_.size() != na * ns) throw ValidationError("reward table has the wrong size");
        if (!(discount_ >= 0.0 && discount_ <= 1.0)) throw ValidationError("discount " + fmt(discount_) + " outside [0,1]");

        for (std::size_t a = 0; a < na; ++a) {
            for (std::size_t s = 0; s < ns; ++s) {
                const std::string where = "T row (action " + actions_[a] + ", state " + states_[s] + ")";
                double total = 0.0;
                for (double p : transition_row(a, s)) {
                    check_probability(p, where);
                    total += p;
                }
                if (std::abs(total - 1.0) > kStochasticTolerance)
                    throw ValidationError(where + " sums to " + fmt(total) + ", expected 1");
            }
            for (std::size_t next = 0; next < ns; ++next) {
                const std::string where = "O row (action " + actions_[a] + ", end state " + states_[next] + ")";
                double total = 0.0;
                for (double p : observation_row(a, next)) {
                    check_probability(p, where);
                    total += p;
                }
                if (std::abs(total - 1.0) > kStochasticTolerance)
                    throw ValidationError(where + " sums to " + fmt(total) + ", expected 1");
            }
            for (std::size_t s = 0; s < ns; ++s) {
                if (!std::isfinite(reward(a, s)))
                    throw ValidationError("reward (action " + actions_[a] + ", state " + states_[s] + ") is not finite");
            }
        }
    }

    std::vector<std::string> states_;
    std::vector<std::string> actions_;
    std::vector<std::string> observations_;
    std::vector<double> transition_;
    std::vector<double> observation_;
    std::vector<double> reward_;
    double discount_;
};

/// Pr(z | x, a) = sum_{s'} Pr(z|s',a) sum_s Pr(s'|s,a) x(s).
inline double observation_prob(const PomdpModel& model, const Belief& x, std::size_t a, std::size_t z) {
    model.check_belief(x);
    model.check_action(a);
    model.check_observation(z);
    const std::size_t ns = model.num_states();
    double total = 0.0;
    for (std::size_t next = 0; next < ns; ++next) {
        double reach = 0.0;
        for (std::size_t s = 0; s < ns; ++s) reach += model.transition(a, s, next) * x[s];
        total += model.observation(a, next, z) * reach;
    }
    return total;
}

/// Bayes update of x after taking a and observing z. The result is divided by
/// its own computed sum so that it has unit mass up to rounding.
inline Belief belief_update(const PomdpModel& model, const Belief& x, std::size_t a, std::size_t z) {
    model.check_belief(x);
    model.check_action(a);
    model.check_observation(z);
    const std::size_t ns = model.num_states();
    std::vector<double> next_probs(ns, 0.0);
    double total = 0.0;
    for (std::size_t next = 0; next < ns; ++next) {
        double reach = 0.0;
        for (std::size_t s = 0; s < ns; ++s) reach += model.transition(a, s, next) * x[s];
        next_probs[next] = model.observation(a, next, z) * reach;
        total += next_probs[next];
    }
    if (!(total > 0.0)) {
        throw ZeroProbabilityObservation("observation " + model.observation_names()[z] + " has zero probability after action " +
                                         model.action_names()[a]);
    }
    for (auto& p : next_probs) p /= total;
    return Belief(std::move(next_probs));
}

}  // namespace incprune
