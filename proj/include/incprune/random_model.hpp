#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "model.hpp"
#include "rng.hpp"

namespace incprune {

struct RandomModelShape {
    std::size_t states = 2;
    std::size_t actions = 2;
    std::size_t observations = 2;
    double discount = 0.9;
    double reward_low = -1.0;
    double reward_high = 1.0;
};

/// Dense random POMDP: every T and O row is a normalized vector of strictly
/// positive uniform draws, rewards are uniform on [reward_low, reward_high).
inline PomdpModel random_model(const RandomModelShape& shape, std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t ns = shape.states, na = shape.actions, nz = shape.observations;
    auto stochastic_rows = [&](std::size_t rows, std::size_t width) {
        std::vector<double> table(rows * width);
        for (std::size_t r = 0; r < rows; ++r) {
            double total = 0.0;
            for (std::size_t c = 0; c < width; ++c) {
                table[r * width + c] = 0.05 + rng.uniform();
                total += table[r * width + c];
            }
            for (std::size_t c = 0; c < width; ++c) table[r * width + c] /= total;
        }
        return table;
    };
    std::vector<double> transition = stochastic_rows(na * ns, ns);
    std::vector<double> observation = stochastic_rows(na * ns, nz);
    std::vector<double> reward(na * ns);
    for (auto& r : reward) r = rng.uniform(shape.reward_low, shape.reward_high);

    auto names = [](const char* prefix, std::size_t n) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
        return out;
    };
    return PomdpModel(names("s", ns), names("a", na), names("z", nz), std::move(transition), std::move(observation),
                      std::move(reward), shape.discount);
}

/// Shape drawn uniformly from the given inclusive ranges, then the model.
inline PomdpModel random_model_in_ranges(std::size_t states_lo, std::size_t states_hi, std::size_t actions_lo,
                                         std::size_t actions_hi, std::size_t obs_lo, std::size_t obs_hi,
                                         double discount, std::uint64_t seed) {
    Rng rng(Rng::derive(seed, 0xfeed));
    RandomModelShape shape;
    shape.states = states_lo + rng.index(states_hi - states_lo + 1);
    shape.actions = actions_lo + rng.index(actions_hi - actions_lo + 1);
    shape.observations = obs_lo + rng.index(obs_hi - obs_lo + 1);
    shape.discount = discount;
    return random_model(shape, seed);
}

}  // namespace incprune
