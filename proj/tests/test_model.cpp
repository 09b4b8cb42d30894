#include <gtest/gtest.h>

#include "common.hpp"

using namespace incprune;
using testing_util::random_small;
using testing_util::tiny;

namespace {

// Two states, a0 stays and a1 swaps, observations reveal the new state.
PomdpModel deterministic_model() {
    return PomdpModel({"s0", "s1"}, {"stay", "swap"}, {"z0", "z1"}, {1, 0, 0, 1, 0, 1, 1, 0}, {1, 0, 0, 1, 1, 0, 0, 1},
                      {0, 0, 0, 0}, 0.9);
}

}  // namespace

TEST(Belief, RejectsBadEntries) {
    EXPECT_THROW(Belief({0.7, 0.7}), UsageError);
    EXPECT_THROW(Belief({-0.1, 1.1}), UsageError);
    EXPECT_THROW(Belief(std::vector<double>{}), UsageError);
    EXPECT_NO_THROW(Belief({0.25, 0.75}));
    EXPECT_NO_THROW(Belief({0.5, 0.5 + 1e-7}, 1e-6));
}

TEST(Belief, CornerAndUniform) {
    EXPECT_EQ(Belief::corner(3, 1).probs(), (std::vector<double>{0, 1, 0}));
    EXPECT_EQ(Belief::uniform(4).probs(), (std::vector<double>(4, 0.25)));
}

TEST(ObservationProb, TinyHalf) {
    const auto m = tiny();
    EXPECT_NEAR(observation_prob(m, Belief({0.5, 0.5}), 0, 0), 0.5, 1e-15);
}

TEST(ObservationProb, DeterministicPointMass) {
    const auto m = deterministic_model();
    EXPECT_DOUBLE_EQ(observation_prob(m, Belief::corner(2, 0), 0, 0), 1.0);
}

TEST(ObservationProb, SumsToOneOverObservations) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto m = random_small(seed);
        Rng rng(seed + 1000);
        for (int k = 0; k < 10; ++k) {
            const Belief x(rng.simplex_point(m.num_states()));
            for (std::size_t a = 0; a < m.num_actions(); ++a) {
                double total = 0.0;
                for (std::size_t z = 0; z < m.num_observations(); ++z) total += observation_prob(m, x, a, z);
                EXPECT_NEAR(total, 1.0, 1e-9);
            }
        }
    }
}

TEST(BeliefUpdate, TinyAccuracy) {
    const auto m = tiny();
    const Belief y = belief_update(m, Belief({0.5, 0.5}), 0, 0);
    EXPECT_NEAR(y[0], 0.8, 1e-15);
    EXPECT_NEAR(y[1], 0.2, 1e-15);
}

TEST(BeliefUpdate, DeterministicSwap) {
    const auto m = deterministic_model();
    EXPECT_EQ(belief_update(m, Belief::corner(2, 0), 1, 1).probs(), (std::vector<double>{0, 1}));
}

TEST(BeliefUpdate, UninformativeModelLeavesUniform) {
    const PomdpModel m({"s0", "s1", "s2"}, {"a"}, {"z0", "z1"}, std::vector<double>(9, 1.0 / 3.0),
                       std::vector<double>(6, 0.5), {0, 0, 0}, 0.5);
    const Belief y = belief_update(m, Belief::uniform(3), 0, 1);
    for (double p : y.probs()) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
}

TEST(BeliefUpdate, ImpossibleObservationThrows) {
    const auto m = deterministic_model();
    EXPECT_THROW(belief_update(m, Belief::corner(2, 0), 0, 1), ZeroProbabilityObservation);
}

TEST(BeliefUpdate, AlwaysAValidBelief) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto m = random_small(seed);
        Rng rng(seed + 77);
        for (int k = 0; k < 20; ++k) {
            const Belief x(rng.simplex_point(m.num_states()));
            const std::size_t a = rng.index(m.num_actions()), z = rng.index(m.num_observations());
            const Belief y = belief_update(m, x, a, z);
            double total = 0.0;
            for (double p : y.probs()) {
                EXPECT_GE(p, 0.0);
                total += p;
            }
            EXPECT_NEAR(total, 1.0, 1e-12);
        }
    }
}

TEST(PomdpModel, ValidationNamesTheRow) {
    std::vector<double> t{1, 0, 0, 0.9, 0, 1, 1, 0};
    try {
        PomdpModel({"s0", "s1"}, {"a0", "a1"}, {"z"}, t, std::vector<double>(4, 1.0), {0, 0, 0, 0}, 0.9);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("action a0"), std::string::npos) << msg;
        EXPECT_NE(msg.find("state s1"), std::string::npos) << msg;
    }
}

TEST(PomdpModel, RejectsBadDiscountAndProbabilities) {
    auto make = [](std::vector<double> t, double gamma) {
        return PomdpModel({"s"}, {"a"}, {"z"}, std::move(t), {1.0}, {0.0}, gamma);
    };
    EXPECT_THROW(make({1.0}, 1.5), ValidationError);
    EXPECT_THROW(make({-1.0}, 0.5), ValidationError);
    EXPECT_NO_THROW(make({1.0}, 1.0));
}

TEST(PomdpModel, IndexChecks) {
    const auto m = tiny();
    EXPECT_THROW(m.check_action(2), UsageError);
    EXPECT_THROW(m.check_observation(5), UsageError);
    EXPECT_THROW(observation_prob(m, Belief::uniform(3), 0, 0), UsageError);
}
