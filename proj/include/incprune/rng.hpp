#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace incprune {

// All sampling in the library goes through Rng: a std::mt19937_64 engine
// (fully specified by the standard) with hand-written conversions, so streams
// do not depend on the standard library's distribution implementations.
//
//   uniform()        = (next() >> 11) * 2^-53, in [0, 1)
//   index(n)         = floor(uniform() * n)
//   categorical(p)   = first i with cumulative p > uniform(), last index on round-off
//   simplex_point(n) = normalized -log(1 - uniform()) draws (flat Dirichlet)
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Seed for an independent sub-stream, e.g. one Monte-Carlo trial.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next() { return engine_(); }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::size_t index(std::size_t n) {
        auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    template <class Probs>
    std::size_t categorical(const Probs& probs) {
        const double u = uniform();
        double acc = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] > 0.0) last_positive = i;
            acc += probs[i];
            if (u < acc) return i;
        }
        return last_positive;
    }

    std::vector<double> simplex_point(std::size_t n) {
        std::vector<double> p(n);
        double total = 0.0;
        for (auto& v : p) {
            v = -std::log1p(-uniform());
            total += v;
        }
        for (auto& v : p) v /= total;
        return p;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace incprune
