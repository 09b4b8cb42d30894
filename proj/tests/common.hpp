#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "incprune/incprune.hpp"

namespace testing_util {

using namespace incprune;

inline std::string problem_path(const std::string& name) { return std::string(INCPRUNE_PROBLEMS_DIR) + "/" + name; }

inline PomdpModel tiny() {
    std::ifstream in(problem_path("tiny.pomdp"));
    return parse_pomdp(in);
}

inline PomdpModel parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse_pomdp(in);
}

/// The suite used across tests: |S| 2..4, |A| 2..3, |Z| 2..4, gamma 0.9.
inline PomdpModel random_small(std::uint64_t seed) { return random_model_in_ranges(2, 4, 2, 3, 2, 4, 0.9, seed); }

/// Every point of the simplex with coordinates in multiples of 1/r.
inline std::vector<std::vector<double>> simplex_grid(std::size_t ns, std::size_t r) {
    std::vector<std::vector<double>> out;
    std::vector<std::size_t> counts(ns, 0);
    auto rec = [&](auto&& self, std::size_t s, std::size_t left) -> void {
        if (s + 1 == ns) {
            counts[s] = left;
            std::vector<double> x(ns);
            for (std::size_t i = 0; i < ns; ++i) x[i] = static_cast<double>(counts[i]) / static_cast<double>(r);
            out.push_back(std::move(x));
            return;
        }
        for (std::size_t c = 0; c <= left; ++c) {
            counts[s] = c;
            self(self, s + 1, left - c);
        }
    };
    rec(rec, 0, r);
    return out;
}

/// About 10,001 grid points for |S| <= 3, else 5,000 random beliefs.
inline std::vector<std::vector<double>> dense_beliefs(std::size_t ns, std::uint64_t seed = 7) {
    if (ns == 1) return {{1.0}};
    if (ns == 2) return simplex_grid(2, 10000);
    if (ns == 3) return simplex_grid(3, 140);
    Rng rng(seed);
    std::vector<std::vector<double>> out;
    for (int i = 0; i < 5000; ++i) out.push_back(rng.simplex_point(ns));
    return out;
}

inline double best_value(const VectorSet& set, const std::vector<double>& x) {
    double best = -INFINITY;
    for (const auto& v : set) best = std::max(best, dot(x, v.coeffs));
    return best;
}

inline VectorSet random_set(Rng& rng, std::size_t n, std::size_t ns, double lo = 0.0, double hi = 1.0) {
    std::vector<Coeffs> rows;
    for (std::size_t i = 0; i < n; ++i) {
        Coeffs c(ns);
        for (auto& v : c) v = rng.uniform(lo, hi);
        rows.push_back(std::move(c));
    }
    return VectorSet::from_coeffs(rows);
}

}  // namespace testing_util
