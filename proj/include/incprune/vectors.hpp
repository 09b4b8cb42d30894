#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstring>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "errors.hpp"

namespace incprune {

using Coeffs = std::vector<double>;

/// One linear piece of a PWLC value function.
struct AlphaVector {
    Coeffs coeffs;
    /// Action whose DP backup produced the vector; empty for the initial set.
    std::optional<std::size_t> action;
    /// Per-observation ids of the previous-stage vectors it was built from.
    std::vector<std::size_t> parents;

    std::size_t size() const noexcept { return coeffs.size(); }
    double operator[](std::size_t s) const { return coeffs[s]; }
};

inline double dot(std::span<const double> x, std::span<const double> alpha) {
    double v = 0.0;
    for (std::size_t s = 0; s < x.size(); ++s) v += x[s] * alpha[s];
    return v;
}

/// Lexicographic comparison, index 0 first.
inline bool lex_less(std::span<const double> a, std::span<const double> b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline bool same_coeffs(std::span<const double> a, std::span<const double> b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
}

/// Hash consistent with exact componentwise equality (+0 and -0 collide).
struct CoeffsHash {
    std::size_t operator()(std::span<const double> c) const noexcept {
        std::size_t h = 1469598103934665603ULL;
        for (double v : c) {
            v += 0.0;
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof bits);
            h ^= bits + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }
};

struct CoeffsEqual {
    bool operator()(std::span<const double> a, std::span<const double> b) const noexcept { return same_coeffs(a, b); }
};

/// Finite set of alpha vectors, V(x) = max over members of x . alpha.
/// Insertion order is significant: it fixes the iteration order of FILTER.
class VectorSet {
public:
    VectorSet() = default;
    explicit VectorSet(std::vector<AlphaVector> vectors, bool minimal = false)
        : vectors_(std::move(vectors)), minimal_(minimal) {}

    static VectorSet from_coeffs(const std::vector<Coeffs>& rows) {
        std::vector<AlphaVector> v;
        v.reserve(rows.size());
        for (const auto& r : rows) v.push_back(AlphaVector{r, std::nullopt, {}});
        return VectorSet(std::move(v));
    }

    static VectorSet zero(std::size_t num_states) {
        return VectorSet({AlphaVector{Coeffs(num_states, 0.0), std::nullopt, {}}}, true);
    }

    std::size_t size() const noexcept { return vectors_.size(); }
    bool empty() const noexcept { return vectors_.empty(); }
    std::size_t dimension() const noexcept { return vectors_.empty() ? 0 : vectors_.front().size(); }

    const AlphaVector& operator[](std::size_t i) const { return vectors_[i]; }
    const std::vector<AlphaVector>& vectors() const noexcept { return vectors_; }
    auto begin() const noexcept { return vectors_.begin(); }
    auto end() const noexcept { return vectors_.end(); }

    void push_back(AlphaVector v) {
        vectors_.push_back(std::move(v));
        minimal_ = false;
    }

    bool minimal() const noexcept { return minimal_; }
    void set_minimal(bool m) noexcept { minimal_ = m; }

private:
    std::vector<AlphaVector> vectors_;
    bool minimal_ = false;
};

/// Index of the best member of `set` at x over the candidates in `indices`.
/// Dot products within 1e-9 of the maximum count as ties; ties go to the
/// lexicographically greatest coefficient sequence.
template <class IndexRange>
std::size_t lex_argmax(const VectorSet& set, std::span<const double> x, const IndexRange& indices) {
    constexpr double kTie = 1e-9;
    double best_value = -INFINITY;
    for (std::size_t i : indices) best_value = std::max(best_value, dot(x, set[i].coeffs));
    std::optional<std::size_t> best;
    for (std::size_t i : indices) {
        if (dot(x, set[i].coeffs) < best_value - kTie) continue;
        if (!best || lex_less(set[*best].coeffs, set[i].coeffs)) best = i;
    }
    if (!best) throw EmptySet("argmax over an empty set");
    return *best;
}

/// Index of the best member at x with no tie window: the largest dot
/// product wins, and only exactly equal values fall back to the
/// lexicographic order.
template <class IndexRange>
std::size_t strict_argmax(const VectorSet& set, std::span<const double> x, const IndexRange& indices) {
    std::optional<std::size_t> best;
    double best_value = -INFINITY;
    for (std::size_t i : indices) {
        const double v = dot(x, set[i].coeffs);
        if (!best || v > best_value || (v == best_value && lex_less(set[*best].coeffs, set[i].coeffs))) {
            best = i;
            best_value = v;
        }
    }
    if (!best) throw EmptySet("argmax over an empty set");
    return *best;
}

/// Canonical form: vectors sorted lexicographically by coefficients.
inline VectorSet canonical(const VectorSet& set) {
    std::vector<AlphaVector> v = set.vectors();
    std::stable_sort(v.begin(), v.end(), [](const AlphaVector& a, const AlphaVector& b) { return lex_less(a.coeffs, b.coeffs); });
    return VectorSet(std::move(v), set.minimal());
}

/// Same size and, after canonical sorting, componentwise within `tolerance`.
inline bool canonically_equal(const VectorSet& a, const VectorSet& b, double tolerance = 1e-6) {
    if (a.size() != b.size()) return false;
    auto close = [tolerance](const AlphaVector& u, const AlphaVector& v) {
        if (u.size() != v.size()) return false;
        for (std::size_t s = 0; s < u.size(); ++s)
            if (std::abs(u[s] - v[s]) > tolerance) return false;
        return true;
    };
    const VectorSet ca = canonical(a), cb = canonical(b);
    bool sorted_match = true;
    for (std::size_t i = 0; i < ca.size() && sorted_match; ++i) sorted_match = close(ca[i], cb[i]);
    if (sorted_match) return true;

    // Near-equal leading components can sort differently; fall back to a
    // perfect matching between the sets (augmenting paths).
    const std::size_t n = ca.size();
    std::vector<std::vector<std::size_t>> near(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (close(ca[i], cb[j])) near[i].push_back(j);
    std::vector<std::size_t> owner(n, n);
    std::vector<bool> seen;
    auto augment = [&](auto&& self, std::size_t i) -> bool {
        for (std::size_t j : near[i]) {
            if (seen[j]) continue;
            seen[j] = true;
            if (owner[j] == n || self(self, owner[j])) {
                owner[j] = i;
                return true;
            }
        }
        return false;
    };
    for (std::size_t i = 0; i < n; ++i) {
        seen.assign(n, false);
        if (!augment(augment, i)) return false;
    }
    return true;
}

}  // namespace incprune
