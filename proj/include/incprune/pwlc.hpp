#pragma once

#include <chrono>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "lp.hpp"
#include "model.hpp"
#include "parser.hpp"
#include "vectors.hpp"

namespace incprune {

/// Cooperative wall-clock limit checked inside long loops.
struct RunControl {
    std::optional<std::chrono::steady_clock::time_point> deadline;

    void check() const {
        if (deadline && std::chrono::steady_clock::now() > *deadline) throw TimeoutExpired("run exceeded its time limit");
    }
};

struct Evaluation {
    double value = 0.0;
    std::size_t index = 0;
};

/// V(x) = max over V of x . alpha, with the lexicographic tie-break of lex_argmax.
inline Evaluation evaluate(const VectorSet& set, std::span<const double> x) {
    if (set.empty()) throw EmptySet("cannot evaluate an empty vector set");
    if (set.dimension() != x.size()) throw UsageError("belief dimension does not match the vector set");
    std::vector<std::size_t> all(set.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const std::size_t best = lex_argmax(set, x, all);
    return Evaluation{dot(x, set[best].coeffs), best};
}

inline Evaluation evaluate(const VectorSet& set, const Belief& x) { return evaluate(set, x.span()); }

/// Exact componentwise duplicates removed, first occurrence kept.
inline VectorSet remove_duplicates(const VectorSet& set) {
    std::unordered_map<std::span<const double>, std::size_t, CoeffsHash, CoeffsEqual> seen;
    std::vector<AlphaVector> out;
    out.reserve(set.size());
    for (const auto& v : set) {
        if (seen.contains(std::span<const double>(v.coeffs))) continue;
        out.push_back(v);
        seen.emplace(std::span<const double>(out.back().coeffs), out.size() - 1);
    }
    return VectorSet(std::move(out), set.minimal());
}

/// Where a cross-sum vector came from: indices into the two operands.
struct Origin {
    std::size_t a = 0;
    std::size_t b = 0;
};

struct TrackedCrossSum {
    VectorSet set;
    /// Every (a, b) pair whose sum equals set[i] exactly, in enumeration order.
    std::vector<std::vector<Origin>> origins;
    /// set index of a_i + b_j, stored at i * |B| + j.
    std::vector<std::size_t> pair_index;
    std::size_t a_size = 0;
    std::size_t b_size = 0;

    std::size_t index_of(std::size_t a, std::size_t b) const { return pair_index[a * b_size + b]; }
};

/// A (+) B enumerated a-major, exact duplicates merged into their first
/// occurrence. Parents concatenate (A's first), the action tag survives when
/// both operands agree.
inline TrackedCrossSum cross_sum_tracked(const VectorSet& a, const VectorSet& b) {
    if (!a.empty() && !b.empty() && a.dimension() != b.dimension())
        throw UsageError("cross sum of sets with different dimensions");
    TrackedCrossSum out;
    out.a_size = a.size();
    out.b_size = b.size();
    out.pair_index.resize(a.size() * b.size());
    std::vector<AlphaVector> vectors;
    vectors.reserve(a.size() * b.size());
    std::unordered_map<std::span<const double>, std::size_t, CoeffsHash, CoeffsEqual> seen;
    seen.reserve(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            AlphaVector v;
            v.coeffs.resize(a[i].size());
            for (std::size_t s = 0; s < v.coeffs.size(); ++s) v.coeffs[s] = a[i][s] + b[j][s];
            if (auto it = seen.find(std::span<const double>(v.coeffs)); it != seen.end()) {
                out.origins[it->second].push_back({i, j});
                out.pair_index[i * b.size() + j] = it->second;
                continue;
            }
            if (a[i].action == b[j].action) v.action = a[i].action;
            v.parents = a[i].parents;
            v.parents.insert(v.parents.end(), b[j].parents.begin(), b[j].parents.end());
            vectors.push_back(std::move(v));
            out.origins.push_back({Origin{i, j}});
            out.pair_index[i * b.size() + j] = vectors.size() - 1;
            seen.emplace(std::span<const double>(vectors.back().coeffs), vectors.size() - 1);
        }
    }
    out.set = VectorSet(std::move(vectors));
    return out;
}

inline VectorSet cross_sum(const VectorSet& a, const VectorSet& b) { return cross_sum_tracked(a, b).set; }

/// Counters for one FILTER run.
struct FilterStats {
    std::uint64_t lp_count = 0;
    std::uint64_t constraint_total = 0;
    std::size_t corner_seeds = 0;  // m: distinct winners found at the corners e_s
    std::size_t input_size = 0;    // |F|
    std::size_t output_size = 0;   // |W|
};

struct FilterResult {
    VectorSet set;
    FilterStats stats;
    /// Indices into the input of the kept vectors, in discovery order.
    std::vector<std::size_t> kept;
    /// Beliefs returned by successful dominance checks.
    std::vector<Belief> witnesses;
};

/// Standard dominance check for FILTER: compare against the winners W.
struct WinnerSetOracle {
    double epsilon = kMarginEpsilon;

    std::optional<DominanceWitness> operator()(const VectorSet& f, std::size_t phi, std::span<const std::size_t> winners,
                                               LpTally& tally) const {
        std::vector<std::span<const double>> comparison;
        comparison.reserve(winners.size());
        for (std::size_t w : winners) comparison.push_back(f[w].coeffs);
        return dominate(f[phi].coeffs, comparison, &tally, epsilon);
    }
};

/// FILTER over a duplicate-free F with a pluggable dominance oracle.
///
/// Corner beliefs seed W with the (lexicographic) winner at each e_s over
/// the whole of F. Then each remaining phi, in insertion order, is checked
/// by `oracle(F, phi, W, tally)`; a failed check drops phi, a witness x adds
/// the winner at x among the unclassified vectors. Every check must solve
/// exactly one LP, so lp_count == |F| - m holds on return.
template <class Oracle>
FilterResult filter(const VectorSet& f, Oracle&& oracle, const RunControl& control = {}) {
    FilterResult result;
    const std::size_t n = f.size();
    result.stats.input_size = n;
    if (n == 0) return result;
    const std::size_t ns = f.dimension();

    std::vector<bool> alive(n, true);
    std::size_t remaining = n;
    std::vector<std::size_t> winners;
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;

    std::vector<double> corner(ns, 0.0);
    for (std::size_t s = 0; s < ns; ++s) {
        corner.assign(ns, 0.0);
        corner[s] = 1.0;
        const std::size_t w = lex_argmax(f, corner, all);
        if (!alive[w]) continue;
        alive[w] = false;
        --remaining;
        winners.push_back(w);
    }
    result.stats.corner_seeds = winners.size();

    LpTally tally;
    std::uint64_t checks = 0;
    std::size_t cursor = 0;
    std::vector<std::size_t> unclassified;
    while (remaining > 0) {
        control.check();
        while (!alive[cursor]) ++cursor;
        const std::size_t phi = cursor;
        ++checks;
        auto witness = oracle(f, phi, std::span<const std::size_t>(winners), tally);
        if (!witness) {
            alive[phi] = false;
            --remaining;
            continue;
        }
        unclassified.clear();
        for (std::size_t i = cursor; i < n; ++i)
            if (alive[i]) unclassified.push_back(i);
        const std::size_t w = strict_argmax(f, witness->x.span(), unclassified);
        alive[w] = false;
        --remaining;
        winners.push_back(w);
        result.witnesses.push_back(std::move(witness->x));
    }

    result.stats.lp_count = tally.lp_count;
    result.stats.constraint_total = tally.constraint_total;
    result.stats.output_size = winners.size();
    if (tally.lp_count != checks || checks != n - result.stats.corner_seeds)
        throw std::logic_error("FILTER solved " + std::to_string(tally.lp_count) + " LPs, expected |F| - m = " +
                               std::to_string(n - result.stats.corner_seeds));

    std::vector<AlphaVector> kept;
    kept.reserve(winners.size());
    for (std::size_t w : winners) kept.push_back(f[w]);
    result.set = VectorSet(std::move(kept), true);
    result.kept = std::move(winners);
    return result;
}

/// purge(F): the members of F with non-empty witness regions, via FILTER
/// algorithm with the standard D = W dominance check.
inline FilterResult purge(const VectorSet& f, const RunControl& control = {}, double epsilon = kMarginEpsilon) {
    return filter(remove_duplicates(f), WinnerSetOracle{epsilon}, control);
}

// Alpha-vector files: per vector, the action name on one line ("-" when the
// vector carries no action), its coefficients at 17 significant digits
// separated by single spaces on the next, then a blank line.

inline void write_alpha_file(std::ostream& out, const VectorSet& set, const std::vector<std::string>& action_names) {
    for (const auto& v : set) {
        out << (v.action ? action_names.at(*v.action) : std::string("-")) << '\n';
        for (std::size_t s = 0; s < v.size(); ++s) out << (s ? " " : "") << detail::format_number(v[s]);
        out << "\n\n";
    }
}

inline std::string alpha_file_text(const VectorSet& set, const std::vector<std::string>& action_names) {
    std::ostringstream out;
    write_alpha_file(out, set, action_names);
    return out.str();
}

inline VectorSet read_alpha_file(std::istream& in, const std::vector<std::string>& action_names,
                                 std::optional<std::size_t> dimension = std::nullopt) {
    std::vector<AlphaVector> vectors;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) throw ParseError(line_no, 1, "expected an action name");
        AlphaVector v;
        if (line != "-") {
            std::optional<std::size_t> a;
            for (std::size_t i = 0; i < action_names.size(); ++i)
                if (action_names[i] == line) a = i;
            if (!a) throw ParseError(line_no, 1, "unknown action '" + line + "'");
            v.action = a;
        }
        if (!std::getline(in, line)) throw ParseError(line_no + 1, 1, "missing coefficient line");
        ++line_no;
        std::istringstream values(line);
        std::string tok;
        while (values >> tok) {
            auto num = detail::to_number(tok);
            if (!num) throw ParseError(line_no, 1, "bad coefficient '" + tok + "'");
            v.coeffs.push_back(*num);
        }
        if (v.coeffs.empty()) throw ParseError(line_no, 1, "empty coefficient line");
        if (dimension && v.coeffs.size() != *dimension)
            throw ParseError(line_no, 1, "expected " + std::to_string(*dimension) + " coefficients");
        if (!vectors.empty() && v.coeffs.size() != vectors.front().coeffs.size())
            throw ParseError(line_no, 1, "coefficient count differs from earlier vectors");
        vectors.push_back(std::move(v));
        if (std::getline(in, line)) {
            ++line_no;
            if (!line.empty()) throw ParseError(line_no, 1, "expected a blank line between vectors");
        }
    }
    return VectorSet(std::move(vectors));
}

}  // namespace incprune
