#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "vectors.hpp"

namespace incprune {

/// Strict-positivity threshold for the margin of a dominance LP.
inline constexpr double kMarginEpsilon = 1e-9;
/// Threshold for the FILTER passes inside a DP update. They keep anything
/// with a margin above it, and the finished S' is then cut at kMarginEpsilon
/// in one canonical pass, so every variant makes the same near-threshold
/// calls.
inline constexpr double kFilterEpsilon = 1e-12;
/// Margin reported when a vector is compared against nothing.
inline constexpr double kMaxMargin = std::numeric_limits<double>::max();
inline constexpr std::size_t kPivotBudget = 10000;

enum class Relation { LessEqual, GreaterEqual, Equal };
enum class Bound { NonNegative, Free };

struct LinearConstraint {
    std::vector<double> coeffs;
    Relation relation = Relation::LessEqual;
    double bound = 0.0;
};

/// maximize objective . v subject to the constraints and per-variable bounds.
struct LpProblem {
    std::vector<double> objective;
    std::vector<LinearConstraint> constraints;
    std::vector<Bound> bounds;  // defaults to NonNegative when empty
    std::vector<std::string> names;

    std::size_t num_variables() const noexcept { return objective.size(); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> assignment;
    double objective = 0.0;
};

/// Running totals of dominance LPs and the constraints they posed.
struct LpTally {
    std::uint64_t lp_count = 0;
    std::uint64_t constraint_total = 0;

    LpTally& operator+=(const LpTally& o) {
        lp_count += o.lp_count;
        constraint_total += o.constraint_total;
        return *this;
    }
    friend bool operator==(const LpTally&, const LpTally&) = default;
};

namespace detail {

// Simplex for: maximize c.y  s.t.  A y <= b, y >= 0.
//
// Columns carry ids: structural 0..n-1, slacks n..n+m-1, and an auxiliary
// n+m (-1 in every row) that phase 1 uses when the origin is infeasible.
// The m x m basis is refactored from the original data every iteration, in
// long double, so round-off never accumulates across pivots. Entering
// columns follow Bland's rule on ids; the leaving row comes from a Harris
// ratio test, which prefers large pivots among near-tied rows.
class RevisedSimplex {
public:
    RevisedSimplex(std::size_t rows, std::size_t cols, std::vector<double> a, std::vector<double> b,
                   std::span<const double> c)
        : m_(rows), n_(cols), a_(std::move(a)), b_(std::move(b)), c_(c.begin(), c.end()), basic_(rows),
          in_basis_(cols + rows + 1, false) {
        for (std::size_t i = 0; i < m_; ++i) {
            basic_[i] = n_ + i;
            in_basis_[n_ + i] = true;
        }
    }

    LpStatus solve() {
        std::size_t lowest = 0;
        for (std::size_t i = 1; i < m_; ++i)
            if (b_[i] < b_[lowest]) lowest = i;
        if (m_ > 0 && b_[lowest] < -kEps) {
            swap_in(lowest, aux_id());
            if (!run(true)) return LpStatus::Infeasible;  // cannot happen: -aux is bounded above by 0
            for (std::size_t i = 0; i < m_; ++i) {
                if (basic_[i] != aux_id()) continue;
                if (xb_[i] > kFeasTol) return LpStatus::Infeasible;
                // A degenerate auxiliary left in the basis is swapped for the
                // smallest usable column; if none exists its row is redundant
                // and phase 2 keeps it pinned at zero.
                for (std::size_t id = 0; id < aux_id(); ++id) {
                    if (in_basis_[id]) continue;
                    if (std::abs(static_cast<double>(ftran(id)[i])) > kPivotTol) {
                        swap_in(i, id);
                        break;
                    }
                }
            }
        }
        return run(false) ? LpStatus::Optimal : LpStatus::Unbounded;
    }

    /// Values of the structural variables at the final basis.
    std::vector<double> primal() const {
        std::vector<double> y(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basic_[i] < n_) y[basic_[i]] = static_cast<double>(xb_[i]);
        return y;
    }

    /// Simplex multipliers of the rows at the final basis.
    std::vector<double> duals() const {
        std::vector<double> out(m_);
        for (std::size_t i = 0; i < m_; ++i) out[i] = static_cast<double>(y_[i]);
        return out;
    }

    double objective() const {
        const std::vector<double> y = primal();
        double z = 0.0;
        for (std::size_t j = 0; j < n_; ++j) z += c_[j] * y[j];
        return z;
    }

private:
    using Real = long double;

    static constexpr double kEps = 1e-11;
    static constexpr double kCostTol = 1e-12;
    static constexpr double kFeasTol = 1e-11;
    static constexpr double kPivotTol = 1e-11;

    std::size_t aux_id() const { return n_ + m_; }

    double entry(std::size_t row, std::size_t id) const {
        if (id < n_) return a_[row * n_ + id];
        if (id == aux_id()) return -1.0;
        return id - n_ == row ? 1.0 : 0.0;
    }

    double cost(std::size_t id, bool phase_one) const {
        if (phase_one) return id == aux_id() ? -1.0 : 0.0;
        return id < n_ ? c_[id] : 0.0;
    }

    void swap_in(std::size_t pos, std::size_t id) {
        if (++pivots_ > kPivotBudget) throw NumericalFailure("simplex exceeded its pivot budget");
        in_basis_[basic_[pos]] = false;
        in_basis_[id] = true;
        basic_[pos] = id;
    }

    // LU factors of the basis with row pivoting, packed in lu_.
    void factor() {
        lu_.assign(m_ * m_, 0.0L);
        perm_.resize(m_);
        for (std::size_t r = 0; r < m_; ++r) {
            perm_[r] = r;
            for (std::size_t i = 0; i < m_; ++i) lu_[r * m_ + i] = entry(r, basic_[i]);
        }
        for (std::size_t col = 0; col < m_; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r < m_; ++r)
                if (std::abs(lu_[r * m_ + col]) > std::abs(lu_[piv * m_ + col])) piv = r;
            if (std::abs(lu_[piv * m_ + col]) < 1e-14L) throw NumericalFailure("simplex basis became singular");
            if (piv != col) {
                for (std::size_t j = 0; j < m_; ++j) std::swap(lu_[piv * m_ + j], lu_[col * m_ + j]);
                std::swap(perm_[piv], perm_[col]);
            }
            for (std::size_t r = col + 1; r < m_; ++r) {
                const Real f = lu_[r * m_ + col] / lu_[col * m_ + col];
                lu_[r * m_ + col] = f;
                if (f == 0.0L) continue;
                for (std::size_t j = col + 1; j < m_; ++j) lu_[r * m_ + j] -= f * lu_[col * m_ + j];
            }
        }
    }

    // B^{-1} v.
    std::vector<Real> solve_b(const std::vector<Real>& v) const {
        std::vector<Real> x(m_);
        for (std::size_t r = 0; r < m_; ++r) {
            Real s = v[perm_[r]];
            for (std::size_t j = 0; j < r; ++j) s -= lu_[r * m_ + j] * x[j];
            x[r] = s;
        }
        for (std::size_t r = m_; r-- > 0;) {
            Real s = x[r];
            for (std::size_t j = r + 1; j < m_; ++j) s -= lu_[r * m_ + j] * x[j];
            x[r] = s / lu_[r * m_ + r];
        }
        return x;
    }

    // B^{-T} v.
    std::vector<Real> solve_bt(const std::vector<Real>& v) const {
        std::vector<Real> z(m_);
        for (std::size_t r = 0; r < m_; ++r) {
            Real s = v[r];
            for (std::size_t j = 0; j < r; ++j) s -= lu_[j * m_ + r] * z[j];
            z[r] = s / lu_[r * m_ + r];
        }
        for (std::size_t r = m_; r-- > 0;) {
            Real s = z[r];
            for (std::size_t j = r + 1; j < m_; ++j) s -= lu_[j * m_ + r] * z[j];
            z[r] = s;
        }
        std::vector<Real> y(m_);
        for (std::size_t r = 0; r < m_; ++r) y[perm_[r]] = z[r];
        return y;
    }

    std::vector<Real> ftran(std::size_t id) const {
        std::vector<Real> col(m_);
        for (std::size_t r = 0; r < m_; ++r) col[r] = entry(r, id);
        return solve_b(col);
    }

    void refresh(bool phase_one) {
        factor();
        xb_ = solve_b(std::vector<Real>(b_.begin(), b_.end()));
        std::vector<Real> cb(m_);
        for (std::size_t i = 0; i < m_; ++i) cb[i] = cost(basic_[i], phase_one);
        y_ = solve_bt(cb);
    }

    double reduced_cost(std::size_t id, bool phase_one) const {
        Real d = cost(id, phase_one);
        if (id < n_) {
            for (std::size_t r = 0; r < m_; ++r) d -= y_[r] * a_[r * n_ + id];
        } else if (id == aux_id()) {
            for (std::size_t r = 0; r < m_; ++r) d += y_[r];
        } else {
            d -= y_[id - n_];
        }
        return static_cast<double>(d);
    }

    // Bland iterations; false when the objective is unbounded.
    bool run(bool phase_one) {
        for (;;) {
            refresh(phase_one);
            std::optional<std::size_t> enter;
            for (std::size_t id = 0; id <= aux_id() && !enter; ++id) {
                if (in_basis_[id] || (!phase_one && id == aux_id())) continue;
                if (reduced_cost(id, phase_one) > kCostTol) enter = id;
            }
            if (!enter) return true;
            const std::vector<Real> w = ftran(*enter);
            // Harris ratio test: the step bound lets each basic value dip
            // kFeasTol below zero; among rows within that bound the largest
            // pivot leaves (smallest basic id on exact ties). A row already
            // below zero would run the step backwards, so such rows only
            // leave when nothing else blocks, least negative step first.
            double bound = INFINITY;
            for (std::size_t i = 0; i < m_; ++i) {
                const double coef = static_cast<double>(w[i]);
                // In phase 2 a leftover degenerate auxiliary must stay at zero.
                if (!phase_one && basic_[i] == aux_id()) {
                    if (std::abs(coef) > kPivotTol) bound = 0.0;
                    continue;
                }
                if (coef > kPivotTol)
                    bound = std::min(bound, (std::max(static_cast<double>(xb_[i]), 0.0) + kFeasTol) / coef);
            }
            std::optional<std::size_t> leave, backward;
            double best = 0.0, best_step = -INFINITY;
            for (std::size_t i = 0; i < m_; ++i) {
                const bool pinned = !phase_one && basic_[i] == aux_id();
                const double size = pinned ? std::abs(static_cast<double>(w[i])) : static_cast<double>(w[i]);
                if (size <= kPivotTol) continue;
                const double value = pinned ? 0.0 : static_cast<double>(xb_[i]);
                if (std::max(value, 0.0) / size > bound) continue;
                const double step = value / size;
                if (step < -kFeasTol) {
                    if (!backward || step > best_step) {
                        backward = i;
                        best_step = step;
                    }
                    continue;
                }
                if (!leave || size > best || (size == best && basic_[i] < basic_[*leave])) {
                    leave = i;
                    best = size;
                }
            }
            if (!leave) leave = backward;
            if (!leave) return false;
            swap_in(*leave, *enter);
        }
    }

    std::size_t m_, n_;
    std::vector<double> a_;
    std::vector<double> b_;
    std::vector<double> c_;
    std::vector<std::size_t> basic_;
    std::vector<bool> in_basis_;
    std::vector<Real> lu_;
    std::vector<std::size_t> perm_;
    std::vector<Real> xb_;
    std::vector<Real> y_;
    std::size_t pivots_ = 0;
};
}  // namespace detail

/// Deterministic two-phase simplex with Bland's pivoting rule.
inline LpResult solve_lp(const LpProblem& problem) {
    const std::size_t nv = problem.num_variables();
    if (!problem.bounds.empty() && problem.bounds.size() != nv) throw UsageError("bounds must match the variable count");
    // Free variables are split into positive and negative parts.
    std::vector<std::size_t> column_of(nv);
    std::vector<bool> is_free(nv, false);
    std::size_t cols = 0;
    for (std::size_t v = 0; v < nv; ++v) {
        column_of[v] = cols;
        is_free[v] = !problem.bounds.empty() && problem.bounds[v] == Bound::Free;
        cols += is_free[v] ? 2 : 1;
    }
    std::vector<double> a, b;
    std::size_t rows = 0;
    auto add_row = [&](const LinearConstraint& c, double sign) {
        for (std::size_t v = 0; v < nv; ++v) {
            const double coef = sign * c.coeffs[v];
            a.push_back(coef);
            if (is_free[v]) a.push_back(-coef);
        }
        b.push_back(sign * c.bound);
        ++rows;
    };
    for (const auto& c : problem.constraints) {
        if (c.coeffs.size() != nv) throw UsageError("constraint width does not match the variable count");
        if (c.relation != Relation::GreaterEqual) add_row(c, 1.0);
        if (c.relation != Relation::LessEqual) add_row(c, -1.0);
    }
    std::vector<double> c(cols, 0.0);
    for (std::size_t v = 0; v < nv; ++v) {
        c[column_of[v]] = problem.objective[v];
        if (is_free[v]) c[column_of[v] + 1] = -problem.objective[v];
    }
    detail::RevisedSimplex simplex(rows, cols, std::move(a), std::move(b), c);
    LpResult result;
    result.status = simplex.solve();
    if (result.status != LpStatus::Optimal) return result;
    const std::vector<double> y = simplex.primal();
    result.assignment.resize(nv);
    for (std::size_t v = 0; v < nv; ++v)
        result.assignment[v] = is_free[v] ? y[column_of[v]] - y[column_of[v] + 1] : y[column_of[v]];
    result.objective = simplex.objective();
    return result;
}

/// A belief where a vector beats every comparison vector, and by how much.
struct DominanceWitness {
    Belief x;
    double delta = 0.0;
};

namespace detail {

inline Belief clean_belief(std::vector<double> x) {
    double total = 0.0;
    for (auto& v : x) {
        if (v < 0.0) v = 0.0;
        total += v;
    }
    if (!(total > 0.0)) throw NumericalFailure("dominance LP returned a degenerate belief");
    for (auto& v : x) v /= total;
    return Belief(std::move(x));
}

}  // namespace detail

/// Solves max delta s.t. x.alpha >= delta + x.other for every comparison
/// vector, x on the simplex, delta free. Returns the optimal (x, delta)
/// whatever its sign; `others` must already exclude alpha.
///
/// The simplex runs on the dual: minimize mu over mixtures lambda of the
/// comparison vectors with sum_k lambda_k (alpha - other_k)_s <= mu for every
/// s. It has |S| + 2 rows however many vectors are compared, and near-equal
/// comparison vectors become near-equal columns rather than near-parallel
/// rows. The belief is read off the row multipliers.
inline DominanceWitness max_margin(std::span<const double> alpha, std::span<const std::span<const double>> others) {
    const std::size_t ns = alpha.size();
    if (others.empty()) return DominanceWitness{Belief::corner(ns, 0), kMaxMargin};
    // Columns: lambda(0..K-1), mu+, mu-. Rows: one per state, then
    // sum lambda <= 1 and -sum lambda <= -1.
    const std::size_t k_count = others.size();
    const std::size_t cols = k_count + 2, rows = ns + 2;
    std::vector<double> a(rows * cols, 0.0), b(rows, 0.0);
    for (std::size_t k = 0; k < k_count; ++k) {
        if (others[k].size() != ns) throw UsageError("dominance vectors differ in dimension");
        for (std::size_t s = 0; s < ns; ++s) a[s * cols + k] = alpha[s] - others[k][s];
        a[ns * cols + k] = 1.0;
        a[(ns + 1) * cols + k] = -1.0;
    }
    for (std::size_t s = 0; s < ns; ++s) {
        a[s * cols + k_count] = -1.0;
        a[s * cols + k_count + 1] = 1.0;
    }
    b[ns] = 1.0;
    b[ns + 1] = -1.0;
    std::vector<double> c(cols, 0.0);
    c[k_count] = -1.0;
    c[k_count + 1] = 1.0;

    detail::RevisedSimplex simplex(rows, cols, std::move(a), std::move(b), c);
    const LpStatus status = simplex.solve();
    if (status != LpStatus::Optimal) throw NumericalFailure("dominance LP was not solved to optimality");
    std::vector<double> y = simplex.duals();
    y.resize(ns);
    Belief x = detail::clean_belief(std::move(y));
    // Report the margin the returned belief actually achieves, not the
    // simplex's objective, so round-off cannot fake a witness.
    double delta = kMaxMargin;
    for (auto other : others) {
        double gap = 0.0;
        for (std::size_t s = 0; s < ns; ++s) gap += x[s] * (alpha[s] - other[s]);
        delta = std::min(delta, gap);
    }
    return DominanceWitness{std::move(x), delta};
}

/// DOMINATE(alpha, A): a belief in the witness region of alpha against
/// A \ {alpha}, or nullopt when no belief gives a margin above `epsilon`.
/// Counts one LP and |A \ {alpha}| + 2 constraints into `tally`.
inline std::optional<DominanceWitness> dominate(std::span<const double> alpha,
                                                std::span<const std::span<const double>> comparison,
                                                LpTally* tally = nullptr, double epsilon = kMarginEpsilon) {
    std::vector<std::span<const double>> others;
    others.reserve(comparison.size());
    for (auto v : comparison)
        if (!same_coeffs(v, alpha)) others.push_back(v);
    if (others.empty()) return DominanceWitness{Belief::corner(alpha.size(), 0), kMaxMargin};
    if (tally) {
        tally->lp_count += 1;
        tally->constraint_total += others.size() + 2;
    }
    DominanceWitness w = max_margin(alpha, others);
    if (w.delta > epsilon) return w;
    return std::nullopt;
}

inline std::optional<DominanceWitness> dominate(const AlphaVector& alpha, const VectorSet& set, LpTally* tally = nullptr) {
    std::vector<std::span<const double>> comparison;
    comparison.reserve(set.size());
    for (const auto& v : set) {
        if (v.size() != alpha.size()) throw UsageError("dominance vectors differ in dimension");
        comparison.push_back(v.coeffs);
    }
    return dominate(alpha.coeffs, comparison, tally);
}

}  // namespace incprune
