#pragma once

// Exact rational linear programming kernel. Dense two-phase primal simplex
// with Bland's rule, producing verifiable certificates:
//   Optimal    -> primal solution + dual prices (strong duality exact)
//   Infeasible -> Farkas multipliers (row_duals / upper_duals)
//   Unbounded  -> feasible point + improving ray
// plus a brute-force vertex enumerator used as an independent oracle.
//
// Dual sign convention on row_duals, for the rows as written (a.x REL b):
//   Minimize: Le -> y <= 0, Ge -> y >= 0, Eq free.
//   Maximize: signs flipped.
// Farkas certificates always use the Minimize convention. verify() checks
// every certificate by direct substitution.

#include "robustftap/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <vector>

namespace rftap {

enum class Sense { Minimize, Maximize };
enum class Rel { Le, Eq, Ge };
enum class LpStatus { Optimal, Infeasible, Unbounded };

class LpOverflowError : public ModelError {
public:
    explicit LpOverflowError(const std::string& what) : ModelError(what) {}
};

template <class S>
struct LpRow {
    std::vector<S> coeffs;
    Rel rel = Rel::Le;
    S rhs{};
};

template <class S>
struct LinearProgram {
    Sense sense = Sense::Minimize;
    std::vector<S> objective;
    std::vector<LpRow<S>> rows;
    // Empty bound vectors mean all variables free.
    std::vector<std::optional<S>> lower;
    std::vector<std::optional<S>> upper;

    explicit LinearProgram(size_t n = 0) : objective(n, S(0)) {}

    size_t num_vars() const { return objective.size(); }

    void add_row(std::vector<S> coeffs, Rel rel, S rhs) {
        if (coeffs.size() != num_vars()) throw ModelError("lp row arity mismatch");
        rows.push_back(LpRow<S>{std::move(coeffs), rel, std::move(rhs)});
    }

    void set_nonnegative() {
        lower.assign(num_vars(), std::optional<S>(S(0)));
        upper.assign(num_vars(), std::nullopt);
    }

    std::optional<S> lower_of(size_t j) const {
        return lower.empty() ? std::nullopt : lower[j];
    }
    std::optional<S> upper_of(size_t j) const {
        return upper.empty() ? std::nullopt : upper[j];
    }
};

template <class S>
struct LpOutcome {
    LpStatus status = LpStatus::Infeasible;
    S value{};
    std::vector<S> primal;       // Optimal: solution. Unbounded: feasible point.
    std::vector<S> primal_ray;   // Unbounded only: improving direction.
    std::vector<S> row_duals;    // Optimal: dual prices. Infeasible: Farkas.
    std::vector<S> upper_duals;  // Infeasible: multipliers on x_j <= ub_j.
};

struct LpOptions {
    // Abort when any tableau numerator/denominator exceeds this many bits.
    unsigned max_bits = 1u << 16;
    // Comparison tolerance; only meaningful for floating scalars.
    double eps = 1e-9;
};

namespace detail {

template <class S>
struct ScalarOps {
    double eps;
    int sign(const S& v) const {
        if (v > S(0)) return 1;
        if (v < S(0)) return -1;
        return 0;
    }
};

template <>
struct ScalarOps<double> {
    double eps;
    int sign(const double& v) const {
        if (v > eps) return 1;
        if (v < -eps) return -1;
        return 0;
    }
};

inline unsigned rational_bits(const Rational& r) {
    const BigInt n = boost::multiprecision::numerator(r);
    const BigInt d = boost::multiprecision::denominator(r);
    unsigned bn = n == 0 ? 0 : static_cast<unsigned>(boost::multiprecision::msb(n < 0 ? BigInt(-n) : n)) + 1;
    unsigned bd = static_cast<unsigned>(boost::multiprecision::msb(d)) + 1;
    return std::max(bn, bd);
}

template <class S>
inline unsigned scalar_bits(const S&) { return 0; }
template <>
inline unsigned scalar_bits<Rational>(const Rational& r) { return rational_bits(r); }

// Standard form: min c.z + c0, A z = b, z >= 0, b >= 0.
template <class S>
struct StdForm {
    enum class VarKind { Shift, Negate, SplitPos, SplitNeg };
    struct VarInfo {
        VarKind kind;
        size_t orig;  // original variable index
        S shift{};    // lb (Shift) or ub (Negate)
    };
    struct RowInfo {
        bool from_upper_bound = false;
        size_t source = 0;  // original row index, or variable index for ub rows
        int flip = 1;       // -1 when a Ge row was negated to Le
        int bneg = 1;       // -1 when the equality row was negated for b >= 0
        bool had_slack = false;
        size_t slack_col = 0;
    };

    size_t n = 0;  // structural + slack columns
    size_t m = 0;
    std::vector<std::vector<S>> A;  // m x n
    std::vector<S> b;               // m
    std::vector<S> c;               // n
    S c0{};
    std::vector<VarInfo> vars;      // structural column -> origin
    std::vector<RowInfo> rows;
    size_t n_struct = 0;
};

template <class S>
StdForm<S> build_std_form(const LinearProgram<S>& lp) {
    const size_t n0 = lp.num_vars();
    if (n0 == 0) throw ModelError("empty linear program");

    StdForm<S> sf;
    // obj sign folded by caller; here lp.sense is assumed Minimize
    std::vector<std::vector<std::pair<size_t, S>>> expansion(n0);  // x_j = shift + sum coef*z
    std::vector<S> shift(n0, S(0));
    std::vector<size_t> ub_row_vars;

    for (size_t j = 0; j < n0; ++j) {
        const auto lb = lp.lower_of(j);
        const auto ub = lp.upper_of(j);
        if (lb && ub && *ub < *lb) {
            // Empty box: certified below by the generated ub row.
        }
        if (lb) {
            const size_t col = sf.vars.size();
            sf.vars.push_back({StdForm<S>::VarKind::Shift, j, *lb});
            expansion[j].push_back({col, S(1)});
            shift[j] = *lb;
            if (ub) ub_row_vars.push_back(j);
        } else if (ub) {
            const size_t col = sf.vars.size();
            sf.vars.push_back({StdForm<S>::VarKind::Negate, j, *ub});
            expansion[j].push_back({col, S(-1)});
            shift[j] = *ub;
        } else {
            const size_t cp = sf.vars.size();
            sf.vars.push_back({StdForm<S>::VarKind::SplitPos, j, S(0)});
            sf.vars.push_back({StdForm<S>::VarKind::SplitNeg, j, S(0)});
            expansion[j].push_back({cp, S(1)});
            expansion[j].push_back({cp + 1, S(-1)});
        }
    }
    sf.n_struct = sf.vars.size();

    // Objective in z.
    sf.c.assign(sf.n_struct, S(0));
    sf.c0 = S(0);
    for (size_t j = 0; j < n0; ++j) {
        sf.c0 += lp.objective[j] * shift[j];
        for (const auto& [col, coef] : expansion[j]) sf.c[col] += lp.objective[j] * coef;
    }

    // Rows.
    auto emit_row = [&](const std::vector<S>& a, Rel rel, const S& rhs,
                        typename StdForm<S>::RowInfo info) {
        std::vector<S> z(sf.n_struct, S(0));
        S b = rhs;
        for (size_t j = 0; j < n0; ++j) {
            if (a[j] == S(0)) continue;
            b -= a[j] * shift[j];
            for (const auto& [col, coef] : expansion[j]) z[col] += a[j] * coef;
        }
        if (rel == Rel::Ge) {
            for (auto& v : z) v = -v;
            b = -b;
            info.flip = -1;
            rel = Rel::Le;
        }
        info.had_slack = (rel == Rel::Le);
        sf.A.push_back(std::move(z));
        sf.b.push_back(std::move(b));
        sf.rows.push_back(info);
    };

    for (size_t r = 0; r < lp.rows.size(); ++r) {
        typename StdForm<S>::RowInfo info;
        info.source = r;
        emit_row(lp.rows[r].coeffs, lp.rows[r].rel, lp.rows[r].rhs, info);
    }
    for (size_t j : ub_row_vars) {
        // z_col <= ub - lb, stated in original coordinates as x_j <= ub_j.
        std::vector<S> a(n0, S(0));
        a[j] = S(1);
        typename StdForm<S>::RowInfo info;
        info.from_upper_bound = true;
        info.source = j;
        emit_row(a, Rel::Le, *lp.upper_of(j), info);
    }

    sf.m = sf.A.size();
    // Slack columns.
    for (size_t i = 0; i < sf.m; ++i) {
        if (!sf.rows[i].had_slack) continue;
        sf.rows[i].slack_col = sf.c.size();
        for (size_t k = 0; k < sf.m; ++k) sf.A[k].push_back(k == i ? S(1) : S(0));
        sf.c.push_back(S(0));
    }
    // Normalize b >= 0.
    for (size_t i = 0; i < sf.m; ++i) {
        if (sf.b[i] < S(0)) {
            for (auto& v : sf.A[i]) v = -v;
            sf.b[i] = -sf.b[i];
            sf.rows[i].bneg = -1;
        }
    }
    sf.n = sf.c.size();
    return sf;
}

// Dense simplex over the standard form. Columns [0, n) are structural+slack,
// [n, n+m) are artificials.
template <class S>
class Simplex {
public:
    Simplex(const StdForm<S>& sf, LpOptions opts)
        : sf_(sf), opts_(opts), ops_{opts.eps}, m_(sf.m), n_(sf.n) {
        tab_.assign(m_, std::vector<S>(n_ + m_ + 1, S(0)));
        basis_.resize(m_);
        // Slack basis wherever a +1 slack survived the b >= 0 flip; an
        // artificial only for the remaining rows.
        std::vector<char> art_row(m_, 0);
        for (size_t i = 0; i < m_; ++i) {
            for (size_t j = 0; j < n_; ++j) tab_[i][j] = sf.A[i][j];
            tab_[i][n_ + i] = S(1);
            tab_[i][n_ + m_] = sf.b[i];
            if (sf.rows[i].had_slack && sf.rows[i].bneg == 1) {
                basis_[i] = sf.rows[i].slack_col;
            } else {
                basis_[i] = n_ + i;
                art_row[i] = 1;
            }
        }
        // Phase-1 reduced costs: cost 1 on artificials, 0 elsewhere.
        r1_.assign(n_ + m_, S(0));
        obj1_ = S(0);
        for (size_t j = 0; j < n_ + m_; ++j) {
            S s = j >= n_ ? S(1) : S(0);
            for (size_t i = 0; i < m_; ++i)
                if (art_row[i]) s -= tab_[i][j];
            r1_[j] = std::move(s);
        }
        for (size_t i = 0; i < m_; ++i)
            if (art_row[i]) obj1_ -= tab_[i][n_ + m_];
        // Phase-2 reduced costs, kept in sync from the start.
        r2_.assign(n_ + m_, S(0));
        for (size_t j = 0; j < n_; ++j) r2_[j] = sf.c[j];
        obj2_ = S(0);
    }

    // Runs phase 1. Returns true when a feasible basis was found.
    bool phase1() {
        run(r1_, obj1_, /*allow_artificial=*/true, nullptr);
        return ops_.sign(obj1_) == 0;
    }

    // Phase-1 duals (Farkas ray when infeasible): y_i = 1 - redcost(art_i).
    std::vector<S> phase1_duals() const {
        std::vector<S> y(m_);
        for (size_t i = 0; i < m_; ++i) y[i] = S(1) - r1_[n_ + i];
        return y;
    }

    // Runs phase 2. Returns entering column when unbounded, nullopt otherwise.
    std::optional<size_t> phase2() {
        drive_out_artificials();
        std::optional<size_t> unbounded_col;
        run(r2_, obj2_, /*allow_artificial=*/false, &unbounded_col);
        return unbounded_col;
    }

    std::vector<S> phase2_duals() const {
        std::vector<S> y(m_);
        for (size_t i = 0; i < m_; ++i) y[i] = -r2_[n_ + i];
        return y;
    }

    S objective2() const { return -obj2_; }

    std::vector<S> solution() const {
        std::vector<S> z(n_, S(0));
        for (size_t i = 0; i < m_; ++i)
            if (basis_[i] < n_) z[basis_[i]] = tab_[i][n_ + m_];
        return z;
    }

    // Improving ray for entering column e (no positive pivot entries).
    std::vector<S> ray(size_t e) const {
        std::vector<S> r(n_, S(0));
        r[e] = S(1);
        for (size_t i = 0; i < m_; ++i)
            if (basis_[i] < n_) r[basis_[i]] = -tab_[i][e];
        return r;
    }

private:
    void pivot(size_t row, size_t col) {
        const S piv = tab_[row][col];
        for (auto& v : tab_[row]) v /= piv;
        for (size_t i = 0; i < m_; ++i) {
            if (i == row) continue;
            const S f = tab_[i][col];
            if (ops_.sign(f) == 0) continue;
            for (size_t j = 0; j <= n_ + m_; ++j) tab_[i][j] -= f * tab_[row][j];
        }
        apply_cost_row(r1_, obj1_, row, col);
        apply_cost_row(r2_, obj2_, row, col);
        basis_[row] = col;
        if (++pivots_ % 8 == 0) check_growth();
    }

    void apply_cost_row(std::vector<S>& r, S& obj, size_t row, size_t col) {
        const S f = r[col];
        if (ops_.sign(f) == 0) return;
        for (size_t j = 0; j < n_ + m_; ++j) r[j] -= f * tab_[row][j];
        obj -= f * tab_[row][n_ + m_];
    }

    void run(std::vector<S>& r, S& obj, bool allow_artificial,
             std::optional<size_t>* unbounded_col) {
        (void)obj;
        for (;;) {
            // Bland: lowest-index column with negative reduced cost.
            const size_t limit = allow_artificial ? n_ + m_ : n_;
            size_t enter = limit;
            for (size_t j = 0; j < limit; ++j) {
                if (ops_.sign(r[j]) < 0) { enter = j; break; }
            }
            if (enter == limit) return;
            // Ratio test; ties broken by lowest basic-variable index (Bland).
            size_t leave = m_;
            for (size_t i = 0; i < m_; ++i) {
                if (ops_.sign(tab_[i][enter]) <= 0) continue;
                if (leave == m_) { leave = i; continue; }
                const S lhs = tab_[i][n_ + m_] * tab_[leave][enter];
                const S rhs = tab_[leave][n_ + m_] * tab_[i][enter];
                if (lhs < rhs || (lhs == rhs && basis_[i] < basis_[leave])) leave = i;
            }
            if (leave == m_) {
                if (unbounded_col) { *unbounded_col = enter; }
                return;
            }
            pivot(leave, enter);
        }
    }

    void drive_out_artificials() {
        for (size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) continue;
            size_t col = n_;
            for (size_t j = 0; j < n_; ++j)
                if (ops_.sign(tab_[i][j]) != 0) { col = j; break; }
            if (col < n_) pivot(i, col);
            // else: redundant row, artificial stays basic at level zero.
        }
    }

    void check_growth() const {
        if constexpr (std::is_same_v<S, Rational>) {
            for (const auto& row : tab_)
                for (const auto& v : row)
                    if (scalar_bits(v) > opts_.max_bits)
                        throw LpOverflowError("simplex aborted: rational magnitude guard ("
                                              + std::to_string(opts_.max_bits) + " bits) exceeded");
        }
    }

    const StdForm<S>& sf_;
    LpOptions opts_;
    ScalarOps<S> ops_;
    size_t m_, n_;
    std::vector<std::vector<S>> tab_;
    std::vector<size_t> basis_;
    std::vector<S> r1_, r2_;
    S obj1_{}, obj2_{};
    uint64_t pivots_ = 0;
};

template <class S>
std::vector<S> map_back(const StdForm<S>& sf, const std::vector<S>& z, bool is_ray) {
    size_t n0 = 0;
    for (const auto& v : sf.vars) n0 = std::max(n0, v.orig + 1);
    std::vector<S> x(n0, S(0));
    for (size_t col = 0; col < sf.n_struct; ++col) {
        const auto& v = sf.vars[col];
        switch (v.kind) {
            case StdForm<S>::VarKind::Shift:
                x[v.orig] += z[col] + (is_ray ? S(0) : v.shift);
                break;
            case StdForm<S>::VarKind::Negate:
                x[v.orig] += (is_ray ? S(0) : v.shift) - z[col];
                break;
            case StdForm<S>::VarKind::SplitPos:
                x[v.orig] += z[col];
                break;
            case StdForm<S>::VarKind::SplitNeg:
                x[v.orig] -= z[col];
                break;
        }
    }
    return x;
}

// Maps standard-form row duals back onto the rows as originally written.
template <class S>
void map_duals(const StdForm<S>& sf, const std::vector<S>& ystd, size_t n_rows, size_t n_vars,
               std::vector<S>& row_duals, std::vector<S>& upper_duals) {
    row_duals.assign(n_rows, S(0));
    upper_duals.assign(n_vars, S(0));
    for (size_t i = 0; i < sf.m; ++i) {
        const S y = ystd[i] * S(sf.rows[i].bneg) * S(sf.rows[i].flip);
        if (sf.rows[i].from_upper_bound)
            upper_duals[sf.rows[i].source] = -y;  // multiplier on (ub - x_j) >= 0
        else
            row_duals[sf.rows[i].source] = y;
    }
}

}  // namespace detail

template <class S>
LpOutcome<S> solve(const LinearProgram<S>& lp, const LpOptions& opts = {}) {
    LinearProgram<S> work = lp;
    if (lp.sense == Sense::Maximize)
        for (auto& c : work.objective) c = -c;
    work.sense = Sense::Minimize;

    const auto sf = detail::build_std_form(work);
    detail::Simplex<S> sx(sf, opts);
    LpOutcome<S> out;

    if (!sx.phase1()) {
        out.status = LpStatus::Infeasible;
        detail::map_duals(sf, sx.phase1_duals(), lp.rows.size(), lp.num_vars(),
                          out.row_duals, out.upper_duals);
        return out;
    }
    const auto unbounded = sx.phase2();
    if (unbounded) {
        out.status = LpStatus::Unbounded;
        out.primal = detail::map_back(sf, sx.solution(), false);
        out.primal_ray = detail::map_back(sf, sx.ray(*unbounded), true);
        return out;
    }
    out.status = LpStatus::Optimal;
    out.primal = detail::map_back(sf, sx.solution(), false);
    out.value = sx.objective2() + sf.c0;
    detail::map_duals(sf, sx.phase2_duals(), lp.rows.size(), lp.num_vars(),
                      out.row_duals, out.upper_duals);
    if (lp.sense == Sense::Maximize) {
        out.value = -out.value;
        for (auto& y : out.row_duals) y = -y;
        for (auto& y : out.upper_duals) y = -y;
    }
    return out;
}

// Substitution check of an outcome's certificates against the program.
template <class S>
bool verify(const LinearProgram<S>& lp, const LpOutcome<S>& out) {
    detail::ScalarOps<S> ops{1e-9};
    const size_t n = lp.num_vars();
    auto feasible = [&](const std::vector<S>& x) {
        for (const auto& row : lp.rows) {
            S lhs(0);
            for (size_t j = 0; j < n; ++j) lhs += row.coeffs[j] * x[j];
            const int s = ops.sign(lhs - row.rhs);
            if (row.rel == Rel::Le && s > 0) return false;
            if (row.rel == Rel::Ge && s < 0) return false;
            if (row.rel == Rel::Eq && s != 0) return false;
        }
        for (size_t j = 0; j < n; ++j) {
            if (lp.lower_of(j) && ops.sign(x[j] - *lp.lower_of(j)) < 0) return false;
            if (lp.upper_of(j) && ops.sign(x[j] - *lp.upper_of(j)) > 0) return false;
        }
        return true;
    };
    auto objective_of = [&](const std::vector<S>& x) {
        S v(0);
        for (size_t j = 0; j < n; ++j) v += lp.objective[j] * x[j];
        return v;
    };
    // Minimize-convention duals regardless of sense.
    auto min_duals = [&]() {
        std::vector<S> y = out.row_duals;
        if (lp.sense == Sense::Maximize && out.status == LpStatus::Optimal)
            for (auto& v : y) v = -v;
        return y;
    };

    switch (out.status) {
        case LpStatus::Optimal: {
            if (out.primal.size() != n || !feasible(out.primal)) return false;
            if (ops.sign(objective_of(out.primal) - out.value) != 0) return false;
            const auto y = min_duals();
            // Sign conditions and complementary slackness on rows.
            for (size_t r = 0; r < lp.rows.size(); ++r) {
                const auto& row = lp.rows[r];
                const int sy = ops.sign(y[r]);
                if (row.rel == Rel::Le && sy > 0) return false;
                if (row.rel == Rel::Ge && sy < 0) return false;
                if (row.rel != Rel::Eq && sy != 0) {
                    S lhs(0);
                    for (size_t j = 0; j < n; ++j) lhs += row.coeffs[j] * out.primal[j];
                    if (ops.sign(lhs - row.rhs) != 0) return false;
                }
            }
            // Stationarity: c - A^T y = alpha - u with alpha on lb, u on ub,
            // and complementary slackness on bounds; implies value equality.
            S dual_value(0);
            for (size_t r = 0; r < lp.rows.size(); ++r) dual_value += y[r] * lp.rows[r].rhs;
            std::vector<S> c = lp.objective;
            if (lp.sense == Sense::Maximize)
                for (auto& v : c) v = -v;
            for (size_t j = 0; j < n; ++j) {
                S rho = c[j];
                for (size_t r = 0; r < lp.rows.size(); ++r) rho -= y[r] * lp.rows[r].coeffs[j];
                const int s = ops.sign(rho);
                if (s > 0) {
                    if (!lp.lower_of(j)) return false;
                    if (ops.sign(out.primal[j] - *lp.lower_of(j)) != 0) return false;
                    dual_value += rho * (*lp.lower_of(j));
                } else if (s < 0) {
                    if (!lp.upper_of(j)) return false;
                    if (ops.sign(out.primal[j] - *lp.upper_of(j)) != 0) return false;
                    dual_value += rho * (*lp.upper_of(j));
                }
            }
            const S primal_min = lp.sense == Sense::Maximize ? S(-out.value) : out.value;
            return ops.sign(dual_value - primal_min) == 0;
        }
        case LpStatus::Infeasible: {
            const auto& y = out.row_duals;
            if (y.size() != lp.rows.size()) return false;
            for (size_t r = 0; r < lp.rows.size(); ++r) {
                if (lp.rows[r].rel == Rel::Le && ops.sign(y[r]) > 0) return false;
                if (lp.rows[r].rel == Rel::Ge && ops.sign(y[r]) < 0) return false;
            }
            // Aggregate sum_r y_r (a_r . x) >= sum_r y_r b_r, then cancel the
            // net coefficient w_j = sum_r y_r a_rj - u_j with bound
            // multipliers: w_j < 0 needs a finite lower bound, w_j > 0 a
            // finite upper bound. Infeasible iff the aggregated constant is
            // strictly positive.
            S constant(0);
            for (size_t r = 0; r < lp.rows.size(); ++r) constant += y[r] * lp.rows[r].rhs;
            for (size_t j = 0; j < n; ++j) {
                S v(0);
                for (size_t r = 0; r < lp.rows.size(); ++r) v += y[r] * lp.rows[r].coeffs[j];
                const S u = out.upper_duals.empty() ? S(0) : out.upper_duals[j];
                if (ops.sign(u) < 0) return false;
                if (ops.sign(u) > 0) {
                    if (!lp.upper_of(j)) return false;
                    constant -= u * (*lp.upper_of(j));
                }
                const S w = v - u;
                if (ops.sign(w) < 0) {
                    if (!lp.lower_of(j)) return false;
                    constant -= w * (*lp.lower_of(j));
                } else if (ops.sign(w) > 0) {
                    if (!lp.upper_of(j)) return false;
                    constant -= w * (*lp.upper_of(j));
                }
            }
            return ops.sign(constant) > 0;
        }
        case LpStatus::Unbounded: {
            if (!feasible(out.primal)) return false;
            const auto& r = out.primal_ray;
            if (r.size() != n) return false;
            for (const auto& row : lp.rows) {
                S d(0);
                for (size_t j = 0; j < n; ++j) d += row.coeffs[j] * r[j];
                const int s = ops.sign(d);
                if (row.rel == Rel::Le && s > 0) return false;
                if (row.rel == Rel::Ge && s < 0) return false;
                if (row.rel == Rel::Eq && s != 0) return false;
            }
            for (size_t j = 0; j < n; ++j) {
                if (lp.lower_of(j) && ops.sign(r[j]) < 0) return false;
                if (lp.upper_of(j) && ops.sign(r[j]) > 0) return false;
            }
            const int sobj = ops.sign(objective_of(r));
            return lp.sense == Sense::Minimize ? sobj < 0 : sobj > 0;
        }
    }
    return false;
}

// All vertices of the bounded polyhedron described by lp's rows and bounds
// (objective ignored). Exact, deduplicated. Refuses unbounded input and
// instances beyond oracle scale.
template <class S>
std::vector<std::vector<S>> vertex_enumerate(const LinearProgram<S>& lp,
                                             const LpOptions& opts = {}) {
    const size_t n = lp.num_vars();
    if (n == 0) throw ModelError("empty polytope description");
    if (n > 12) throw ModelError("vertex_enumerate: dimension beyond oracle scale");

    // Boundedness probe along every coordinate.
    for (size_t j = 0; j < n; ++j) {
        for (Sense sense : {Sense::Minimize, Sense::Maximize}) {
            LinearProgram<S> probe = lp;
            probe.sense = sense;
            probe.objective.assign(n, S(0));
            probe.objective[j] = S(1);
            const auto out = solve(probe, opts);
            if (out.status == LpStatus::Unbounded)
                throw ModelError("vertex_enumerate: unbounded polyhedron refused");
            if (out.status == LpStatus::Infeasible) return {};
        }
    }

    struct Plane {
        std::vector<S> a;
        S b;
        bool forced;
    };
    std::vector<Plane> planes;
    for (const auto& row : lp.rows)
        planes.push_back({row.coeffs, row.rhs, row.rel == Rel::Eq});
    for (size_t j = 0; j < n; ++j) {
        std::vector<S> e(n, S(0));
        e[j] = S(1);
        if (lp.lower_of(j)) planes.push_back({e, *lp.lower_of(j), false});
        if (lp.upper_of(j)) planes.push_back({e, *lp.upper_of(j), false});
    }

    std::vector<size_t> forced, optional_ix;
    for (size_t i = 0; i < planes.size(); ++i)
        (planes[i].forced ? forced : optional_ix).push_back(i);
    if (forced.size() > n) {
        // Over-determined equality system can still admit a single point;
        // handled by taking all n-subsets of forced+optional uniformly.
        forced.clear();
        optional_ix.clear();
        for (size_t i = 0; i < planes.size(); ++i) optional_ix.push_back(i);
    }
    const size_t need = n - forced.size();
    // Combination-count guard.
    {
        double combos = 1.0;
        for (size_t i = 0; i < need; ++i)
            combos *= static_cast<double>(optional_ix.size() - i) / static_cast<double>(i + 1);
        if (combos > 2e6) throw ModelError("vertex_enumerate: too many hyperplane combinations");
    }

    detail::ScalarOps<S> ops{opts.eps};
    std::set<std::vector<S>> seen;
    std::vector<std::vector<S>> vertices;
    std::vector<size_t> pick(need);
    std::function<void(size_t, size_t)> rec = [&](size_t start, size_t depth) {
        if (depth == need) {
            // Solve the n x n system by Gaussian elimination.
            std::vector<std::vector<S>> M(n, std::vector<S>(n + 1, S(0)));
            for (size_t i = 0; i < n; ++i) {
                const auto& p = planes[i < forced.size() ? forced[i] : pick[i - forced.size()]];
                for (size_t j = 0; j < n; ++j) M[i][j] = p.a[j];
                M[i][n] = p.b;
            }
            size_t rank = 0;
            for (size_t col = 0; col < n && rank < n; ++col) {
                size_t piv = rank;
                while (piv < n && ops.sign(M[piv][col]) == 0) ++piv;
                if (piv == n) continue;
                std::swap(M[rank], M[piv]);
                const S d = M[rank][col];
                for (auto& v : M[rank]) v /= d;
                for (size_t i = 0; i < n; ++i) {
                    if (i == rank) continue;
                    const S f = M[i][col];
                    if (ops.sign(f) == 0) continue;
                    for (size_t j = col; j <= n; ++j) M[i][j] -= f * M[rank][j];
                }
                ++rank;
            }
            if (rank != n) return;
            std::vector<S> x(n);
            for (size_t i = 0; i < n; ++i) {
                size_t col = 0;
                while (col < n && ops.sign(M[i][col]) == 0) ++col;
                if (col == n) return;
                x[col] = M[i][n];
            }
            // Feasibility.
            for (const auto& row : lp.rows) {
                S lhs(0);
                for (size_t j = 0; j < n; ++j) lhs += row.coeffs[j] * x[j];
                const int s = ops.sign(lhs - row.rhs);
                if (row.rel == Rel::Le && s > 0) return;
                if (row.rel == Rel::Ge && s < 0) return;
                if (row.rel == Rel::Eq && s != 0) return;
            }
            for (size_t j = 0; j < n; ++j) {
                if (lp.lower_of(j) && ops.sign(x[j] - *lp.lower_of(j)) < 0) return;
                if (lp.upper_of(j) && ops.sign(x[j] - *lp.upper_of(j)) > 0) return;
            }
            if (seen.insert(x).second) vertices.push_back(x);
            return;
        }
        for (size_t i = start; i < optional_ix.size(); ++i) {
            pick[depth] = optional_ix[i];
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
    return vertices;
}

}  // namespace rftap
