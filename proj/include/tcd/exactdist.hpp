#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tcd/error.hpp"
#include "tcd/lattice.hpp"

namespace tcd {

// All laws in this header live on one integer lattice (LatticeLaw indices);
// walk values are integers k meaning k * step.

inline constexpr long kUnbounded = std::numeric_limits<long>::max() / 4;

/// Sub-probability mass function on the integers.
struct SubPmf {
    long lo = 0;
    std::vector<double> mass;

    static SubPmf point(long k) { return SubPmf{k, {1.0}}; }
    static SubPmf from_law(const LatticeLaw& h) { return SubPmf{h.lo, h.mass}; }

    bool empty() const { return mass.empty(); }
    long hi() const { return lo + static_cast<long>(mass.size()) - 1; }
    double at(long k) const {
        if (empty() || k < lo || k > hi()) return 0.0;
        return mass[static_cast<std::size_t>(k - lo)];
    }
    double total() const {
        double t = 0.0;
        for (double m : mass) t += m;
        return t;
    }
    /// Mass at values >= x.
    double at_least(long x) const {
        double t = 0.0;
        for (long k = std::max(x, lo); k <= hi(); ++k) t += mass[static_cast<std::size_t>(k - lo)];
        return t;
    }
    /// Mass at values <= x.
    double at_most(long x) const {
        double t = 0.0;
        for (long k = lo; k <= std::min(x, hi()); ++k) t += mass[static_cast<std::size_t>(k - lo)];
        return t;
    }
    SubPmf negated() const {
        SubPmf out;
        if (empty()) return out;
        out.lo = -hi();
        out.mass.assign(mass.rbegin(), mass.rend());
        return out;
    }
    /// Drops end atoms whose cumulative mass is at most `tail` (zeros always).
    void trim(double tail = 0.0) {
        std::size_t first = 0, last = mass.size();
        double cut = 0.0;
        while (first < last && cut + mass[first] <= tail) cut += mass[first++];
        cut = 0.0;
        while (last > first && cut + mass[last - 1] <= tail) cut += mass[--last];
        if (first == last) {
            mass.clear();
            return;
        }
        lo += static_cast<long>(first);
        mass = std::vector<double>(mass.begin() + static_cast<std::ptrdiff_t>(first),
                                   mass.begin() + static_cast<std::ptrdiff_t>(last));
    }
};

/// x -> mass strictly below x, for repeated queries.
class BelowCdf {
public:
    BelowCdf() = default;
    /// A degenerate "maximum over an empty set": every query gives 1.
    static BelowCdf always_one() {
        BelowCdf c;
        c.trivial_ = true;
        return c;
    }
    explicit BelowCdf(const SubPmf& p) : lo_(p.lo), prefix_(p.mass.size() + 1, 0.0) {
        for (std::size_t i = 0; i < p.mass.size(); ++i) prefix_[i + 1] = prefix_[i] + p.mass[i];
    }
    double operator()(long x) const {
        if (trivial_) return 1.0;
        if (x <= lo_) return 0.0;
        const auto idx = static_cast<std::size_t>(std::min<long>(x - lo_, static_cast<long>(prefix_.size()) - 1));
        return prefix_[idx];
    }

private:
    bool trivial_ = false;
    long lo_ = 0;
    std::vector<double> prefix_;
};

/// One walk step S' = S + Y, keeping lower < S' < upper.
inline SubPmf advance(const SubPmf& cur, const LatticeLaw& h, long lower = -kUnbounded, long upper = kUnbounded,
                      double tail = 0.0) {
    SubPmf out;
    if (cur.empty()) return out;
    const long lo = std::max(cur.lo + h.lo, lower + 1);
    const long hi = std::min(cur.hi() + h.hi(), upper - 1);
    if (lo > hi) return out;
    out.lo = lo;
    out.mass.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
    const long hn = static_cast<long>(h.mass.size());
    for (std::size_t i = 0; i < cur.mass.size(); ++i) {
        const double p = cur.mass[i];
        if (p == 0.0) continue;
        const long base = cur.lo + static_cast<long>(i) + h.lo;
        const long j0 = std::max(0L, lo - base), j1 = std::min(hn - 1, hi - base);
        double* dst = out.mass.data() + (base - lo);
        const double* src = h.mass.data();
        for (long j = j0; j <= j1; ++j) dst[j] += p * src[j];
    }
    out.trim(tail);
    return out;
}

/// Law of S_k restricted to lower < S_i < upper for i = 1..k.
inline SubPmf killed_walk(const LatticeLaw& h, std::size_t k, long lower = -kUnbounded, long upper = kUnbounded,
                          double tail = 0.0) {
    SubPmf cur = SubPmf::point(0);
    for (std::size_t i = 0; i < k && !cur.empty(); ++i) cur = advance(cur, h, lower, upper, tail);
    return cur;
}

/// Law of max(S_1, ..., S_k), k >= 1, via M_k = Y + max(0, M_{k-1}).
inline SubPmf running_max_law(const LatticeLaw& h, std::size_t k, double tail = 0.0) {
    require(k >= 1, "running maximum needs k >= 1");
    SubPmf m = SubPmf::from_law(h);
    for (std::size_t i = 1; i < k; ++i) {
        SubPmf pos;
        const long hi = std::max(0L, m.hi());
        pos.lo = 0;
        pos.mass.assign(static_cast<std::size_t>(hi + 1), 0.0);
        for (long v = m.lo; v <= m.hi(); ++v) pos.mass[static_cast<std::size_t>(std::max(0L, v))] += m.at(v);
        m = advance(pos, h, -kUnbounded, kUnbounded, tail);
    }
    return m;
}

/// R_{H,k}(x) = P(max(S_1..S_k) < x); identically 1 for k = 0.
inline BelowCdf max_below(const LatticeLaw& h, std::size_t k, double tail = 0.0) {
    if (k == 0) return BelowCdf::always_one();
    return BelowCdf(running_max_law(h, k, tail));
}

/// A_{H,k}(x, y) = P(max(S_1..S_k) < x, -S_k = y), as a pmf over y.
inline SubPmf below_and_final(const LatticeLaw& h, std::size_t k, long x, double tail = 0.0) {
    return killed_walk(h, k, -kUnbounded, x, tail).negated();
}

/// P(min(S_1..S_k) > 0, S_k = y), as a pmf over y.
inline SubPmf above_and_final(const LatticeLaw& h, std::size_t k, double tail = 0.0) {
    return killed_walk(h, k, 0, kUnbounded, tail);
}

// ---------------------------------------------------------------------------
// Excursion functions of an i.i.d. walk.

struct ExcursionTables {
    std::size_t k = 0, s = 0;
    BelowCdf r_plus;    // x -> P(max(S_1..S_k) < x)
    BelowCdf r_minus;   // x -> P(max(-S_1..-S_k) < x)
    SubPmf b_plus;      // y -> B+_{H,k,s}(y): unique argmax of S_0..S_{k+s} at k, S_k = y
    SubPmf b_minus;     // y -> B-_{H,k,s}(y): unique argmax of -S at k, -S_k = y
    SubPmf a_plus;      // y -> A_{H,k}(0, y)
    SubPmf a_minus;     // y -> A-_{H,k}(0, y) = P(max(-S_1..-S_k) < 0, S_k = y)
};

/// Exact tabulations for the walk with i.i.d. H increments. Argmax events are
/// unique-argmax events (ties contribute zero).
inline ExcursionTables excursion_tables(const LatticeLaw& h, std::size_t k, std::size_t s) {
    ExcursionTables t;
    t.k = k;
    t.s = s;
    const LatticeLaw neg = h.negated();
    t.r_plus = max_below(h, k);
    t.r_minus = max_below(neg, k);
    // By time reversal inside an i.i.d. block, "S_k beats S_0..S_{k-1}" has the
    // law of "min(S_1..S_k) > 0" with the same endpoint.
    const double after_plus = max_below(h, s)(0);
    const double after_minus = max_below(neg, s)(0);
    t.b_plus = above_and_final(h, k);
    for (double& m : t.b_plus.mass) m *= after_plus;
    t.a_plus = below_and_final(h, k, 0);
    t.b_minus = t.a_plus;
    for (double& m : t.b_minus.mass) m *= after_minus;
    t.a_minus = below_and_final(neg, k, 0);
    return t;
}

// ---------------------------------------------------------------------------
// Lemma-style recursions for Q_k(v, w, s) = P(V_k > v, S_k > s, R_k - S_k <= w)
// and Q'_k(v, w, s) = P(V_k > v, S_k = s, R_k - S_k <= w), with
// V_k = min(S_1..S_k) and R_k = max(0, S_1..S_k).

struct QGrid {
    long w_max = 0;
    long s_lo = -1;
    long s_hi = 0;
};

/// Smallest grid covering k steps of a law with support [lo, hi].
inline QGrid covering_grid(long lo, long hi, std::size_t k) {
    const long kk = static_cast<long>(k);
    return QGrid{kk * std::max(0L, -lo), kk * std::min(0L, lo) - 1, kk * std::max(0L, hi)};
}

struct QTable {
    std::size_t k = 0;
    long v = 0;
    QGrid grid;
    long reach_w = 0, reach_lo = 0, reach_hi = 0;  // reachable R - S and S
    std::vector<double> q, qp;

    std::size_t width() const { return static_cast<std::size_t>(grid.s_hi - grid.s_lo + 1); }
    std::size_t index(long w, long s) const {
        return static_cast<std::size_t>(w) * width() + static_cast<std::size_t>(s - grid.s_lo);
    }

    /// Q_k(v, w, s); outside the grid the value is extended by its exact limit.
    double Q(long w, long s) const {
        if (w < 0 || s > grid.s_hi) return 0.0;
        return q[index(std::min(w, grid.w_max), std::max(s, grid.s_lo))];
    }
    double Qp(long w, long s) const {
        if (w < 0 || s < grid.s_lo || s > grid.s_hi) return 0.0;
        return qp[index(std::min(w, grid.w_max), s)];
    }

    void check_coverage() const {
        if (grid.w_max < reach_w || grid.s_lo > reach_lo - 1 || grid.s_hi < reach_hi)
            throw Error(ErrorKind::grid_overflow, "Q grid does not cover the reachable range at k = " + std::to_string(k));
    }
};

/// k = 0: Q_0 = 1{s < 0, w >= 0}, Q'_0 = 1{s = 0, w >= 0}.
inline QTable q_identity(long v, const QGrid& grid) {
    QTable t;
    t.v = v;
    t.grid = grid;
    t.check_coverage();
    t.q.assign(static_cast<std::size_t>(grid.w_max + 1) * t.width(), 0.0);
    t.qp = t.q;
    for (long w = 0; w <= grid.w_max; ++w)
        for (long s = grid.s_lo; s <= grid.s_hi; ++s) {
            t.q[t.index(w, s)] = s < 0 ? 1.0 : 0.0;
            t.qp[t.index(w, s)] = s == 0 ? 1.0 : 0.0;
        }
    return t;
}

/// Q_1(v, w, s) = P(Y > v v s, Y >= -w) 1{w >= 0};
/// Q'_1(v, w, s) = P(Y = s) 1{s > v, w >= 0, s >= -w}.
inline QTable q_base(const LatticeLaw& f1, long v, const QGrid& grid) {
    QTable t;
    t.k = 1;
    t.v = v;
    t.grid = grid;
    t.reach_lo = f1.lo;
    t.reach_hi = f1.hi();
    t.reach_w = std::max(0L, -f1.lo);
    t.check_coverage();
    t.q.assign(static_cast<std::size_t>(grid.w_max + 1) * t.width(), 0.0);
    t.qp = t.q;
    for (long w = 0; w <= grid.w_max; ++w)
        for (long s = grid.s_lo; s <= grid.s_hi; ++s) {
            double acc = 0.0;
            for (long y = std::max(std::max(v, s) + 1, -w); y <= f1.hi(); ++y) acc += f1.at(y);
            t.q[t.index(w, s)] = acc;
            t.qp[t.index(w, s)] = (s > v && s >= -w) ? f1.at(s) : 0.0;
        }
    return t;
}

/// Q_{k+1}(v, w, s) = sum_x p(x) Q_k(v, w + x, (s v v) - x) 1{w >= 0};
/// Q'_{k+1}(v, w, s) = sum_x p(x) Q'_k(v, w + x, s - x) 1{s > v, w >= 0}.
inline QTable q_step(const QTable& prev, const LatticeLaw& next) {
    QTable t;
    t.k = prev.k + 1;
    t.v = prev.v;
    t.grid = prev.grid;
    t.reach_lo = prev.reach_lo + next.lo;
    t.reach_hi = prev.reach_hi + next.hi();
    t.reach_w = std::max(0L, prev.reach_w - next.lo);
    t.check_coverage();
    t.q.assign(prev.q.size(), 0.0);
    t.qp.assign(prev.qp.size(), 0.0);
    const long v = prev.v;
    for (long w = 0; w <= t.grid.w_max; ++w)
        for (long s = t.grid.s_lo; s <= t.grid.s_hi; ++s) {
            double acc = 0.0, accp = 0.0;
            for (long x = next.lo; x <= next.hi(); ++x) {
                const double p = next.at(x);
                if (p == 0.0) continue;
                acc += p * prev.Q(w + x, std::max(s, v) - x);
                if (s > v) accp += p * prev.Qp(w + x, s - x);
            }
            t.q[t.index(w, s)] = acc;
            t.qp[t.index(w, s)] = accp;
        }
    return t;
}

/// Q table after k i.i.d. steps of h at fixed v.
inline QTable q_table(const LatticeLaw& h, std::size_t k, long v, const QGrid& grid) {
    QTable t = q_identity(v, grid);
    for (std::size_t i = 0; i < k; ++i) t = q_step(t, h);
    return t;
}

/// P(V_k > v, S_k = s, S_k > max(0, S_1..S_{k-1})), from the Q' table at k - 1.
inline double strict_peak_at(const QTable& prev, const LatticeLaw& h, long s) {
    if (s <= prev.v) return 0.0;
    double acc = 0.0;
    for (long y = h.lo; y <= h.hi(); ++y) {
        const double p = h.at(y);
        if (p != 0.0) acc += p * prev.Qp(y - 1, s - y);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// PLE joint probabilities p_lr = P((a + l, b + r) is a PLE).

struct Block {
    const LatticeLaw* law;
    std::size_t length;
};

namespace detail {

/// P(every partial sum stays below 0) across consecutive i.i.d. blocks (at most 3).
inline double below_zero_blocks(std::vector<Block> blocks) {
    std::erase_if(blocks, [](const Block& b) { return b.length == 0; });
    if (blocks.empty()) return 1.0;
    if (blocks.size() == 1) return max_below(*blocks[0].law, blocks[0].length)(0);
    if (blocks.size() == 2) {
        const SubPmf a = below_and_final(*blocks[0].law, blocks[0].length, 0);
        const BelowCdf r = max_below(*blocks[1].law, blocks[1].length);
        double acc = 0.0;
        for (long y = a.lo; y <= a.hi(); ++y) acc += a.at(y) * r(y);
        return acc;
    }
    require(blocks.size() == 3, "at most three blocks");
    const SubPmf a = below_and_final(*blocks[0].law, blocks[0].length, 0);
    const BelowCdf r = max_below(*blocks[2].law, blocks[2].length);
    double acc = 0.0;
    for (long x = a.lo; x <= a.hi(); ++x) {
        if (a.at(x) == 0.0) continue;
        const SubPmf ax = below_and_final(*blocks[1].law, blocks[1].length, x);
        for (long y = ax.lo; y <= ax.hi(); ++y) acc += a.at(x) * ax.at(y) * r(x + y);
    }
    return acc;
}

/// P(min(T_1..T_L) > 0 and T_L > max(T_0..T_{L-1})) across consecutive i.i.d.
/// blocks (at most 3), through the Q' recursions.
inline double strict_peak_blocks(std::vector<Block> blocks) {
    std::erase_if(blocks, [](const Block& b) { return b.length == 0; });
    if (blocks.empty()) return 1.0;
    auto grid_for = [](const Block& b, std::size_t k) { return covering_grid(b.law->lo, b.law->hi(), k); };
    const Block& b1 = blocks[0];
    const long top1 = static_cast<long>(b1.length) * std::max(0L, b1.law->hi());
    if (blocks.size() == 1) {
        const QTable prev = q_table(*b1.law, b1.length - 1, 0, grid_for(b1, b1.length - 1));
        double acc = 0.0;
        for (long s = 1; s <= top1; ++s) acc += strict_peak_at(prev, *b1.law, s);
        return acc;
    }
    const QTable t1 = q_table(*b1.law, b1.length, 0, grid_for(b1, b1.length));
    const Block& b2 = blocks[1];
    const long top2 = static_cast<long>(b2.length) * std::max(0L, b2.law->hi());
    const long bot2 = static_cast<long>(b2.length) * std::min(0L, b2.law->lo);
    if (blocks.size() == 2) {
        double acc = 0.0;
        for (long x = 1; x <= top1; ++x) {
            double inner = 0.0;
            bool any = false;
            for (long y = 1; y <= top2; ++y) any = any || t1.Qp(y - 1, x) != 0.0;
            if (!any) continue;
            const QTable prev = q_table(*b2.law, b2.length - 1, -x, grid_for(b2, b2.length - 1));
            for (long y = 1; y <= top2; ++y) {
                const double lead = t1.Qp(y - 1, x);
                if (lead != 0.0) inner += lead * strict_peak_at(prev, *b2.law, y);
            }
            acc += inner;
        }
        return acc;
    }
    require(blocks.size() == 3, "at most three blocks");
    const Block& b3 = blocks[2];
    const long top3 = static_cast<long>(b3.length) * std::max(0L, b3.law->hi());
    double acc = 0.0;
    for (long x = 1; x <= top1; ++x) {
        const QTable t2 = q_table(*b2.law, b2.length, -x, grid_for(b2, b2.length));
        for (long z = bot2; z <= top2; ++z) {
            if (x + z <= 0) continue;
            const QTable prev3 = q_table(*b3.law, b3.length - 1, -x - z, grid_for(b3, b3.length - 1));
            for (long y = 1; y <= top3; ++y) {
                const double lead = t1.Qp(y + z - 1, x) * t2.Qp(y - 1, z);
                if (lead != 0.0) acc += lead * strict_peak_at(prev3, *b3.law, y);
            }
        }
    }
    return acc;
}

}  // namespace detail

/// Case label of (l, r) for a change segment of length d = b - a. The labels
/// partition every (l, r) with a + l <= b + r.
inline int ple_case(long l, long r, long d) {
    require(l <= d + r, "offsets need a + l <= b + r");
    if (r < -d) return 1;
    if (r == -d && r < 0) return 2;
    if (r < 0) return l < 0 ? 3 : (l == 0 ? 6 : 8);
    if (r == 0) return l < 0 ? 4 : (l == 0 ? 0 : 9);
    if (l < 0) return 5;
    if (l == 0) return 7;
    if (l < d) return 10;
    if (l == d) return 11;
    return 12;
}

/// p_lr by the appendix case formulas: left excursion x middle excursion x
/// right excursion, each from i.i.d. block functions.
inline double ple_joint_probability(long l, long r, std::size_t a, std::size_t b, std::size_t n,
                                    const LatticePair& pair) {
    require(a <= b && b <= n, "change points need 0 <= a <= b <= n");
    const long A = static_cast<long>(a) + l, B = static_cast<long>(b) + r;
    require(A >= 0 && B <= static_cast<long>(n) && A <= B, "offsets need 0 <= a + l <= b + r <= n");
    const LatticeLaw& F = pair.under_base;
    const LatticeLaw& G = pair.under_change;
    const long d = static_cast<long>(b - a);
    auto len = [](long k) {
        require(k >= 0, "negative block length");
        return static_cast<std::size_t>(k);
    };
    const std::size_t na = a, nb = n - b;

    auto left_plain = [&] { return detail::below_zero_blocks({{&F, len(A)}}); };
    auto left_two = [&] { return detail::below_zero_blocks({{&G, len(l)}, {&F, na}}); };
    auto left_three = [&] { return detail::below_zero_blocks({{&F, len(l - d)}, {&G, len(d)}, {&F, na}}); };
    auto right_plain = [&] { return detail::below_zero_blocks({{&F, len(static_cast<long>(n) - B)}}); };
    auto right_two = [&] { return detail::below_zero_blocks({{&G, len(-r)}, {&F, nb}}); };
    auto right_three = [&] { return detail::below_zero_blocks({{&F, len(-r - d)}, {&G, len(d)}, {&F, nb}}); };
    auto middle = [&](std::vector<Block> blocks) { return detail::strict_peak_blocks(std::move(blocks)); };

    switch (ple_case(l, r, d)) {
        case 0: return left_plain() * middle({{&G, len(d)}}) * right_plain();
        case 1: return left_plain() * middle({{&F, len(B - A)}}) * right_three();
        case 2: return left_plain() * middle({{&F, len(B - A)}}) * right_two();
        case 3: return left_plain() * middle({{&F, len(-l)}, {&G, len(d + r)}}) * right_two();
        case 4: return left_plain() * middle({{&F, len(-l)}, {&G, len(d)}}) * right_plain();
        case 5: return left_plain() * middle({{&F, len(-l)}, {&G, len(d)}, {&F, len(r)}}) * right_plain();
        case 6: return left_plain() * middle({{&G, len(d + r)}}) * right_two();
        case 7: return left_plain() * middle({{&G, len(d)}, {&F, len(r)}}) * right_plain();
        case 8: return left_two() * middle({{&G, len(d + r - l)}}) * right_two();
        case 9: return left_two() * middle({{&G, len(d - l)}}) * right_plain();
        case 10: return left_two() * middle({{&G, len(d - l)}, {&F, len(r)}}) * right_plain();
        case 11: return left_two() * middle({{&F, len(r)}}) * right_plain();
        case 12: return left_three() * middle({{&F, len(B - A)}}) * right_plain();
    }
    throw Error(ErrorKind::invalid_argument, "(l, r) fell outside every case");
}

// Position-by-position route: the same event, evaluated as a Markov chain with
// per-step laws (G on (a, b], F elsewhere).

/// P(all partial sums < 0) for independent steps with the given laws in order.
inline double mixed_below_probability(const std::vector<const LatticeLaw*>& laws) {
    SubPmf cur = SubPmf::point(0);
    for (const auto* h : laws) cur = advance(cur, *h, -kUnbounded, 0);
    return cur.total();
}

/// P(T_i > 0 for all i and T_L > max(T_0..T_{L-1})) by a DP over (T, R - T).
inline double mixed_strict_peak_probability(const std::vector<const LatticeLaw*>& laws) {
    if (laws.empty()) return 1.0;
    std::map<std::pair<long, long>, double> cur{{{0, 0}, 1.0}}, next;
    for (std::size_t i = 0; i + 1 < laws.size(); ++i) {
        next.clear();
        const auto& h = *laws[i];
        for (const auto& [state, p] : cur)
            for (long y = h.lo; y <= h.hi(); ++y) {
                const double m = h.at(y);
                if (m == 0.0 || state.first + y <= 0) continue;
                next[{state.first + y, std::max(state.second - y, 0L)}] += p * m;
            }
        cur.swap(next);
    }
    const auto& h = *laws.back();
    double acc = 0.0;
    for (const auto& [state, p] : cur)
        for (long y = h.lo; y <= h.hi(); ++y)
            if (state.first + y > 0 && y > state.second) acc += p * h.at(y);
    return acc;
}

inline double ple_joint_probability_chain(long l, long r, std::size_t a, std::size_t b, std::size_t n,
                                          const LatticePair& pair) {
    require(a <= b && b <= n, "change points need 0 <= a <= b <= n");
    const long A = static_cast<long>(a) + l, B = static_cast<long>(b) + r;
    require(A >= 0 && B <= static_cast<long>(n) && A <= B, "offsets need 0 <= a + l <= b + r <= n");
    auto law_at = [&](long i) {  // observation i, 1-based
        return (i > static_cast<long>(a) && i <= static_cast<long>(b)) ? &pair.under_change : &pair.under_base;
    };
    std::vector<const LatticeLaw*> left, mid, right;
    for (long i = A; i >= 1; --i) left.push_back(law_at(i));
    for (long i = A + 1; i <= B; ++i) mid.push_back(law_at(i));
    for (long i = B + 1; i <= static_cast<long>(n); ++i) right.push_back(law_at(i));
    return mixed_below_probability(left) * mixed_strict_peak_probability(mid) * mixed_below_probability(right);
}

// ---------------------------------------------------------------------------
// Asymptotic pmf of the MLE error.

enum class PmfSide { a, b };

inline const char* to_string(PmfSide s) { return s == PmfSide::a ? "a" : "b"; }

inline constexpr std::size_t kDefaultHorizon = 200;

struct AsymptoticPmfValue {
    long offset = 0;
    PmfSide side = PmfSide::b;
    std::size_t horizon = 0;
    double value = 0.0;    // at horizon 2M
    double value_m = 0.0;  // at horizon M
    double bracket = 0.0;  // |value_m - value|
};

/// Limits p_r = lim P(b_hat = b + r) and q_l = lim P(a_hat = a + l).
/// Offset 0 uses the Spitzer series truncated at M and 2M; other offsets use
/// horizon-M and horizon-2M tabulations of the excursion functions. Under time
/// reversal q_l = p_{-l}.
class AsymptoticPmf {
public:
    AsymptoticPmf(const LatticePair& pair, std::size_t horizon = kDefaultHorizon, double tail = 1e-18)
        : f_(pair.under_base), g_(pair.under_change), horizon_(horizon), tail_(tail) {
        require(horizon >= 1, "horizon must be at least 1");
        // Spitzer series: sum_m (P_F(S_m >= 0) + P_G(S_m <= 0)) / m.
        // A mirrored pair (G-law of Y equal to the F-law of -Y) has
        // P_G(S_m <= 0) = P_F(S_m >= 0); one walk then serves both terms.
        const LatticeLaw gneg = g_.negated();
        bool mirrored = gneg.lo == f_.lo && gneg.mass.size() == f_.mass.size();
        for (std::size_t i = 0; mirrored && i < f_.mass.size(); ++i)
            mirrored = std::abs(gneg.mass[i] - f_.mass[i]) <= 1e-15;
        SubPmf sf = SubPmf::point(0), sg = SubPmf::point(0);
        double series = 0.0;
        for (std::size_t m = 1; m <= 2 * horizon; ++m) {
            sf = advance(sf, f_, -kUnbounded, kUnbounded, tail);
            const double pf = sf.at_least(0);
            double pg = pf;
            if (!mirrored) {
                sg = advance(sg, g_, -kUnbounded, kUnbounded, tail);
                pg = sg.at_most(0);
            }
            series += (pf + pg) / static_cast<double>(m);
            if (m == horizon) p0_m_ = std::exp(-series);
        }
        p0_2m_ = std::exp(-series);
        rf_m_ = max_below(f_, horizon, tail);
        rf_2m_ = max_below(f_, 2 * horizon, tail);
        rg_m_ = max_below(gneg, horizon, tail);
        rg_2m_ = max_below(gneg, 2 * horizon, tail);
    }

    std::size_t horizon() const { return horizon_; }

    AsymptoticPmfValue operator()(long offset, PmfSide side) const {
        AsymptoticPmfValue out;
        out.offset = offset;
        out.side = side;
        out.horizon = horizon_;
        const long r = side == PmfSide::b ? offset : -offset;
        if (r == 0) {
            out.value_m = p0_m_;
            out.value = p0_2m_;
        } else if (r > 0) {
            // Peak inside the post-change F stretch: F ladder to S_r = y, then G
            // to the left stays above -y and F to the right stays below 0.
            const SubPmf ladder = above_and_final(f_, static_cast<std::size_t>(r), tail_);
            auto eval = [&](const BelowCdf& rf, const BelowCdf& rg) {
                double acc = 0.0;
                for (long y = ladder.lo; y <= ladder.hi(); ++y) acc += ladder.at(y) * rg(y);
                return rf(0) * acc;
            };
            out.value_m = eval(rf_m_, rg_m_);
            out.value = eval(rf_2m_, rg_2m_);
        } else {
            const SubPmf drop = below_and_final(g_, static_cast<std::size_t>(-r), 0, tail_);
            auto eval = [&](const BelowCdf& rf, const BelowCdf& rg) {
                double acc = 0.0;
                for (long y = drop.lo; y <= drop.hi(); ++y) acc += drop.at(y) * rf(y);
                return rg(0) * acc;
            };
            out.value_m = eval(rf_m_, rg_m_);
            out.value = eval(rf_2m_, rg_2m_);
        }
        out.bracket = std::abs(out.value_m - out.value);
        return out;
    }

private:
    LatticeLaw f_, g_;
    std::size_t horizon_;
    double tail_;
    double p0_m_ = 0.0, p0_2m_ = 0.0;
    BelowCdf rf_m_, rf_2m_, rg_m_, rg_2m_;
};

inline AsymptoticPmfValue asymptotic_mle_pmf(const LatticePair& pair, long offset, PmfSide side,
                                             std::size_t horizon = kDefaultHorizon) {
    return AsymptoticPmf(pair, horizon)(offset, side);
}

struct LleBound {
    double bound = 0.0;         // after subtracting alpha, clamped at 0
    double fixed_anchor = 0.0;  // sum of per-offset lower values
    std::vector<AsymptoticPmfValue> terms;
};

/// Lower bound for P(s <= offset <= r) of the local estimator: per-offset
/// values v_2M - |v_M - v_2M| (so horizon truncation cannot inflate the bound),
/// summed, then alpha subtracted for a detection-point anchor.
inline LleBound lle_bound(const LatticePair& pair, long s, long r, PmfSide side, double alpha,
                          std::size_t horizon = kDefaultHorizon) {
    require(s <= r, "offset range needs s <= r");
    require(alpha >= 0 && alpha < 1, "alpha must lie in [0, 1)");
    const AsymptoticPmf pmf(pair, horizon);
    LleBound out;
    for (long o = s; o <= r; ++o) {
        const auto v = pmf(o, side);
        out.terms.push_back(v);
        out.fixed_anchor += std::max(0.0, v.value - v.bracket);
    }
    out.bound = std::max(0.0, out.fixed_anchor - alpha);
    return out;
}

}  // namespace tcd
