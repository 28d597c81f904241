#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "tcd/error.hpp"
#include "tcd/lattice.hpp"
#include "tcd/model.hpp"

namespace tcd {

/// Absolute tolerance for "W_t = 0" and for ties between walk values.
inline constexpr double kZeroTolerance = 1e-9;

/// Extended-real sum. Opposite infinities have no value and give NaN; a
/// single walk step never produces that combination.
inline double extended_add(double a, double b) {
    if (std::isinf(a) && std::isinf(b) && (a > 0) != (b > 0)) return std::numeric_limits<double>::quiet_NaN();
    return a + b;
}

/// CUSUM recursion W' = max{0, W + y}. A -inf step resets to 0 even from +inf.
inline double cusum_step(double w, double y) {
    if (y == -kInf) return 0.0;
    return std::max(0.0, w + y);
}

/// Random walk S_0..S_n over log-likelihood-ratio increments y_1..y_n.
struct WalkTrace {
    std::vector<double> increments;
    std::vector<double> values;

    WalkTrace() : values{0.0} {}

    static WalkTrace from_increments(std::span<const double> y) {
        WalkTrace w;
        w.increments.assign(y.begin(), y.end());
        w.values.resize(y.size() + 1);
        w.values[0] = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) w.values[i + 1] = extended_add(w.values[i], y[i]);
        return w;
    }

    std::size_t n() const { return increments.size(); }
    double operator[](std::size_t t) const { return values[t]; }
    bool finite() const {
        return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
    }
};

inline WalkTrace random_walk(const DistributionPair& pair, std::span<const double> series) {
    std::vector<double> y(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) y[i] = log_likelihood_ratio(pair, series[i]);
    return WalkTrace::from_increments(y);
}

enum class CusumKind {
    forward,        // W_t = S_{T+t} - min_{i<=t} S_{T+i}
    reverse,        // W~_t = max_{i<=t} S_{T+i} - S_{T+t} (negated increments)
    time_reversed,  // entry m = max_{m<=j<=n} S_j - S_m, on the data axis
};

struct CusumTrace {
    std::vector<double> values;
    CusumKind kind = CusumKind::forward;
    std::size_t origin = 0;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t t) const { return values[t]; }
    double max() const { return *std::max_element(values.begin(), values.end()); }
};

inline CusumTrace renewed_cusum(const WalkTrace& walk, std::size_t origin, CusumKind kind) {
    require(origin <= walk.n(), "renewal time out of range");
    require(kind != CusumKind::time_reversed, "renewed CUSUM is forward or reverse");
    CusumTrace c;
    c.kind = kind;
    c.origin = origin;
    c.values.resize(walk.n() - origin + 1);
    c.values[0] = 0.0;
    const double sign = kind == CusumKind::forward ? 1.0 : -1.0;
    for (std::size_t t = 1; t < c.values.size(); ++t)
        c.values[t] = cusum_step(c.values[t - 1], sign * walk.increments[origin + t - 1]);
    return c;
}

inline CusumTrace cusum(const WalkTrace& walk) { return renewed_cusum(walk, 0, CusumKind::forward); }

inline CusumTrace reverse_cusum(const WalkTrace& walk) {
    CusumTrace c;
    c.kind = CusumKind::time_reversed;
    const std::size_t n = walk.n();
    c.values.assign(n + 1, 0.0);
    for (std::size_t m = n; m-- > 0;) c.values[m] = cusum_step(c.values[m + 1], walk.increments[m]);
    return c;
}

/// Indices t with W_t <= tolerance.
inline std::vector<std::size_t> kernel(const CusumTrace& c, double tolerance = kZeroTolerance) {
    require(tolerance >= 0, "kernel tolerance must be nonnegative");
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < c.size(); ++t)
        if (c[t] <= tolerance) out.push_back(t);
    return out;
}

/// CSV with columns t,S_t,W_t,W_rev_t.
inline void write_trace_csv(std::ostream& os, const WalkTrace& walk) {
    const auto fwd = cusum(walk);
    const auto rev = reverse_cusum(walk);
    os << "t,S_t,W_t,W_rev_t\n";
    os.precision(17);
    for (std::size_t t = 0; t <= walk.n(); ++t)
        os << t << ',' << walk[t] << ',' << fwd[t] << ',' << rev[t] << '\n';
}

// ---------------------------------------------------------------------------
// Exact distribution of W_n for i.i.d. finitely supported increments.

struct LatticeWalkDistribution {
    std::vector<double> steps;   // may contain -inf (reset) or +inf
    std::vector<double> masses;
    std::size_t horizon = 0;

    void validate() const {
        require(!steps.empty() && steps.size() == masses.size(), "steps and masses must be nonempty and equal length");
        double total = 0.0;
        for (double m : masses) {
            require(m >= 0, "step masses must be nonnegative");
            total += m;
        }
        require(std::abs(total - 1.0) <= 1e-12, "step masses must sum to 1");
    }

    /// Increment law of log g/f under the pair's base law (finite support only).
    static LatticeWalkDistribution under_base(const DistributionPair& pair, std::size_t horizon) {
        if (!pair.base.has_finite_support())
            throw Error(ErrorKind::unsupported, "exact lattice walk needs a finitely supported base law");
        LatticeWalkDistribution d;
        d.horizon = horizon;
        for (auto [x, m] : pair.base.atoms()) {
            d.steps.push_back(log_likelihood_ratio(pair, x));
            d.masses.push_back(m);
        }
        return d;
    }
};

inline constexpr std::size_t kLatticeStateCap = 1000000;

/// Probability mass of W_n by dynamic programming over W_{t+1} = max{0, W_t + y}.
inline GridDensity lattice_cusum_distribution(const LatticeWalkDistribution& dist,
                                              std::size_t state_cap = kLatticeStateCap) {
    dist.validate();
    double reset_mass = 0.0, inf_mass = 0.0;
    std::vector<double> finite_steps, finite_masses;
    for (std::size_t i = 0; i < dist.steps.size(); ++i) {
        if (dist.masses[i] == 0) continue;
        if (dist.steps[i] == -kInf) reset_mass += dist.masses[i];
        else if (dist.steps[i] == kInf) inf_mass += dist.masses[i];
        else {
            finite_steps.push_back(dist.steps[i]);
            finite_masses.push_back(dist.masses[i]);
        }
    }

    GridDensity out;
    double at_infinity = 0.0;

    if (auto step = common_step(finite_steps)) {
        // Commensurate steps: W lives on the nonnegative integer lattice.
        std::vector<long> ks;
        for (double s : finite_steps) ks.push_back(std::lround(s / *step));
        std::vector<double> cur{1.0}, next;
        for (std::size_t t = 0; t < dist.horizon; ++t) {
            long max_up = 0;
            for (long k : ks) max_up = std::max(max_up, k);
            next.assign(cur.size() + static_cast<std::size_t>(max_up), 0.0);
            if (next.size() > state_cap) throw Error(ErrorKind::state_explosion, "reachable CUSUM values exceed the state cap");
            double reset = reset_mass;
            for (std::size_t w = 0; w < cur.size(); ++w) {
                const double pw = cur[w];
                if (pw == 0) continue;
                for (std::size_t j = 0; j < ks.size(); ++j) {
                    const long target = static_cast<long>(w) + ks[j];
                    next[static_cast<std::size_t>(std::max(0L, target))] += pw * finite_masses[j];
                }
            }
            // Mass at +inf stays there unless a reset step arrives.
            const double total_finite = std::accumulate(cur.begin(), cur.end(), 0.0);
            next[0] += reset * (total_finite + at_infinity);
            at_infinity = at_infinity * (1.0 - reset_mass) + total_finite * inf_mass;
            while (next.size() > 1 && next.back() == 0.0) next.pop_back();
            cur.swap(next);
        }
        out.step = *step;
        for (std::size_t w = 0; w < cur.size(); ++w) {
            if (cur[w] <= 0) continue;
            out.support.push_back(static_cast<double>(w) * *step);
            out.masses.push_back(cur[w]);
        }
    } else {
        // Incommensurate steps: states keyed by value snapped to a 1e-9 grid.
        auto key_of = [](double v) { return std::llround(v * 1e9); };
        std::map<long long, std::pair<double, double>> cur{{0, {0.0, 1.0}}}, next;
        for (std::size_t t = 0; t < dist.horizon; ++t) {
            next.clear();
            double total_finite = 0.0;
            for (const auto& [key, vm] : cur) {
                const auto [v, pw] = vm;
                total_finite += pw;
                for (std::size_t j = 0; j < finite_steps.size(); ++j) {
                    const double w = std::max(0.0, v + finite_steps[j]);
                    auto& slot = next[key_of(w)];
                    if (slot.second == 0.0) slot.first = w;
                    slot.second += pw * finite_masses[j];
                }
            }
            if (reset_mass > 0) {
                auto& slot = next[0];
                slot.second += reset_mass * (total_finite + at_infinity);
            }
            at_infinity = at_infinity * (1.0 - reset_mass) + total_finite * inf_mass;
            if (next.size() > state_cap) throw Error(ErrorKind::state_explosion, "reachable CUSUM values exceed the state cap");
            cur.swap(next);
        }
        for (const auto& [key, vm] : cur) {
            if (vm.second <= 0) continue;
            out.support.push_back(vm.first);
            out.masses.push_back(vm.second);
        }
    }
    if (at_infinity > 0) {
        out.support.push_back(kInf);
        out.masses.push_back(at_infinity);
    }
    return out;
}

}  // namespace tcd
