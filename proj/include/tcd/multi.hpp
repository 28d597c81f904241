#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "tcd/error.hpp"
#include "tcd/model.hpp"
#include "tcd/rng.hpp"
#include "tcd/single.hpp"
#include "tcd/walks.hpp"

namespace tcd {

struct MultiIntervalEstimate {
    std::vector<std::pair<std::size_t, std::size_t>> intervals;  // ordered, disjoint (a_k, b_k]
    double total_gain = 0.0;
    bool saturated = false;  // fewer than K intervals: no positive-gain candidate was left
};

namespace detail {

/// Best (i, j), lo <= i < j <= hi, maximizing sign * (S_j - S_i). Ties: smallest
/// i, then smallest j.
struct Candidate {
    double gain = -kInf;
    std::size_t i = 0, j = 0;
    std::size_t host = 0;
    bool split = false;
};

inline Candidate best_growth(const WalkTrace& walk, std::size_t lo, std::size_t hi, double sign) {
    Candidate best;
    if (hi <= lo) return best;
    auto s = [&](std::size_t t) { return sign * walk[t]; };
    double run_min = s(lo);
    for (std::size_t j = lo + 1; j <= hi; ++j) {
        best.gain = std::max(best.gain, s(j) - run_min);
        run_min = std::min(run_min, s(j));
    }
    // Leftmost start reaching the maximum (within tolerance), then the shortest.
    std::vector<double> suffix_max(hi - lo + 2, -kInf);
    for (std::size_t t = hi; t > lo; --t) suffix_max[t - lo] = std::max(suffix_max[t - lo + 1], s(t));
    for (std::size_t i = lo; i < hi; ++i) {
        if (suffix_max[i - lo + 1] - s(i) < best.gain - kZeroTolerance) continue;
        best.i = i;
        for (std::size_t j = i + 1; j <= hi; ++j)
            if (s(j) - s(i) >= best.gain - kZeroTolerance) {
                best.j = j;
                break;
            }
        break;
    }
    return best;
}

inline bool better(const Candidate& x, const Candidate& y) {
    if (x.gain > y.gain + kZeroTolerance) return true;
    if (x.gain < y.gain - kZeroTolerance) return false;
    if (x.i != y.i) return x.i < y.i;
    return x.j - x.i < y.j - y.i;
}

}  // namespace detail

/// Iterative K-interval MLE. Step 1 is the single-interval MLE; each later step
/// takes the best of (a) the largest growth inside a gap, appended as a new
/// interval, and (b) the largest drop inside an interval, which splits it.
inline MultiIntervalEstimate mle_k_intervals(const WalkTrace& walk, std::size_t K) {
    require(K >= 1, "K must be at least 1");
    MultiIntervalEstimate out;
    const auto first = mle_interval(walk);
    if (first.no_change) {
        out.saturated = true;
        return out;
    }
    out.intervals.emplace_back(first.a_hat, first.b_hat);
    out.total_gain = first.lambda;
    const std::size_t n = walk.n();

    while (out.intervals.size() < K) {
        detail::Candidate best;
        std::size_t gap_lo = 0;
        for (std::size_t k = 0; k <= out.intervals.size(); ++k) {
            const std::size_t gap_hi = k < out.intervals.size() ? out.intervals[k].first : n;
            auto c = detail::best_growth(walk, gap_lo, gap_hi, 1.0);
            c.host = k;
            if (c.gain > kZeroTolerance && detail::better(c, best)) best = c;
            if (k < out.intervals.size()) {
                auto [a, b] = out.intervals[k];
                auto d = detail::best_growth(walk, a, b, -1.0);
                d.host = k;
                d.split = true;
                if (d.gain > kZeroTolerance && detail::better(d, best)) best = d;
                gap_lo = b;
            }
        }
        if (!(best.gain > kZeroTolerance)) {
            out.saturated = true;
            break;
        }
        auto it = out.intervals.begin() + static_cast<std::ptrdiff_t>(best.host);
        if (best.split) {
            const auto [a, b] = *it;
            *it = {a, best.i};
            out.intervals.insert(it + 1, {best.j, b});
        } else {
            out.intervals.insert(it, {best.i, best.j});
        }
        out.total_gain += best.gain;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sequential detection of disorders (F -> G) and readjustments (G -> F).

struct DetectorConfig {
    double alpha = 0.05;
    double beta = 0.05;
    double h_alpha = 0.0;
    double h_beta_tilde = 0.0;
    std::size_t n = 0;
    double moment_alpha = 1.0;  // E_F exp(W_n)
    double moment_beta = 1.0;   // E_G exp(W~_n)
    ThresholdMethod method = ThresholdMethod::exact_lattice;

    void validate() const {
        require(h_alpha > 0 && h_beta_tilde > 0, "detector thresholds must be positive");
    }
};

/// h_alpha = log(E_F e^{W_n} / alpha), h~_beta = log(E_G e^{W~_n} / beta), where
/// W~ is the CUSUM of the negated LLR walk.
inline DetectorConfig familywise_thresholds(const DistributionPair& pair, std::size_t n, double alpha, double beta,
                                            const ThresholdOptions& options = {}) {
    require(beta > 0 && beta < 1, "beta must lie in (0, 1)");
    ThresholdOptions fwd = options, rev = options;
    fwd.seed = sub_seed(options.seed, 0);
    rev.seed = sub_seed(options.seed, 1);
    const auto ha = false_alarm_threshold(pair, n, alpha, fwd);
    const auto hb = false_alarm_threshold(pair.swapped(), n, beta, rev);
    DetectorConfig c;
    c.alpha = alpha;
    c.beta = beta;
    c.h_alpha = ha.h;
    c.h_beta_tilde = hb.h;
    c.n = n;
    c.moment_alpha = ha.moment;
    c.moment_beta = hb.moment;
    c.method = options.method;
    return c;
}

struct DetectionEvent {
    std::size_t k = 0;
    std::size_t tau = 0;
    std::size_t a_hat = 0;
    std::optional<std::size_t> tau_tilde;
    std::optional<std::size_t> b_hat;

    friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

enum class Regime { in_control, out_of_control };

struct DetectionTrace {
    // Per time t = 0..n: the active statistic and which process was running.
    std::vector<double> w;        // forward CUSUM, NaN when not active
    std::vector<double> w_tilde;  // readjustment CUSUM, NaN when not active
    std::vector<Regime> regime;
};

struct DetectionReport {
    std::vector<DetectionEvent> events;
    std::size_t n = 0;
    std::size_t k_hat() const { return events.size(); }
};

namespace detail {

/// Crossing of a renewed CUSUM: (offset of first crossing, last zero before it).
inline std::optional<std::pair<std::size_t, std::size_t>> first_crossing(const CusumTrace& c, double h) {
    std::size_t last_zero = 0;
    for (std::size_t t = 0; t < c.size(); ++t) {
        if (c[t] >= h) return std::make_pair(t, last_zero);
        if (c[t] <= kZeroTolerance) last_zero = t;
    }
    return std::nullopt;
}

}  // namespace detail

/// Alternates a forward CUSUM renewed at each readjustment (threshold h_alpha)
/// and a reverse CUSUM renewed at each disorder (threshold h~_beta). Change-point
/// estimates are the last zeros of the renewed CUSUM before its stopping time.
inline DetectionReport sequential_detect(const WalkTrace& walk, const DetectorConfig& config,
                                         DetectionTrace* trace = nullptr) {
    config.validate();
    const std::size_t n = walk.n();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    DetectionReport report;
    report.n = n;
    if (trace) {
        trace->w.assign(n + 1, nan);
        trace->w_tilde.assign(n + 1, nan);
        trace->regime.assign(n + 1, Regime::in_control);
    }
    std::size_t origin = 0;
    while (origin < n) {
        const auto fwd = renewed_cusum(walk, origin, CusumKind::forward);
        const auto hit = detail::first_crossing(fwd, config.h_alpha);
        if (trace) {
            const std::size_t stop = hit ? hit->first : fwd.size() - 1;
            for (std::size_t t = 0; t <= stop; ++t) trace->w[origin + t] = fwd[t];
        }
        if (!hit) break;
        DetectionEvent ev;
        ev.k = report.events.size() + 1;
        ev.tau = origin + hit->first;
        ev.a_hat = origin + hit->second;

        const auto rev = renewed_cusum(walk, ev.tau, CusumKind::reverse);
        const auto back = detail::first_crossing(rev, config.h_beta_tilde);
        if (trace) {
            const std::size_t stop = back ? back->first : rev.size() - 1;
            for (std::size_t t = 0; t <= stop; ++t) {
                trace->w_tilde[ev.tau + t] = rev[t];
                if (t > 0) trace->regime[ev.tau + t] = Regime::out_of_control;
            }
        }
        if (back) {
            ev.tau_tilde = ev.tau + back->first;
            ev.b_hat = ev.tau + back->second;
        }
        report.events.push_back(ev);
        if (!back) break;
        origin = *ev.tau_tilde;
    }
    return report;
}

/// Closed intervals [x0, x1] and [y0, y1] share a point.
inline bool closed_intersect(std::size_t x0, std::size_t x1, std::size_t y0, std::size_t y1) {
    return x0 <= y1 && y0 <= x1;
}

/// Some estimated [a_hat, b_hat] (b_hat = n when pending) meets no true change interval.
inline bool false_alarm_indicator(const DetectionReport& report, const ChangeScenario& truth) {
    for (const auto& ev : report.events) {
        const std::size_t hi = ev.b_hat.value_or(truth.n);
        bool hit = false;
        for (auto [a, b] : truth.intervals)
            if (closed_intersect(ev.a_hat, hi, a, b)) {
                hit = true;
                break;
            }
        if (!hit) return true;
    }
    return false;
}

/// Some estimated gap [b_hat_k, a_hat_{k+1}] meets no true in-control gap
/// [b_j, a_{j+1}] (with boundary gaps starting at 0 and ending at n).
inline bool false_readjustment_indicator(const DetectionReport& report, const ChangeScenario& truth) {
    std::vector<std::pair<std::size_t, std::size_t>> gaps;
    std::size_t prev = 0;
    for (auto [a, b] : truth.intervals) {
        gaps.emplace_back(prev, a);
        prev = b;
    }
    gaps.emplace_back(prev, truth.n);
    for (std::size_t k = 0; k + 1 < report.events.size(); ++k) {
        const auto& ev = report.events[k];
        if (!ev.b_hat) continue;
        const std::size_t lo = *ev.b_hat, hi = report.events[k + 1].a_hat;
        bool hit = false;
        for (auto [g0, g1] : gaps)
            if (closed_intersect(lo, hi, g0, g1)) {
                hit = true;
                break;
            }
        if (!hit) return true;
    }
    return false;
}

}  // namespace tcd
