#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "tcd/error.hpp"
#include "tcd/model.hpp"

namespace tcd {

/// Finite probability mass function on a strictly increasing support.
/// `step` is the common lattice step when the support lies on k*step, else 0.
struct GridDensity {
    double step = 0.0;
    std::vector<double> support;
    std::vector<double> masses;

    double total() const { return std::accumulate(masses.begin(), masses.end(), 0.0); }

    /// Index of the atom at 0, when present.
    std::optional<std::size_t> origin() const {
        for (std::size_t i = 0; i < support.size(); ++i)
            if (support[i] == 0.0) return i;
        return std::nullopt;
    }

    double mass_at(double x, double tol = 1e-9) const {
        for (std::size_t i = 0; i < support.size(); ++i)
            if (std::abs(support[i] - x) <= tol * std::max(1.0, std::abs(x))) return masses[i];
        return 0.0;
    }

    void validate(double tol = 1e-12) const {
        require(support.size() == masses.size(), "grid support and masses differ in length");
        for (std::size_t i = 0; i < support.size(); ++i) {
            require(i == 0 || support[i] > support[i - 1], "grid support must be strictly increasing");
            require(masses[i] >= 0, "grid masses must be nonnegative");
        }
        require(std::abs(total() - 1.0) <= tol, "grid masses must sum to 1");
    }
};

/// Probability mass on the integer lattice: value k*step has mass mass[k - lo].
struct LatticeLaw {
    double step = 1.0;
    long lo = 0;
    std::vector<double> mass;

    long hi() const { return lo + static_cast<long>(mass.size()) - 1; }
    double at(long k) const {
        if (k < lo || k > hi()) return 0.0;
        return mass[static_cast<std::size_t>(k - lo)];
    }
    double total() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }

    /// Law of the negated increment.
    LatticeLaw negated() const {
        LatticeLaw out;
        out.step = step;
        out.lo = -hi();
        out.mass.assign(mass.rbegin(), mass.rend());
        return out;
    }

    /// Drops zero-mass atoms at both ends.
    void trim() {
        std::size_t first = 0, last = mass.size();
        while (first < last && mass[first] == 0.0) ++first;
        while (last > first && mass[last - 1] == 0.0) --last;
        require(first < last, "lattice law has no mass");
        lo += static_cast<long>(first);
        mass = std::vector<double>(mass.begin() + static_cast<long>(first), mass.begin() + static_cast<long>(last));
    }

    GridDensity to_grid() const {
        GridDensity g;
        g.step = step;
        for (std::size_t i = 0; i < mass.size(); ++i) {
            if (mass[i] <= 0) continue;
            g.support.push_back(static_cast<double>(lo + static_cast<long>(i)) * step);
            g.masses.push_back(mass[i]);
        }
        return g;
    }

    static LatticeLaw point(long k, double step = 1.0) { return LatticeLaw{step, k, {1.0}}; }
};

/// Converts a GridDensity whose support lies on k*step into a LatticeLaw.
inline LatticeLaw to_lattice_law(const GridDensity& g) {
    require(g.step > 0, "grid density has no lattice step");
    require(!g.support.empty(), "grid density is empty");
    LatticeLaw law;
    law.step = g.step;
    const long lo = std::lround(g.support.front() / g.step);
    const long hi = std::lround(g.support.back() / g.step);
    law.lo = lo;
    law.mass.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
    for (std::size_t i = 0; i < g.support.size(); ++i) {
        const double k = g.support[i] / g.step;
        require(std::abs(k - std::round(k)) <= 1e-9 * std::max(1.0, std::abs(k)), "grid support is off its lattice");
        law.mass[static_cast<std::size_t>(std::lround(k) - lo)] += g.masses[i];
    }
    return law;
}

namespace detail {

/// Best rational approximation p/q of x with q <= max_den (continued fractions).
inline std::optional<std::pair<long, long>> rationalize(double x, long max_den, double tol) {
    long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double r = x;
    for (int iter = 0; iter < 64; ++iter) {
        const double a = std::floor(r);
        if (std::abs(a) > 1e12) break;
        const long ai = static_cast<long>(a);
        const long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
        if (q2 > max_den) break;
        if (std::abs(static_cast<double>(p2) / static_cast<double>(q2) - x) <= tol * std::max(1.0, std::abs(x)))
            return std::make_pair(p2, q2);
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        const double frac = r - a;
        if (frac < 1e-15) break;
        r = 1.0 / frac;
    }
    return std::nullopt;
}

}  // namespace detail

/// Common lattice step of a set of finite reals, if they are commensurate
/// (all ratios rational with denominators <= max_den). Zero-only sets give 1.
inline std::optional<double> common_step(const std::vector<double>& values, long max_den = 1000) {
    double base = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) continue;
        if (v != 0.0 && (base == 0.0 || std::abs(v) < base)) base = std::abs(v);
    }
    if (base == 0.0) return 1.0;
    long denominators = 1;
    for (double v : values) {
        if (!std::isfinite(v) || v == 0.0) continue;
        auto pq = detail::rationalize(v / base, max_den, 1e-10);
        if (!pq) return std::nullopt;
        denominators = std::lcm(denominators, pq->second);
        if (denominators > max_den) return std::nullopt;
    }
    return base / static_cast<double>(denominators);
}

/// Increment law Y = log g/f (X) under F and under G on one integer lattice.
struct LatticePair {
    LatticeLaw under_base;
    LatticeLaw under_change;
    bool exact = true;  // false when values were rounded or a continuous law was binned

    double step() const { return under_base.step; }
};

struct LatticeOptions {
    /// Lattice step for discretized laws; 0 picks 0.01 * sd of the LLR under F.
    double step = 0.0;
    /// Tail mass below which a discretized law is truncated.
    double tail = 1e-18;
};

namespace detail {

inline LatticeLaw law_from_atoms(const std::vector<std::pair<double, double>>& atoms, double step) {
    long lo = 0, hi = 0;
    bool first = true;
    for (auto [v, m] : atoms) {
        const long k = std::lround(v / step);
        if (first) { lo = hi = k; first = false; }
        lo = std::min(lo, k);
        hi = std::max(hi, k);
    }
    LatticeLaw law;
    law.step = step;
    law.lo = lo;
    law.mass.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
    for (auto [v, m] : atoms) law.mass[static_cast<std::size_t>(std::lround(v / step) - lo)] += m;
    const double total = law.total();
    for (double& m : law.mass) m /= total;
    law.trim();
    return law;
}

/// LLR atoms (value, mass) of a discrete law; infinite-support laws are truncated.
inline std::vector<std::pair<double, double>> llr_atoms(const DistributionPair& pair, const DensitySpec& under,
                                                        double tail) {
    std::vector<std::pair<double, double>> out;
    auto push = [&](double x, double m) {
        if (m <= 0) return;
        const double y = log_likelihood_ratio(pair, x);
        if (!std::isfinite(y))
            throw Error(ErrorKind::unsupported, "exact distributions need finite log-likelihood ratios");
        out.emplace_back(y, m);
    };
    if (under.has_finite_support()) {
        for (auto [x, m] : under.atoms()) push(x, m);
    } else {  // poisson
        double acc = 0.0;
        for (long k = 0; acc < 1.0 - tail && k < 100000; ++k) {
            const double m = std::exp(under.log_density(static_cast<double>(k)));
            push(static_cast<double>(k), m);
            acc += m;
        }
    }
    return out;
}

/// Coefficients (c, d) with log g/f (x) = c x + d, for continuous pairs whose LLR is affine.
inline std::pair<double, double> affine_llr(const DistributionPair& pair) {
    const auto& f = pair.base;
    const auto& g = pair.change;
    if (f.kind == DensityKind::normal && g.kind == DensityKind::normal && std::abs(f.sd - g.sd) <= 1e-12 * f.sd) {
        const double s2 = f.sd * f.sd;
        return {(g.mean - f.mean) / s2, (f.mean * f.mean - g.mean * g.mean) / (2.0 * s2)};
    }
    if (f.kind == DensityKind::exponential && g.kind == DensityKind::exponential)
        return {-(g.rate - f.rate), std::log(g.rate / f.rate)};
    throw Error(ErrorKind::unsupported, "discretization needs an affine log-likelihood ratio (equal-sd normal or exponential pair)");
}

inline double law_mean(const DensitySpec& h) { return h.kind == DensityKind::normal ? h.mean : 1.0 / h.rate; }
inline double law_sd(const DensitySpec& h) { return h.kind == DensityKind::normal ? h.sd : 1.0 / h.rate; }

/// Bins Y = c X + d into cells ((j - 1/2) step, (j + 1/2) step].
inline LatticeLaw bin_affine(const DensitySpec& h, double c, double d, double step, double tail) {
    if (c == 0.0) return LatticeLaw::point(std::lround(d / step), step);
    auto cdf_y = [&](double y) {
        const double x = (y - d) / c;
        return c > 0 ? h.cdf(x) : 1.0 - h.cdf(x);
    };
    const double mu = c * law_mean(h) + d;
    const double sd = std::abs(c) * law_sd(h);
    long lo = std::lround(mu / step), hi = lo;
    while (cdf_y((static_cast<double>(lo) - 0.5) * step) > tail && (mu - lo * step) < 60 * sd) --lo;
    while (1.0 - cdf_y((static_cast<double>(hi) + 0.5) * step) > tail && (hi * step - mu) < 60 * sd) ++hi;
    LatticeLaw law;
    law.step = step;
    law.lo = lo;
    law.mass.resize(static_cast<std::size_t>(hi - lo + 1));
    double prev = cdf_y((static_cast<double>(lo) - 0.5) * step);
    for (long j = lo; j <= hi; ++j) {
        const double next = cdf_y((static_cast<double>(j) + 0.5) * step);
        law.mass[static_cast<std::size_t>(j - lo)] = std::max(0.0, next - prev);
        prev = next;
    }
    const double total = law.total();
    for (double& m : law.mass) m /= total;
    law.trim();
    return law;
}

}  // namespace detail

/// Places the LLR increment laws of a pair on one integer lattice. Finite
/// discrete pairs with commensurate LLR values are exact; other discrete pairs
/// are rounded and continuous pairs are binned with step `options.step`.
inline LatticePair lattice_llr_pair(const DistributionPair& pair, const LatticeOptions& options = {}) {
    pair.validate();
    LatticePair out;
    if (pair.base.is_discrete()) {
        const auto af = detail::llr_atoms(pair, pair.base, options.tail);
        const auto ag = detail::llr_atoms(pair, pair.change, options.tail);
        std::vector<double> values;
        for (auto& [v, m] : af) values.push_back(v);
        for (auto& [v, m] : ag) values.push_back(v);
        std::optional<double> step = options.step > 0 ? std::nullopt : common_step(values);
        out.exact = step.has_value() && pair.finite_support();
        const double s = step ? *step : (options.step > 0 ? options.step : 0.01);
        out.under_base = detail::law_from_atoms(af, s);
        out.under_change = detail::law_from_atoms(ag, s);
        if (!step) out.exact = false;
        return out;
    }
    const auto [c, d] = detail::affine_llr(pair);
    double s = options.step;
    if (s <= 0) {
        const double sd = std::abs(c) * detail::law_sd(pair.base);
        s = sd > 0 ? 0.01 * sd : 0.01;
    }
    out.under_base = detail::bin_affine(pair.base, c, d, s, options.tail);
    out.under_change = detail::bin_affine(pair.change, c, d, s, options.tail);
    out.exact = false;
    return out;
}

}  // namespace tcd
