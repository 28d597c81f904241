#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tcd/error.hpp"
#include "tcd/rng.hpp"

namespace tcd {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class DensityKind { normal, bernoulli, poisson, exponential, lattice };

inline const char* to_string(DensityKind kind) {
    switch (kind) {
        case DensityKind::normal: return "normal";
        case DensityKind::bernoulli: return "bernoulli";
        case DensityKind::poisson: return "poisson";
        case DensityKind::exponential: return "exponential";
        case DensityKind::lattice: return "lattice";
    }
    return "unknown";
}

/// One of the supported univariate laws. Only the fields relevant to `kind`
/// are meaningful.
struct DensitySpec {
    DensityKind kind = DensityKind::normal;
    double mean = 0.0;
    double sd = 1.0;
    double p = 0.5;
    double rate = 1.0;
    std::vector<double> support;  // lattice only, strictly increasing
    std::vector<double> masses;   // lattice only

    static DensitySpec normal(double mean, double sd) {
        DensitySpec d;
        d.kind = DensityKind::normal;
        d.mean = mean;
        d.sd = sd;
        d.validate();
        return d;
    }
    static DensitySpec bernoulli(double p) {
        DensitySpec d;
        d.kind = DensityKind::bernoulli;
        d.p = p;
        d.validate();
        return d;
    }
    static DensitySpec poisson(double rate) {
        DensitySpec d;
        d.kind = DensityKind::poisson;
        d.rate = rate;
        d.validate();
        return d;
    }
    static DensitySpec exponential(double rate) {
        DensitySpec d;
        d.kind = DensityKind::exponential;
        d.rate = rate;
        d.validate();
        return d;
    }
    static DensitySpec lattice(std::vector<double> support, std::vector<double> masses) {
        DensitySpec d;
        d.kind = DensityKind::lattice;
        d.support = std::move(support);
        d.masses = std::move(masses);
        d.validate();
        return d;
    }

    void validate() const {
        switch (kind) {
            case DensityKind::normal:
                require(std::isfinite(mean) && std::isfinite(sd) && sd > 0, "normal requires finite mean and sd > 0");
                break;
            case DensityKind::bernoulli:
                require(p > 0 && p < 1, "bernoulli requires 0 < p < 1");
                break;
            case DensityKind::poisson:
            case DensityKind::exponential:
                require(std::isfinite(rate) && rate > 0, "rate must be > 0");
                break;
            case DensityKind::lattice: {
                require(!support.empty() && support.size() == masses.size(),
                        "lattice support and masses must be nonempty and of equal length");
                double total = 0.0;
                for (std::size_t i = 0; i < support.size(); ++i) {
                    require(std::isfinite(support[i]), "lattice support must be finite");
                    require(i == 0 || support[i] > support[i - 1], "lattice support must be strictly increasing");
                    require(masses[i] >= 0, "lattice masses must be nonnegative");
                    total += masses[i];
                }
                require(std::abs(total - 1.0) <= 1e-12, "lattice masses must sum to 1");
                break;
            }
        }
    }

    bool is_discrete() const { return kind != DensityKind::normal && kind != DensityKind::exponential; }
    bool has_finite_support() const { return kind == DensityKind::bernoulli || kind == DensityKind::lattice; }

    /// Atoms with positive mass; finite-support kinds only.
    std::vector<std::pair<double, double>> atoms() const {
        std::vector<std::pair<double, double>> out;
        if (kind == DensityKind::bernoulli) {
            out = {{0.0, 1.0 - p}, {1.0, p}};
        } else if (kind == DensityKind::lattice) {
            for (std::size_t i = 0; i < support.size(); ++i)
                if (masses[i] > 0) out.emplace_back(support[i], masses[i]);
        } else {
            throw Error(ErrorKind::unsupported, std::string(to_string(kind)) + " has no finite atom list");
        }
        return out;
    }

    /// Log density (continuous) or log mass (discrete); -inf off the support.
    double log_density(double x) const {
        switch (kind) {
            case DensityKind::normal: {
                const double z = (x - mean) / sd;
                return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
            }
            case DensityKind::bernoulli:
                if (is_atom(x, 1.0)) return std::log(p);
                if (is_atom(x, 0.0)) return std::log1p(-p);
                return -kInf;
            case DensityKind::poisson: {
                const double k = std::round(x);
                if (k < 0 || !is_atom(x, k)) return -kInf;
                return k * std::log(rate) - rate - std::lgamma(k + 1.0);
            }
            case DensityKind::exponential:
                if (x < 0) return -kInf;
                return std::log(rate) - rate * x;
            case DensityKind::lattice: {
                auto it = std::lower_bound(support.begin(), support.end(), x - atom_tolerance(x));
                if (it == support.end() || !is_atom(x, *it)) return -kInf;
                const double m = masses[static_cast<std::size_t>(it - support.begin())];
                return m > 0 ? std::log(m) : -kInf;
            }
        }
        return -kInf;
    }

    double cdf(double x) const {
        switch (kind) {
            case DensityKind::normal: return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
            case DensityKind::exponential: return x <= 0 ? 0.0 : -std::expm1(-rate * x);
            case DensityKind::bernoulli: return x < 0 ? 0.0 : (x < 1 ? 1.0 - p : 1.0);
            case DensityKind::poisson: {
                if (x < 0) return 0.0;
                double term = std::exp(-rate), total = term;
                for (double k = 1; k <= std::floor(x); ++k) {
                    term *= rate / k;
                    total += term;
                }
                return std::min(1.0, total);
            }
            case DensityKind::lattice: {
                double total = 0.0;
                for (std::size_t i = 0; i < support.size() && support[i] <= x; ++i) total += masses[i];
                return std::min(1.0, total);
            }
        }
        return 0.0;
    }

    template <class Rng>
    double sample(Rng& rng) const {
        switch (kind) {
            case DensityKind::normal: return std::normal_distribution<double>(mean, sd)(rng);
            case DensityKind::exponential: return std::exponential_distribution<double>(rate)(rng);
            case DensityKind::poisson: return static_cast<double>(std::poisson_distribution<long>(rate)(rng));
            case DensityKind::bernoulli: return uniform01(rng) < p ? 1.0 : 0.0;
            case DensityKind::lattice: {
                const double u = uniform01(rng);
                double acc = 0.0;
                std::size_t last = 0;
                for (std::size_t i = 0; i < support.size(); ++i) {
                    if (masses[i] <= 0) continue;
                    last = i;
                    acc += masses[i];
                    if (u < acc) return support[i];
                }
                return support[last];
            }
        }
        return 0.0;
    }

private:
    static double atom_tolerance(double x) { return 1e-9 * std::max(1.0, std::abs(x)); }
    static bool is_atom(double x, double atom) { return std::abs(x - atom) <= atom_tolerance(atom); }

    template <class Rng>
    static double uniform01(Rng& rng) {
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    }
};

/// Base law F (in control) and change law G (out of control).
struct DistributionPair {
    DensitySpec base;
    DensitySpec change;

    DistributionPair() = default;
    DistributionPair(DensitySpec f, DensitySpec g) : base(std::move(f)), change(std::move(g)) { validate(); }

    void validate() const {
        base.validate();
        change.validate();
        // No common reference measure is defined for a discrete/continuous mix.
        require(base.is_discrete() == change.is_discrete(),
                "base and change laws must both be discrete or both be continuous");
    }

    DistributionPair swapped() const { return DistributionPair(change, base); }

    bool finite_support() const { return base.has_finite_support() && change.has_finite_support(); }
};

/// log g(x) - log f(x) in the extended reals.
inline double log_likelihood_ratio(const DistributionPair& pair, double x) {
    const double lf = pair.base.log_density(x);
    const double lg = pair.change.log_density(x);
    if (lf == -kInf && lg == -kInf)
        throw Error(ErrorKind::zero_probability, "x = " + std::to_string(x) + " lies outside both supports");
    if (lf == -kInf) return kInf;
    if (lg == -kInf) return -kInf;
    return lg - lf;
}

/// Sample length plus ordered disjoint change intervals (a_k, b_k].
struct ChangeScenario {
    std::size_t n = 0;
    std::vector<std::pair<std::size_t, std::size_t>> intervals;

    ChangeScenario() = default;
    ChangeScenario(std::size_t length, std::vector<std::pair<std::size_t, std::size_t>> iv)
        : n(length), intervals(std::move(iv)) {
        validate();
    }

    void validate() const {
        require(n > 0, "scenario length must be positive");
        for (std::size_t k = 0; k < intervals.size(); ++k) {
            const auto [a, b] = intervals[k];
            require(a < b, "change interval must satisfy a < b");
            require(b <= n, "change interval exceeds the sample length");
            require(k == 0 || intervals[k - 1].second < a, "change intervals must be ordered and disjoint");
        }
    }

    /// True if observation i (1-based) is drawn from the change law.
    bool in_change(std::size_t i) const {
        for (const auto& [a, b] : intervals)
            if (i > a && i <= b) return true;
        return false;
    }
};

inline std::vector<double> sample_scenario(const ChangeScenario& scenario, const DistributionPair& pair,
                                           std::uint64_t seed) {
    scenario.validate();
    CounterRng rng(seed);
    std::vector<double> out(scenario.n);
    std::size_t next = 0;
    for (std::size_t i = 1; i <= scenario.n; ++i) {
        while (next < scenario.intervals.size() && scenario.intervals[next].second < i) ++next;
        const bool changed = next < scenario.intervals.size() && i > scenario.intervals[next].first;
        out[i - 1] = changed ? pair.change.sample(rng) : pair.base.sample(rng);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Canonical one-parameter exponential families, f(x|theta) = exp(theta x - psi(theta)) h(x).

enum class FamilyKind { normal_unit_variance, bernoulli, poisson, exponential };

inline const char* to_string(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::normal_unit_variance: return "normal";
        case FamilyKind::bernoulli: return "bernoulli";
        case FamilyKind::poisson: return "poisson";
        case FamilyKind::exponential: return "exponential";
    }
    return "unknown";
}

struct ExponentialFamilyModel {
    FamilyKind kind = FamilyKind::normal_unit_variance;

    /// Open natural-parameter domain.
    std::pair<double, double> theta_domain() const {
        if (kind == FamilyKind::exponential) return {-kInf, 0.0};
        return {-kInf, kInf};
    }
    /// Open range of the mean map.
    std::pair<double, double> mean_domain() const {
        switch (kind) {
            case FamilyKind::normal_unit_variance: return {-kInf, kInf};
            case FamilyKind::bernoulli: return {0.0, 1.0};
            case FamilyKind::poisson:
            case FamilyKind::exponential: return {0.0, kInf};
        }
        return {-kInf, kInf};
    }

    double log_partition(double theta) const {
        switch (kind) {
            case FamilyKind::normal_unit_variance: return 0.5 * theta * theta;
            case FamilyKind::bernoulli: return theta > 0 ? theta + std::log1p(std::exp(-theta)) : std::log1p(std::exp(theta));
            case FamilyKind::poisson: return std::exp(theta);
            case FamilyKind::exponential: return -std::log(-theta);
        }
        return 0.0;
    }

    double mean_of(double theta) const {
        switch (kind) {
            case FamilyKind::normal_unit_variance: return theta;
            case FamilyKind::bernoulli: return 1.0 / (1.0 + std::exp(-theta));
            case FamilyKind::poisson: return std::exp(theta);
            case FamilyKind::exponential: return -1.0 / theta;
        }
        return 0.0;
    }

    double theta_of(double mu) const {
        const auto [lo, hi] = mean_domain();
        if (!(mu > lo && mu < hi)) throw Error(ErrorKind::boundary_mle, "mean " + std::to_string(mu) + " on or outside the mean domain");
        switch (kind) {
            case FamilyKind::normal_unit_variance: return mu;
            case FamilyKind::bernoulli: return std::log(mu / (1.0 - mu));
            case FamilyKind::poisson: return std::log(mu);
            case FamilyKind::exponential: return -1.0 / mu;
        }
        return 0.0;
    }

    /// Member of the family as a DensitySpec.
    DensitySpec density(double theta) const {
        switch (kind) {
            case FamilyKind::normal_unit_variance: return DensitySpec::normal(theta, 1.0);
            case FamilyKind::bernoulli: return DensitySpec::bernoulli(mean_of(theta));
            case FamilyKind::poisson: return DensitySpec::poisson(std::exp(theta));
            case FamilyKind::exponential: return DensitySpec::exponential(-theta);
        }
        return {};
    }

    /// Mean moved inside the open mean domain by 1/(2m) when it sits on a boundary.
    double clamp_mean(double mu, std::size_t m) const {
        const double eps = 1.0 / (2.0 * static_cast<double>(m));
        const auto [lo, hi] = mean_domain();
        if (std::isfinite(lo) && mu <= lo) return lo + eps;
        if (std::isfinite(hi) && mu >= hi) return hi - eps;
        return mu;
    }
};

inline double sample_mean(std::span<const double> sample) {
    require(!sample.empty(), "sample must be nonempty");
    return std::accumulate(sample.begin(), sample.end(), 0.0) / static_cast<double>(sample.size());
}

/// Solves psi'(theta) = sample mean; throws boundary_mle on a degenerate mean.
inline double mle_natural_parameter(const ExponentialFamilyModel& family, std::span<const double> sample) {
    return family.theta_of(sample_mean(sample));
}

/// Same as mle_natural_parameter but clamps a boundary mean by 1/(2m).
inline double clamped_mle_natural_parameter(const ExponentialFamilyModel& family, std::span<const double> sample) {
    return family.theta_of(family.clamp_mean(sample_mean(sample), sample.size()));
}

}  // namespace tcd
