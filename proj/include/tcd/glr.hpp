#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tcd/error.hpp"
#include "tcd/model.hpp"

namespace tcd {

struct GlrConfig {
    double omega = 0.6;  // candidate change points stay ceil(t^omega) away from 0 and t
    double h = kInf;
    std::optional<double> theta0;  // known baseline natural parameter
    std::optional<double> theta1;  // restricts the post-change sup to one value
    std::size_t min_segment = 2;

    void validate() const {
        require(omega > 0 && omega < 1, "omega must lie in (0, 1)");
        require(min_segment >= 2, "min_segment must be at least 2");
        require(!std::isnan(h), "GLR threshold is NaN");
    }
};

/// Prefix sums of a series, so segment means cost O(1).
class SeriesSums {
public:
    explicit SeriesSums(std::span<const double> x) : prefix_(x.size() + 1, 0.0) {
        for (std::size_t i = 0; i < x.size(); ++i) prefix_[i + 1] = prefix_[i] + x[i];
    }
    std::size_t size() const { return prefix_.size() - 1; }
    /// Sum of x_{lo+1}, ..., x_hi (1-based observations).
    double sum(std::size_t lo, std::size_t hi) const { return prefix_[hi] - prefix_[lo]; }

private:
    std::vector<double> prefix_;
};

/// Distance of candidate change points from both ends of [0, t].
inline std::size_t glr_margin(const GlrConfig& config, std::size_t t) {
    const auto m = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(t), config.omega) - 1e-12));
    return std::max(m, config.min_segment);
}

/// GLR(k, t) = sup_theta sum_{i=k+1}^t log f(x_i|theta) / f(x_i|theta0_hat), where
/// theta0_hat is the known baseline or the MLE on x_1..x_k. Boundary means are
/// moved inside the mean domain by 1/(2m).
inline double glr_at(const SeriesSums& sums, const ExponentialFamilyModel& family, const GlrConfig& config,
                     std::size_t k, std::size_t t) {
    require(k < t && t <= sums.size(), "GLR needs 0 <= k < t <= series length");
    const double m = static_cast<double>(t - k);
    double theta0;
    if (config.theta0) {
        theta0 = *config.theta0;
    } else {
        require(k >= 1, "estimated baseline needs k >= 1");
        theta0 = family.theta_of(family.clamp_mean(sums.sum(0, k) / static_cast<double>(k), k));
    }
    const double total = sums.sum(k, t);
    if (config.theta1) {
        const double theta1 = *config.theta1;
        return (theta1 - theta0) * total - m * (family.log_partition(theta1) - family.log_partition(theta0));
    }
    const double theta1 = family.theta_of(family.clamp_mean(total / m, t - k));
    const double v = (theta1 - theta0) * total - m * (family.log_partition(theta1) - family.log_partition(theta0));
    return std::max(v, 0.0);
}

inline double glr_at(std::span<const double> series, const ExponentialFamilyModel& family, const GlrConfig& config,
                     std::size_t k, std::size_t t) {
    return glr_at(SeriesSums(series), family, config, k, t);
}

struct GlrValue {
    double value = 0.0;
    std::size_t k = 0;     // smallest maximizing change point
    bool warmup = false;   // window empty; value is 0 by convention
};

/// Estimated CUSUM: max of GLR(k, t) over k in [m0, t - m0], m0 = glr_margin(t).
inline GlrValue estimated_cusum_at(const SeriesSums& sums, const ExponentialFamilyModel& family,
                                   const GlrConfig& config, std::size_t t) {
    config.validate();
    require(t <= sums.size(), "t exceeds the series length");
    GlrValue out;
    const std::size_t m0 = glr_margin(config, t);
    if (t < 2 * m0) {
        out.warmup = true;
        return out;
    }
    out.value = -kInf;
    for (std::size_t k = m0; k <= t - m0; ++k) {
        const double v = glr_at(sums, family, config, k, t);
        if (v > out.value) {
            out.value = v;
            out.k = k;
        }
    }
    return out;
}

inline GlrValue estimated_cusum_at(std::span<const double> series, const ExponentialFamilyModel& family,
                                   const GlrConfig& config, std::size_t t) {
    return estimated_cusum_at(SeriesSums(series), family, config, t);
}

struct GlrRun {
    std::optional<std::size_t> stopping_time;
    std::vector<double> w_hat;  // entry t-1 is the statistic at t; warmup entries are 0
};

/// T_h = first t with estimated CUSUM >= h (warmup times never stop). Scans
/// t = 1..min(n, max_t).
inline GlrRun glr_stopping_time(std::span<const double> series, const ExponentialFamilyModel& family,
                                const GlrConfig& config, std::size_t max_t = 0, bool keep_path = false) {
    config.validate();
    const SeriesSums sums(series);
    const std::size_t last = max_t == 0 ? sums.size() : std::min(max_t, sums.size());
    GlrRun run;
    for (std::size_t t = 1; t <= last; ++t) {
        const auto v = estimated_cusum_at(sums, family, config, t);
        if (keep_path) run.w_hat.push_back(v.value);
        if (!v.warmup && v.value >= config.h && !run.stopping_time) {
            run.stopping_time = t;
            if (!keep_path) break;
        }
    }
    return run;
}

}  // namespace tcd
