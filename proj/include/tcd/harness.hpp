#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tcd/error.hpp"
#include "tcd/exactdist.hpp"
#include "tcd/glr.hpp"
#include "tcd/lattice.hpp"
#include "tcd/model.hpp"
#include "tcd/multi.hpp"
#include "tcd/parallel.hpp"
#include "tcd/rng.hpp"
#include "tcd/single.hpp"
#include "tcd/walks.hpp"

namespace tcd {

enum class ExperimentKind { level, far, frr, mle_error, glr_fa, asymptotic_pmf };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::level: return "level";
        case ExperimentKind::far: return "far";
        case ExperimentKind::frr: return "frr";
        case ExperimentKind::mle_error: return "mle-error";
        case ExperimentKind::glr_fa: return "glr-fa";
        case ExperimentKind::asymptotic_pmf: return "asymptotic-pmf";
    }
    return "unknown";
}

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::far;
    ChangeScenario scenario;
    DistributionPair pair;
    std::size_t replicates = 20000;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    double beta = 0.05;

    // Threshold calibration (once per config, never per replicate).
    std::optional<ThresholdMethod> method;  // default: exact when both laws are finite
    std::size_t threshold_replicates = 100000;
    bool conservative = true;
    std::optional<double> h_alpha;  // fixtures that bypass calibration
    std::optional<double> h_beta;

    // glr-fa
    FamilyKind family = FamilyKind::normal_unit_variance;
    double omega = 0.6;
    std::optional<double> theta0;
    std::optional<double> glr_threshold;
    std::size_t glr_window = 0;  // alarms counted at t <= window; 0 means floor(n^(omega/2))

    // mle-error and asymptotic-pmf
    long max_offset = 20;
    std::size_t horizon = kDefaultHorizon;
    double lattice_step = 0.0;

    void validate() const {
        scenario.validate();
        pair.validate();
        if (kind != ExperimentKind::asymptotic_pmf) require(replicates >= 100, "experiments need at least 100 replicates");
        require(alpha > 0 && alpha <= 1, "alpha must lie in (0, 1]");
        require(beta > 0 && beta <= 1, "beta must lie in (0, 1]");
        require(max_offset >= 0, "max_offset must be nonnegative");
        if (kind == ExperimentKind::mle_error) require(scenario.intervals.size() == 1, "mle-error needs exactly one change interval");
    }
};

struct Estimate {
    std::string name;
    double value = 0.0;
    double standard_error = 0.0;
    std::size_t replicates = 0;

    friend bool operator==(const Estimate&, const Estimate&) = default;
};

struct PmfRow {
    long offset = 0;
    double p_a = 0.0, se_a = 0.0;  // P(a_hat - a = offset)
    double p_b = 0.0, se_b = 0.0;  // P(b_hat - b = offset)
    double bracket_a = 0.0, bracket_b = 0.0;

    friend bool operator==(const PmfRow&, const PmfRow&) = default;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<Estimate> estimates;
    std::vector<PmfRow> pmf;
    double h_alpha = 0.0;
    double h_beta_tilde = 0.0;
    double wall_time_seconds = 0.0;

    const Estimate* find(const std::string& name) const {
        for (const auto& e : estimates)
            if (e.name == name) return &e;
        return nullptr;
    }
};

/// Mean of an indicator over R replicates, with SE sqrt(p (1 - p) / R).
inline Estimate indicator_estimate(std::string name, std::size_t hits, std::size_t reps) {
    Estimate e;
    e.name = std::move(name);
    e.replicates = reps;
    e.value = static_cast<double>(hits) / static_cast<double>(reps);
    e.standard_error = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(reps));
    return e;
}

namespace detail {

inline constexpr std::uint64_t kCalibrationStream = 0x63616c6962726174ULL;

inline ThresholdOptions calibration_options(const ExperimentConfig& c) {
    ThresholdOptions o;
    o.method = c.method.value_or(c.pair.finite_support() ? ThresholdMethod::exact_lattice : ThresholdMethod::monte_carlo);
    o.seed = sub_seed(c.seed ^ kCalibrationStream, 0);
    o.replicates = c.threshold_replicates;
    o.conservative = c.conservative;
    return o;
}

/// alpha = 1 is a sentinel: h = log(moment) keeps the run well defined.
inline double threshold_h(const DistributionPair& pair, std::size_t n, double level, const ThresholdOptions& o) {
    if (level >= 1.0) return false_alarm_threshold(pair, n, 0.5, o).h - std::log(2.0);
    return false_alarm_threshold(pair, n, level, o).h;
}

inline DetectorConfig detector_for(const ExperimentConfig& c) {
    DetectorConfig d;
    d.alpha = c.alpha;
    d.beta = c.beta;
    d.n = c.scenario.n;
    const auto o = calibration_options(c);
    ThresholdOptions fwd = o, rev = o;
    fwd.seed = sub_seed(o.seed, 0);
    rev.seed = sub_seed(o.seed, 1);
    d.h_alpha = c.h_alpha ? *c.h_alpha : threshold_h(c.pair, c.scenario.n, c.alpha, fwd);
    d.h_beta_tilde = c.h_beta ? *c.h_beta : threshold_h(c.pair.swapped(), c.scenario.n, c.beta, rev);
    d.method = o.method;
    return d;
}

inline WalkTrace replicate_walk(const ExperimentConfig& c, std::size_t r) {
    return random_walk(c.pair, sample_scenario(c.scenario, c.pair, sub_seed(c.seed, r)));
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

struct Counts {
    std::size_t a = 0, b = 0;
};

}  // namespace detail

/// Empirical P(Lambda >= h_alpha) of the single-interval LRT.
inline ExperimentResult run_level_experiment(const ExperimentConfig& config) {
    config.validate();
    detail::Timer timer;
    ExperimentResult res;
    res.config = config;
    res.h_alpha = config.h_alpha ? *config.h_alpha
                                 : detail::threshold_h(config.pair, config.scenario.n, config.alpha,
                                                       detail::calibration_options(config));
    const double h = res.h_alpha;
    const auto hits = parallel_reduce(
        config.replicates, [] { return std::size_t{0}; },
        [&](std::size_t& acc, std::size_t r) { acc += lrt_statistic(cusum(detail::replicate_walk(config, r))) >= h; },
        [](std::size_t& into, const std::size_t& from) { into += from; });
    res.estimates.push_back(indicator_estimate("level", hits, config.replicates));
    res.wall_time_seconds = timer.seconds();
    return res;
}

namespace detail {

inline ExperimentResult run_detector_experiment(const ExperimentConfig& config, bool far_first) {
    config.validate();
    Timer timer;
    ExperimentResult res;
    res.config = config;
    const DetectorConfig det = detector_for(config);
    res.h_alpha = det.h_alpha;
    res.h_beta_tilde = det.h_beta_tilde;
    const auto counts = parallel_reduce(
        config.replicates, [] { return Counts{}; },
        [&](Counts& acc, std::size_t r) {
            const auto report = sequential_detect(replicate_walk(config, r), det);
            acc.a += false_alarm_indicator(report, config.scenario);
            acc.b += false_readjustment_indicator(report, config.scenario);
        },
        [](Counts& into, const Counts& from) {
            into.a += from.a;
            into.b += from.b;
        });
    auto far = indicator_estimate("far", counts.a, config.replicates);
    auto frr = indicator_estimate("frr", counts.b, config.replicates);
    if (far_first) {
        res.estimates = {far, frr};
    } else {
        res.estimates = {frr, far};
    }
    res.wall_time_seconds = timer.seconds();
    return res;
}

}  // namespace detail

/// Familywise false alarm rate of the sequential detector.
inline ExperimentResult run_far_experiment(const ExperimentConfig& config) {
    return detail::run_detector_experiment(config, true);
}

/// Familywise false readjustment rate of the sequential detector.
inline ExperimentResult run_frr_experiment(const ExperimentConfig& config) {
    return detail::run_detector_experiment(config, false);
}

/// Empirical pmf of (a_hat - a) and (b_hat - b) for one planted interval.
/// The "unique" estimates also require the maximum of W (for b) and the
/// minimum of S on [0, b_hat] (for a) to be attained once.
inline ExperimentResult run_mle_error_experiment(const ExperimentConfig& config) {
    config.validate();
    detail::Timer timer;
    ExperimentResult res;
    res.config = config;
    const auto [a, b] = config.scenario.intervals.front();
    const long R = config.max_offset;
    const std::size_t width = static_cast<std::size_t>(2 * R + 1);
    struct Acc {
        std::vector<std::size_t> pa, pb;
        std::size_t a_unique = 0, b_unique = 0, tail_a10 = 0, tail_b10 = 0, beyond = 0;
    };
    const auto acc = parallel_reduce(
        config.replicates,
        [&] {
            Acc x;
            x.pa.assign(width, 0);
            x.pb.assign(width, 0);
            return x;
        },
        [&](Acc& x, std::size_t r) {
            const auto walk = detail::replicate_walk(config, r);
            const auto est = mle_interval(walk);
            const long da = static_cast<long>(est.a_hat) - static_cast<long>(a);
            const long db = static_cast<long>(est.b_hat) - static_cast<long>(b);
            if (std::abs(da) <= R) ++x.pa[static_cast<std::size_t>(da + R)];
            if (std::abs(db) <= R) ++x.pb[static_cast<std::size_t>(db + R)];
            if (std::abs(da) > R || std::abs(db) > R) ++x.beyond;
            if (std::abs(da) >= 10) ++x.tail_a10;
            if (std::abs(db) >= 10) ++x.tail_b10;
            if (db == 0) {
                const auto w = cusum(walk);
                bool unique = true;
                for (std::size_t t = 0; t < w.size() && unique; ++t)
                    if (t != est.b_hat && w[t] >= w[est.b_hat] - kZeroTolerance) unique = false;
                x.b_unique += unique;
            }
            if (da == 0) {
                bool unique = true;
                for (std::size_t j = 0; j <= est.b_hat && unique; ++j)
                    if (j != est.a_hat && walk[j] <= walk[est.a_hat] + kZeroTolerance) unique = false;
                x.a_unique += unique;
            }
        },
        [](Acc& into, const Acc& from) {
            for (std::size_t i = 0; i < into.pa.size(); ++i) {
                into.pa[i] += from.pa[i];
                into.pb[i] += from.pb[i];
            }
            into.a_unique += from.a_unique;
            into.b_unique += from.b_unique;
            into.tail_a10 += from.tail_a10;
            into.tail_b10 += from.tail_b10;
            into.beyond += from.beyond;
        });
    const std::size_t reps = config.replicates;
    res.estimates.push_back(indicator_estimate("p_a0", acc.pa[static_cast<std::size_t>(R)], reps));
    res.estimates.push_back(indicator_estimate("p_b0", acc.pb[static_cast<std::size_t>(R)], reps));
    res.estimates.push_back(indicator_estimate("p_a0_unique", acc.a_unique, reps));
    res.estimates.push_back(indicator_estimate("p_b0_unique", acc.b_unique, reps));
    res.estimates.push_back(indicator_estimate("tail_a_ge_10", acc.tail_a10, reps));
    res.estimates.push_back(indicator_estimate("tail_b_ge_10", acc.tail_b10, reps));
    res.estimates.push_back(indicator_estimate("tail_beyond_max_offset", acc.beyond, reps));
    for (long o = -R; o <= R; ++o) {
        const auto ea = indicator_estimate("", acc.pa[static_cast<std::size_t>(o + R)], reps);
        const auto eb = indicator_estimate("", acc.pb[static_cast<std::size_t>(o + R)], reps);
        res.pmf.push_back(PmfRow{o, ea.value, ea.standard_error, eb.value, eb.standard_error, 0.0, 0.0});
    }
    res.wall_time_seconds = timer.seconds();
    return res;
}

/// GLR false alarms at t <= window under F-only data. The statistic at t only
/// reads x_1..x_t, so each replicate draws just the first `window` values.
inline ExperimentResult run_glr_fa_experiment(const ExperimentConfig& config) {
    config.validate();
    detail::Timer timer;
    ExperimentResult res;
    res.config = config;
    const std::size_t n = config.scenario.n;
    const std::size_t window = config.glr_window
                                   ? config.glr_window
                                   : static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), config.omega / 2.0)));
    GlrConfig glr;
    glr.omega = config.omega;
    glr.theta0 = config.theta0;
    glr.h = config.glr_threshold ? *config.glr_threshold
                                 : detail::threshold_h(config.pair, n, config.alpha, detail::calibration_options(config));
    res.h_alpha = glr.h;
    const ExponentialFamilyModel family{config.family};
    const auto hits = parallel_reduce(
        config.replicates, [] { return std::size_t{0}; },
        [&](std::size_t& acc, std::size_t r) {
            CounterRng rng(sub_seed(config.seed, r));
            std::vector<double> x(window);
            for (auto& v : x) v = config.pair.base.sample(rng);
            acc += glr_stopping_time(x, family, glr, window).stopping_time.has_value();
        },
        [](std::size_t& into, const std::size_t& from) { into += from; });
    res.estimates.push_back(indicator_estimate("glr_alarm_rate", hits, config.replicates));
    res.estimates.push_back(Estimate{"window", static_cast<double>(window), 0.0, config.replicates});
    res.wall_time_seconds = timer.seconds();
    return res;
}

/// Tabulates the asymptotic MLE-error pmf for offsets in [-max_offset, max_offset].
inline ExperimentResult run_asymptotic_pmf_experiment(const ExperimentConfig& config) {
    config.validate();
    detail::Timer timer;
    ExperimentResult res;
    res.config = config;
    LatticeOptions lo;
    lo.step = config.lattice_step;
    const AsymptoticPmf pmf(lattice_llr_pair(config.pair, lo), config.horizon);
    double total_b = 0.0, total_a = 0.0;
    for (long o = -config.max_offset; o <= config.max_offset; ++o) {
        const auto va = pmf(o, PmfSide::a);
        const auto vb = pmf(o, PmfSide::b);
        res.pmf.push_back(PmfRow{o, va.value, 0.0, vb.value, 0.0, va.bracket, vb.bracket});
        total_a += va.value;
        total_b += vb.value;
    }
    res.estimates.push_back(Estimate{"sum_p_a", total_a, 0.0, 0});
    res.estimates.push_back(Estimate{"sum_p_b", total_b, 0.0, 0});
    res.wall_time_seconds = timer.seconds();
    return res;
}

inline ExperimentResult run_experiment(const ExperimentConfig& config) {
    switch (config.kind) {
        case ExperimentKind::level: return run_level_experiment(config);
        case ExperimentKind::far: return run_far_experiment(config);
        case ExperimentKind::frr: return run_frr_experiment(config);
        case ExperimentKind::mle_error: return run_mle_error_experiment(config);
        case ExperimentKind::glr_fa: return run_glr_fa_experiment(config);
        case ExperimentKind::asymptotic_pmf: return run_asymptotic_pmf_experiment(config);
    }
    throw Error(ErrorKind::invalid_argument, "unknown experiment kind");
}

}  // namespace tcd
