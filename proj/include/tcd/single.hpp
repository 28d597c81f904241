#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tcd/error.hpp"
#include "tcd/model.hpp"
#include "tcd/parallel.hpp"
#include "tcd/rng.hpp"
#include "tcd/walks.hpp"

namespace tcd {

/// Estimated change interval (a_hat, b_hat] with the LRT statistic.
struct IntervalEstimate {
    std::size_t a_hat = 0;
    std::size_t b_hat = 0;
    double lambda = 0.0;
    bool no_change = true;

    friend bool operator==(const IntervalEstimate&, const IntervalEstimate&) = default;
};

/// b_hat is the earliest argmax of W (values within kZeroTolerance of the
/// maximum tie), a_hat the last zero of W at or before b_hat.
inline IntervalEstimate mle_interval(const WalkTrace& walk) {
    const auto w = cusum(walk);
    const double top = w.max();
    IntervalEstimate est;
    if (top <= kZeroTolerance) return est;
    std::size_t b = 0;
    while (w[b] < top - kZeroTolerance) ++b;
    std::size_t a = b;
    while (w[a] > kZeroTolerance) --a;
    est.a_hat = a;
    est.b_hat = b;
    est.lambda = w[b];
    est.no_change = false;
    return est;
}

inline double lrt_statistic(const CusumTrace& c) {
    require(c.kind == CusumKind::forward && c.origin == 0, "LRT statistic needs the forward CUSUM with origin 0");
    return c.max();
}

enum class ThresholdMethod { exact_lattice, monte_carlo };

inline const char* to_string(ThresholdMethod m) {
    return m == ThresholdMethod::exact_lattice ? "exact-lattice" : "monte-carlo";
}

/// h = log(moment / alpha), where moment estimates E_F exp(W_n).
struct ThresholdSpec {
    double alpha = 0.05;
    double h = 0.0;
    double moment = 1.0;
    ThresholdMethod method = ThresholdMethod::exact_lattice;
    double standard_error = 0.0;
    std::size_t replicates = 0;
    bool conservative = false;
    std::size_t n = 0;
};

struct MomentEstimate {
    double mean = 1.0;
    double standard_error = 0.0;
    std::size_t replicates = 0;
};

/// Exact E exp(W_n) for a finitely supported base law.
inline double exact_cusum_moment(const DistributionPair& pair, std::size_t n) {
    const auto dist = lattice_cusum_distribution(LatticeWalkDistribution::under_base(pair, n));
    double moment = 0.0;
    for (std::size_t i = 0; i < dist.support.size(); ++i) moment += dist.masses[i] * std::exp(dist.support[i]);
    if (!std::isfinite(moment)) throw Error(ErrorKind::unbounded_moment, "E_F exp(W_n) is not finite");
    return moment;
}

/// G-mass of the support of F, i.e. E_F exp(Y); 1 unless G charges F-null sets.
inline double change_mass_on_base_support(const DistributionPair& pair) {
    if (pair.base.has_finite_support()) {
        double c = 0.0;
        for (const auto& [x, m] : pair.base.atoms()) c += std::exp(pair.change.log_density(x));
        return std::min(c, 1.0);
    }
    if (pair.change.has_finite_support()) {
        double c = 0.0;
        for (const auto& [x, m] : pair.change.atoms())
            if (pair.base.log_density(x) > -kInf) c += m;
        return c;
    }
    if (pair.base.kind == DensityKind::exponential && pair.change.kind == DensityKind::normal)
        return 1.0 - pair.change.cdf(0.0);
    return 1.0;
}

/// Monte Carlo E_F exp(W_n); replicate r uses sub_seed(seed, r).
///
/// exp(W_n) itself has a 1/x tail under F, so its sample mean is badly biased
/// low at moderate n. Each replicate instead scores the compensator:
/// exp(W_t) = exp(W_{t-1}) L_t + (1 - exp(W_{t-1}) L_t)^+ with E_F L_t = c gives
/// E exp(W_n) = c^n + sum_t c^(n-t) E (1 - exp(W_{t-1} + Y_t))^+,
/// an unbiased score with every summand in [0, 1].
inline MomentEstimate monte_carlo_cusum_moment(const DistributionPair& pair, std::size_t n, std::uint64_t seed,
                                               std::size_t replicates) {
    struct Acc {
        double sum = 0.0, sum_sq = 0.0;
    };
    const double c = change_mass_on_base_support(pair);
    std::vector<double> weight(n + 1, 1.0);  // weight[k] = c^k
    for (std::size_t k = 1; k <= n; ++k) weight[k] = weight[k - 1] * c;
    auto acc = parallel_reduce(
        replicates, [] { return Acc{}; },
        [&](Acc& a, std::size_t r) {
            CounterRng rng(sub_seed(seed, r));
            double w = 0.0, u = weight[n];
            for (std::size_t t = 1; t <= n; ++t) {
                const double y = log_likelihood_ratio(pair, pair.base.sample(rng));
                const double z = w + y;
                if (z < 0) u += weight[n - t] * -std::expm1(z);
                w = cusum_step(w, y);
            }
            a.sum += u;
            a.sum_sq += u * u;
        },
        [](Acc& into, const Acc& from) {
            into.sum += from.sum;
            into.sum_sq += from.sum_sq;
        });
    MomentEstimate est;
    est.replicates = replicates;
    const double r = static_cast<double>(replicates);
    est.mean = acc.sum / r;
    const double var = std::max(0.0, acc.sum_sq / r - est.mean * est.mean) * r / std::max(1.0, r - 1.0);
    est.standard_error = std::sqrt(var / r);
    if (!std::isfinite(est.mean)) throw Error(ErrorKind::unbounded_moment, "E_F exp(W_n) is not finite");
    return est;
}

struct ThresholdOptions {
    ThresholdMethod method = ThresholdMethod::exact_lattice;
    std::uint64_t seed = 0;
    std::size_t replicates = 100000;
    /// Monte Carlo only: inflate h by log(1 + 2 SE / moment).
    bool conservative = true;
};

/// Level-alpha threshold h = log(E_F exp(W_n) / alpha) (Doob's maximal inequality).
inline ThresholdSpec false_alarm_threshold(const DistributionPair& pair, std::size_t n, double alpha,
                                           const ThresholdOptions& options = {}) {
    require(alpha > 0 && alpha < 1, "alpha must lie in (0, 1)");
    ThresholdSpec spec;
    spec.alpha = alpha;
    spec.method = options.method;
    spec.n = n;
    if (options.method == ThresholdMethod::exact_lattice) {
        if (!pair.finite_support())
            throw Error(ErrorKind::unsupported, "exact-lattice thresholds need finitely supported laws");
        spec.moment = n == 0 ? 1.0 : exact_cusum_moment(pair, n);
    } else {
        require(options.replicates >= 1000, "Monte Carlo thresholds need at least 1000 replicates");
        const auto est = n == 0 ? MomentEstimate{1.0, 0.0, options.replicates}
                                : monte_carlo_cusum_moment(pair, n, options.seed, options.replicates);
        spec.moment = est.mean;
        spec.standard_error = est.standard_error;
        spec.replicates = est.replicates;
        spec.conservative = options.conservative;
    }
    spec.h = std::log(spec.moment / alpha);
    if (spec.conservative) spec.h += std::log1p(2.0 * spec.standard_error / spec.moment);
    return spec;
}

enum class TestDecision { accept, reject };

/// Rejects the no-change hypothesis when the statistic reaches h.
inline TestDecision lrt_test(const WalkTrace& walk, const ThresholdSpec& threshold) {
    return lrt_statistic(cusum(walk)) >= threshold.h ? TestDecision::reject : TestDecision::accept;
}

/// First t with W_t >= h.
inline std::optional<std::size_t> stopping_time(const CusumTrace& c, double h) {
    require(h > 0, "stopping threshold must be positive");
    for (std::size_t t = 0; t < c.size(); ++t)
        if (c[t] >= h) return t;
    return std::nullopt;
}

/// Local estimate around gamma: a is the latest minimizer of S on [0, gamma],
/// b the earliest maximizer of S on [gamma, n].
inline IntervalEstimate local_likelihood_estimate(const WalkTrace& walk, std::size_t gamma) {
    const std::size_t n = walk.n();
    require(gamma > 0 && gamma <= n, "anchor gamma must satisfy 0 < gamma <= n");
    std::size_t a = 0;
    for (std::size_t j = 1; j <= gamma; ++j)
        if (walk[j] <= walk[a] + kZeroTolerance) a = j;
    std::size_t b = gamma;
    for (std::size_t j = gamma + 1; j <= n; ++j)
        if (walk[j] > walk[b] + kZeroTolerance) b = j;
    IntervalEstimate est;
    est.a_hat = a;
    est.b_hat = b;
    est.lambda = walk[b] - walk[a];
    est.no_change = a == b;
    return est;
}

/// True when (a, b) satisfies the four strict excursion inequalities:
/// S_j > S_a for j < a and for a < j <= b; S_j < S_b for a <= j < b and for j > b.
inline bool satisfies_ple_inequalities(const WalkTrace& walk, std::size_t a, std::size_t b,
                                       double tol = kZeroTolerance) {
    const std::size_t n = walk.n();
    if (a > b || b > n) return false;
    for (std::size_t j = 0; j <= n; ++j) {
        if (j != a && j <= b && !(walk[j] > walk[a] + tol)) return false;
        if (j != b && j >= a && !(walk[j] < walk[b] - tol)) return false;
    }
    return true;
}

/// Pre-likelihood estimators: a in the forward kernel, b in the reverse kernel,
/// no kernel point strictly between, and the strict inequalities verified.
inline std::vector<std::pair<std::size_t, std::size_t>> enumerate_ples(const WalkTrace& walk) {
    const auto fwd = cusum(walk);
    const auto rev = reverse_cusum(walk);
    const std::size_t n = walk.n();
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t a = 0; a <= n; ++a) {
        if (fwd[a] > kZeroTolerance) continue;
        for (std::size_t b = a + 1; b <= n; ++b) {
            const bool in_fwd = fwd[b] <= kZeroTolerance;
            const bool in_rev = rev[b] <= kZeroTolerance;
            if (in_rev && satisfies_ple_inequalities(walk, a, b)) out.emplace_back(a, b);
            if (in_fwd || in_rev) break;  // b is a kernel point; nothing further qualifies
        }
    }
    return out;
}

}  // namespace tcd
