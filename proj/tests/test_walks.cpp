#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "tcd/rng.hpp"
#include "tcd/walks.hpp"

using namespace tcd;

namespace {

const std::vector<double> kFive{-1, 2, 1, -3, 2};

std::vector<double> values(const CusumTrace& c) { return c.values; }

std::vector<double> random_increments(CounterRng& rng, std::size_t n) {
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> y(n);
    for (auto& v : y) v = z(rng);
    return y;
}

}  // namespace

TEST(Walk, Basics) {
    DistributionPair bern(DensitySpec::bernoulli(0.2), DensitySpec::bernoulli(0.8));
    const std::vector<double> empty;
    EXPECT_EQ(random_walk(bern, empty).values, std::vector<double>{0.0});
    const std::vector<double> x{1, 0};
    const auto w = random_walk(bern, x);
    EXPECT_NEAR(w[1], std::log(4.0), 1e-12);
    EXPECT_NEAR(w[2], 0.0, 1e-12);
    DistributionPair g(DensitySpec::normal(0, 1), DensitySpec::normal(1, 1));
    const std::vector<double> half{0.5, 0.5, 0.5};
    for (double v : random_walk(g, half).values) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Walk, ZeroProbabilityPropagates) {
    DistributionPair bern(DensitySpec::bernoulli(0.2), DensitySpec::bernoulli(0.8));
    const std::vector<double> x{1, 2};
    EXPECT_THROW(random_walk(bern, x), Error);
}

TEST(Cusum, FivePointFixture) {
    const auto w = WalkTrace::from_increments(kFive);
    EXPECT_EQ(values(cusum(w)), (std::vector<double>{0, 0, 2, 3, 0, 2}));
    EXPECT_EQ(values(reverse_cusum(w)), (std::vector<double>{2, 3, 1, 0, 2, 0}));
    EXPECT_EQ(kernel(cusum(w), 0.0), (std::vector<std::size_t>{0, 1, 4}));
    EXPECT_EQ(kernel(reverse_cusum(w), 0.0), (std::vector<std::size_t>{3, 5}));
    EXPECT_EQ(values(renewed_cusum(w, 3, CusumKind::forward)), (std::vector<double>{0, 0, 2}));
    EXPECT_EQ(values(renewed_cusum(w, 3, CusumKind::reverse)), (std::vector<double>{0, 3, 1}));
}

TEST(Cusum, MonotoneWalks) {
    const std::vector<double> down{-1, -2, -0.5}, up{1, 2, 0.5};
    for (double v : cusum(WalkTrace::from_increments(down)).values) EXPECT_EQ(v, 0.0);
    for (double v : reverse_cusum(WalkTrace::from_increments(down)).values) EXPECT_EQ(v, 0.0);
    const auto w = WalkTrace::from_increments(up);
    const auto c = cusum(w);
    const auto rc = reverse_cusum(w);
    for (std::size_t t = 0; t <= w.n(); ++t) {
        EXPECT_EQ(c[t], w[t]);
        EXPECT_EQ(rc[t], w[w.n()] - w[t]);
    }
    const std::vector<double> one{-1};
    EXPECT_EQ(values(reverse_cusum(WalkTrace::from_increments(one))), (std::vector<double>{0, 0}));
}

TEST(Cusum, KernelTolerance) {
    CusumTrace c;
    c.values = {0, 1e-12, 2};
    EXPECT_EQ(kernel(c, 1e-9), (std::vector<std::size_t>{0, 1}));
    CusumTrace z;
    z.values.assign(4, 0.0);
    EXPECT_EQ(kernel(z, 0.0).size(), 4u);
}

TEST(Cusum, RenewalEndpoints) {
    const auto w = WalkTrace::from_increments(kFive);
    EXPECT_EQ(values(renewed_cusum(w, 0, CusumKind::forward)), values(cusum(w)));
    EXPECT_EQ(values(renewed_cusum(w, 5, CusumKind::forward)), std::vector<double>{0.0});
    EXPECT_THROW(renewed_cusum(w, 6, CusumKind::forward), Error);
}

TEST(Cusum, InfiniteSteps) {
    const std::vector<double> y{1, kInf, 2, -kInf, 1};
    const auto c = cusum(WalkTrace::from_increments(y));
    EXPECT_EQ(c[2], kInf);
    EXPECT_EQ(c[3], kInf);
    EXPECT_EQ(c[4], 0.0);
    EXPECT_EQ(c[5], 1.0);
}

// Invariants over random walks: recursion vs definition, domination,
// nonnegativity and kernel = running-minimum times.
TEST(Cusum, RandomInvariants) {
    CounterRng rng(2024);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t n = 1 + rng() % 200;
        const auto y = random_increments(rng, n);
        const auto w = WalkTrace::from_increments(y);
        const auto s = oracle::partial_sums(y);
        const auto def = oracle::cusum_definition(s);
        const auto rdef = oracle::reverse_cusum_definition(s);
        const auto c = cusum(w), rc = reverse_cusum(w);
        for (std::size_t t = 0; t <= n; ++t) {
            ASSERT_NEAR(c[t], def[t], 1e-9);
            ASSERT_NEAR(rc[t], rdef[t], 1e-9);
            ASSERT_GE(c[t], 0.0);
            ASSERT_GE(rc[t], 0.0);
        }
        const std::size_t T = rng() % (n + 1);
        const auto fwd = renewed_cusum(w, T, CusumKind::forward);
        const auto rev = renewed_cusum(w, T, CusumKind::reverse);
        for (std::size_t t = 0; t < fwd.size(); ++t) {
            ASSERT_LE(fwd[t], c[T + t] + 1e-12);
            double mx = -kInf;
            for (std::size_t i = 0; i <= t; ++i) mx = std::max(mx, s[T + i]);
            ASSERT_NEAR(rev[t], mx - s[T + t], 1e-9);
        }
        std::vector<std::size_t> minima;
        double run = kInf;
        for (std::size_t t = 0; t <= n; ++t)
            if (s[t] <= run + 1e-9) {
                minima.push_back(t);
                run = std::min(run, s[t]);
            }
        const auto ker = kernel(c);
        ASSERT_EQ(ker.front(), 0u);
        ASSERT_EQ(ker, minima);
    }
}

TEST(LatticeDp, SmallHorizons) {
    DistributionPair bern(DensitySpec::bernoulli(0.2), DensitySpec::bernoulli(0.8));
    auto d0 = lattice_cusum_distribution(LatticeWalkDistribution::under_base(bern, 0));
    ASSERT_EQ(d0.support.size(), 1u);
    EXPECT_EQ(d0.masses[0], 1.0);
    auto d1 = lattice_cusum_distribution(LatticeWalkDistribution::under_base(bern, 1));
    EXPECT_NEAR(d1.mass_at(0.0), 0.8, 1e-15);
    EXPECT_NEAR(d1.mass_at(std::log(4.0)), 0.2, 1e-15);
    // n = 2 against the four paths.
    std::map<long, double> expect;
    oracle::for_each_binary(2, [&](const std::vector<int>& x) {
        long w = 0;
        double p = 1.0;
        for (int xi : x) {
            w = std::max(0L, w + (xi ? 1 : -1));
            p *= xi ? 0.2 : 0.8;
        }
        expect[w] += p;
    });
    auto d2 = lattice_cusum_distribution(LatticeWalkDistribution::under_base(bern, 2));
    for (auto [k, p] : expect) EXPECT_NEAR(d2.mass_at(k * std::log(4.0)), p, 1e-15);
    EXPECT_NEAR(d2.total(), 1.0, 1e-12);
}

TEST(LatticeDp, MatchesEnumeratedMoment) {
    DistributionPair bern(DensitySpec::bernoulli(0.2), DensitySpec::bernoulli(0.8));
    for (std::size_t n : {3u, 8u, 12u}) {
        const auto d = lattice_cusum_distribution(LatticeWalkDistribution::under_base(bern, n));
        double m = 0.0;
        for (std::size_t i = 0; i < d.support.size(); ++i) m += d.masses[i] * std::exp(d.support[i]);
        EXPECT_NEAR(m, oracle::binary_cusum_moment(n, 0.2, std::log(4.0)), 1e-10);
    }
}

TEST(LatticeDp, MatchesMonteCarloFrequencies) {
    // Three-point law on a lattice; 1e5 simulated CUSUM paths at n = 20.
    LatticeWalkDistribution d;
    d.steps = {-1.0, 0.5, 1.0};
    d.masses = {0.5, 0.3, 0.2};
    d.horizon = 20;
    const auto exact = lattice_cusum_distribution(d);
    const std::size_t reps = 100000;
    std::map<long, std::size_t> counts;
    CounterRng rng(77);
    for (std::size_t r = 0; r < reps; ++r) {
        double w = 0.0;
        for (std::size_t t = 0; t < d.horizon; ++t) {
            const double u = rng.uniform();
            const double y = u < 0.5 ? -1.0 : (u < 0.8 ? 0.5 : 1.0);
            w = std::max(0.0, w + y);
        }
        ++counts[std::lround(w * 2)];
    }
    for (std::size_t i = 0; i < exact.support.size(); ++i) {
        const double p = exact.masses[i];
        const double phat = static_cast<double>(counts[std::lround(exact.support[i] * 2)]) / reps;
        const double se = std::sqrt(std::max(p * (1 - p), 1e-12) / reps);
        EXPECT_LE(std::abs(phat - p), 4 * se + 1e-6) << "atom " << exact.support[i];
    }
}

TEST(LatticeDp, StateCap) {
    LatticeWalkDistribution d;
    d.steps = {-1.0, 1.0};
    d.masses = {0.5, 0.5};
    d.horizon = 100;
    try {
        lattice_cusum_distribution(d, 10);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::state_explosion);
    }
}

TEST(Walk, TraceCsv) {
    std::ostringstream os;
    write_trace_csv(os, WalkTrace::from_increments(kFive));
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,S_t,W_t,W_rev_t");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 6);
}
