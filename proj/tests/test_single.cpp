#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "tcd/rng.hpp"
#include "tcd/single.hpp"

using namespace tcd;

namespace {

const std::vector<double> kFive{-1, 2, 1, -3, 2};
const DistributionPair kBern(DensitySpec::bernoulli(0.2), DensitySpec::bernoulli(0.8));
const DistributionPair kGauss(DensitySpec::normal(0, 1), DensitySpec::normal(1, 1));

}  // namespace

TEST(Mle, FivePointFixture) {
    const auto e = mle_interval(WalkTrace::from_increments(kFive));
    EXPECT_EQ(e.a_hat, 1u);
    EXPECT_EQ(e.b_hat, 3u);
    EXPECT_DOUBLE_EQ(e.lambda, 3.0);
    EXPECT_FALSE(e.no_change);
}

TEST(Mle, Degenerate) {
    const std::vector<double> down{-1, -1, -2}, up{1, 2, 3};
    const auto a = mle_interval(WalkTrace::from_increments(down));
    EXPECT_TRUE(a.no_change);
    EXPECT_EQ(a.a_hat, 0u);
    EXPECT_EQ(a.b_hat, 0u);
    EXPECT_EQ(a.lambda, 0.0);
    const auto b = mle_interval(WalkTrace::from_increments(up));
    EXPECT_EQ(b.a_hat, 0u);
    EXPECT_EQ(b.b_hat, 3u);
    EXPECT_EQ(b.lambda, 6.0);
}

TEST(Mle, ExhaustiveBernoulliAgainstBruteForce) {
    const double c = std::log(4.0);
    for (std::size_t n = 1; n <= 10; ++n)
        oracle::for_each_binary(n, [&](const std::vector<int>& x) {
            std::vector<double> y(n);
            for (std::size_t i = 0; i < n; ++i) y[i] = x[i] ? c : -c;
            const auto e = mle_interval(WalkTrace::from_increments(y));
            const auto o = oracle::brute_mle(oracle::partial_sums(y));
            ASSERT_EQ(e.a_hat, o.a);
            ASSERT_EQ(e.b_hat, o.b);
            ASSERT_NEAR(e.lambda, o.gain, 1e-9);
        });
}

TEST(Mle, RandomGaussianInvariants) {
    CounterRng rng(8);
    std::normal_distribution<double> z;
    for (int rep = 0; rep < 1000; ++rep) {
        std::vector<double> y(1 + rng() % 60);
        for (auto& v : y) v = z(rng);
        const auto w = WalkTrace::from_increments(y);
        const auto e = mle_interval(w);
        ASSERT_LE(e.a_hat, e.b_hat);
        ASSERT_NEAR(e.lambda, w[e.b_hat] - w[e.a_hat], 1e-12);
        ASSERT_NEAR(e.lambda, lrt_statistic(cusum(w)), 1e-12);
        ASSERT_EQ(e.no_change, e.a_hat == e.b_hat);
        const auto o = oracle::brute_mle(oracle::partial_sums(y));
        ASSERT_EQ(e.a_hat, o.a);
        ASSERT_EQ(e.b_hat, o.b);
    }
}

TEST(Lrt, StatisticAndDecision) {
    const auto w = WalkTrace::from_increments(kFive);
    EXPECT_DOUBLE_EQ(lrt_statistic(cusum(w)), 3.0);
    ThresholdSpec t;
    t.h = 3.0;
    EXPECT_EQ(lrt_test(w, t), TestDecision::reject);
    t.h = 3.0 + 1e-12;
    EXPECT_EQ(lrt_test(w, t), TestDecision::accept);
    const std::vector<double> down{-1, -1};
    t.h = 0.1;
    EXPECT_EQ(lrt_test(WalkTrace::from_increments(down), t), TestDecision::accept);
    EXPECT_THROW(lrt_statistic(renewed_cusum(w, 1, CusumKind::forward)), Error);
}

TEST(Threshold, BernoulliOneStep) {
    const auto t = false_alarm_threshold(kBern, 1, 0.05);
    // E_F exp(W_1) = 0.8 * 1 + 0.2 * 4 = 1.6.
    EXPECT_NEAR(t.moment, 1.6, 1e-12);
    EXPECT_NEAR(t.h, std::log(32.0), 1e-12);
    EXPECT_EQ(t.method, ThresholdMethod::exact_lattice);
}

TEST(Threshold, ZeroLength) {
    EXPECT_NEAR(false_alarm_threshold(kBern, 0, 0.05).h, -std::log(0.05), 1e-12);
    ThresholdOptions mc;
    mc.method = ThresholdMethod::monte_carlo;
    mc.replicates = 1000;
    EXPECT_NEAR(false_alarm_threshold(kGauss, 0, 0.1, mc).h, -std::log(0.1), 1e-12);
}

TEST(Threshold, ExactMatchesEnumeration) {
    for (std::size_t n : {2u, 5u, 11u}) {
        const auto t = false_alarm_threshold(kBern, n, 0.05);
        EXPECT_NEAR(t.moment, oracle::binary_cusum_moment(n, 0.2, std::log(4.0)), 1e-10);
    }
}

TEST(Threshold, Errors) {
    EXPECT_THROW(false_alarm_threshold(kBern, 5, 0.0), Error);
    EXPECT_THROW(false_alarm_threshold(kBern, 5, 1.0), Error);
    try {
        false_alarm_threshold(kGauss, 5, 0.05);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::unsupported);
    }
}

TEST(Threshold, MonteCarloIsReproducibleAndClose) {
    ThresholdOptions mc;
    mc.method = ThresholdMethod::monte_carlo;
    mc.seed = 5;
    mc.replicates = 40000;
    mc.conservative = false;
    const auto a = false_alarm_threshold(kBern, 20, 0.05, mc);
    const auto b = false_alarm_threshold(kBern, 20, 0.05, mc);
    EXPECT_EQ(a.h, b.h);
    const double exact = oracle::binary_cusum_moment(20, 0.2, std::log(4.0));
    EXPECT_LE(std::abs(a.moment - exact), 4 * a.standard_error);
    mc.conservative = true;
    EXPECT_GT(false_alarm_threshold(kBern, 20, 0.05, mc).h, a.h);
}

TEST(Threshold, MonteCarloWhenChangeLeavesBaseSupport) {
    // G puts mass 0.5 outside the support of F, so E_F exp(Y) = 0.5.
    const DistributionPair p(DensitySpec::lattice({0, 1}, {0.5, 0.5}), DensitySpec::lattice({0, 1, 2}, {0.2, 0.3, 0.5}));
    EXPECT_NEAR(change_mass_on_base_support(p), 0.5, 1e-15);
    ThresholdOptions mc;
    mc.method = ThresholdMethod::monte_carlo;
    mc.seed = 2;
    mc.replicates = 40000;
    const auto est = false_alarm_threshold(p, 12, 0.05, mc);
    const double exact = false_alarm_threshold(p, 12, 0.05).moment;
    EXPECT_LE(std::abs(est.moment - exact), 4 * est.standard_error);
    EXPECT_NEAR(change_mass_on_base_support(kGauss), 1.0, 0.0);
}

TEST(Stopping, Examples) {
    const auto c = cusum(WalkTrace::from_increments(kFive));
    EXPECT_EQ(stopping_time(c, 2.5), std::optional<std::size_t>(3));
    EXPECT_EQ(stopping_time(c, 10.0), std::nullopt);
    const std::vector<double> up{0.3, 1};
    EXPECT_EQ(stopping_time(cusum(WalkTrace::from_increments(up)), 1e-9), std::optional<std::size_t>(1));
    EXPECT_THROW(stopping_time(c, 0.0), Error);
}

TEST(Lle, Examples) {
    const auto e = local_likelihood_estimate(WalkTrace::from_increments(kFive), 2);
    EXPECT_EQ(e.a_hat, 1u);
    EXPECT_EQ(e.b_hat, 3u);
    const std::vector<double> up{1, 1, 1, 1};
    const auto f = local_likelihood_estimate(WalkTrace::from_increments(up), 4);
    EXPECT_EQ(f.a_hat, 0u);
    EXPECT_EQ(f.b_hat, 4u);
    const std::vector<double> down{-1, -1, -1};
    const auto g = local_likelihood_estimate(WalkTrace::from_increments(down), 3);
    EXPECT_EQ(g.a_hat, 3u);
    EXPECT_EQ(g.b_hat, 3u);
    EXPECT_THROW(local_likelihood_estimate(WalkTrace::from_increments(down), 0), Error);
    EXPECT_THROW(local_likelihood_estimate(WalkTrace::from_increments(down), 4), Error);
}

TEST(Ple, FivePointFixture) {
    // (4, 5) fails the first strict inequality because S_1 = S_4.
    const auto w = WalkTrace::from_increments(kFive);
    EXPECT_EQ(enumerate_ples(w), (std::vector<std::pair<std::size_t, std::size_t>>{{1, 3}}));
    EXPECT_TRUE(satisfies_ple_inequalities(w, 1, 3));
    EXPECT_FALSE(satisfies_ple_inequalities(w, 4, 5));
}

TEST(Ple, Degenerate) {
    const std::vector<double> down{-1, -2, -1}, one{1.5};
    EXPECT_TRUE(enumerate_ples(WalkTrace::from_increments(down)).empty());
    EXPECT_EQ(enumerate_ples(WalkTrace::from_increments(one)), (std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}}));
}

TEST(Ple, ExhaustiveAgainstDefinition) {
    // Every pair satisfying the strict inequalities is enumerated and nothing else.
    const double c = std::log(4.0);
    for (std::size_t n = 1; n <= 10; ++n)
        oracle::for_each_binary(n, [&](const std::vector<int>& x) {
            std::vector<double> y(n);
            for (std::size_t i = 0; i < n; ++i) y[i] = x[i] ? c : -c;
            const auto s = oracle::unit_walk(x);
            std::vector<std::pair<std::size_t, std::size_t>> expect;
            for (std::size_t a = 0; a <= n; ++a)
                for (std::size_t b = a + 1; b <= n; ++b)
                    if (oracle::is_ple(s, a, b)) expect.emplace_back(a, b);
            ASSERT_EQ(enumerate_ples(WalkTrace::from_increments(y)), expect);
        });
}

TEST(Ple, UniqueMaximizerIsThePle) {
    CounterRng rng(12);
    std::normal_distribution<double> z;
    for (int rep = 0; rep < 1000; ++rep) {
        std::vector<double> y(2 + rng() % 40);
        for (auto& v : y) v = z(rng);
        const auto w = WalkTrace::from_increments(y);
        for (auto [a, b] : enumerate_ples(w)) ASSERT_TRUE(satisfies_ple_inequalities(w, a, b));
        const auto e = mle_interval(w);
        if (!e.no_change) {
            ASSERT_TRUE(satisfies_ple_inequalities(w, e.a_hat, e.b_hat));
        }
    }
}
