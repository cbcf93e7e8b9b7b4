#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "unbiasedmc/random.hpp"

using umc::PathStream;

// Known-answer vectors for the Philox block function, cross-checked against
// an independent reference implementation of the 4x64-10 variant.
TEST(Philox, KnownAnswerVectors) {
    using A4 = std::array<std::uint64_t, 4>;
    using A2 = std::array<std::uint64_t, 2>;
    EXPECT_EQ(umc::Philox4x64::block(A4{0, 0, 0, 0}, A2{0, 0}),
              (A4{0x16554d9eca36314cull, 0xdb20fe9d672d0fdcull, 0xd7e772cee186176bull,
                  0x7e68b68aec7ba23bull}));
    EXPECT_EQ(umc::Philox4x64::block(A4{1, 2, 3, 4},
                                     A2{0xdeadbeefdeadbeefull, 0x1234567890abcdefull}),
              (A4{0xafcd98f908f37aadull, 0x19ab20f26d1468f6ull, 0x70795edf6ec3fd2bull,
                  0xd080295d2a18a2e6ull}));
    EXPECT_EQ(umc::Philox4x64::block(A4{0, 0, 0, 0}, A2{42, 7}),
              (A4{0x2fd1bc0d2c8697bbull, 0x8ee17f67a549bba6ull, 0x1bdce1f847e7df47ull,
                  0xe123b6bbe4e89f03ull}));
    const std::uint64_t m = ~0ull;
    EXPECT_EQ(umc::Philox4x64::block(A4{m, m, m, m}, A2{m, m}),
              (A4{0x87b092c3013fe90bull, 0x438c3c67be8d0224ull, 0x9cc7d7c69cd777b6ull,
                  0xa09caebf594f0ba0ull}));
}

TEST(Philox, StreamConsumesBlocksInOrder) {
    PathStream s(0, 0);
    EXPECT_EQ(s.next_u64(), 0x16554d9eca36314cull);
    EXPECT_EQ(s.next_u64(), 0xdb20fe9d672d0fdcull);
    EXPECT_EQ(s.next_u64(), 0xd7e772cee186176bull);
    EXPECT_EQ(s.next_u64(), 0x7e68b68aec7ba23bull);
    // next block: counter incremented to (1,0,0,0)
    const auto second =
        umc::Philox4x64::block({1, 0, 0, 0}, {0, 0});
    EXPECT_EQ(s.next_u64(), second[0]);
}

TEST(InverseNormalCdf, MatchesReferenceQuantiles) {
    EXPECT_DOUBLE_EQ(umc::inverse_normal_cdf(0.5), 0.0);
    EXPECT_NEAR(umc::inverse_normal_cdf(0.975), 1.959963984540054, 2e-12);
    EXPECT_NEAR(umc::inverse_normal_cdf(0.025), -1.9599639845400545, 2e-12);
    EXPECT_NEAR(umc::inverse_normal_cdf(1e-10), -6.361340902404056, 2e-11);
    EXPECT_NEAR(umc::inverse_normal_cdf(0.001), -3.090232306167813, 2e-12);
    EXPECT_NEAR(umc::inverse_normal_cdf(0.3), -0.5244005127080409, 2e-12);
    EXPECT_NEAR(umc::inverse_normal_cdf(0.9999999), 5.199337582290661, 2e-11);
    EXPECT_NEAR(umc::inverse_normal_cdf(0.12345), -1.1579118773801476, 2e-12);
    EXPECT_THROW(umc::inverse_normal_cdf(0.0), std::domain_error);
    EXPECT_THROW(umc::inverse_normal_cdf(1.0), std::domain_error);
}

TEST(DrawExponential, InvertsTheCumulativeLaw) {
    EXPECT_DOUBLE_EQ(umc::draw_exponential(2.0, std::exp(-1.0)), 0.5);
    EXPECT_DOUBLE_EQ(umc::draw_exponential(1.0, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(umc::draw_exponential(0.5, std::exp(-2.0)), 4.0);
    EXPECT_THROW(umc::draw_exponential(0.0, 0.5), std::domain_error);
    EXPECT_THROW(umc::draw_exponential(-1.0, 0.5), std::domain_error);
    EXPECT_THROW(umc::draw_exponential(1.0, 0.0), std::domain_error);
}

TEST(PoissonTimes, VanishinglySmallIntensityGivesNoJumps) {
    PathStream s(123, 0);
    const auto times = umc::poisson_times(0.0, 1.0, 1e-12, s);
    EXPECT_TRUE(times.empty());
}

TEST(PoissonTimes, ReplayIsDeterministic) {
    PathStream s1(99, 17), s2(99, 17);
    const auto a = umc::poisson_times(0.0, 5.0, 2.0, s1);
    const auto b = umc::poisson_times(0.0, 5.0, 2.0, s2);
    EXPECT_EQ(a, b);
    for (size_t i = 0; i < a.size(); ++i) {
        EXPECT_GT(a[i], i == 0 ? 0.0 : a[i - 1]);
        EXPECT_LT(a[i], 5.0);
    }
}

TEST(PoissonTimes, EmpiricalMeanCountMatchesIntensity) {
    const int n = 1000000;
    const double lambda = 3.0;
    std::uint64_t total = 0;
    for (int i = 0; i < n; ++i) {
        PathStream s(2718, static_cast<std::uint64_t>(i));
        total += umc::poisson_times(0.0, 1.0, lambda, s).size();
    }
    const double mean = static_cast<double>(total) / n;
    // stderr of the mean count is sqrt(lambda/n) ~ 0.0017
    EXPECT_NEAR(mean, 3.0, 0.006);
}

TEST(GaussianVector, MomentsAndDeterminism) {
    const int n = 1000000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        PathStream s(31415, static_cast<std::uint64_t>(i));
        const auto z = umc::draw_gaussian_vector(1, 0.25, s);
        sum += z[0];
        sum_sq += z[0] * z[0];
    }
    EXPECT_NEAR(sum / n, 0.0, 0.004 * 0.5);  // 4 stderr at sd = 0.5
    EXPECT_NEAR(sum_sq / n, 0.25, 0.002);    // chi-square stderr ~ 0.25*sqrt(2/n)

    PathStream s1(31415, 5), s2(31415, 5);
    EXPECT_EQ(umc::draw_gaussian_vector(4, 1.0, s1), umc::draw_gaussian_vector(4, 1.0, s2));
}

TEST(Streams, CrossCorrelationIsSmall) {
    const int n = 100000;
    PathStream a(777, 1), b(777, 2);
    double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
    for (int i = 0; i < n; ++i) {
        const double x = a.gaussian();
        const double y = b.gaussian();
        sa += x;
        sb += y;
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    const double cov = sab / n - (sa / n) * (sb / n);
    const double corr = cov / std::sqrt((saa / n - (sa / n) * (sa / n)) *
                                        (sbb / n - (sb / n) * (sb / n)));
    EXPECT_LT(std::abs(corr), 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Uniform, RangesAreHalfOpenAsDocumented) {
    PathStream s(1, 1);
    for (int i = 0; i < 100000; ++i) {
        const double u = s.uniform01();
        ASSERT_GT(u, 0.0);
        ASSERT_LE(u, 1.0);
    }
    PathStream t(1, 2);
    for (int i = 0; i < 100000; ++i) {
        const double u = t.uniform_open();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}
