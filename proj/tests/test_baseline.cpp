#include <gtest/gtest.h>

#include <cmath>

#include "unbiasedmc/baseline.hpp"
#include "unbiasedmc/model.hpp"
#include "unbiasedmc/unbiased1d.hpp"

using umc::BaselineScheme;
using umc::BlackScholesModel;
using umc::ConstantCoeffModel;

namespace {
const BlackScholesModel kBs{0.05, 0.5, 0.05};
}

TEST(EulerStep, ConstantModelIncrement) {
    const ConstantCoeffModel m{0.3, 2.0, 0.0};
    EXPECT_DOUBLE_EQ(umc::euler_step(m, 0.0, 5.0, 0.25, 0.1), 5.0 + 0.3 * 0.25 + 2.0 * 0.1);
}

TEST(EulerStep, NoDriftNoNoiseIsIdentity) {
    const ConstantCoeffModel m{0.0, 2.0, 0.0};
    EXPECT_DOUBLE_EQ(umc::euler_step(m, 0.0, 7.0, 0.25, 0.0), 7.0);
}

TEST(EulerStep, BlackScholesHandValue) {
    EXPECT_DOUBLE_EQ(umc::euler_step(kBs, 0.0, 100.0, 0.25, 0.1), 106.25);
}

TEST(MilsteinStep, ReducesToEulerWithoutVolSlope) {
    const ConstantCoeffModel m{0.3, 2.0, 0.0};
    EXPECT_DOUBLE_EQ(umc::milstein_step(m, 0.0, 5.0, 0.25, 0.1),
                     umc::euler_step(m, 0.0, 5.0, 0.25, 0.1));
}

TEST(MilsteinStep, BlackScholesHandValue) {
    // 106.25 + 12.5 (0.01 - 0.25) = 103.25
    EXPECT_DOUBLE_EQ(umc::milstein_step(kBs, 0.0, 100.0, 0.25, 0.1), 103.25);
}

TEST(MilsteinStep, RelatesToThePolynomialMapWithoutItsCrossTerm) {
    // the segment map minus its dt dW term is exactly a Milstein step
    const auto c = umc::step_coeffs(kBs, 0.0, 100.0);
    for (const double dw : {-0.7, 0.0, 0.4}) {
        const double map_increment = umc::apply_f(c, 0.25, dw) - c.f11 * 0.25 * dw;
        const double milstein_increment = umc::milstein_step(kBs, 0.0, 100.0, 0.25, dw) - 100.0;
        EXPECT_NEAR(map_increment, milstein_increment, 1e-12);
    }
}

TEST(PriceBaseline, SchemesDifferByTheMilsteinCorrectionPathwise) {
    // shared draws, one step: Euler and Milstein differ exactly by
    // sigma dsigma (dW^2 - dt) / 2
    umc::PathStream s1(2024, 7), s2(2024, 7);
    const double dt = 1.0;
    const double dw1 = std::sqrt(dt) * s1.gaussian();
    const double dw2 = std::sqrt(dt) * s2.gaussian();
    ASSERT_EQ(dw1, dw2);
    const double euler = umc::euler_step(kBs, 0.0, 100.0, dt, dw1);
    const double milstein = umc::milstein_step(kBs, 0.0, 100.0, dt, dw2);
    EXPECT_NEAR(milstein - euler, 0.5 * 50.0 * 0.5 * (dw1 * dw1 - dt), 1e-12);
}

TEST(PriceBaseline, OneStepDegenerateDrawIsDeterministic) {
    // with dW = 0 forced, a single Euler step lands on S0 (1 + mu0 T)
    struct ZeroVolModel {
        double mu(double, double s) const { return 0.05 * s; }
        double sigma(double, double) const { return 0.0; }
        double dmu_ds(double, double) const { return 0.05; }
        double dsigma_ds(double, double) const { return 0.0; }
        double rate(double) const { return 0.05; }
        std::optional<double> constant_rate() const { return 0.05; }
    };
    const auto put = umc::put_payoff(120.0);
    const auto res = umc::price_baseline(BaselineScheme::euler, ZeroVolModel{}, put.h, 100.0,
                                         1.0, 1, 100, 1);
    EXPECT_NEAR(res.mean, put.h(100.0 * 1.05) * std::exp(-0.05), 1e-12);
    EXPECT_NEAR(res.variance, 0.0, 1e-10);
}

TEST(PriceBaseline, EulerCoarseGridShowsTheDocumentedBias) {
    // n = 4: biased high by roughly 2.99/4 on the reference put
    const auto put = umc::put_payoff(80.0);
    const auto res = umc::price_baseline(BaselineScheme::euler, kBs, put.h, 100.0, 1.0, 4,
                                         200000, 17);
    const double truth = umc::black_scholes_put(100, 80, 0.05, 0.5, 1.0);
    const double bias = res.mean - truth;
    EXPECT_GT(bias, 0.4);
    EXPECT_LT(bias, 1.1);
}

TEST(PriceBaseline, MilsteinFineGridIsNearlyUnbiased) {
    const auto put = umc::put_payoff(80.0);
    const auto res = umc::price_baseline(BaselineScheme::milstein, kBs, put.h, 100.0, 1.0,
                                         256, 200000, 23);
    const double truth = umc::black_scholes_put(100, 80, 0.05, 0.5, 1.0);
    EXPECT_NEAR(res.mean, truth, 4.0 * res.std_error + 0.01);
}

TEST(PriceBaseline, RejectsNonPositiveStepCount) {
    const auto put = umc::put_payoff(80.0);
    EXPECT_THROW(
        umc::price_baseline(BaselineScheme::euler, kBs, put.h, 100.0, 1.0, 0, 10, 1),
        std::invalid_argument);
}
