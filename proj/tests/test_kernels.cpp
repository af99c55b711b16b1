#include "hifu/error.hpp"
#include "hifu/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace hifu;

TEST(GammaFn, KnownValues) {
    EXPECT_NEAR(gamma_fn(1.0), 1.0, 1e-14);
    EXPECT_NEAR(gamma_fn(0.5), std::sqrt(std::numbers::pi), 1e-14);
    EXPECT_NEAR(gamma_fn(1.2), 0.91816874239976061, 1e-13);
    EXPECT_NEAR(gamma_fn(5.0), 24.0, 1e-12);
}

TEST(GammaFn, RejectsNonPositive) {
    EXPECT_THROW((void)gamma_fn(0.0), DomainError);
    EXPECT_THROW((void)gamma_fn(-1.5), DomainError);
}

TEST(GammaFn, ReciprocalVanishesAtPoles) {
    EXPECT_EQ(reciprocal_gamma(0.0), 0.0);
    EXPECT_EQ(reciprocal_gamma(-2.0), 0.0);
    EXPECT_NEAR(reciprocal_gamma(-0.5), -1.0 / (2.0 * std::sqrt(std::numbers::pi)), 1e-14);
}

TEST(MittagLeffler, ReducesToElementaryFunctions) {
    EXPECT_NEAR(mittag_leffler(1, 1, 1), std::numbers::e, 1e-13);
    EXPECT_NEAR(mittag_leffler(1, 1, -2), std::exp(-2.0), 1e-13);
    EXPECT_NEAR(mittag_leffler(2, 1, -4), std::cos(2.0), 1e-12);
    // E_{1,2}(z) = (e^z - 1) / z
    EXPECT_NEAR(mittag_leffler(1, 2, 0.5), std::expm1(0.5) / 0.5, 1e-13);
    EXPECT_NEAR(mittag_leffler(0.5, 1, 0.3), std::exp(0.09) * std::erfc(-0.3), 1e-12);
}

TEST(MittagLeffler, StronglyNegativeArgumentRaises) {
    EXPECT_THROW((void)mittag_leffler(0.5, 1, -40.0), AccuracyError);
}

TEST(KernelEval, Examples) {
    EXPECT_NEAR(kernel_eval(MemoryKernel::abel(0.5), 1.0), 1.0 / std::sqrt(std::numbers::pi), 1e-14);
    EXPECT_NEAR(kernel_eval(MemoryKernel::exponential(1.0), 1e-12), 1.0, 1e-11);
    EXPECT_NEAR(kernel_eval(MemoryKernel::mittag_leffler(1, 1, 1), 1.0), std::exp(-1.0), 1e-13);
}

TEST(KernelEval, RejectsBadArguments) {
    EXPECT_THROW((void)MemoryKernel::abel(1.0), DomainError);
    EXPECT_THROW((void)MemoryKernel::abel(0.0), DomainError);
    EXPECT_THROW((void)MemoryKernel::exponential(0.0), DomainError);
    EXPECT_THROW((void)kernel_eval(MemoryKernel::abel(0.5), 0.0), DomainError);
    EXPECT_THROW((void)kernel_eval(MemoryKernel::dirac_delta(), 1.0), UnsupportedError);
}

TEST(KernelIntegral, MatchesQuadrature) {
    for (const auto& k : {MemoryKernel::exponential(0.3), MemoryKernel::mittag_leffler(0.7, 1.0, 0.5)}) {
        // Simpson on [0.2, 1] of K against K1(1) - K1(0.2)
        const int n = 2000;
        const double a = 0.2, b = 1.0, h = (b - a) / n;
        double s = kernel_eval(k, a) + kernel_eval(k, b);
        for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * kernel_eval(k, a + i * h);
        EXPECT_NEAR(s * h / 3.0, kernel_integral(k, b) - kernel_integral(k, a), 1e-10);
    }
    const auto abel = MemoryKernel::abel(0.3);
    EXPECT_NEAR(kernel_double_integral(abel, 2.0), std::pow(2.0, 1.7) / gamma_fn(2.7), 1e-13);
    EXPECT_EQ(kernel_integral(MemoryKernel::dirac_delta(), 0.5), 1.0);
}

TEST(L1Weights, FirstStepPair) {
    const auto w = l1_weights(0.8, 0);
    ASSERT_EQ(w.size(), 2u);
    EXPECT_NEAR(w[0], 0.54456221052916831, 1e-15);
    EXPECT_NEAR(w[1], w[0], 1e-15);
}

TEST(L1Weights, ExplicitEntry) {
    const auto w = l1_weights(0.5, 2);
    ASSERT_EQ(w.size(), 4u);
    EXPECT_NEAR(w[2], (std::sqrt(3.0) - 1.0) / (2.0 * gamma_fn(1.5)), 1e-15);
}

TEST(L1Weights, SumTelescopes) {
    for (double alpha : {0.1, 0.5, 0.8, 0.95}) {
        for (std::size_t n : {0u, 1u, 7u, 100u, 999u}) {
            const auto w = l1_weights(alpha, n);
            double sum = 0.0;
            for (double z : w.weights) sum += z;
            const double expected = std::pow(double(n + 1), 1 - alpha) / gamma_fn(2 - alpha);
            EXPECT_NEAR(sum, expected, 1e-12 * expected) << alpha << " " << n;
            for (std::size_t j = 0; j < w.size(); ++j) EXPECT_GT(w[j], 0.0);
        }
    }
}

TEST(L1Weights, CacheMatchesDirect) {
    L1WeightCache cache(0.6);
    for (std::size_t n = 0; n < 50; ++n) {
        const auto& c = cache.at_step(n);
        const auto d = l1_weights(0.6, n);
        ASSERT_EQ(c.size(), d.size());
        for (std::size_t j = 0; j < d.size(); ++j) EXPECT_NEAR(c[j], d[j], 1e-15);
    }
}

TEST(L1Weights, RejectsAlphaOutsideUnitInterval) {
    EXPECT_THROW((void)l1_weights(1.5, 3), DomainError);
    EXPECT_THROW((void)l1_weights(0.0, 3), DomainError);
}

TEST(CaputoL1, LinearFunction) {
    std::vector<double> pt(1025, 1.0);
    EXPECT_NEAR(caputo_l1_apply(pt, 0.5, 1.0 / 1024), 1.1283792, 2e-3);
}

TEST(CaputoL1, Quadratic) {
    const std::size_t n = 1024;
    std::vector<double> pt(n + 1);
    for (std::size_t i = 0; i <= n; ++i) pt[i] = 2.0 * double(i) / n;
    EXPECT_NEAR(caputo_l1_apply(pt, 0.8, 1.0 / n), 2.0 / gamma_fn(2.2), 5e-3);
}

TEST(CaputoL1, SingleSampleIsZero) {
    std::vector<double> pt{3.0};
    EXPECT_EQ(caputo_l1_apply(pt, 0.5, 0.1), 0.0);
    EXPECT_THROW((void)caputo_l1_apply({}, 0.5, 0.1), DomainError);
}

TEST(Coercivity, ZeroSignal) {
    std::vector<double> y(64, 0.0);
    const auto f = coercivity_probe(MemoryKernel::abel(0.5), y, 0.01);
    EXPECT_EQ(f.lhs, 0.0);
    EXPECT_EQ(f.rhs, 0.0);
}

TEST(Coercivity, OscillatingSignalExponentialKernel) {
    const std::size_t n = 512;
    std::vector<double> y(n + 1);
    for (std::size_t i = 0; i <= n; ++i) y[i] = std::sin(40.0 * double(i) / n);
    EXPECT_GT(coercivity_probe(MemoryKernel::exponential(0.1), y, 1.0 / n).lhs, 0.0);
}

TEST(Coercivity, RandomSignalsStayNonNegative) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.05, 0.95);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> y(256);
        for (auto& v : y) v = normal(rng);
        const double alpha = unit(rng);
        const auto kernel = trial % 2 ? MemoryKernel::abel(alpha) : MemoryKernel::exponential(alpha);
        EXPECT_GE(coercivity_probe(kernel, y, 1.0 / 255).lhs, -1e-10) << trial;
    }
}
