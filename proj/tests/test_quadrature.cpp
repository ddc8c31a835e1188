#include <gtest/gtest.h>

#include <berezin/quadrature.hpp>

using namespace berezin;

TEST(GaussJacobi, LegendreMoments) {
    const GaussRule g = gauss_legendre(20);
    for (int k = 0; k < 40; ++k) {
        double s = 0;
        for (int i = 0; i < 20; ++i) s += g.w[i] * std::pow(g.x[i], k);
        EXPECT_NEAR(s, k % 2 ? 0.0 : 2.0 / (k + 1), 1e-14) << k;
    }
}

TEST(GaussJacobi, BetaMoments) {
    const double a = 4.5, b = 0.0;
    const GaussRule g = gauss_jacobi(30, a, b);
    // int (1-x)^a (1+x)^k dx = 2^(a+k+1) B(a+1, k+1)
    for (int k = 0; k < 50; k += 7) {
        double s = 0;
        for (int i = 0; i < 30; ++i) s += g.w[i] * std::pow(1 + g.x[i], k);
        const double exact = std::exp((a + k + 1) * std::log(2.0) + std::lgamma(a + 1) + std::lgamma(k + 1.0) -
                                      std::lgamma(a + k + 2));
        EXPECT_NEAR(s / exact, 1.0, 1e-12) << k;
    }
}

TEST(DiskRule, MassOfLambdaR) {
    for (double r : {2.5, 4.0, 6.0, 8.0, 8.5}) {
        const Weight w(r);
        const DiskRule rule = build_disk_rule(r);
        const double m = integrate(rule, [](cplx) { return 1.0; }).real();
        EXPECT_NEAR(w.c() * m, 1.0, 1e-10) << r;
        for (double x : rule.weights) ASSERT_GT(x, 0.0);
    }
}

TEST(DiskRule, DecayAgainstLambdaZero) {
    for (double r : {6.0, 8.0}) {
        const DiskRule rule = build_disk_rule(0.0, 96, 256, r / 2);
        const double v = integrate(rule, [&](cplx z) { return std::pow(d_kernel(0.0, z), r); }).real();
        EXPECT_NEAR(v / (2 * pi / (r - 2)), 1.0, 1e-10) << r;
    }
}

TEST(DiskRule, BetaMomentAgainstLambda4) {
    const DiskRule rule = build_disk_rule(4.0, 32, 64);
    // int |z|^2 (1-|z|^2)^2 dA = pi B(2, 3) = pi/12
    const double v = integrate(rule, [](cplx z) { return std::norm(z); }).real();
    EXPECT_NEAR(v, pi / 12, 1e-14);
}

TEST(DiskRule, MonomialExactness) {
    const DiskRule rule = build_disk_rule(6.0, 24, 32);
    for (int m = 0; m <= 8; ++m)
        for (int n = 0; m + n <= 16; ++n) {
            const cplx v = integrate(rule, [&](cplx z) { return std::pow(z, m) * std::pow(std::conj(z), n); });
            if (m != n) {
                EXPECT_LT(std::abs(v), 1e-14);
            } else {
                const double exact = pi * std::exp(std::lgamma(m + 1.0) + std::lgamma(5.0) - std::lgamma(m + 6.0));
                EXPECT_NEAR(v.real() / exact, 1.0, 1e-10);
            }
        }
}

TEST(DiskRule, Rejections) {
    EXPECT_THROW(build_disk_rule(0.0, 96, 256, 1.0), std::invalid_argument);
    EXPECT_THROW(build_disk_rule(4.0, 1, 256), std::invalid_argument);
}

TEST(DiskRule, RadialSelfConvergence) {
    auto f = [](cplx z) { return 1.0 / std::norm(1.0 - 0.5 * z) + std::norm(z); };
    const double a = integrate(build_disk_rule(6.0, 48, 64), f).real();
    const double b = integrate(build_disk_rule(6.0, 96, 64), f).real();
    EXPECT_LT(std::abs(a - b) / std::abs(b), 1e-8);
}

TEST(DiskRule, PhaseOffsetForRadial) {
    auto f = [](cplx z) { return std::exp(-std::norm(z)); };
    const double a = integrate(build_disk_rule(3.0, 40, 64, 0.0, 0.0), f).real();
    const double b = integrate(build_disk_rule(3.0, 40, 64, 0.0, 0.123), f).real();
    EXPECT_NEAR(a, b, 1e-12);
}

TEST(Integrate, ZeroLinearityAndErrors) {
    const DiskRule rule = build_disk_rule(4.0, 16, 32);
    EXPECT_EQ(integrate(rule, [](cplx) { return 0.0; }), cplx(0, 0));
    auto f = [](cplx z) { return z * z + 1.0; };
    auto g = [](cplx z) { return std::conj(z) * 3.0 + std::norm(z); };
    const cplx s = integrate(rule, [&](cplx z) { return f(z) + g(z); });
    EXPECT_LT(std::abs(s - integrate(rule, f) - integrate(rule, g)), 1e-12);
    EXPECT_THROW(integrate(rule, [](cplx) { return std::nan(""); }), std::runtime_error);
}

TEST(Integrate, DeterministicAcrossThreads) {
    const DiskRule rule = build_disk_rule(5.0, 40, 80);
    auto f = [](cplx z) { return std::exp(z) / (1.0 - 0.3 * std::conj(z)); };
    set_thread_count(1);
    const cplx a = integrate(rule, f);
    set_thread_count(4);
    const cplx b = integrate(rule, f);
    set_thread_count(0);
    EXPECT_EQ(a, b);
}

TEST(RestrictRule, KeepsWeights) {
    const DiskRule base = build_disk_rule(4.0, 16, 32, 0.0, 0.05);
    const DiskRule half = restrict_rule(base, [](cplx z) { return z.real() > 0; });
    EXPECT_LT(half.size(), base.size());
    EXPECT_NEAR(integrate(half, [](cplx) { return 1.0; }).real(), disk_mass(4.0) / 2, 1e-13);
    EXPECT_THROW(restrict_rule(base, [](cplx) { return false; }), std::runtime_error);
}
