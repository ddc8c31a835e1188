#include <gtest/gtest.h>

#include <berezin/quadrature.hpp>

using namespace berezin;

namespace {

// Standard cosh formula for the curvature -1 distance, independent of atanh.
double distance_cosh(cplx z, cplx w) {
    const double num = 2.0 * std::norm(z - w);
    const double den = (1.0 - std::norm(z)) * (1.0 - std::norm(w));
    return std::acosh(1.0 + num / den);
}

}  // namespace

TEST(DiskPoint, RejectsBoundary) {
    EXPECT_THROW(DiskPoint(1.0), std::domain_error);
    EXPECT_THROW(DiskPoint(cplx(0.6, 0.8)), std::domain_error);
    EXPECT_NO_THROW(DiskPoint(0.999));
}

TEST(SU11, RenormalizesAndRejects) {
    SU11 g(cplx(2, 0), cplx(1, 0));
    EXPECT_NEAR(g.det(), 1.0, 1e-15);
    EXPECT_THROW(SU11(cplx(1, 0), cplx(1, 0)), std::invalid_argument);
}

TEST(Mobius, IdentityAndOrigin) {
    const cplx z(0.3, 0.1);
    EXPECT_EQ(mobius_apply(SU11::identity(), z).value(), z);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) {
        SU11 g = random_su11(rng, 0.95);
        EXPECT_LT(std::abs(mobius_apply(g, 0.0).value() - g.b() / std::conj(g.a())), 1e-14);
    }
}

TEST(Mobius, InverseAndActionLaw) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 50; ++i) {
        SU11 g = random_su11(rng, 0.9), h = random_su11(rng, 0.9);
        const cplx z = random_disk_point(rng, 0.9);
        EXPECT_LT(std::abs(g.inverse().apply(g.apply(0.5)) - 0.5), 1e-12);
        EXPECT_LT(std::abs((g * h).apply(z) - g.apply(h.apply(z))), 1e-12);
        const SU11 e = g.inverse() * g;
        EXPECT_LT(std::abs(e.a() - 1.0) + std::abs(e.b()), 1e-12);
    }
}

TEST(Mobius, GroupAxiomsOnTriples) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
        SU11 f = random_su11(rng, 0.9), g = random_su11(rng, 0.9), h = random_su11(rng, 0.9);
        const SU11 l = (f * g) * h, r = f * (g * h);
        EXPECT_LT(std::abs(l.a() - r.a()) + std::abs(l.b() - r.b()), 1e-11 * std::abs(l.a()));
        EXPECT_NEAR(l.det(), 1.0, 1e-10);
    }
}

TEST(DKernel, ClosedValues) {
    EXPECT_DOUBLE_EQ(d_kernel(cplx(0.3, -0.2), cplx(0.3, -0.2)), 1.0);
    EXPECT_NEAR(d_kernel(0.0, 0.5), std::sqrt(0.75), 1e-15);
    std::mt19937_64 rng(4);
    for (int i = 0; i < 20; ++i) {
        SU11 g = random_su11(rng, 0.9);
        EXPECT_NEAR(d_kernel(g.apply(0.0), g.apply(0.5)), std::sqrt(0.75), 1e-12);
    }
}

TEST(DKernel, SymmetricInvariantAndSech) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        const cplx z = random_disk_point(rng, 0.95), w = random_disk_point(rng, 0.95);
        SU11 g = random_su11(rng, 0.9);
        const double d = d_kernel(z, w);
        EXPECT_NEAR(d, d_kernel(w, z), 1e-15);
        EXPECT_NEAR(d_kernel(g.apply(z), g.apply(w)), d, 1e-11);
        const double rho = distance_cosh(z, w);
        EXPECT_NEAR(std::pow(std::cosh(rho / 2), 2) * d * d, 1.0, 1e-10);
        EXPECT_NEAR(hyperbolic_distance(z, w), rho, 1e-8 * std::max(1.0, rho));
    }
}

TEST(Phase, AlphaAndAleph) {
    EXPECT_EQ(phase_alpha(SU11::identity()), 0.0);
    EXPECT_EQ(phase_alpha(SU11(cplx(3, 0), cplx(1, 2))), 0.0);
    const double t = 0.7;
    EXPECT_NEAR(phase_alpha(SU11(cplx(0, std::cosh(t)), cplx(std::sinh(t), 0))), pi, 1e-15);
    std::mt19937_64 rng(6);
    for (int i = 0; i < 20; ++i) {
        SU11 g = random_su11(rng, 0.9);
        const double a = phase_alpha(g);
        EXPECT_GT(a, -pi);
        EXPECT_LE(a, pi);
        EXPECT_LT(std::abs(std::polar(1.0, a) - g.a() / std::conj(g.a())), 1e-12);
        EXPECT_LT(std::abs(aleph(g) + std::polar(1.0, a)), 1e-15);
    }
}

TEST(DiscreteSeries, IdentityAndIntegerOnly) {
    AnalyticFunction f = [](cplx z) { return 1.0 + z * z; };
    const Weight w(4);
    EXPECT_EQ(discrete_series_action(w, SU11::identity(), f, 0.3), f(0.3));
    EXPECT_THROW(discrete_series_action(Weight(4.5), SU11::identity(), f, 0.3), std::invalid_argument);
}

TEST(DiscreteSeries, UnitaryOnConstant) {
    const Weight w(4);
    const DiskRule rule = build_disk_rule(w.r, 96, 256, 0.0);
    std::mt19937_64 rng(7);
    AnalyticFunction one = [](cplx) { return cplx(1, 0); };
    for (int i = 0; i < 3; ++i) {
        SU11 g = random_su11(rng, 0.5);
        const double n2 = w.c() * integrate(rule, [&](cplx z) { return std::norm(discrete_series_action(w, g, one, z)); }).real();
        EXPECT_NEAR(n2, 1.0, 1e-8);
    }
}

TEST(DiscreteSeries, ProjectiveComposition) {
    const Weight w(6);
    std::mt19937_64 rng(8);
    AnalyticFunction f = [](cplx z) { return 2.0 + z - 0.5 * z * z * z; };
    SU11 g = random_su11(rng, 0.7), h = random_su11(rng, 0.7);
    AnalyticFunction hf = [&](cplx z) { return discrete_series_action(w, h, f, z); };
    cplx phase(0, 0);
    for (cplx z : {cplx(0.1, 0.2), cplx(-0.4, 0.3), cplx(0.5, -0.5)}) {
        const cplx ratio = discrete_series_action(w, g, hf, z) / discrete_series_action(w, g * h, f, z);
        EXPECT_NEAR(std::abs(ratio), 1.0, 1e-12);
        if (phase == cplx(0, 0)) phase = ratio;
        EXPECT_LT(std::abs(ratio - phase), 1e-12);
    }
}
