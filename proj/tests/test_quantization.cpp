#include <gtest/gtest.h>

#include <berezin/calibration.hpp>

using namespace berezin;

namespace {

const Weight w8(8.0);

std::shared_ptr<const OrbitTable> octagon_table(int L) {
    static std::map<int, std::shared_ptr<const OrbitTable>> cache;
    auto& t = cache[L];
    if (!t) t = std::make_shared<const OrbitTable>(enumerate_orbit(octagon_group(), L));
    return t;
}

std::shared_ptr<const FundamentalDomain> octagon_F() {
    static auto F = std::make_shared<const FundamentalDomain>(octagon_table(5), octagon_group());
    return F;
}

std::shared_ptr<const OrbitTable> disk_table() { return detail::disk_domain()->table_ptr(); }

}  // namespace

TEST(PoincareSeries, TrivialGroupIsOneTerm) {
    const cplx z(0.3, -0.2), eta(-0.1, 0.4);
    EXPECT_NEAR(poincare_series(*disk_table(), z, eta, w8).value, rpow(d_kernel(z, eta), 8), 1e-15);
}

TEST(PoincareSeries, GroupInvariantUpToTail) {
    const auto t = octagon_table(5);
    const cplx z(0.1, 0.05), eta(-0.2, 0.1);
    const Estimate base = poincare_series(*t, z, eta, w8);
    const SU11 g = octagon_group().generators[1];
    const Estimate moved = poincare_series(*t, z, g.apply(eta), w8);
    EXPECT_NEAR(moved.value, base.value, 1e-6 * base.value);
    EXPECT_GT(base.value, rpow(d_kernel(z, eta), 8));
}

TEST(PoincareSeries, GrowingShellsRaise) {
    EXPECT_THROW(check_shells({1.0, 0.5, 0.6}, "probe"), ConvergenceError);
    EXPECT_NO_THROW(check_shells({1.0, 0.5, 0.2}, "probe"));
    EXPECT_NO_THROW(check_shells({1.0, 1e-12, 2e-12}, "probe"));
}

TEST(EvalVector, SeparableFormMatchesDirectForm) {
    const auto t = octagon_table(4);
    const cplx z(0.1, -0.2), zeta(0.25, 0.1), e1(0.05, 0.3), e2(-0.2, -0.1);
    const cplx sep = eval_vector(z, zeta, t, w8)(e1, e2);
    const cplx dir = eval_vector_direct(e1, e2, *t, w8, z, zeta).value;
    EXPECT_LT(std::abs(sep - dir), 1e-10 * std::abs(dir));
}

TEST(EvalVector, TrivialGroupIsRankOne) {
    const cplx z(0.2, 0.1), zeta(-0.3, 0.2), x(0.1, 0.4), y(-0.2, -0.2);
    const cplx c = w8.c() * detail::kfac(z, zeta, 8);
    const cplx want = c * rank_one_symbol(w8, zeta, z)(x, y);
    EXPECT_LT(std::abs(eval_vector(z, zeta, disk_table(), w8)(x, y) - want), 1e-12 * std::abs(want));
}

TEST(EvalVector, AdjointSwapsPoints) {
    const auto t = octagon_table(4);
    const cplx z(0.1, -0.2), zeta(0.25, 0.1), x(0.05, 0.3), y(-0.2, -0.1);
    const cplx a = eval_vector(z, zeta, t, w8)(x, y);
    const cplx b = eval_vector(zeta, z, t, w8)(y, x);
    EXPECT_LT(std::abs(a - std::conj(b)), 1e-10 * std::abs(a));
}

TEST(EvalVector, InvariantAndSesquiholomorphic) {
    const auto t = octagon_table(5);
    const InvariantSymbol e = eval_vector(cplx(0.1, 0.0), cplx(0.0, 0.2), t, w8);
    const InvarianceReport rep = diagonal_invariance(e, *t, {cplx(0.05, 0.1), cplx(-0.2, 0.0)},
                                                     {cplx(0.1, -0.1), cplx(0.15, 0.2)}, 1);
    EXPECT_LT(rep.worst_excess, 0.0) << rep.worst_diff;
    EXPECT_LT(sesquiholomorphy_residual(e, cplx(0.1, 0.1), cplx(-0.2, 0.05)), 1e-7);
}

TEST(EvalVector, AbsoluteSumBelowMajorant) {
    for (const auto& t : {disk_table(), octagon_table(4)}) {
        const Majorant m = absolute_sum_majorant(cplx(0.1, 0.1), cplx(0.2, -0.1), cplx(-0.1, 0.3), *t, w8,
                                           build_disk_rule(0.0, 48, 96, 4.0));
        EXPECT_GT(m.quadrature, 0.0);
        EXPECT_LE(m.quadrature, m.closed_form * (1 + 1e-12));
        EXPECT_GE(m.quadrature, m.closed_form * (1 - 1e-9));
    }
}

TEST(StarProduct, RankOneMatchesMatrixProduct) {
    const Constants C = calibrate(w8);
    const cplx u1(0.2, 0.1), v1(-0.1, 0.3), u2(0.25, 0.2), v2(-0.3, -0.1);
    const InvariantSymbol P = star_product(rank_one_symbol(w8, u1, v1), rank_one_symbol(w8, u2, v2),
                                           build_disk_rule(8.0, 48, 96), C.kappa_star);
    const MonomialBasis B(w8, 60);
    const TruncatedOperator M = rank_one(B, u1, v1) * rank_one(B, u2, v2);
    for (cplx x : {cplx(0.0, 0.0), cplx(0.3, -0.2)})
        for (cplx y : {cplx(0.1, 0.1), cplx(-0.4, 0.0)}) {
            const cplx want = berezin_symbol(M, x, y);
            EXPECT_LT(std::abs(P(x, y) - want), 1e-9 * std::abs(want));
        }
}

TEST(StarProduct, WeightMismatchRejected) {
    const InvariantSymbol a = rank_one_symbol(w8, 0.1, 0.2), b = rank_one_symbol(Weight(6.0), 0.1, 0.2);
    EXPECT_THROW(star_product(a, b, build_disk_rule(8.0, 8, 8), 1.0), std::invalid_argument);
    EXPECT_THROW(star_product(a, a, build_disk_rule(6.0, 8, 8), 1.0), std::invalid_argument);
}

TEST(MeanValue, CalibratedConstantReproducesDiagonal) {
    const double kappa = calibrate_meanvalue(w8);
    EXPECT_NEAR(kappa, (8.0 - 2) / (2 * pi), 1e-13);
    const InvariantSymbol A = rank_one_symbol(w8, cplx(0.2, -0.1), cplx(-0.3, 0.2));
    const DiskRule rule0 = build_disk_rule(0.0, 32, 64, 4.0);
    for (cplx z : {cplx(0.0, 0.0), cplx(0.4, 0.3)}) {
        const double scale = std::abs(A(z, z));
        EXPECT_LT(meanvalue_residual(A, z, rule0, kappa), 1e-9 * scale);
        EXPECT_GT(meanvalue_residual(A, z, rule0, w8.c()), 0.5 * scale);
    }
}

TEST(MeanValue, OrbitIdentityOnOctagon) {
    const double kappa = calibrate_meanvalue(w8);
    const std::vector<std::pair<cplx, cplx>> probes{{cplx(0.1, 0.2), cplx(-0.3, 0.1)}};
    EXPECT_LT(eval_vector_meanvalue_residual(cplx(0.2, 0.1), octagon_table(4), w8, build_disk_rule(0.0, 32, 64, 4.0), probes, kappa),
              1e-4);
}

TEST(MeanValue, RequiresInvariantMeasureRule) {
    EXPECT_THROW(meanvalue_integral(rank_one_symbol(w8, 0.1, 0.1), 0.0, build_disk_rule(8.0, 8, 8)),
                 std::invalid_argument);
}

TEST(Trace, TauOfIdentityIsOne) {
    const cplx t = trace_tau(constant_symbol(w8), *octagon_F(), octagon_F()->rule(0.0, 8, 6));
    EXPECT_NEAR(t.real(), 1.0, 1e-12);
    EXPECT_NEAR(t.imag(), 0.0, 1e-14);
    EXPECT_THROW(trace_tau(constant_symbol(w8), *detail::disk_domain(), build_disk_rule(0.0, 8, 8, 2.0)),
                 std::invalid_argument);
}

TEST(Trace, PairingOfTrivialEvaluationVector) {
    const Constants C = calibrate(w8);
    EXPECT_NEAR(C.kappa_pair * w8.c(), 1.0, 1e-8);
    const InvariantSymbol e = eval_vector(cplx(-0.2, 0.1), cplx(0.3, 0.0), disk_table(), w8);
    const cplx t = trace_vn(e, build_disk_rule(0.0, 48, 96, 8.0));
    EXPECT_LT(std::abs(C.kappa_pair * t - 1.0), 1e-8);
}

TEST(SquareNorm, GammaSumMatchesDoubleIntegral) {
    const auto F = octagon_F();
    const cplx z(0.1, 0.0), zeta(0.0, 0.2);
    const InvariantSymbol e = eval_vector(z, zeta, F->table_ptr(), w8).pruned(40.0, hyperbolic_radius(F->circumradius()), 1e-10);
    const double hs = hs_norm_2r_gram(e, F->rule(0.0, 12, 16));
    const double sum = gamma_square_norm(z, zeta, F->table(), w8).value;
    EXPECT_NEAR(w8.c() * w8.c() * hs * hs / sum, 1.0, 1e-5);
}

TEST(SquareNorm, GramRouteMatchesQuadratureOnDisk) {
    const InvariantSymbol e = eval_vector(cplx(0.1, 0.0), cplx(0.0, 0.2), disk_table(), w8);
    const DiskRule rule0 = build_disk_rule(0.0, 32, 64, 8.0);
    EXPECT_NEAR(hs_norm_2r(e, rule0, rule0) / hs_norm_2r_gram(e, rule0), 1.0, 1e-9);
    EXPECT_THROW(hs_norm_2r_gram(constant_symbol(w8), rule0), std::invalid_argument);
}

TEST(SquareNorm, HigherMomentScalesWeight) {
    const auto t = octagon_table(4);
    const cplx z(0.1, 0.0), zeta(0.0, 0.2);
    EXPECT_DOUBLE_EQ(gamma_square_norm_moment(z, zeta, *t, w8, 1).value, gamma_square_norm(z, zeta, *t, w8).value);
    EXPECT_DOUBLE_EQ(gamma_square_norm_moment(z, zeta, *t, w8, 2).value, gamma_square_norm(z, zeta, *t, Weight(16.0)).value);
    EXPECT_THROW(gamma_square_norm_moment(z, zeta, *t, w8, 0), std::invalid_argument);
}

TEST(LambdaNormTest, ConstantSymbolGivesDPowerIntegral) {
    const LambdaNorm L = lambda_norm(constant_symbol(w8), build_disk_rule(0.0, 48, 128, 4.0),
                                     {cplx(0.0, 0.0), cplx(0.3, 0.2), cplx(-0.5, 0.1)});
    EXPECT_NEAR(L.value, 2 * pi / 6, 1e-7);
    EXPECT_NEAR(L.sup_first, L.sup_second, 1e-9);
}

TEST(ToeplitzSymbolTest, InvariantBumpAndRejection) {
    const auto F = octagon_F();
    const OrbitAveragedBump phi(F, cplx(0.1, 0.1), 0.4);
    const cplx p(0.3, -0.2);
    for (const SU11& g : octagon_group().generators) EXPECT_NEAR(phi(g.apply(p)), phi(p), 1e-10);
    auto not_invariant = [](cplx z) { return std::exp(-std::norm(z)); };
    EXPECT_THROW(invariant_toeplitz_symbol(not_invariant, F->table_ptr(), w8, build_disk_rule(8.0, 8, 8)),
                 std::invalid_argument);
    EXPECT_THROW(OrbitAveragedBump(F, 0.0, -1.0), std::invalid_argument);
}

TEST(ToeplitzSymbolTest, MeasureAtomsMustLieInDomain) {
    EXPECT_THROW(measure_toeplitz_symbol({{cplx(0.95, 0.0), 1.0}}, *octagon_F(), w8), std::invalid_argument);
    const InvariantSymbol m = measure_toeplitz_symbol({{cplx(0.1, 0.0), 1.0}}, *octagon_F(), w8);
    EXPECT_EQ(m.separable()->size(), octagon_F()->table().size());
}
