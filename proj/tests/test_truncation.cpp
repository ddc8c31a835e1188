#include <gtest/gtest.h>

#include <berezin/calibration.hpp>

using namespace berezin;

namespace {

const Weight w8(8.0);

std::shared_ptr<const FundamentalDomain> octagon_F() {
    static auto F = std::make_shared<const FundamentalDomain>(
        std::make_shared<const OrbitTable>(enumerate_orbit(octagon_group(), 5)), octagon_group());
    return F;
}

const OrbitTable& octagon_table() { return octagon_F()->table(); }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Region, Guards) {
    EXPECT_THROW(build_region(octagon_F(), 0), std::invalid_argument);
    EXPECT_THROW(build_region(detail::disk_domain(), 2), std::invalid_argument);
    EXPECT_THROW(build_region(octagon_F(), static_cast<int>(octagon_table().size()) + 1), std::invalid_argument);
    EXPECT_NO_THROW(build_region(detail::disk_domain(), 1));
}

TEST(Region, ContainsTranslatedTiles) {
    const TruncationRegion G1 = build_region(octagon_F(), 1), G3 = build_region(octagon_F(), 3);
    const cplx p(0.2, 0.1);
    EXPECT_TRUE(G1.contains(p));
    for (int i = 1; i < 3; ++i) {
        const cplx q = G3.element(i).apply(p);
        EXPECT_TRUE(G3.contains(q));
        EXPECT_FALSE(G1.contains(q));
    }
}

TEST(Region, RuleMassScalesWithTileCount) {
    const RegionRuleSpec spec{6, 4};
    const double tile = tree_sum(octagon_F()->rule(0.0, spec.radial, spec.angular).weights);
    for (int N : {1, 4, 9}) {
        const DiskRule R = region_rule(build_region(octagon_F(), N), 0.0, spec);
        EXPECT_EQ(R.s, 0.0);
        EXPECT_NEAR(tree_sum(R.weights), N * tile, 1e-12 * N * tile);
        for (cplx x : R.nodes) EXPECT_LT(std::abs(x), 1.0);
    }
}

TEST(Compression, RankOneNuclearNorm) {
    const Constants C = calibrate(w8);
    const TruncationRegion G = build_region(detail::disk_domain(), 1);
    const DiskRule rule = region_rule(G, 8.0, {48, 96});
    const cplx u(-0.3, 0.25), v(0.35, 0.1);
    const CompressedOperator M = compress(rank_one_symbol(w8, u, v), G, rule, C.kappa_op, 0.0);
    EXPECT_TRUE(M.factored());
    const double want = rpow(1 - std::norm(u), -4.0) * rpow(1 - std::norm(v), -4.0);
    EXPECT_LT(rel(nuclear_norm(M), want), 1e-8);
    EXPECT_LT(rel(hs_norm(M), want), 1e-8);
}

TEST(Compression, RuleMustMatchWeight) {
    const TruncationRegion G = build_region(detail::disk_domain(), 1);
    EXPECT_THROW(compress(rank_one_symbol(w8, 0.1, 0.1), G, region_rule(G, 6.0, {8, 8}), 1.0), std::invalid_argument);
}

TEST(Compression, FactoredMatchesDense) {
    const auto disk = detail::disk_domain();
    const InvariantSymbol m = measure_toeplitz_symbol({{cplx(0.1, 0.05), 1.0}, {cplx(-0.2, 0.1), 0.5}}, *disk, w8);
    const TruncationRegion G = build_region(disk, 1);
    const DiskRule rule = region_rule(G, 8.0, {12, 16});
    const CompressedOperator F = compress(m, G, rule, w8.c(), 0.0);
    ASSERT_TRUE(F.factored());
    const Eigen::Index n = static_cast<Eigen::Index>(rule.size());
    const Eigen::MatrixXcd K = m.kernel(rule.nodes, rule.nodes);
    CompressedOperator D;
    D.matrix.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            D.matrix(i, j) = std::sqrt(rule.weights[i] * rule.weights[j]) * w8.c() * K(j, i);
    const Eigen::VectorXd a = F.singular_values(), b = D.singular_values();
    const double top = b(0);
    for (Eigen::Index i = 0; i < a.size(); ++i) EXPECT_NEAR(a(i), b(i), 1e-10 * top);
    for (Eigen::Index i = a.size(); i < b.size(); ++i) EXPECT_LT(b(i), 1e-10 * top);
}

TEST(Compression, NuclearNormDominatesTrace) {
    const InvariantSymbol e = eval_vector(cplx(0.1, 0.0), cplx(0.0, 0.2), octagon_F()->table_ptr(), w8);
    const TruncationRegion G = build_region(octagon_F(), 3);
    const CompressedOperator M = compress(e, G, region_rule(G, 8.0, {6, 4}), w8.c());
    EXPECT_GE(nuclear_norm(M), std::abs(M.dense().trace()) * (1 - 1e-12));
    EXPECT_GE(nuclear_norm(M), hs_norm(M));
}

TEST(Compression, NodeOrderDoesNotMatter) {
    const InvariantSymbol e = eval_vector(cplx(0.1, 0.0), cplx(0.0, 0.2), octagon_F()->table_ptr(), w8);
    const TruncationRegion G = build_region(octagon_F(), 4);
    const DiskRule rule = region_rule(G, 8.0, {6, 4});
    DiskRule flipped = rule;
    std::reverse(flipped.nodes.begin(), flipped.nodes.end());
    std::reverse(flipped.weights.begin(), flipped.weights.end());
    const double a = nuclear_norm(compress(e, G, rule, w8.c()));
    const double b = nuclear_norm(compress(e, G, flipped, w8.c()));
    EXPECT_LT(rel(b, a), 1e-10);
}

TEST(Sequence, HsDimensionBoundDominates) {
    const InvariantSymbol e = eval_vector(cplx(0.1, 0.0), cplx(0.0, 0.2), octagon_F()->table_ptr(), w8);
    const NormSequence s = norm_sequence(e, octagon_F(), {6, 4}, 3, w8.c());
    ASSERT_EQ(s.entries.size(), 3u);
    for (const auto& x : s.entries) {
        EXPECT_GT(x.l1(), 0.0);
        EXPECT_LE(x.l1(), x.hs_dimension_bound());
        EXPECT_EQ(x.dim, static_cast<std::size_t>(x.N) * octagon_F()->rule(0.0, 6, 4).size());
    }
    EXPECT_EQ(s.relative_increments().size(), 2u);
}

TEST(OrbitSums, TrivialGroupGivesOne) {
    const OrbitTable& t = detail::disk_domain()->table();
    EXPECT_DOUBLE_EQ(orbit_sum_yN(t, 1, w8, 0).value, 1.0);
    EXPECT_DOUBLE_EQ(orbit_sum_plain(t, 1, w8, 0, 0).value, 1.0);
    EXPECT_NEAR(orbit_sum_phased(t, 1, w8, 0, 0).value, 1.0, 1e-15);
}

TEST(OrbitSums, RootMeanSumIsScaledYN) {
    for (int N : {1, 3, 7}) {
        const double y = orbit_sum_yN(octagon_table(), N, w8, 4).value;
        EXPECT_LT(rel(orbit_sum_root_mean(octagon_table(), N, w8, 4).value, y / std::sqrt(double(N))), 1e-12);
    }
}

TEST(OrbitSums, PhasedSumWithoutPhasesEqualsPlain) {
    const double a = orbit_sum_plain(octagon_table(), 2, w8, 2, 2).value;
    const double b = orbit_sum_phased(octagon_table(), 2, w8, 2, 2, {false, false, false}).value;
    EXPECT_LT(rel(b, a), 1e-12);
    const OrbitSum phased_sum = orbit_sum_phased(octagon_table(), 2, w8, 2, 2);
    EXPECT_GT(phased_sum.value, 0.0);
    EXPECT_EQ(phased_sum.partial.size(), 3u);
}

TEST(OrbitSums, Guards) {
    EXPECT_THROW(orbit_sum_yN(octagon_table(), 0, w8, 2), std::invalid_argument);
    EXPECT_THROW(orbit_sum_yN(octagon_table(), 2, w8, 6), std::invalid_argument);
    EXPECT_THROW(orbit_sum_plain(detail::disk_domain()->table(), 2, w8, 0, 0), std::invalid_argument);
}

TEST(Calibration, ConstantsMatchClosedForms) {
    for (double r : {6.0, 8.0}) {
        const Weight w(r);
        const Constants C = calibrate(w);
        const double c = w.c();
        EXPECT_LT(rel(C.kappa_star, c), 1e-9) << r;
        EXPECT_LT(rel(C.kappa_meanvalue, (r - 2) / (2 * pi)), 1e-12) << r;
        EXPECT_LT(rel(C.kappa_kernel, c), 1e-9) << r;
        EXPECT_LT(rel(C.kappa_op, c), 1e-9) << r;
        EXPECT_LT(rel(C.kappa_pair, 1 / c), 1e-9) << r;
        EXPECT_LT(rel(C.kappa_hs, c * c), 1e-8) << r;
    }
}

TEST(Calibration, TrivialEquivalenceConstantIsCoefficientTimesArea) {
    const Weight w(8.0);
    const DiskRule zeta = restrict_rule(build_disk_rule(0.0, 12, 16, 4.0), [](cplx x) { return std::abs(x) < 0.5; });
    ASSERT_GT(zeta.size(), 0u);
    const EquivalenceConstant M =
        equivalence_constant(detail::disk_domain(), w, zeta, {0.0, cplx(0.3, -0.1)}, 1, {48, 96}, calibrate_op(w));
    const double want = w.c() * tree_sum(zeta.weights);
    for (double p : M.per_probe) EXPECT_LT(rel(p, want), 1e-8);
    EXPECT_THROW(equivalence_constant(detail::disk_domain(), w, build_disk_rule(8.0, 4, 4), {0.0}, 1, {8, 8}, 1.0),
                 std::invalid_argument);
}
