#pragma once

#include "truncation.hpp"

namespace berezin {

/// Identity constants fixed once per weight from the trivial-group oracles.
struct Constants {
    double r = 0;
    double printed_c = 0;        // (r-1)/pi as printed for the mean-value identity
    double kappa_star = 0;       // star product, from a rank-one matrix product
    double kappa_meanvalue = 0;  // 1 / int d(0, zeta)^r dlambda_0
    double kappa_kernel = 0;     // reproducing constant of e_z against lambda_r
    double kappa_op = 0;         // symbol kernel to integral kernel, from the rank-one nuclear norm
    double kappa_pair = 0;       // 1 / c_r int e_{conj z, zeta}(conj eta, eta) dlambda_0(eta)
    double kappa_hs = 0;         // Gamma-sum square norm over the double integral
};

struct CalibrationRules {
    int star_radial = 48, star_angular = 96;
    int kernel_radial = 48, kernel_angular = 96;
    int hs_radial = 32, hs_angular = 64;
    int degree_cap = 60;
};

namespace detail {

inline std::shared_ptr<const FundamentalDomain> disk_domain() {
    static const auto F = std::make_shared<const FundamentalDomain>(
        std::make_shared<const OrbitTable>(enumerate_orbit(trivial_group(), 0)), trivial_group());
    return F;
}

}  // namespace detail

inline double calibrate_star(const Weight& w, const CalibrationRules& q = {}) {
    const MonomialBasis B(w, q.degree_cap);
    const cplx u1(0.2, 0.1), v1(-0.1, 0.3), u2(0.3, -0.2), v2(0.1, 0.0), x(0.1, 0.0), y(0.0, -0.2);
    const InvariantSymbol A = rank_one_symbol(w, u1, v1), Bs = rank_one_symbol(w, u2, v2);
    const cplx raw = star_product(A, Bs, build_disk_rule(w.r, q.star_radial, q.star_angular), 1.0)(x, y);
    const cplx oracle = berezin_symbol(rank_one(B, u1, v1) * rank_one(B, u2, v2), x, y);
    return (oracle / raw).real();
}

inline double calibrate_meanvalue(const Weight& w) {
    const DiskRule rule0 = build_disk_rule(0.0, 32, 4, w.r / 2);
    std::vector<double> v(rule0.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = rule0.weights[k] * rpow(d_kernel(0.0, rule0.nodes[k]), w.r);
    return 1.0 / tree_sum(v);
}

inline double calibrate_kernel(const Weight& w, const CalibrationRules& q = {}) {
    const cplx z = 0.4;
    const DiskRule rule = build_disk_rule(w.r, q.kernel_radial, q.kernel_angular);
    const cplx raw = integrate(rule, [&](cplx x) { return x * x * x * std::conj(reproducing_kernel(w, z, x)); });
    return (z * z * z / raw).real();
}

inline double calibrate_op(const Weight& w, const CalibrationRules& q = {}) {
    const cplx u = 0.1, v(0.0, -0.2);
    const TruncationRegion G(detail::disk_domain(), 1);
    const DiskRule rule = region_rule(G, w.r, {q.kernel_radial, q.kernel_angular});
    const double raw = nuclear_norm(compress(rank_one_symbol(w, u, v), G, rule, 1.0, 0.0));
    const double oracle = rpow(1 - std::norm(u), -w.r / 2) * rpow(1 - std::norm(v), -w.r / 2);
    return oracle / raw;
}

inline double calibrate_pair(const Weight& w, const CalibrationRules& q = {}) {
    const InvariantSymbol e = eval_vector(0.1, cplx(0.0, 0.2), detail::disk_domain()->table_ptr(), w);
    const cplx t = trace_vn(e, build_disk_rule(0.0, q.kernel_radial, q.kernel_angular, w.r));
    return (1.0 / t).real();
}

inline double calibrate_hs(const Weight& w, const CalibrationRules& q = {}) {
    const cplx z = 0.1, zeta(0.0, 0.2);
    const auto& F = *detail::disk_domain();
    const InvariantSymbol e = eval_vector(z, zeta, F.table_ptr(), w);
    const DiskRule rule0 = build_disk_rule(0.0, q.hs_radial, q.hs_angular, w.r);
    const double hs = hs_norm_2r(e, rule0, rule0);
    return gamma_square_norm(z, zeta, F.table(), w).value / (hs * hs);
}

inline Constants calibrate(const Weight& w, const CalibrationRules& q = {}) {
    Constants c;
    c.r = w.r;
    c.printed_c = w.c();
    c.kappa_star = calibrate_star(w, q);
    c.kappa_meanvalue = calibrate_meanvalue(w);
    c.kappa_kernel = calibrate_kernel(w, q);
    c.kappa_op = calibrate_op(w, q);
    c.kappa_pair = calibrate_pair(w, q);
    c.kappa_hs = calibrate_hs(w, q);
    return c;
}

}  // namespace berezin
