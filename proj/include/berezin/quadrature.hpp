#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include "hyperbolic.hpp"

namespace berezin {

struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

namespace detail {

/// P_n^{(a,b)}(x) and its derivative by the three-term recurrence.
inline std::pair<double, double> jacobi_eval(int n, double a, double b, double x) {
    auto value = [](int n_, double a_, double b_, double x_) {
        if (n_ == 0) return 1.0;
        double p0 = 1.0;
        double p1 = (a_ + 1.0) + (a_ + b_ + 2.0) * (x_ - 1.0) / 2.0;
        for (int k = 2; k <= n_; ++k) {
            const double s = 2.0 * k + a_ + b_;
            const double c1 = 2.0 * k * (k + a_ + b_) * (s - 2.0);
            const double c2 = (s - 1.0) * (s * (s - 2.0) * x_ + a_ * a_ - b_ * b_);
            const double c3 = 2.0 * (k + a_ - 1.0) * (k + b_ - 1.0) * s;
            const double p2 = (c2 * p1 - c3 * p0) / c1;
            p0 = p1;
            p1 = p2;
        }
        return p1;
    };
    const double p = value(n, a, b, x);
    const double dp = n == 0 ? 0.0 : 0.5 * (n + a + b + 1.0) * value(n - 1, a + 1.0, b + 1.0, x);
    return {p, dp};
}

}  // namespace detail

/// Gauss-Jacobi rule for (1-x)^a (1+x)^b on [-1, 1]. Golub-Welsch start,
/// Newton polish, weights from the derivative formula.
inline GaussRule gauss_jacobi(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("gauss_jacobi: order must be positive");
    if (!(a > -1.0 && b > -1.0)) throw std::invalid_argument("gauss_jacobi: exponents must exceed -1");
    Eigen::VectorXd diag(n), sub(std::max(n - 1, 1));
    for (int k = 0; k < n; ++k) {
        const double s = 2.0 * k + a + b;
        diag(k) = k == 0 ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
    }
    for (int k = 1; k < n; ++k) {
        const double s = 2.0 * k + a + b;
        sub(k - 1) = std::sqrt(4.0 * k * (k + a) * (k + b) * (k + a + b) / (s * s * (s + 1.0) * (s - 1.0)));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub.head(std::max(n - 1, 0)), Eigen::EigenvaluesOnly);
    GaussRule g;
    g.x.resize(n);
    g.w.resize(n);
    const double logc = std::lgamma(n + a + 1.0) + std::lgamma(n + b + 1.0) - std::lgamma(n + a + b + 1.0) -
                        std::lgamma(n + 1.0) + (a + b + 1.0) * std::log(2.0);
    for (int k = 0; k < n; ++k) {
        double x = es.eigenvalues()(k);
        for (int it = 0; it < 6; ++it) {
            auto [p, dp] = detail::jacobi_eval(n, a, b, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        auto [p, dp] = detail::jacobi_eval(n, a, b, x);
        (void)p;
        g.x[k] = x;
        g.w[k] = std::exp(logc) / ((1.0 - x * x) * dp * dp);
    }
    return g;
}

inline GaussRule gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

enum class Support { disk, region };

/// Quadrature for dlambda_s = (1-|z|^2)^(s-2) dA. Weights already include the
/// measure density; the rule is exact for (1-|z|^2)^decay times polynomials.
struct DiskRule {
    std::vector<cplx> nodes;
    std::vector<double> weights;
    double s = 0;
    double decay = 0;
    int radial_order = 0;
    int angular_order = 0;
    Support support = Support::disk;

    std::size_t size() const { return nodes.size(); }
};

/// Polar product rule: Gauss-Jacobi in u = |z|^2 with weight (1-u)^(s-2+decay),
/// uniform angles.
inline DiskRule build_disk_rule(double s, int radial_order = 96, int angular_order = 256, double decay_exponent = 0.0,
                                double phase_offset = 0.0) {
    const double alpha = s - 2.0 + decay_exponent;
    if (!(s + decay_exponent > 1.0))
        throw std::invalid_argument("build_disk_rule: s + decay must exceed 1 for integrability");
    if (radial_order < 2 || angular_order < 4)
        throw std::invalid_argument("build_disk_rule: orders too small (radial >= 2, angular >= 4)");
    const GaussRule g = gauss_jacobi(radial_order, alpha, 0.0);
    DiskRule rule;
    rule.s = s;
    rule.decay = decay_exponent;
    rule.radial_order = radial_order;
    rule.angular_order = angular_order;
    rule.nodes.reserve(static_cast<std::size_t>(radial_order) * angular_order);
    rule.weights.reserve(rule.nodes.capacity());
    const double scale = std::pow(0.5, alpha + 1.0);
    const double dtheta = 2 * pi / angular_order;
    for (int k = 0; k < radial_order; ++k) {
        const double u = 0.5 * (1.0 + g.x[k]);
        const double wu = 0.5 * g.w[k] * scale * std::pow(1.0 - u, -decay_exponent) * dtheta;
        const double rho = std::sqrt(u);
        if (!(rho < 1.0 - boundary_guard)) throw std::runtime_error("build_disk_rule: node beyond boundary guard");
        for (int j = 0; j < angular_order; ++j) {
            rule.nodes.push_back(std::polar(rho, phase_offset + j * dtheta));
            rule.weights.push_back(wu);
        }
    }
    return rule;
}

/// Keeps the nodes accepted by the mask; weights unchanged.
template <class Pred>
DiskRule restrict_rule(const DiskRule& base, Pred&& inside) {
    DiskRule r = base;
    r.nodes.clear();
    r.weights.clear();
    r.support = Support::region;
    for (std::size_t i = 0; i < base.size(); ++i) {
        if (inside(base.nodes[i])) {
            r.nodes.push_back(base.nodes[i]);
            r.weights.push_back(base.weights[i]);
        }
    }
    if (r.nodes.empty()) throw std::runtime_error("restrict_rule: mask removed every node");
    return r;
}

/// Sum of w_i f(z_i), evaluated in parallel and reduced pairwise.
template <class F>
cplx integrate(const DiskRule& rule, F&& f) {
    std::vector<cplx> terms(rule.size());
    parallel_for(static_cast<std::ptrdiff_t>(rule.size()), [&](std::ptrdiff_t i) {
        terms[i] = rule.weights[i] * cplx(f(rule.nodes[i]));
    });
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (!std::isfinite(terms[i].real()) || !std::isfinite(terms[i].imag()))
            throw std::runtime_error("integrate: non-finite integrand at node " + std::to_string(i) + " (z = " +
                                     std::to_string(rule.nodes[i].real()) + "," +
                                     std::to_string(rule.nodes[i].imag()) + ")");
    }
    return tree_sum(terms);
}

/// Total lambda_s mass of the disk, pi/(s-1).
inline double disk_mass(double s) { return pi / (s - 1.0); }

}  // namespace berezin
