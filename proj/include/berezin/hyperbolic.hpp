#pragma once

#include <functional>
#include <random>
#include <stdexcept>

#include "numerics.hpp"

namespace berezin {

inline constexpr double boundary_guard = 1e-12;

class DiskPoint {
public:
    DiskPoint() = default;
    DiskPoint(cplx v) : v_(v) {  // NOLINT: implicit on purpose
        if (!(std::abs(v) < 1.0 - boundary_guard))
            throw std::domain_error("point outside the disk guard: |z| = " + std::to_string(std::abs(v)));
    }
    DiskPoint(double x, double y = 0.0) : DiskPoint(cplx(x, y)) {}
    cplx value() const { return v_; }
    operator cplx() const { return v_; }  // NOLINT
    double abs() const { return std::abs(v_); }

private:
    cplx v_{0, 0};
};

/// Weight r of the Bergman space H_r; r = 1/h.
struct Weight {
    double r;
    explicit Weight(double r_) : r(r_) {
        if (!(r > 2.0)) throw std::invalid_argument("weight must satisfy r > 2");
    }
    double c() const { return (r - 1.0) / pi; }
};

/// [[a, b], [conj(b), conj(a)]] with |a|^2 - |b|^2 = 1.
class SU11 {
public:
    SU11() = default;
    SU11(cplx a, cplx b) : a_(a), b_(b) {
        const double det = std::norm(a) - std::norm(b);
        if (!(det > 0) || !std::isfinite(det)) throw std::invalid_argument("not an SU(1,1) matrix: |a|^2-|b|^2 <= 0");
        const double s = 1.0 / std::sqrt(det);
        a_ *= s;
        b_ *= s;
    }
    static SU11 identity() { return {}; }
    /// Rotation by theta composed after the hyperbolic translation sending 0 to p.
    static SU11 translation(cplx p, double theta = 0.0) {
        const double s = 1.0 / std::sqrt(1.0 - std::norm(p));
        const cplx e = std::polar(1.0, theta / 2);
        return {s * e, s * p * e};
    }

    cplx a() const { return a_; }
    cplx b() const { return b_; }
    double det() const { return std::norm(a_) - std::norm(b_); }
    double trace() const { return 2.0 * a_.real(); }

    SU11 operator*(const SU11& h) const {
        SU11 g;
        g.a_ = a_ * h.a_ + b_ * std::conj(h.b_);
        g.b_ = a_ * h.b_ + b_ * std::conj(h.a_);
        return g;
    }
    SU11 inverse() const {
        SU11 g;
        g.a_ = std::conj(a_);
        g.b_ = -b_;
        return g;
    }
    cplx apply(cplx z) const { return (a_ * z + b_) / (std::conj(b_) * z + std::conj(a_)); }
    /// Image of the origin.
    cplx origin_image() const { return b_ / std::conj(a_); }
    /// Hyperbolic displacement of the origin, 2 log(|a| + |b|).
    double displacement() const { return 2.0 * std::log(std::abs(a_) + std::abs(b_)); }

private:
    cplx a_{1, 0};
    cplx b_{0, 0};
};

inline DiskPoint mobius_apply(const SU11& g, const DiskPoint& z) { return DiskPoint(g.apply(z.value())); }

/// d(z, w) = (1-|z|^2)^(1/2) (1-|w|^2)^(1/2) / |1 - conj(z) w| = sech(rho/2).
inline double d_kernel(cplx z, cplx w) {
    return std::sqrt((1.0 - std::norm(z)) * (1.0 - std::norm(w))) / std::abs(1.0 - std::conj(z) * w);
}

/// Distance for the metric 4|dz|^2/(1-|z|^2)^2.
inline double hyperbolic_distance(cplx z, cplx w) {
    return 2.0 * std::atanh(std::abs(z - w) / std::abs(1.0 - std::conj(z) * w));
}

inline double hyperbolic_radius(cplx z) { return 2.0 * std::atanh(std::abs(z)); }

/// alpha with exp(i alpha) = a / conj(a), in (-pi, pi].
inline double phase_alpha(const SU11& g) {
    double t = std::arg(g.a() / std::conj(g.a()));
    if (t <= -pi) t += 2 * pi;
    return t;
}

inline cplx aleph(const SU11& g) { return std::polar(1.0, pi + phase_alpha(g)); }

using AnalyticFunction = std::function<cplx(cplx)>;

/// (pi_r(g) f)(z) = (a - conj(b) z)^(-r) f(g^{-1} z), integer r.
inline cplx discrete_series_action(const Weight& w, const SU11& g, const AnalyticFunction& f, cplx z) {
    if (!is_integer(w.r)) throw std::invalid_argument("discrete series action implemented for integer r only");
    const cplx j = g.a() - std::conj(g.b()) * z;
    return kpow(j, -w.r) * f(g.inverse().apply(z));
}

/// Random element whose origin image has modulus at most max_radius.
template <class Rng>
SU11 random_su11(Rng& rng, double max_radius = 0.9) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double rad = max_radius * std::sqrt(u(rng));
    const cplx p = std::polar(rad, 2 * pi * u(rng));
    return SU11::translation(p, 2 * pi * u(rng));
}

template <class Rng>
cplx random_disk_point(Rng& rng, double max_radius) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return std::polar(max_radius * std::sqrt(u(rng)), 2 * pi * u(rng));
}

}  // namespace berezin
