#pragma once

#include "quadrature.hpp"

namespace berezin {

/// beta_n = ||w^n||^2 = Gamma(n+1) Gamma(r) / Gamma(n+r), from the ratio
/// beta_n / beta_{n-1} = n / (n+r-1).
inline double monomial_norm_sq(const Weight& w, int n) {
    if (n < 0) throw std::invalid_argument("monomial_norm_sq: negative degree");
    double b = 1.0;
    for (int k = 1; k <= n; ++k) b *= k / (k + w.r - 1.0);
    return b;
}

/// Orthonormal basis u_n = w^n / sqrt(beta_n), n = 0..cap.
class MonomialBasis {
public:
    explicit MonomialBasis(Weight w, int degree_cap = 60) : w_(w), cap_(degree_cap) {
        if (degree_cap < 0) throw std::invalid_argument("MonomialBasis: negative degree cap");
        beta_.resize(cap_ + 1);
        beta_[0] = 1.0;
        for (int n = 1; n <= cap_; ++n) beta_[n] = beta_[n - 1] * n / (n + w.r - 1.0);
    }
    const Weight& weight() const { return w_; }
    int cap() const { return cap_; }
    int dim() const { return cap_ + 1; }
    double beta(int n) const { return beta_.at(n); }

    /// u_n(x) for n = 0..cap.
    Eigen::VectorXcd values(cplx x) const {
        Eigen::VectorXcd v(dim());
        cplx p(1, 0);
        for (int n = 0; n <= cap_; ++n) {
            v(n) = p / std::sqrt(beta_[n]);
            p *= x;
        }
        return v;
    }
    /// Coefficients of e_z in the basis: conj(z)^n / sqrt(beta_n).
    Eigen::VectorXcd coherent(cplx z) const { return values(std::conj(z)); }

    /// ||e_z - truncation||^2 / ||e_z||^2.
    double relative_tail(cplx z) const {
        const double t = std::norm(z);
        if (t == 0) return 0;
        double term = 1.0, sum = 0.0;
        for (int n = 1; n <= cap_; ++n) term *= t * (n + w_.r - 1.0) / n;
        for (int n = cap_ + 1; n < cap_ + 100000; ++n) {
            term *= t * (n + w_.r - 1.0) / n;
            sum += term;
            if (term < 1e-18 * sum) break;
        }
        return sum * rpow(1.0 - t, w_.r);
    }

private:
    Weight w_;
    int cap_;
    std::vector<double> beta_;
};

/// e_z(x) = (1 - x conj(z))^(-r).
inline cplx reproducing_kernel(const Weight& w, cplx z, cplx x) { return kpow(1.0 - x * std::conj(z), -w.r); }

/// Matrix of an operator in the orthonormal monomial basis, M(m,n) = <A u_n, u_m>.
struct TruncatedOperator {
    MonomialBasis basis;
    Eigen::MatrixXcd matrix;

    TruncatedOperator(MonomialBasis b, Eigen::MatrixXcd m) : basis(std::move(b)), matrix(std::move(m)) {
        if (matrix.rows() != basis.dim() || matrix.cols() != basis.dim())
            throw std::invalid_argument("TruncatedOperator: matrix size does not match basis");
        if (!matrix.allFinite()) throw std::invalid_argument("TruncatedOperator: non-finite entries");
    }
    static TruncatedOperator identity(const MonomialBasis& b) {
        return {b, Eigen::MatrixXcd::Identity(b.dim(), b.dim())};
    }
    TruncatedOperator adjoint() const { return {basis, matrix.adjoint()}; }
    TruncatedOperator operator*(const TruncatedOperator& o) const { return {basis, matrix * o.matrix}; }
    TruncatedOperator operator+(const TruncatedOperator& o) const { return {basis, matrix + o.matrix}; }
    TruncatedOperator scaled(cplx c) const { return {basis, c * matrix}; }
};

/// T_phi from the phi values at the nodes of a lambda_r rule.
inline TruncatedOperator toeplitz_matrix_from_values(const std::vector<cplx>& phi, const MonomialBasis& basis,
                                                     const DiskRule& rule) {
    if (std::abs(rule.s - basis.weight().r) > 1e-12)
        throw std::invalid_argument("toeplitz_matrix: rule must target lambda_r");
    const Eigen::Index n = static_cast<Eigen::Index>(rule.size());
    Eigen::MatrixXcd U(n, basis.dim());
    Eigen::MatrixXcd WU(n, basis.dim());
    parallel_for(n, [&](std::ptrdiff_t k) {
        const Eigen::VectorXcd u = basis.values(rule.nodes[k]);
        U.row(k) = u.transpose();
        WU.row(k) = (basis.weight().c() * rule.weights[k] * phi[k]) * u.transpose();
    });
    Eigen::MatrixXcd M = U.adjoint() * WU;
    return {basis, M};
}

template <class Phi>
TruncatedOperator toeplitz_matrix(Phi&& phi, const MonomialBasis& basis, const DiskRule& rule) {
    std::vector<cplx> v(rule.size());
    parallel_for(static_cast<std::ptrdiff_t>(rule.size()), [&](std::ptrdiff_t k) { v[k] = cplx(phi(rule.nodes[k])); });
    for (std::size_t k = 0; k < v.size(); ++k)
        if (!std::isfinite(v[k].real()) || !std::isfinite(v[k].imag()))
            throw std::runtime_error("toeplitz_matrix: symbol not finite at node " + std::to_string(k));
    return toeplitz_matrix_from_values(v, basis, rule);
}

/// f -> <f, e_u> e_v.
inline TruncatedOperator rank_one(const MonomialBasis& basis, cplx u, cplx v) {
    return {basis, basis.coherent(v) * basis.coherent(u).adjoint()};
}

inline constexpr double symbol_tail_tol = 1e-10;

/// <A e_z, e_zeta> / <e_z, e_zeta> with truncated coherent vectors.
inline cplx berezin_symbol(const TruncatedOperator& A, cplx z, cplx zeta) {
    for (cplx p : {z, zeta}) {
        const double t = A.basis.relative_tail(p);
        if (t > symbol_tail_tol)
            throw std::domain_error("berezin_symbol: kernel tail " + std::to_string(t) + " at |z| = " +
                                    std::to_string(std::abs(p)) + " exceeds tolerance; raise the degree cap");
    }
    const Eigen::VectorXcd cz = A.basis.coherent(z), cw = A.basis.coherent(zeta);
    return cw.dot(A.matrix * cz) / cw.dot(cz);
}

inline double operator_sup_norm(const TruncatedOperator& A) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A.matrix);
    return svd.singularValues()(0);
}

}  // namespace berezin
