#pragma once

#include <memory>

#include "fuchsian.hpp"

namespace berezin {

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Terms of K(x, y) = sum_t c_t (1 - conj(x) a_t)^(-r) (1 - conj(b_t) y)^(-r).
/// shell[t] is the word length of the orbit element behind the term (0 when
/// the term does not come from an orbit sum).
struct SeparableTerms {
    std::vector<cplx> a, b, c;
    std::vector<int> shell;

    std::size_t size() const { return c.size(); }
    void push(cplx a_, cplx b_, cplx c_, int s) {
        a.push_back(a_);
        b.push_back(b_);
        c.push_back(c_);
        shell.push_back(s);
    }
    int max_shell() const { return shell.empty() ? 0 : *std::max_element(shell.begin(), shell.end()); }
};

using PointList = std::vector<cplx>;

namespace detail {

/// Power (1 - conj(x) y)^p, principal branch; the base has positive real part.
inline cplx kfac(cplx x, cplx y, double p) { return kpow(1.0 - std::conj(x) * y, p); }

struct SymbolImpl {
    virtual ~SymbolImpl() = default;
    /// K(x_i, y_j), the symbol divided by (1 - conj(x) y)^r.
    virtual Eigen::MatrixXcd kernel(const PointList& X, const PointList& Y, double r) const = 0;
    virtual Eigen::VectorXcd kernel_diagonal(const PointList& X, double r) const {
        Eigen::VectorXcd d(static_cast<Eigen::Index>(X.size()));
        parallel_for(static_cast<std::ptrdiff_t>(X.size()), [&](std::ptrdiff_t i) {
            d(i) = kernel(PointList{X[i]}, PointList{X[i]}, r)(0, 0);
        });
        return d;
    }
    /// Absolute size of the outermost orbit shell at (x, y).
    virtual double tail(cplx, cplx, double) const { return 0.0; }
    virtual bool orbit_based() const { return false; }
};

struct ConstantImpl final : SymbolImpl {
    cplx value;
    explicit ConstantImpl(cplx v) : value(v) {}
    Eigen::MatrixXcd kernel(const PointList& X, const PointList& Y, double r) const override {
        Eigen::MatrixXcd K(X.size(), Y.size());
        parallel_for(static_cast<std::ptrdiff_t>(X.size()), [&](std::ptrdiff_t i) {
            for (std::size_t j = 0; j < Y.size(); ++j) K(i, j) = value * kfac(X[i], Y[j], -r);
        });
        return K;
    }
    Eigen::VectorXcd kernel_diagonal(const PointList& X, double r) const override {
        Eigen::VectorXcd d(X.size());
        for (std::size_t i = 0; i < X.size(); ++i) d(i) = value * kfac(X[i], X[i], -r);
        return d;
    }
};

struct SeparableImpl final : SymbolImpl {
    SeparableTerms t;
    bool from_orbit;
    SeparableImpl(SeparableTerms terms, bool orbit) : t(std::move(terms)), from_orbit(orbit) {}

    Eigen::MatrixXcd kernel(const PointList& X, const PointList& Y, double r) const override {
        const Eigen::Index T = static_cast<Eigen::Index>(t.size());
        const Eigen::Index nx = static_cast<Eigen::Index>(X.size()), ny = static_cast<Eigen::Index>(Y.size());
        Eigen::MatrixXcd G(T, ny);
        parallel_for(T, [&](std::ptrdiff_t k) {
            for (Eigen::Index j = 0; j < ny; ++j) G(k, j) = t.c[k] * kfac(t.b[k], Y[j], -r);
        });
        Eigen::MatrixXcd K(nx, ny);
        constexpr Eigen::Index block = 64;
        const Eigen::Index nb = (nx + block - 1) / block;
        parallel_for(nb, [&](std::ptrdiff_t blk) {
            const Eigen::Index r0 = blk * block, rows = std::min(block, nx - r0);
            Eigen::MatrixXcd F(rows, T);
            for (Eigen::Index i = 0; i < rows; ++i)
                for (Eigen::Index k = 0; k < T; ++k) F(i, k) = kfac(X[r0 + i], t.a[k], -r);
            K.middleRows(r0, rows).noalias() = F * G;
        });
        return K;
    }
    Eigen::VectorXcd kernel_diagonal(const PointList& X, double r) const override {
        Eigen::VectorXcd d(X.size());
        parallel_for(static_cast<std::ptrdiff_t>(X.size()), [&](std::ptrdiff_t i) {
            std::vector<cplx> v(t.size());
            for (std::size_t k = 0; k < t.size(); ++k)
                v[k] = t.c[k] * kfac(X[i], t.a[k], -r) * kfac(t.b[k], X[i], -r);
            d(i) = tree_sum(v);
        });
        return d;
    }
    double tail(cplx x, cplx y, double r) const override {
        if (!from_orbit) return 0.0;
        const int L = t.max_shell();
        if (L == 0) return 0.0;
        double s = 0;
        for (std::size_t k = 0; k < t.size(); ++k)
            if (t.shell[k] == L) s += std::abs(t.c[k] * kfac(x, t.a[k], -r) * kfac(t.b[k], y, -r));
        return s;
    }
    bool orbit_based() const override { return from_orbit; }
};

struct SumImpl final : SymbolImpl {
    std::vector<std::pair<cplx, std::shared_ptr<const SymbolImpl>>> parts;
    Eigen::MatrixXcd kernel(const PointList& X, const PointList& Y, double r) const override {
        Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(X.size(), Y.size());
        for (const auto& [c, p] : parts) K += c * p->kernel(X, Y, r);
        return K;
    }
    Eigen::VectorXcd kernel_diagonal(const PointList& X, double r) const override {
        Eigen::VectorXcd d = Eigen::VectorXcd::Zero(X.size());
        for (const auto& [c, p] : parts) d += c * p->kernel_diagonal(X, r);
        return d;
    }
    double tail(cplx x, cplx y, double r) const override {
        double s = 0;
        for (const auto& [c, p] : parts) s += std::abs(c) * p->tail(x, y, r);
        return s;
    }
    bool orbit_based() const override {
        return std::any_of(parts.begin(), parts.end(), [](const auto& p) { return p.second->orbit_based(); });
    }
};

/// K_AB(x, y) = kappa int K_B(x, eta) K_A(eta, y) dlambda_r(eta).
struct ProductImpl final : SymbolImpl {
    std::shared_ptr<const SymbolImpl> A, B;
    PointList nodes;
    std::vector<double> weights;
    double kappa;
    Eigen::MatrixXcd kernel(const PointList& X, const PointList& Y, double r) const override {
        Eigen::MatrixXcd KB = B->kernel(X, nodes, r);
        Eigen::MatrixXcd KA = A->kernel(nodes, Y, r);
        for (std::size_t k = 0; k < nodes.size(); ++k) KA.row(k) *= kappa * weights[k];
        return blocked_product(KB, KA);
    }
    Eigen::VectorXcd kernel_diagonal(const PointList& X, double r) const override {
        const Eigen::MatrixXcd KB = B->kernel(X, nodes, r);
        const Eigen::MatrixXcd KA = A->kernel(nodes, X, r);
        Eigen::VectorXcd d(X.size());
        parallel_for(static_cast<std::ptrdiff_t>(X.size()), [&](std::ptrdiff_t i) {
            std::vector<cplx> v(nodes.size());
            for (std::size_t k = 0; k < nodes.size(); ++k) v[k] = KB(i, k) * (kappa * weights[k]) * KA(k, i);
            d(i) = tree_sum(v);
        });
        return d;
    }
};

}  // namespace detail

/// Bi-kernel A(conj(z), zeta) on D x D: antianalytic in z, analytic in zeta.
/// Stored through K = A / (1 - conj(z) zeta)^r.
class InvariantSymbol {
public:
    InvariantSymbol(Weight w, std::shared_ptr<const detail::SymbolImpl> impl,
                    std::shared_ptr<const OrbitTable> table, std::string name)
        : w_(w), impl_(std::move(impl)), table_(std::move(table)), name_(std::move(name)) {}

    const Weight& weight() const { return w_; }
    const std::shared_ptr<const OrbitTable>& table() const { return table_; }
    const std::string& name() const { return name_; }
    const detail::SymbolImpl& impl() const { return *impl_; }
    std::shared_ptr<const detail::SymbolImpl> impl_ptr() const { return impl_; }

    /// A(conj(x), y) with the outer-shell magnitude as tail proxy.
    ComplexEstimate evaluate(cplx x, cplx y) const {
        const cplx f = detail::kfac(x, y, w_.r);
        const cplx k = impl_->kernel(PointList{x}, PointList{y}, w_.r)(0, 0);
        return {k * f, impl_->tail(x, y, w_.r) * std::abs(f)};
    }
    cplx operator()(cplx x, cplx y) const { return evaluate(x, y).value; }

    Eigen::MatrixXcd kernel(const PointList& X, const PointList& Y) const { return impl_->kernel(X, Y, w_.r); }

    Eigen::MatrixXcd tabulate(const PointList& X, const PointList& Y) const {
        Eigen::MatrixXcd K = kernel(X, Y);
        parallel_for(static_cast<std::ptrdiff_t>(X.size()), [&](std::ptrdiff_t i) {
            for (std::size_t j = 0; j < Y.size(); ++j) K(i, j) *= detail::kfac(X[i], Y[j], w_.r);
        });
        return K;
    }

    /// A(conj(x), x).
    Eigen::VectorXcd diagonal(const PointList& X) const {
        Eigen::VectorXcd d = impl_->kernel_diagonal(X, w_.r);
        for (std::size_t i = 0; i < X.size(); ++i) d(i) *= rpow(1.0 - std::norm(X[i]), w_.r);
        return d;
    }

    const SeparableTerms* separable() const {
        auto p = dynamic_cast<const detail::SeparableImpl*>(impl_.get());
        return p ? &p->t : nullptr;
    }

    InvariantSymbol scaled(cplx c) const {
        auto s = std::make_shared<detail::SumImpl>();
        s->parts.emplace_back(c, impl_);
        return {w_, s, table_, name_};
    }
    friend InvariantSymbol operator+(const InvariantSymbol& x, const InvariantSymbol& y) {
        if (x.w_.r != y.w_.r) throw std::invalid_argument("symbol sum: weight mismatch");
        auto s = std::make_shared<detail::SumImpl>();
        s->parts.emplace_back(1.0, x.impl_);
        s->parts.emplace_back(1.0, y.impl_);
        return {x.w_, s, x.table_ ? x.table_ : y.table_, x.name_ + "+" + y.name_};
    }

    /// Drops separable terms that cannot reach the given regions: the term
    /// bound m_t d(x, a_t)^r d(b_t, y)^r, m_t = |c_t| (1 - |a_t|^2)^(-r/2) (1 - |b_t|^2)^(-r/2),
    /// is maximized over |x| <= R_first, |y| <= R_second (hyperbolic radii) and
    /// compared with tol times the largest such bound.
    InvariantSymbol pruned(double rho_first, double rho_second, double tol) const {
        const SeparableTerms* t = separable();
        if (!t) return *this;
        const double r = w_.r;
        auto reach = [&](cplx p, double R) {
            const double gap = std::max(0.0, hyperbolic_radius(p) - R);
            return rpow(1.0 / std::cosh(gap / 2), r);
        };
        std::vector<double> bound(t->size());
        double top = 0;
        for (std::size_t k = 0; k < t->size(); ++k) {
            const double m = std::abs(t->c[k]) * rpow(1.0 - std::norm(t->a[k]), -r / 2) *
                             rpow(1.0 - std::norm(t->b[k]), -r / 2);
            bound[k] = m * reach(t->a[k], rho_first) * reach(t->b[k], rho_second);
            top = std::max(top, bound[k]);
        }
        SeparableTerms out;
        for (std::size_t k = 0; k < t->size(); ++k)
            if (bound[k] >= tol * top) out.push(t->a[k], t->b[k], t->c[k], t->shell[k]);
        return {w_, std::make_shared<detail::SeparableImpl>(std::move(out), impl_->orbit_based()), table_, name_};
    }

private:
    Weight w_;
    std::shared_ptr<const detail::SymbolImpl> impl_;
    std::shared_ptr<const OrbitTable> table_;
    std::string name_;
};

inline InvariantSymbol constant_symbol(const Weight& w, cplx c = 1.0,
                                       std::shared_ptr<const OrbitTable> table = nullptr) {
    return {w, std::make_shared<detail::ConstantImpl>(c), std::move(table), "constant"};
}

inline InvariantSymbol separable_symbol(const Weight& w, SeparableTerms terms, std::shared_ptr<const OrbitTable> table,
                                        std::string name, bool orbit) {
    return {w, std::make_shared<detail::SeparableImpl>(std::move(terms), orbit), std::move(table), std::move(name)};
}

/// Symbol of f -> <f, e_u> e_v: (1 - conj(z) zeta)^r / ((1 - conj(z) u)^r (1 - conj(v) zeta)^r).
inline InvariantSymbol rank_one_symbol(const Weight& w, cplx u, cplx v) {
    SeparableTerms t;
    t.push(u, v, 1.0, 0);
    return separable_symbol(w, std::move(t), nullptr, "rank_one", false);
}

}  // namespace berezin
