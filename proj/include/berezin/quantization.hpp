#pragma once

#include <numeric>

#include "bergman.hpp"
#include "symbol.hpp"

namespace berezin {

/// Shell sums by word length; throws when the last shell does not shrink
/// while still carrying more than shell_rel_floor of the total.
inline constexpr double shell_rel_floor = 1e-8;

inline void check_shells(const std::vector<double>& shells, const char* what) {
    const std::size_t L = shells.size();
    if (L < 3) return;
    double total = 0;
    for (double s : shells) total += s;
    if (shells[L - 1] >= shells[L - 2] && shells[L - 1] > shell_rel_floor * total)
        throw ConvergenceError(std::string(what) + ": outer shell sum " + fmt_g(shells[L - 1]) +
                               " is not below the previous shell " + fmt_g(shells[L - 2]) + " (total " +
                               fmt_g(total) + ")");
}

/// K_r(z, eta) = sum_gamma d(gamma eta, z)^r.
inline Estimate poincare_series(const OrbitTable& table, cplx z, cplx eta, const Weight& w) {
    std::vector<std::vector<double>> by(table.max_word_length + 1);
    for (const auto& e : table.entries) by[e.length()].push_back(rpow(d_kernel(e.element.apply(eta), z), w.r));
    std::vector<double> shells;
    for (auto& v : by) shells.push_back(tree_sum(v));
    check_shells(shells, "poincare_series");
    return {tree_sum(shells), table.max_word_length > 0 ? shells.back() : 0.0};
}

/// e_{conj z, zeta}: c_r (1 - conj(x) y)^r sum_gamma (1 - conj(gamma z) gamma zeta)^r
///   (1 - conj(x) gamma zeta)^(-r) (1 - conj(gamma z) y)^(-r).
inline InvariantSymbol eval_vector(cplx z, cplx zeta, std::shared_ptr<const OrbitTable> table, const Weight& w) {
    if (!table) throw std::invalid_argument("eval_vector: orbit table required");
    SeparableTerms t;
    std::vector<std::vector<double>> by(table->max_word_length + 1);
    for (const auto& e : table->entries) {
        const cplx gz = e.element.apply(z), gw = e.element.apply(zeta);
        const cplx c = w.c() * detail::kfac(gz, gw, w.r);
        t.push(gw, gz, c, e.length());
        by[e.length()].push_back(rpow(d_kernel(z, gw) * d_kernel(gz, zeta), w.r));
    }
    std::vector<double> shells;
    for (auto& v : by) shells.push_back(tree_sum(v));
    check_shells(shells, "eval_vector");
    return separable_symbol(w, std::move(t), std::move(table), "eval_vector", true);
}

/// The other displayed form: c_r sum_gamma (1 - conj(gamma eta1) gamma eta2)^r (1 - conj z zeta)^r
///   / ((1 - conj z gamma eta2)^r (1 - conj(gamma eta1) zeta)^r), each power taken separately.
inline ComplexEstimate eval_vector_direct(cplx z, cplx zeta, const OrbitTable& table, const Weight& w, cplx eta1,
                                          cplx eta2) {
    const double r = w.r;
    std::vector<std::vector<cplx>> by(table.max_word_length + 1);
    for (const auto& e : table.entries) {
        const cplx g1 = e.element.apply(eta1), g2 = e.element.apply(eta2);
        by[e.length()].push_back(detail::kfac(g1, g2, r) * detail::kfac(z, zeta, r) * detail::kfac(z, g2, -r) *
                                 detail::kfac(g1, zeta, -r));
    }
    std::vector<cplx> shells;
    double tail = 0;
    for (auto& v : by) shells.push_back(tree_sum(v));
    if (table.max_word_length > 0)
        for (cplx v : by.back()) tail += std::abs(v);
    return {w.c() * tree_sum(shells), w.c() * tail};
}

/// Gamma-invariant Gaussian bump: phi(p) = amp * sum_gamma exp(-rho(p, gamma q)^2 / (2 sigma^2)).
class OrbitAveragedBump {
public:
    OrbitAveragedBump(std::shared_ptr<const FundamentalDomain> F, cplx center, double sigma, double amplitude = 1.0)
        : F_(std::move(F)), q_(center), sigma_(sigma), amp_(amplitude) {
        if (!(sigma > 0)) throw std::invalid_argument("OrbitAveragedBump: sigma must be positive");
        cutoff_ = sigma * std::sqrt(2.0 * 45.0);
        const double need = F_->whole_disk() ? 0.0 : hyperbolic_radius(F_->circumradius()) + hyperbolic_radius(q_) + cutoff_;
        if (!F_->whole_disk() && need > F_->table().reliable_rho())
            throw std::invalid_argument("OrbitAveragedBump: support reaches past the reliable radius of the table");
    }
    double operator()(cplx p) const {
        const cplx x = F_->reduce(p).point;
        const double rx = hyperbolic_radius(x);
        const double bound = rx + hyperbolic_radius(q_) + cutoff_;
        std::vector<double> v;
        for (const auto& e : F_->table().entries) {
            if (e.rho > bound) break;
            const double d = hyperbolic_distance(x, e.element.apply(q_));
            if (d < cutoff_) v.push_back(std::exp(-d * d / (2 * sigma_ * sigma_)));
        }
        return amp_ * tree_sum(v);
    }

private:
    std::shared_ptr<const FundamentalDomain> F_;
    cplx q_;
    double sigma_, amp_, cutoff_;
};

/// Toeplitz symbol c_r (1 - conj z zeta)^r int phi(eta) (1 - conj z eta)^(-r) (1 - conj(eta) zeta)^(-r) dlambda_r
/// over the full-disk rule; phi is spot-checked for invariance under the generators.
template <class Phi>
InvariantSymbol invariant_toeplitz_symbol(Phi&& phi, std::shared_ptr<const OrbitTable> table, const Weight& w,
                                          const DiskRule& rule) {
    if (std::abs(rule.s - w.r) > 1e-12) throw std::invalid_argument("invariant_toeplitz_symbol: rule must target lambda_r");
    std::vector<cplx> vals(rule.size());
    parallel_for(static_cast<std::ptrdiff_t>(rule.size()), [&](std::ptrdiff_t k) { vals[k] = cplx(phi(rule.nodes[k])); });
    if (table) {
        const std::size_t stride = std::max<std::size_t>(1, rule.size() / 7);
        for (std::size_t k = 0; k < rule.size(); k += stride) {
            if (std::abs(rule.nodes[k]) > 0.9) continue;
            for (const auto& e : table->entries) {
                if (e.length() != 1) continue;
                const cplx moved = cplx(phi(e.element.apply(rule.nodes[k])));
                if (std::abs(moved - vals[k]) > 1e-8 * std::max(1.0, std::abs(vals[k])))
                    throw std::invalid_argument("invariant_toeplitz_symbol: phi is not invariant at node " +
                                                std::to_string(k));
            }
        }
    }
    SeparableTerms t;
    for (std::size_t k = 0; k < rule.size(); ++k) {
        if (!std::isfinite(vals[k].real()) || !std::isfinite(vals[k].imag()))
            throw std::runtime_error("invariant_toeplitz_symbol: phi not finite at node " + std::to_string(k));
        if (vals[k] == cplx(0, 0)) continue;
        t.push(rule.nodes[k], rule.nodes[k], w.c() * rule.weights[k] * vals[k], 0);
    }
    return separable_symbol(w, std::move(t), std::move(table), "toeplitz", false);
}

struct Atom {
    cplx point;
    cplx weight;
};

/// int e_{conj z, zeta}(eta, eta) dnu(eta) for a finite measure on F.
inline InvariantSymbol measure_toeplitz_symbol(const std::vector<Atom>& atoms, const FundamentalDomain& F,
                                               const Weight& w) {
    SeparableTerms t;
    for (const Atom& a : atoms) {
        if (!F.contains(a.point))
            throw std::invalid_argument("measure_toeplitz_symbol: atom (" + std::to_string(a.point.real()) + "," +
                                        std::to_string(a.point.imag()) + ") outside the fundamental domain");
        for (const auto& e : F.table().entries) {
            const cplx p = e.element.apply(a.point);
            t.push(p, p, w.c() * a.weight * rpow(1.0 - std::norm(p), w.r), e.length());
        }
    }
    return separable_symbol(w, std::move(t), F.table_ptr(), "measure_toeplitz", !F.whole_disk());
}

/// Symbol of the operator product A B:
///   kappa (1 - conj z zeta)^r int B(conj z, eta) A(conj eta, zeta) (1 - conj z eta)^(-r) (1 - conj eta zeta)^(-r) dlambda_r.
inline InvariantSymbol star_product(const InvariantSymbol& A, const InvariantSymbol& B, const DiskRule& rule,
                                    double kappa_star) {
    if (A.weight().r != B.weight().r) throw std::invalid_argument("star_product: weight mismatch");
    if (std::abs(rule.s - A.weight().r) > 1e-12) throw std::invalid_argument("star_product: rule must target lambda_r");
    auto p = std::make_shared<detail::ProductImpl>();
    p->A = A.impl_ptr();
    p->B = B.impl_ptr();
    p->nodes = rule.nodes;
    p->weights = rule.weights;
    p->kappa = kappa_star;
    return {A.weight(), p, A.table() ? A.table() : B.table(), A.name() + "*" + B.name()};
}

/// c_r int A(conj z, z) dlambda_0(z) over the support of a lambda_0 rule.
inline cplx trace_vn(const InvariantSymbol& A, const DiskRule& rule0) {
    if (rule0.s != 0.0) throw std::invalid_argument("trace: rule must target lambda_0");
    const Eigen::VectorXcd d = A.diagonal(rule0.nodes);
    std::vector<cplx> v(rule0.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = rule0.weights[i] * d(i);
    return A.weight().c() * tree_sum(v);
}

/// lambda_0(F)^(-1) int_F A(conj z, z) dlambda_0(z).
inline cplx trace_tau(const InvariantSymbol& A, const FundamentalDomain& F, const DiskRule& rule0) {
    if (F.whole_disk()) throw std::invalid_argument("trace_tau: the trivial group has infinite covolume");
    if (rule0.s != 0.0 || rule0.support != Support::region)
        throw std::invalid_argument("trace_tau: needs a lambda_0 rule over the fundamental domain");
    const Eigen::VectorXcd d = A.diagonal(rule0.nodes);
    std::vector<cplx> v(rule0.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = rule0.weights[i] * d(i);
    return tree_sum(v) / tree_sum(rule0.weights);
}

/// (int_D int_F |A(conj z, eta)|^2 d(z, eta)^(2r) dlambda_0(z) dlambda_0(eta))^(1/2).
inline double hs_norm_2r(const InvariantSymbol& A, const DiskRule& domain_rule0, const DiskRule& disk_rule0) {
    if (domain_rule0.s != 0.0 || disk_rule0.s != 0.0) throw std::invalid_argument("hs_norm_2r: lambda_0 rules required");
    const double r = A.weight().r;
    const Eigen::MatrixXcd T = A.tabulate(disk_rule0.nodes, domain_rule0.nodes);
    std::vector<double> rows(disk_rule0.size());
    parallel_for(static_cast<std::ptrdiff_t>(disk_rule0.size()), [&](std::ptrdiff_t i) {
        std::vector<double> v(domain_rule0.size());
        for (std::size_t j = 0; j < v.size(); ++j)
            v[j] = domain_rule0.weights[j] * std::norm(T(i, j)) *
                   rpow(d_kernel(disk_rule0.nodes[i], domain_rule0.nodes[j]), 2 * r);
        rows[i] = disk_rule0.weights[i] * tree_sum(v);
    });
    return std::sqrt(tree_sum(rows));
}

/// Same norm for a separable symbol, with the disk integral in z done by the reproducing formula
/// int (1 - conj z a)^(-r) conj((1 - conj z a')^(-r)) dlambda_r = (1 - conj(a') a)^(-r) / c_r,
/// leaving a quadrature over the domain only.
inline double hs_norm_2r_gram(const InvariantSymbol& A, const DiskRule& domain_rule0) {
    if (domain_rule0.s != 0.0) throw std::invalid_argument("hs_norm_2r_gram: lambda_0 rule required");
    const SeparableTerms* t = A.separable();
    if (!t) throw std::invalid_argument("hs_norm_2r_gram: separable symbol required");
    const double r = A.weight().r;
    const Eigen::Index T = static_cast<Eigen::Index>(t->size()), n = static_cast<Eigen::Index>(domain_rule0.size());
    Eigen::MatrixXcd G(T, T), V(T, n);
    parallel_for(T, [&](std::ptrdiff_t s) {
        for (Eigen::Index k = 0; k < T; ++k) G(s, k) = detail::kfac(t->a[s], t->a[k], -r);
        for (Eigen::Index j = 0; j < n; ++j) V(s, j) = t->c[s] * detail::kfac(t->b[s], domain_rule0.nodes[j], -r);
    });
    const Eigen::MatrixXcd GV = G * V;
    std::vector<double> v(n);
    for (Eigen::Index j = 0; j < n; ++j)
        v[j] = domain_rule0.weights[j] * rpow(1.0 - std::norm(domain_rule0.nodes[j]), r) *
               V.col(j).dot(GV.col(j)).real();
    return std::sqrt(tree_sum(v) / A.weight().c());
}

/// c_r^2 sum_gamma (1 - conj(zeta) z)^r (1 - conj(gamma z) gamma zeta)^r / ((1 - conj(gamma z) z)^r (1 - conj(zeta) gamma zeta)^r).
inline Estimate gamma_square_norm(cplx z, cplx zeta, const OrbitTable& table, const Weight& w) {
    const double r = w.r;
    std::vector<std::vector<cplx>> by(table.max_word_length + 1);
    for (const auto& e : table.entries) {
        const cplx gz = e.element.apply(z), gw = e.element.apply(zeta);
        by[e.length()].push_back(detail::kfac(zeta, z, r) * detail::kfac(gz, gw, r) * detail::kfac(gz, z, -r) *
                                 detail::kfac(zeta, gw, -r));
    }
    std::vector<cplx> shells;
    std::vector<double> mags;
    for (auto& v : by) {
        shells.push_back(tree_sum(v));
        double m = 0;
        for (cplx x : v) m += std::abs(x);
        mags.push_back(m);
    }
    check_shells(mags, "gamma_square_norm");
    const double c2 = w.c() * w.c();
    const cplx total = c2 * tree_sum(shells);
    const double tail = table.max_word_length > 0 ? c2 * mags.back() : 0.0;
    if (std::abs(total.imag()) > std::max(1e-10 * std::abs(total), 10 * tail))
        throw std::runtime_error("gamma_square_norm: imaginary residual " + std::to_string(total.imag()) +
                                 " above tail tolerance");
    return {total.real(), tail};
}

/// Higher-moment evaluator: the same Gamma-sum with every exponent multiplied by n.
inline Estimate gamma_square_norm_moment(cplx z, cplx zeta, const OrbitTable& table, const Weight& w, int n) {
    if (n < 1) throw std::invalid_argument("gamma_square_norm_moment: n must be positive");
    return gamma_square_norm(z, zeta, table, Weight(w.r * n));
}

struct LambdaNorm {
    double value = 0;
    double sup_first = 0;   // sup over probes z of int |A(conj z, zeta)| d^r dlambda_0(zeta)
    double sup_second = 0;  // sup over probes zeta of int |A(conj z, zeta)| d^r dlambda_0(z)
    std::vector<double> first, second;
};

namespace detail {

/// Terms of a separable symbol that matter at one probe. With the probe in the first slot a term contributes
/// at most m_t d(z, a_t)^r 2 pi / (r - 2) to the first lambda-norm integral, m_t = |c_t| (1 - |a_t|^2)^(-r/2)
/// (1 - |b_t|^2)^(-r/2); the second slot uses b_t. The smallest terms are dropped while their summed bounds stay
/// below tol times the total.
inline SeparableTerms probe_terms(const SeparableTerms& t, double r, cplx z, bool first_slot, double tol) {
    const std::size_t T = t.size();
    std::vector<double> bound(T);
    for (std::size_t k = 0; k < T; ++k) {
        const double m = std::abs(t.c[k]) * rpow(1.0 - std::norm(t.a[k]), -r / 2) * rpow(1.0 - std::norm(t.b[k]), -r / 2);
        bound[k] = m * rpow(d_kernel(z, first_slot ? t.a[k] : t.b[k]), r);
    }
    std::vector<std::size_t> order(T);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return bound[x] < bound[y]; });
    const double total = tree_sum(bound);
    std::vector<bool> keep(T, true);
    double dropped = 0;
    for (std::size_t k : order) {
        if (dropped + bound[k] > tol * total) break;
        dropped += bound[k];
        keep[k] = false;
    }
    SeparableTerms out;
    for (std::size_t k = 0; k < T; ++k)
        if (keep[k]) out.push(t.a[k], t.b[k], t.c[k], t.shell[k]);
    return out;
}

}  // namespace detail

/// The lambda_0 rule is carried to each probe (lambda_0 is invariant), so a rule built with decay r/2 integrates
/// the d^r factor exactly. Separable symbols are pruned per probe with a rigorous bound (relative prune_tol of
/// the integral's majorant).
inline LambdaNorm lambda_norm(const InvariantSymbol& A, const DiskRule& rule0, const PointList& probes,
                              double prune_tol = 1e-8) {
    if (rule0.s != 0.0) throw std::invalid_argument("lambda_norm: lambda_0 rule required");
    if (probes.empty()) throw std::invalid_argument("lambda_norm: no probes");
    const double r = A.weight().r;
    const std::size_t n = rule0.size();
    std::vector<double> dr(n);
    for (std::size_t k = 0; k < n; ++k) dr[k] = rule0.weights[k] * rpow(d_kernel(0.0, rule0.nodes[k]), r);
    auto integrate = [&](const Eigen::MatrixXcd& T) {
        std::vector<double> a(n);
        for (std::size_t k = 0; k < n; ++k) a[k] = std::abs(T.size() == T.cols() ? T(0, k) : T(k, 0)) * dr[k];
        return tree_sum(a);
    };
    LambdaNorm out;
    out.first.resize(probes.size());
    out.second.resize(probes.size());
    const SeparableTerms* t = A.separable();
    for (std::size_t p = 0; p < probes.size(); ++p) {
        const cplx z = probes[p];
        const SU11 g = SU11::translation(z);
        PointList nodes(n);
        for (std::size_t k = 0; k < n; ++k) nodes[k] = g.apply(rule0.nodes[k]);
        const InvariantSymbol S1 =
            t ? separable_symbol(A.weight(), detail::probe_terms(*t, r, z, true, prune_tol), nullptr, A.name(), false) : A;
        const InvariantSymbol S2 =
            t ? separable_symbol(A.weight(), detail::probe_terms(*t, r, z, false, prune_tol), nullptr, A.name(), false) : A;
        out.first[p] = integrate(S1.tabulate({z}, nodes));
        out.second[p] = integrate(S2.tabulate(nodes, {z}));
    }
    out.sup_first = *std::max_element(out.first.begin(), out.first.end());
    out.sup_second = *std::max_element(out.second.begin(), out.second.end());
    out.value = std::max(out.sup_first, out.sup_second);
    return out;
}

/// The two lambda-norm integrals of the Toeplitz operator T_phi at one probe, with the symbol integral recentred
/// there. With g the translation taking 0 to z, covariance gives
///   A(conj z, g u) = c_r int phi(g eta) (1 - conj(eta) u)^(-r) dlambda_r(eta),
///   A(conj(g u), z) = c_r int phi(g eta) (1 - conj(u) eta)^(-r) dlambda_r(eta),
/// so the eta rule (lambda_r, centred at 0) resolves the kernel wherever d(z, g u)^r = d(0, u)^r matters.
/// rule0 is a lambda_0 rule centred at 0.
class ToeplitzLambdaIntegrals {
public:
    ToeplitzLambdaIntegrals(const Weight& w, const DiskRule& eta_rule, const DiskRule& rule0) : w_(w), eta_(eta_rule) {
        if (std::abs(eta_rule.s - w.r) > 1e-12)
            throw std::invalid_argument("toeplitz_lambda_norm: eta rule must target lambda_r");
        if (rule0.s != 0.0) throw std::invalid_argument("toeplitz_lambda_norm: lambda_0 rule required");
        const Eigen::Index m = static_cast<Eigen::Index>(eta_rule.size()), n = static_cast<Eigen::Index>(rule0.size());
        E_.resize(n, m);
        parallel_for(n, [&](std::ptrdiff_t j) {
            for (Eigen::Index k = 0; k < m; ++k) E_(j, k) = detail::kfac(rule0.nodes[j], eta_rule.nodes[k], -w.r);
        });
        dr_.resize(n);
        for (Eigen::Index j = 0; j < n; ++j) dr_[j] = rule0.weights[j] * rpow(d_kernel(0.0, rule0.nodes[j]), w.r);
    }

    /// (first-slot integral, second-slot integral) at z.
    template <class Phi>
    std::pair<double, double> at(Phi&& phi, cplx z) const {
        const SU11 g = SU11::translation(z);
        const Eigen::Index m = E_.cols(), n = E_.rows();
        Eigen::VectorXcd v(m), vc(m);
        parallel_for(m, [&](std::ptrdiff_t k) {
            v(k) = w_.c() * eta_.weights[k] * cplx(phi(g.apply(eta_.nodes[k])));
            vc(k) = std::conj(v(k));
        });
        if (!v.allFinite()) throw std::runtime_error("toeplitz_lambda_norm: phi not finite");
        const Eigen::VectorXcd second = E_ * v, first = E_ * vc;  // first slot is conj(E conj(v))
        std::vector<double> a(n), b(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            a[j] = std::abs(first(j)) * dr_[j];
            b[j] = std::abs(second(j)) * dr_[j];
        }
        return {tree_sum(a), tree_sum(b)};
    }

private:
    Weight w_;
    DiskRule eta_;
    Eigen::MatrixXcd E_;  // (1 - conj(u_j) eta_k)^(-r)
    std::vector<double> dr_;
};

template <class Phi>
LambdaNorm toeplitz_lambda_norm(Phi&& phi, const Weight& w, const DiskRule& eta_rule, const DiskRule& rule0,
                                const PointList& probes) {
    if (probes.empty()) throw std::invalid_argument("toeplitz_lambda_norm: no probes");
    const ToeplitzLambdaIntegrals I(w, eta_rule, rule0);
    LambdaNorm out;
    for (cplx z : probes) {
        const auto [a, b] = I.at(phi, z);
        out.first.push_back(a);
        out.second.push_back(b);
    }
    out.sup_first = *std::max_element(out.first.begin(), out.first.end());
    out.sup_second = *std::max_element(out.second.begin(), out.second.end());
    out.value = std::max(out.sup_first, out.sup_second);
    return out;
}

struct LambdaSup {
    double value = 0;
    cplx argmax = 0;
    int evaluations = 0;
};

/// Maximum of the larger lambda-norm integral, by compass search from the best start point. Trial points are
/// g(+-h), g(+-ih) with g the translation to the current point; h halves on failure until it drops below min_step.
template <class Phi>
LambdaSup toeplitz_lambda_sup(Phi&& phi, const ToeplitzLambdaIntegrals& I, const PointList& starts, double step = 0.2,
                              double min_step = 0.01) {
    if (starts.empty()) throw std::invalid_argument("toeplitz_lambda_sup: no start points");
    LambdaSup best;
    auto f = [&](cplx z) {
        ++best.evaluations;
        const auto [a, b] = I.at(phi, z);
        return std::max(a, b);
    };
    best.value = -1;
    for (cplx z : starts) {
        const double v = f(z);
        if (v > best.value) best.value = v, best.argmax = z;
    }
    for (double h = step; h >= min_step;) {
        const SU11 g = SU11::translation(best.argmax);
        bool moved = false;
        for (cplx d : {cplx(h, 0), cplx(-h, 0), cplx(0, h), cplx(0, -h)}) {
            const cplx z = g.apply(d);
            const double v = f(z);
            if (v > best.value) {
                best.value = v, best.argmax = z, moved = true;
                break;
            }
        }
        if (!moved) h /= 2;
    }
    return best;
}

/// int A(conj z, zeta) d(z, zeta)^r dlambda_0(zeta).
/// A separable term has modulus proportional to d(b_t, zeta)^r, so each term is
/// integrated on the rule carried to b_t (lambda_0 is invariant); other symbols use the rule as given.
inline cplx meanvalue_integral(const InvariantSymbol& A, cplx z, const DiskRule& rule0) {
    if (rule0.s != 0.0) throw std::invalid_argument("meanvalue_integral: lambda_0 rule required");
    const double r = A.weight().r;
    if (const SeparableTerms* t = A.separable()) {
        std::vector<cplx> out(t->size());
        parallel_for(static_cast<std::ptrdiff_t>(t->size()), [&](std::ptrdiff_t k) {
            const SU11 g = SU11::translation(t->b[k]);
            std::vector<cplx> v(rule0.size());
            for (std::size_t j = 0; j < v.size(); ++j) {
                const cplx x = g.apply(rule0.nodes[j]);
                v[j] = rule0.weights[j] * detail::kfac(t->b[k], x, -r) * detail::kfac(z, x, r) *
                       rpow(d_kernel(z, x), r);
            }
            out[k] = t->c[k] * detail::kfac(z, t->a[k], -r) * tree_sum(v);
        });
        return tree_sum(out);
    }
    const Eigen::MatrixXcd T = A.tabulate(PointList{z}, rule0.nodes);
    std::vector<cplx> v(rule0.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        v[k] = rule0.weights[k] * T(0, k) * rpow(d_kernel(z, rule0.nodes[k]), r);
    return tree_sum(v);
}

/// |kappa int A(conj z, zeta) d^r dlambda_0 - A(conj z, z)|.
inline double meanvalue_residual(const InvariantSymbol& A, cplx z, const DiskRule& rule0, double kappa) {
    return std::abs(kappa * meanvalue_integral(A, z, rule0) - A(z, z));
}

/// max over (eta1, eta2) of |kappa int e_{conj z, zeta}(eta1, eta2) d(z, zeta)^r dlambda_0(zeta) - e_{conj z, z}(eta1, eta2)|
/// relative to the right side. The integrand as a function of (z, zeta) is the evaluation vector tagged by
/// (eta1, eta2); the right side uses the other displayed form.
inline double eval_vector_meanvalue_residual(cplx z, std::shared_ptr<const OrbitTable> table, const Weight& w, const DiskRule& rule0,
                              const std::vector<std::pair<cplx, cplx>>& probes, double kappa,
                              double prune_tol = 1e-14) {
    double worst = 0;
    for (const auto& [e1, e2] : probes) {
        const InvariantSymbol E = eval_vector(e1, e2, table, w).pruned(hyperbolic_radius(z), 40.0, prune_tol);
        const cplx lhs = kappa * meanvalue_integral(E, z, rule0);
        const cplx rhs = eval_vector_direct(z, z, *table, w, e1, e2).value;
        worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
    }
    return worst;
}

struct Majorant {
    double quadrature = 0;
    double closed_form = 0;
};

/// int sum_gamma |term_gamma| d(z, zeta)^r dlambda_0(zeta) against c_r (2 pi / (r-2)) d(eta1, eta2)^(-r) K_r(z, eta2).
/// Each term peaks near gamma eta1, so its integral is taken with rule0 carried there (lambda_0 is invariant).
inline Majorant absolute_sum_majorant(cplx z, cplx eta1, cplx eta2, const OrbitTable& table, const Weight& w,
                                      const DiskRule& rule0) {
    const double r = w.r;
    std::vector<std::pair<cplx, cplx>> kept;
    const double K = poincare_series(table, z, eta2, w).value;
    for (const auto& e : table.entries) {
        const cplx g1 = e.element.apply(eta1), g2 = e.element.apply(eta2);
        if (rpow(d_kernel(z, g2), r) > 1e-13 * K) kept.emplace_back(g1, g2);
    }
    std::vector<double> v(kept.size());
    parallel_for(static_cast<std::ptrdiff_t>(kept.size()), [&](std::ptrdiff_t t) {
        const auto& [g1, g2] = kept[t];
        const SU11 h = SU11::translation(g1);
        std::vector<double> s(rule0.size());
        for (std::size_t k = 0; k < rule0.size(); ++k) {
            const cplx zeta = h.apply(rule0.nodes[k]);
            s[k] = rule0.weights[k] * rpow(d_kernel(z, zeta), r) *
                   std::abs(detail::kfac(g1, g2, r) * detail::kfac(z, zeta, r) * detail::kfac(z, g2, -r) *
                            detail::kfac(g1, zeta, -r));
        }
        v[t] = tree_sum(s);
    });
    Majorant m;
    m.quadrature = w.c() * tree_sum(v);
    m.closed_form = w.c() * (2 * pi / (r - 2)) * rpow(d_kernel(eta1, eta2), -r) * K;
    return m;
}

/// max over sample points and tabulated gamma with word length <= L of |A(gamma x, gamma y) - A(x, y)|
/// together with the largest admissible tolerance max(1e-8, 10 tail) seen.
struct InvarianceReport {
    double worst_excess = 0;  // max of |diff| - tolerance, negative when all pass
    double worst_diff = 0;
};

inline InvarianceReport diagonal_invariance(const InvariantSymbol& A, const OrbitTable& table, const PointList& xs,
                                            const PointList& ys, int max_length) {
    InvarianceReport rep{-std::numeric_limits<double>::infinity(), 0};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const ComplexEstimate base = A.evaluate(xs[i], ys[i]);
        for (const auto& e : table.entries) {
            if (e.length() == 0 || e.length() > max_length) continue;
            const ComplexEstimate moved = A.evaluate(e.element.apply(xs[i]), e.element.apply(ys[i]));
            const double diff = std::abs(moved.value - base.value);
            const double tol = std::max(1e-8, 10 * std::max(base.tail, moved.tail));
            rep.worst_diff = std::max(rep.worst_diff, diff);
            rep.worst_excess = std::max(rep.worst_excess, diff - tol);
        }
    }
    return rep;
}

/// Discrete Cauchy-Riemann residual: d/d(conj) of the analytic slot and d/d of the antianalytic slot.
inline double sesquiholomorphy_residual(const InvariantSymbol& A, cplx x, cplx y, double h = 1e-4) {
    auto dbar = [&](auto f, cplx p) {
        const cplx fx = (f(p + h) - f(p - h)) / (2 * h);
        const cplx fy = (f(p + cplx(0, h)) - f(p - cplx(0, h))) / (2 * h);
        return 0.5 * (fx + cplx(0, 1) * fy);
    };
    auto d = [&](auto f, cplx p) {
        const cplx fx = (f(p + h) - f(p - h)) / (2 * h);
        const cplx fy = (f(p + cplx(0, h)) - f(p - cplx(0, h))) / (2 * h);
        return 0.5 * (fx - cplx(0, 1) * fy);
    };
    const double scale = std::max(1.0, std::abs(A(x, y)));
    const cplx r2 = dbar([&](cplx q) { return A(x, q); }, y);
    const cplx r1 = d([&](cplx q) { return A(q, y); }, x);
    return std::max(std::abs(r1), std::abs(r2)) / scale;
}

}  // namespace berezin
