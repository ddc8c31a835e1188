#pragma once

#include <numeric>

#include "quantization.hpp"

namespace berezin {

/// G_N = union of gamma_i F over the first N orbit entries (radius order).
class TruncationRegion {
public:
    TruncationRegion(std::shared_ptr<const FundamentalDomain> F, int N) : F_(std::move(F)), N_(N) {
        if (N < 1) throw std::invalid_argument("build_region: N must be at least 1");
        if (F_->whole_disk()) {
            if (N != 1) throw std::invalid_argument("build_region: the trivial group has a single tile");
        } else if (static_cast<std::size_t>(N) > F_->table().size()) {
            throw std::invalid_argument("build_region: N = " + std::to_string(N) + " exceeds the orbit table size " +
                                        std::to_string(F_->table().size()));
        }
    }
    const FundamentalDomain& domain() const { return *F_; }
    int size() const { return N_; }
    const SU11& element(int i) const { return F_->table()[i].element; }

    bool contains(cplx z) const {
        for (int i = 0; i < N_; ++i)
            if (F_->contains(element(i).inverse().apply(z))) return true;
        return false;
    }

private:
    std::shared_ptr<const FundamentalDomain> F_;
    int N_;
};

inline TruncationRegion build_region(std::shared_ptr<const FundamentalDomain> F, int N) {
    return TruncationRegion(std::move(F), N);
}

/// Region rule for lambda_s: the lambda_0 rule of F moved to every tile
/// (lambda_0 is invariant), reweighted by (1 - |x|^2)^s. For the trivial group
/// the tile is the disk and a polar rule is used.
struct RegionRuleSpec {
    int radial = 8;
    int angular = 6;  // per side sector for the octagon, total for the disk
};

inline DiskRule region_rule(const TruncationRegion& G, double s, const RegionRuleSpec& spec) {
    if (G.domain().whole_disk()) return build_disk_rule(s, spec.radial, spec.angular);
    const DiskRule base = G.domain().rule(0.0, spec.radial, spec.angular);
    DiskRule out;
    out.s = s;
    out.radial_order = base.radial_order;
    out.angular_order = base.angular_order;
    out.support = Support::region;
    for (int i = 0; i < G.size(); ++i)
        for (std::size_t k = 0; k < base.size(); ++k) {
            const cplx x = G.element(i).apply(base.nodes[k]);
            out.nodes.push_back(x);
            out.weights.push_back(base.weights[k] * rpow(1.0 - std::norm(x), s));
        }
    return out;
}

/// Nystrom matrix of chi A chi on L^2(G_N, lambda_r):
/// M(i, j) = sqrt(w_i) kappa_op K(x_j, x_i) sqrt(w_j), with K the symbol over (1 - conj(x) y)^r.
/// Separable symbols with fewer terms than nodes keep the factored form
/// M = kappa P diag(c) Q^H instead of the dense matrix.
struct CompressedOperator {
    Eigen::MatrixXcd matrix;  // dense form, empty when factored
    Eigen::MatrixXcd P, Q;    // factored form, P diag(c) Q^H
    Eigen::VectorXcd c;
    int N = 0;
    std::size_t nodes = 0;
    double dropped = 0;       // summed Frobenius norms of discarded separable terms

    bool factored() const { return matrix.size() == 0; }
    Eigen::MatrixXcd dense() const {
        if (!factored()) return matrix;
        return P * c.asDiagonal() * Q.adjoint();
    }
    /// Singular values, descending.
    Eigen::VectorXd singular_values() const {
        if (!factored()) {
            Eigen::BDCSVD<Eigen::MatrixXcd> svd(matrix);
            if (svd.info() != Eigen::Success) throw std::runtime_error("nuclear_norm: SVD failed");
            return svd.singularValues();
        }
        const Eigen::HouseholderQR<Eigen::MatrixXcd> qp(P), qq(Q);
        const Eigen::Index T = c.size();
        const Eigen::MatrixXcd Rp = qp.matrixQR().topRows(T).triangularView<Eigen::Upper>();
        const Eigen::MatrixXcd Rq = qq.matrixQR().topRows(T).triangularView<Eigen::Upper>();
        const Eigen::MatrixXcd S = Rp * c.asDiagonal() * Rq.adjoint();
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(S);
        if (svd.info() != Eigen::Success) throw std::runtime_error("nuclear_norm: SVD failed");
        return svd.singularValues();
    }
};

inline CompressedOperator compress(const InvariantSymbol& A, const TruncationRegion& G, const DiskRule& rule,
                                   double kappa_op, double drop_tol = 1e-12) {
    if (std::abs(rule.s - A.weight().r) > 1e-12) throw std::invalid_argument("compress: rule must target lambda_r");
    if (rule.size() == 0) throw std::invalid_argument("compress: empty region rule");
    const double r = A.weight().r;
    const Eigen::Index n = static_cast<Eigen::Index>(rule.size());
    Eigen::VectorXd sw(n);
    for (Eigen::Index i = 0; i < n; ++i) sw(i) = std::sqrt(rule.weights[i]);
    CompressedOperator C;
    C.N = G.size();
    C.nodes = rule.size();
    if (A.separable()) {
        double R = 0;
        for (const cplx& x : rule.nodes) R = std::max(R, hyperbolic_radius(x));
        const InvariantSymbol Ap = A.pruned(R, R, 1e-4 * drop_tol);
        const SeparableTerms* t = Ap.separable();
        // Term t contributes the rank-one piece c_t P_t Q_t^H of Frobenius norm |c_t| |P_t| |Q_t|;
        // the smallest pieces are dropped while their summed norms stay below drop_tol times the largest.
        const std::ptrdiff_t T0 = static_cast<std::ptrdiff_t>(t->size());
        std::vector<double> size(T0);
        parallel_for(T0, [&](std::ptrdiff_t k) {
            std::vector<double> p(n), q(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                p[i] = rule.weights[i] * std::norm(detail::kfac(t->b[k], rule.nodes[i], -r));
                q[i] = rule.weights[i] * std::norm(detail::kfac(rule.nodes[i], t->a[k], -r));
            }
            size[k] = std::abs(kappa_op * t->c[k]) * std::sqrt(tree_sum(p) * tree_sum(q));
        });
        std::vector<std::ptrdiff_t> order(T0);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return size[x] < size[y]; });
        const double top = T0 ? size[order.back()] : 0.0;
        std::vector<bool> keep(T0, true);
        double dropped = 0;
        for (std::ptrdiff_t k : order) {
            if (dropped + size[k] > drop_tol * top) break;
            dropped += size[k];
            keep[k] = false;
        }
        std::vector<std::ptrdiff_t> kept;
        for (std::ptrdiff_t k = 0; k < T0; ++k)
            if (keep[k]) kept.push_back(k);
        C.dropped = dropped;
        const Eigen::Index T = static_cast<Eigen::Index>(kept.size());
        if (T < n) {
            C.P.resize(n, T);
            C.Q.resize(n, T);
            C.c.resize(T);
            parallel_for(n, [&](std::ptrdiff_t i) {
                for (Eigen::Index m = 0; m < T; ++m) {
                    const std::ptrdiff_t k = kept[m];
                    C.P(i, m) = sw(i) * detail::kfac(t->b[k], rule.nodes[i], -r);
                    C.Q(i, m) = sw(i) * std::conj(detail::kfac(rule.nodes[i], t->a[k], -r));
                }
            });
            for (Eigen::Index m = 0; m < T; ++m) C.c(m) = kappa_op * t->c[kept[m]];
            return C;
        }
    }
    const Eigen::MatrixXcd K = A.kernel(rule.nodes, rule.nodes);
    C.matrix.resize(n, n);
    parallel_for(n, [&](std::ptrdiff_t i) {
        for (Eigen::Index j = 0; j < n; ++j) C.matrix(i, j) = sw(i) * kappa_op * K(j, i) * sw(j);
    });
    if (!C.matrix.allFinite()) throw std::runtime_error("compress: non-finite kernel samples");
    return C;
}

inline double nuclear_norm(const CompressedOperator& C) {
    const Eigen::VectorXd s = C.singular_values();
    return tree_sum(std::vector<double>(s.data(), s.data() + s.size()));
}

inline double hs_norm(const CompressedOperator& C) {
    const Eigen::VectorXd s = C.singular_values();
    std::vector<double> sq(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) sq[i] = s(i) * s(i);
    return std::sqrt(tree_sum(sq));
}

struct SequenceEntry {
    int N = 0;
    double nuclear = 0;   // ||chi A chi||_1
    double hs = 0;        // ||chi A chi||_2
    std::size_t dim = 0;  // number of quadrature nodes
    double l1() const { return nuclear / N; }
    double sqrtN_hs() const { return hs / std::sqrt(double(N)); }
    /// sqrt(dim / N) (1 / sqrt N) ||.||_2, which dominates (1/N) ||.||_1.
    double hs_dimension_bound() const { return std::sqrt(double(dim) / N) * sqrtN_hs(); }
};

struct NormSequence {
    std::vector<SequenceEntry> entries;
    /// |s_N - s_{N-1}| / s_{N-1} for N = 2..N_max.
    std::vector<double> relative_increments() const {
        std::vector<double> v;
        for (std::size_t k = 1; k < entries.size(); ++k)
            v.push_back(std::abs(entries[k].l1() - entries[k - 1].l1()) / entries[k - 1].l1());
        return v;
    }
    /// Relative change over the last two N.
    double trend() const {
        const auto v = relative_increments();
        return v.empty() ? 0.0 : v.back();
    }
};

/// Both sequences share one compression per N.
inline NormSequence norm_sequence(const InvariantSymbol& A, std::shared_ptr<const FundamentalDomain> F,
                                  const RegionRuleSpec& spec, int N_max, double kappa_op, double drop_tol = 1e-12) {
    NormSequence out;
    const double r = A.weight().r;
    for (int N = 1; N <= N_max; ++N) {
        const TruncationRegion G(F, N);
        const DiskRule rule = region_rule(G, r, spec);
        const CompressedOperator C = compress(A, G, rule, kappa_op, drop_tol);
        const Eigen::VectorXd s = C.singular_values();
        std::vector<double> a(s.data(), s.data() + s.size()), b(s.size());
        for (Eigen::Index i = 0; i < s.size(); ++i) b[i] = s(i) * s(i);
        out.entries.push_back({N, tree_sum(a), std::sqrt(tree_sum(b)), C.nodes});
    }
    return out;
}

inline std::vector<std::pair<int, double>> l1_sequence(const InvariantSymbol& A,
                                                       std::shared_ptr<const FundamentalDomain> F,
                                                       const RegionRuleSpec& spec, int N_max, double kappa_op) {
    std::vector<std::pair<int, double>> v;
    for (const auto& e : norm_sequence(A, std::move(F), spec, N_max, kappa_op).entries) v.emplace_back(e.N, e.l1());
    return v;
}

inline std::vector<std::pair<int, double>> sqrtN_hs_sequence(const InvariantSymbol& A,
                                                             std::shared_ptr<const FundamentalDomain> F,
                                                             const RegionRuleSpec& spec, int N_max, double kappa_op) {
    std::vector<std::pair<int, double>> v;
    for (const auto& e : norm_sequence(A, std::move(F), spec, N_max, kappa_op).entries)
        v.emplace_back(e.N, e.sqrtN_hs());
    return v;
}

/// Truncated orbit sum with its shell-by-shell partial values.
struct OrbitSum {
    double value = 0;
    double tail = 0;                  // last outer shell
    std::vector<double> partial;      // value after each outer shell
};

namespace detail {

inline void check_table(const OrbitTable& t, int N, int outer_cap) {
    if (N < 1) throw std::invalid_argument("orbit sum: N must be at least 1");
    if (static_cast<std::size_t>(N) > t.size())
        throw std::invalid_argument("orbit sum: N = " + std::to_string(N) + " exceeds the orbit table");
    if (outer_cap < 0 || outer_cap > t.max_word_length)
        throw std::invalid_argument("orbit sum: outer cap " + std::to_string(outer_cap) + " exceeds table depth " +
                                    std::to_string(t.max_word_length));
}

inline OrbitSum shell_sum(const OrbitTable& t, int outer_cap, const std::vector<double>& term, const char* what) {
    std::vector<std::vector<double>> by(outer_cap + 1);
    for (std::size_t k = 0; k < t.size(); ++k)
        if (t[k].length() <= outer_cap) by[t[k].length()].push_back(term[k]);
    std::vector<double> shells;
    for (auto& v : by) shells.push_back(tree_sum(v));
    check_shells(shells, what);
    OrbitSum s;
    double run = 0;
    for (double x : shells) s.partial.push_back(run += x);
    s.value = tree_sum(shells);
    s.tail = outer_cap > 0 ? shells.back() : 0.0;
    return s;
}

}  // namespace detail

/// y_N = sum_gamma [ (1/N) sum_{i<=N} d(gamma 0, gamma_i 0)^(2r) ]^(1/2).
inline OrbitSum orbit_sum_yN(const OrbitTable& t, int N, const Weight& w, int outer_cap) {
    detail::check_table(t, N, outer_cap);
    std::vector<double> term(t.size(), 0.0);
    parallel_for(static_cast<std::ptrdiff_t>(t.size()), [&](std::ptrdiff_t k) {
        if (t[k].length() > outer_cap) return;
        std::vector<double> v(N);
        for (int i = 0; i < N; ++i) v[i] = rpow(d_kernel(t[k].point, t[i].point), 2 * w.r);
        term[k] = std::sqrt(tree_sum(v) / N);
    });
    return detail::shell_sum(t, outer_cap, term, "orbit_sum_yN");
}

/// sum_gamma [ (1/N^2) sum_i d(gamma 0, gamma_i 0)^(2r) ]^(1/2) = y_N / sqrt(N).
inline OrbitSum orbit_sum_root_mean(const OrbitTable& t, int N, const Weight& w, int outer_cap) {
    detail::check_table(t, N, outer_cap);
    std::vector<double> term(t.size(), 0.0);
    parallel_for(static_cast<std::ptrdiff_t>(t.size()), [&](std::ptrdiff_t k) {
        if (t[k].length() > outer_cap) return;
        std::vector<double> v(N);
        for (int i = 0; i < N; ++i) v[i] = rpow(d_kernel(t[k].point, t[i].point), 2 * w.r);
        term[k] = std::sqrt(tree_sum(v) / (double(N) * N));
    });
    return detail::shell_sum(t, outer_cap, term, "orbit_sum_root_mean");
}

/// Pieces of the phase-carrying sum; all off gives the plain sum.
struct PhaseFlags {
    bool derivative_factor = true;  // (1 - conj(sigma_i 0) gamma 0)^(-1)
    bool phase = true;              // |1 - conj(gamma 0) gamma gamma_1 0| / (1 - conj(gamma 0) gamma gamma_1 0)
    bool dtilde = true;             // d~ in place of d
};

/// d~(conj z, w) = (1 - |z|^2)^(1/2) (1 - |w|^2)^(1/2) / (1 - conj(z) w).
inline cplx dtilde(cplx z, cplx w) {
    return std::sqrt((1.0 - std::norm(z)) * (1.0 - std::norm(w))) / (1.0 - std::conj(z) * w);
}

/// Outer sum over gamma_1 up to outer_cap shells, inner sum over gamma up to inner_cap shells:
///   sum_{gamma_1} [ (1/N^2) sum_{i,j} | sum_gamma A_i(gamma) B_j(gamma, gamma_1) |^2 ]^(1/2)
/// with A_i = d(gamma 0, sigma_i 0)^r, B_j = d(sigma_j 0, gamma gamma_1 0)^r in the plain form and the
/// phase-carrying factors of PhaseFlags otherwise.
inline OrbitSum orbit_sum_phase(const OrbitTable& t, int N, const Weight& w, int outer_cap, int inner_cap,
                                const PhaseFlags& f, const char* what) {
    detail::check_table(t, N, outer_cap);
    detail::check_table(t, N, inner_cap);
    const double r = w.r;
    std::vector<std::size_t> inner;
    for (std::size_t k = 0; k < t.size(); ++k)
        if (t[k].length() <= inner_cap) inner.push_back(k);
    const Eigen::Index G = static_cast<Eigen::Index>(inner.size());
    Eigen::MatrixXcd Amat(N, G);
    for (Eigen::Index g = 0; g < G; ++g) {
        const cplx p = t[inner[g]].point;
        for (int i = 0; i < N; ++i) {
            const cplx s = t[i].point;
            cplx a = f.dtilde ? kpow(dtilde(s, p), r) : cplx(rpow(d_kernel(p, s), r));
            if (f.derivative_factor) a /= 1.0 - std::conj(s) * p;
            Amat(i, g) = a;
        }
    }
    std::vector<double> term(t.size(), 0.0);
    parallel_for(static_cast<std::ptrdiff_t>(t.size()), [&](std::ptrdiff_t k1) {
        if (t[k1].length() > outer_cap) return;
        Eigen::MatrixXcd B(G, N);
        for (Eigen::Index g = 0; g < G; ++g) {
            const OrbitEntry& e = t[inner[g]];
            const cplx q = e.element.apply(t[k1].point);
            cplx ph = 1.0;
            if (f.phase) {
                const cplx u = 1.0 - std::conj(e.point) * q;
                ph = std::abs(u) / u;
            }
            for (int j = 0; j < N; ++j) {
                const cplx s = t[j].point;
                B(g, j) = ph * (f.dtilde ? kpow(dtilde(q, s), r) : cplx(rpow(d_kernel(q, s), r)));
            }
        }
        const Eigen::MatrixXcd S = Amat * B;
        std::vector<double> v;
        for (Eigen::Index i = 0; i < S.rows(); ++i)
            for (Eigen::Index j = 0; j < S.cols(); ++j) v.push_back(std::norm(S(i, j)));
        term[k1] = std::sqrt(tree_sum(v) / (double(N) * N));
    });
    return detail::shell_sum(t, outer_cap, term, what);
}

inline OrbitSum orbit_sum_plain(const OrbitTable& t, int N, const Weight& w, int outer_cap, int inner_cap) {
    return orbit_sum_phase(t, N, w, outer_cap, inner_cap, {false, false, false}, "orbit_sum_plain");
}

inline OrbitSum orbit_sum_phased(const OrbitTable& t, int N, const Weight& w, int outer_cap, int inner_cap,
                            PhaseFlags flags = {}) {
    return orbit_sum_phase(t, N, w, outer_cap, inner_cap, flags, "orbit_sum_phased");
}

struct EquivalenceConstant {
    double value = 0;               // max over probes
    std::vector<double> per_probe;  // int L1(e_{z,zeta}) d(z,zeta)^r dlambda_0(zeta) over the zeta region
    int N = 0;
};

/// M_r estimate: for each probe z, int_R L1(e_{conj z, zeta}) d(z, zeta)^r dlambda_0(zeta) over a zeta
/// rule on a region R (F for a cocompact group), with L1 estimated as (1/N)||chi_{G_N} e chi_{G_N}||_1.
/// The two sups of the definition coincide because e_{conj z, zeta}^* = e_{conj zeta, z}.
inline EquivalenceConstant equivalence_constant(std::shared_ptr<const FundamentalDomain> F, const Weight& w,
                                                const DiskRule& zeta_rule0, const PointList& probes, int N,
                                                const RegionRuleSpec& spec, double kappa_op) {
    if (zeta_rule0.s != 0.0) throw std::invalid_argument("equivalence_constant: lambda_0 zeta rule required");
    EquivalenceConstant out;
    out.N = N;
    const TruncationRegion G(F, N);
    const DiskRule rule = region_rule(G, w.r, spec);
    for (cplx z : probes) {
        std::vector<double> v(zeta_rule0.size());
        for (std::size_t k = 0; k < zeta_rule0.size(); ++k) {
            const cplx zeta = zeta_rule0.nodes[k];
            const double l1 = nuclear_norm(compress(eval_vector(z, zeta, F->table_ptr(), w), G, rule, kappa_op)) / N;
            v[k] = zeta_rule0.weights[k] * l1 * rpow(d_kernel(z, zeta), w.r);
        }
        out.per_probe.push_back(tree_sum(v));
    }
    out.value = *std::max_element(out.per_probe.begin(), out.per_probe.end());
    return out;
}

}  // namespace berezin
