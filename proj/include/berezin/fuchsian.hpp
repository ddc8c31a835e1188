#pragma once

#include <array>
#include <fstream>
#include <iomanip>
#include <istream>
#include <memory>
#include <optional>
#include <random>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "quadrature.hpp"

namespace berezin {

struct FuchsianGroup {
    std::string name;
    std::vector<SU11> generators;
    std::vector<int> labels;
    std::optional<int> declared_genus;

    bool is_trivial() const { return generators.empty(); }
    /// Letter 2k is generator k, letter 2k+1 its inverse.
    int alphabet_size() const { return 2 * static_cast<int>(generators.size()); }
    SU11 letter(int l) const { return (l & 1) ? generators[l / 2].inverse() : generators[l / 2]; }
};

inline FuchsianGroup trivial_group() { return {"trivial", {}, {}, std::nullopt}; }

/// Genus-2 surface group: the regular octagon with opposite sides paired.
inline FuchsianGroup octagon_group() {
    FuchsianGroup g{"octagon", {}, {}, 2};
    const double a = 1.0 + std::sqrt(2.0);
    const double b = std::sqrt(2.0 + 2.0 * std::sqrt(2.0));
    for (int k = 0; k < 4; ++k) {
        g.generators.emplace_back(cplx(a, 0.0), std::polar(b, k * pi / 4));
        g.labels.push_back(k);
    }
    return g;
}

inline FuchsianGroup cyclic_group(const SU11& h) { return {"cyclic", {h}, {0}, std::nullopt}; }

struct GroupParseError : std::runtime_error {
    int line;
    GroupParseError(const std::string& source, int line_, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line_) + ": " + what), line(line_) {}
};

/// Reads "Re(a) Im(a) Re(b) Im(b) label_id reserved" lines; '#' starts a comment.
inline FuchsianGroup parse_group(std::istream& in, const std::string& source = "<group>") {
    FuchsianGroup g{source, {}, {}, std::nullopt};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto c = line.find('#'); c != std::string::npos) line.erase(c);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        if (tok.size() != 6)
            throw GroupParseError(source, lineno, "expected 6 fields, found " + std::to_string(tok.size()));
        std::array<double, 6> v{};
        for (int i = 0; i < 6; ++i) {
            std::size_t pos = 0;
            try {
                v[i] = std::stod(tok[i], &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != tok[i].size() || !std::isfinite(v[i]))
                throw GroupParseError(source, lineno, "field " + std::to_string(i + 1) + " is not a real number: '" +
                                                          tok[i] + "'");
        }
        const cplx a(v[0], v[1]), b(v[2], v[3]);
        const double det = std::norm(a) - std::norm(b);
        if (std::abs(det - 1.0) > 1e-6)
            throw GroupParseError(source, lineno, "|a|^2 - |b|^2 = " + std::to_string(det) + ", expected 1");
        g.generators.emplace_back(a, b);
        g.labels.push_back(static_cast<int>(std::lround(v[4])));
    }
    return g;
}

inline FuchsianGroup load_group_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open group file '" + path + "'");
    return parse_group(in, path);
}

inline void write_group(std::ostream& out, const FuchsianGroup& g) {
    out << "# " << g.name << " group: Re(a) Im(a) Re(b) Im(b) label_id reserved\n";
    out << std::setprecision(17);
    for (std::size_t k = 0; k < g.generators.size(); ++k) {
        const SU11& h = g.generators[k];
        out << h.a().real() << ' ' << h.a().imag() << ' ' << h.b().real() << ' ' << h.b().imag() << ' '
            << g.labels[k] << " 0\n";
    }
}

struct OrbitEntry {
    std::vector<int> word;
    SU11 element;
    cplx point;    // element applied to 0
    double radius;  // |point|
    double rho;     // hyperbolic distance from 0
    int length() const { return static_cast<int>(word.size()); }
};

struct OrbitTable {
    std::vector<OrbitEntry> entries;
    int max_word_length = 0;
    double dedup_tol = 1e-9;
    bool trivial = false;

    std::size_t size() const { return entries.size(); }
    const OrbitEntry& operator[](std::size_t i) const { return entries[i]; }

    /// Hyperbolic radius below which the table is taken to be complete: the
    /// smallest displacement in the outermost word-length shell.
    double reliable_rho() const {
        if (trivial) return std::numeric_limits<double>::infinity();
        double m = std::numeric_limits<double>::infinity();
        for (const auto& e : entries)
            if (e.length() == max_word_length) m = std::min(m, e.rho);
        return m;
    }
    double reliable_radius() const {
        const double r = reliable_rho();
        return std::isinf(r) ? 1.0 : std::tanh(r / 2);
    }
    /// Entries with word length at most L.
    std::vector<std::size_t> shell_upto(int L) const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < entries.size(); ++i)
            if (entries[i].length() <= L) idx.push_back(i);
        return idx;
    }
};

namespace detail {

struct MatrixKey {
    std::array<long long, 4> k;
    bool operator==(const MatrixKey& o) const { return k == o.k; }
};
struct MatrixKeyHash {
    std::size_t operator()(const MatrixKey& m) const {
        std::size_t h = 1469598103934665603ULL;
        for (long long v : m.k) {
            h ^= static_cast<std::size_t>(v);
            h *= 1099511628211ULL;
        }
        return h;
    }
};

}  // namespace detail

/// Breadth-first enumeration over reduced words with matrix deduplication.
inline OrbitTable enumerate_orbit(const FuchsianGroup& group, int max_word_length, double dedup_tol = 1e-9,
                                  std::size_t entry_cap = 500000) {
    if (max_word_length < 0) throw std::invalid_argument("enumerate_orbit: negative word length");
    if (!(dedup_tol >= 1e-12 && dedup_tol <= 1e-6)) throw std::invalid_argument("enumerate_orbit: dedup_tol out of range");
    OrbitTable t;
    t.max_word_length = group.is_trivial() ? 0 : max_word_length;
    t.dedup_tol = dedup_tol;
    t.trivial = group.is_trivial();

    const double q = 1e3 * dedup_tol;
    std::unordered_map<detail::MatrixKey, std::vector<std::size_t>, detail::MatrixKeyHash> buckets;
    std::vector<OrbitEntry> all;
    auto coords = [](const SU11& g) {
        return std::array<double, 4>{g.a().real(), g.a().imag(), g.b().real(), g.b().imag()};
    };
    auto find = [&](const SU11& g) -> bool {
        const auto c = coords(g);
        std::array<long long, 4> base{}, alt{};
        for (int i = 0; i < 4; ++i) {
            const double x = c[i] / q;
            base[i] = static_cast<long long>(std::floor(x));
            alt[i] = (x - std::floor(x) < 0.5) ? base[i] - 1 : base[i] + 1;
        }
        for (int mask = 0; mask < 16; ++mask) {
            detail::MatrixKey key;
            for (int i = 0; i < 4; ++i) key.k[i] = (mask >> i & 1) ? alt[i] : base[i];
            auto it = buckets.find(key);
            if (it == buckets.end()) continue;
            for (std::size_t j : it->second) {
                const auto d = coords(all[j].element);
                double m = 0;
                for (int i = 0; i < 4; ++i) m = std::max(m, std::abs(d[i] - c[i]));
                if (m <= dedup_tol) return true;
            }
        }
        return false;
    };
    auto insert = [&](OrbitEntry e) {
        const auto c = coords(e.element);
        detail::MatrixKey key;
        for (int i = 0; i < 4; ++i) key.k[i] = static_cast<long long>(std::floor(c[i] / q));
        buckets[key].push_back(all.size());
        all.push_back(std::move(e));
        if (all.size() > entry_cap)
            throw std::runtime_error("enumerate_orbit: entry cap " + std::to_string(entry_cap) + " exceeded");
    };
    auto make = [](std::vector<int> w, const SU11& g) {
        OrbitEntry e;
        e.word = std::move(w);
        e.element = g;
        e.point = g.origin_image();
        e.radius = std::abs(e.point);
        e.rho = g.displacement();
        return e;
    };

    insert(make({}, SU11::identity()));
    std::vector<std::size_t> frontier{0};
    for (int len = 1; len <= t.max_word_length; ++len) {
        std::vector<std::size_t> next;
        for (std::size_t idx : frontier) {
            const std::vector<int> w = all[idx].word;
            const SU11 g = all[idx].element;
            for (int l = 0; l < group.alphabet_size(); ++l) {
                if (!w.empty() && (w.back() ^ 1) == l) continue;
                const SU11 h = g * group.letter(l);
                if (find(h)) continue;
                std::vector<int> w2 = w;
                w2.push_back(l);
                next.push_back(all.size());
                insert(make(std::move(w2), h));
            }
        }
        frontier = std::move(next);
    }

    std::sort(all.begin(), all.end(), [](const OrbitEntry& x, const OrbitEntry& y) {
        const long long kx = std::llround(x.rho * 1e9), ky = std::llround(y.rho * 1e9);
        if (kx != ky) return kx < ky;
        if (x.word.size() != y.word.size()) return x.word.size() < y.word.size();
        if (x.word != y.word) return x.word < y.word;
        const double cx[4] = {x.element.a().real(), x.element.a().imag(), x.element.b().real(), x.element.b().imag()};
        const double cy[4] = {y.element.a().real(), y.element.a().imag(), y.element.b().real(), y.element.b().imag()};
        return std::lexicographical_compare(cx, cx + 4, cy, cy + 4);
    });
    t.entries = std::move(all);
    return t;
}

/// n(s, 0): number of orbit points with |gamma 0| < s.
inline std::size_t counting_function(const OrbitTable& t, double s) {
    if (!(s > 0 && s < 1)) throw std::invalid_argument("counting_function: s must lie in (0,1)");
    if (s > t.reliable_radius())
        throw std::out_of_range("counting_function: s = " + std::to_string(s) + " beyond reliable radius " +
                                std::to_string(t.reliable_radius()) + "; use a deeper table");
    std::size_t n = 0;
    for (const auto& e : t.entries)
        if (e.radius < s) ++n;
    return n;
}

/// Partial sums of d(gamma 0, 0)^r grouped by word length, for each r.
inline std::vector<std::pair<double, std::vector<double>>> exponent_probe(const OrbitTable& t,
                                                                          const std::vector<double>& r_values) {
    if (t.entries.empty()) throw std::invalid_argument("exponent_probe: empty table");
    std::vector<std::pair<double, std::vector<double>>> out;
    for (double r : r_values) {
        std::vector<std::vector<double>> shells(t.max_word_length + 1);
        for (const auto& e : t.entries) shells[e.length()].push_back(rpow(1.0 - e.radius * e.radius, r / 2));
        std::vector<double> partial;
        double acc = 0;
        for (auto& sh : shells) {
            acc += tree_sum(sh);
            partial.push_back(acc);
        }
        out.emplace_back(r, std::move(partial));
    }
    return out;
}

class FundamentalDomain;

/// Dirichlet domain about 0.
class FundamentalDomain {
public:
    static constexpr double tie_tol = 1e-12;

    explicit FundamentalDomain(std::shared_ptr<const OrbitTable> table, const FuchsianGroup& group)
        : table_(std::move(table)), group_(group) {
        if (table_->trivial) return;
        // Bisectors of the generators bound a superset of F; its circumradius
        // limits which orbit points can contribute sides.
        std::vector<cplx> gens;
        for (const auto& e : table_->entries)
            if (e.length() == 1) gens.push_back(e.point);
        double rmax = 0;
        for (int j = 0; j < 4096; ++j) rmax = std::max(rmax, radial_limit(gens, 2 * pi * j / 4096));
        const double rho1 = hyperbolic_radius(rmax);
        if (table_->reliable_rho() < 2 * rho1 - 1e-6)
            throw std::runtime_error("FundamentalDomain: orbit table too shallow (reliable radius " +
                                     std::to_string(table_->reliable_rho()) + " < " + std::to_string(2 * rho1) + ")");
        for (const auto& e : table_->entries)
            if (e.length() > 0 && e.rho <= 2 * rho1 + 1e-9) sides_.push_back(e.point);
        find_sectors();
        circumradius_ = 0;
        for (double v : vertex_angles_) circumradius_ = std::max(circumradius_, radial_function(v));
        for (int j = 0; j < 4096; ++j) circumradius_ = std::max(circumradius_, radial_function(2 * pi * j / 4096));
    }

    const OrbitTable& table() const { return *table_; }
    std::shared_ptr<const OrbitTable> table_ptr() const { return table_; }
    const FuchsianGroup& group() const { return group_; }
    bool whole_disk() const { return table_->trivial; }
    const std::vector<double>& vertex_angles() const { return vertex_angles_; }
    std::vector<cplx> vertices() const {
        std::vector<cplx> v;
        for (double t : vertex_angles_) v.push_back(std::polar(radial_function(t), t));
        return v;
    }
    double circumradius() const { return whole_disk() ? 1.0 : circumradius_; }
    const std::vector<cplx>& side_points() const { return sides_; }

    /// Euclidean distance from 0 to the boundary of F along angle theta.
    double radial_function(double theta) const { return whole_disk() ? 1.0 : radial_limit(sides_, theta); }

    /// d(z,0) >= d(z,p) - tie_tol for every nonidentity tabulated p.
    bool contains(cplx z) const {
        if (whole_disk()) return true;
        const double rz = hyperbolic_radius(z);
        const double d0 = std::sqrt(1.0 - std::norm(z));
        for (const auto& e : table_->entries) {
            if (e.length() == 0) continue;
            if (e.rho > 2 * rz + 1e-9) break;
            if (d_kernel(z, e.point) > d0 + tie_tol) return false;
        }
        if (2 * rz > table_->reliable_rho() + 1e-9)
            throw std::runtime_error("dirichlet_membership: table too shallow for |z| = " + std::to_string(std::abs(z)));
        return true;
    }

    struct Reduction {
        cplx point;
        SU11 element;  // element.apply(z) == point
    };

    /// Maps z into F by generator steps followed by a nearest-orbit-point check.
    Reduction reduce(cplx z) const {
        SU11 g = SU11::identity();
        if (whole_disk()) return {z, g};
        for (int it = 0; it < 1000; ++it) {
            double best = std::norm(z);
            int bl = -1;
            for (int l = 0; l < group_.alphabet_size(); ++l) {
                const double m = std::norm(group_.letter(l).apply(z));
                if (m < best * (1 - 1e-15)) {
                    best = m;
                    bl = l;
                }
            }
            if (bl < 0) break;
            z = group_.letter(bl).apply(z);
            g = group_.letter(bl) * g;
        }
        const double rz = hyperbolic_radius(z);
        double dbest = std::sqrt(1.0 - std::norm(z));
        const OrbitEntry* near = nullptr;
        for (const auto& e : table_->entries) {
            if (e.length() == 0) continue;
            if (e.rho > 2 * rz + 1e-9) break;
            const double d = d_kernel(z, e.point);
            if (d > dbest + tie_tol) {
                dbest = d;
                near = &e;
            }
        }
        if (near) {
            const SU11 h = near->element.inverse();
            z = h.apply(z);
            g = h * g;
        }
        return {z, g};
    }

    /// Polar rule over F for lambda_s: Gauss-Legendre in the angle on each
    /// side's sector and in the radius on [0, R(theta)].
    DiskRule rule(double s, int radial_order, int angular_order) const {
        if (whole_disk()) throw std::invalid_argument("domain rule: the trivial group has the whole disk as domain");
        const GaussRule gr = gauss_legendre(radial_order);
        const GaussRule ga = gauss_legendre(angular_order);
        DiskRule rule;
        rule.s = s;
        rule.radial_order = radial_order;
        rule.angular_order = angular_order * static_cast<int>(vertex_angles_.size());
        rule.support = Support::region;
        const std::size_t nv = vertex_angles_.size();
        for (std::size_t k = 0; k < nv; ++k) {
            const double t0 = vertex_angles_[k];
            const double t1 = k + 1 < nv ? vertex_angles_[k + 1] : vertex_angles_[0] + 2 * pi;
            const double ht = 0.5 * (t1 - t0);
            for (int j = 0; j < angular_order; ++j) {
                const double theta = t0 + ht * (ga.x[j] + 1.0);
                const double R = radial_function(theta);
                const double hr = 0.5 * R;
                for (int i = 0; i < radial_order; ++i) {
                    const double rho = hr * (gr.x[i] + 1.0);
                    rule.nodes.push_back(std::polar(rho, theta));
                    rule.weights.push_back(ga.w[j] * ht * gr.w[i] * hr * rho * rpow(1.0 - rho * rho, s - 2.0));
                }
            }
        }
        return rule;
    }

private:
    static double radial_limit(const std::vector<cplx>& pts, double theta) {
        const cplx u = std::polar(1.0, theta);
        double best = 1.0;
        for (cplx p : pts) {
            const double p2 = std::norm(p);
            const double c = (std::conj(p) * u).real();
            if (c < p2) continue;
            const double disc = std::max(c * c - p2 * p2, 0.0);
            const double root = p2 / (c + std::sqrt(disc));
            best = std::min(best, root);
        }
        return best;
    }
    int active_side(double theta) const {
        const cplx u = std::polar(1.0, theta);
        double best = 2.0;
        int arg = -1;
        for (std::size_t i = 0; i < sides_.size(); ++i) {
            const cplx p = sides_[i];
            const double p2 = std::norm(p);
            const double c = (std::conj(p) * u).real();
            if (c < p2) continue;
            const double root = p2 / (c + std::sqrt(std::max(c * c - p2 * p2, 0.0)));
            if (root < best) {
                best = root;
                arg = static_cast<int>(i);
            }
        }
        return arg;
    }
    void find_sectors() {
        constexpr int samples = 4096;
        std::vector<int> act(samples);
        for (int j = 0; j < samples; ++j) act[j] = active_side(2 * pi * j / samples);
        for (int j = 0; j < samples; ++j) {
            const int a0 = act[j], a1 = act[(j + 1) % samples];
            if (a0 == a1) continue;
            double lo = 2 * pi * j / samples, hi = 2 * pi * (j + 1) / samples;
            for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
                const double mid = 0.5 * (lo + hi);
                (active_side(mid) == a0 ? lo : hi) = mid;
            }
            vertex_angles_.push_back(0.5 * (lo + hi));
        }
        if (vertex_angles_.empty()) throw std::runtime_error("FundamentalDomain: no vertices found");
        std::sort(vertex_angles_.begin(), vertex_angles_.end());
        // Bisectors through a vertex only flip the argmin there.
        std::vector<double> merged;
        for (double t : vertex_angles_)
            if (merged.empty() || t - merged.back() > 1e-9) merged.push_back(t);
        if (merged.size() > 1 && merged.front() + 2 * pi - merged.back() <= 1e-9) merged.pop_back();
        vertex_angles_ = std::move(merged);
    }

    std::shared_ptr<const OrbitTable> table_;
    FuchsianGroup group_;
    std::vector<cplx> sides_;
    std::vector<double> vertex_angles_;
    double circumradius_ = 1.0;
};

namespace detail {
inline double radical_inverse(std::uint64_t i, unsigned base) {
    double f = 1.0, x = 0.0;
    while (i) {
        f /= base;
        x += f * static_cast<double>(i % base);
        i /= base;
    }
    return x;
}
}  // namespace detail

/// Halton points in F with a seeded rotation shift, followed by the vertices
/// pulled slightly inward. The trivial group uses the disk of radius 0.5.
inline std::vector<cplx> probe_grid(const FundamentalDomain& F, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double s1 = u(rng), s2 = u(rng);
    std::vector<cplx> pts;
    for (int i = 1; i <= count; ++i) {
        const double a = std::fmod(detail::radical_inverse(i, 2) + s1, 1.0);
        const double b = std::fmod(detail::radical_inverse(i, 3) + s2, 1.0);
        const double theta = 2 * pi * a;
        const double R = F.whole_disk() ? 0.5 : F.radial_function(theta) * (1 - 1e-9);
        pts.push_back(std::polar(R * std::sqrt(b), theta));
    }
    for (cplx v : F.vertices()) pts.push_back(v * (1 - 1e-9));
    return pts;
}

inline bool dirichlet_membership(const FundamentalDomain& F, cplx z) { return F.contains(z); }

/// lambda_0(F) with a masked disk rule (s = 0, decay 2 keeps weights finite).
inline double covolume(const FundamentalDomain& F, const DiskRule& rule) {
    if (F.whole_disk()) return std::numeric_limits<double>::infinity();
    std::vector<double> w;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const cplx z = rule.nodes[i];
        if (std::abs(z) > F.circumradius() + 1e-12) continue;
        if (F.contains(z)) w.push_back(rule.weights[i] * rpow(1.0 - std::norm(z), -rule.s));
    }
    if (w.empty()) throw std::runtime_error("covolume: mask removed all nodes");
    return tree_sum(w);
}

/// lambda_0(F) from the sector rule over F.
inline double covolume_sector(const FundamentalDomain& F, int radial_order = 32, int angular_order = 32) {
    if (F.whole_disk()) return std::numeric_limits<double>::infinity();
    return tree_sum(F.rule(0.0, radial_order, angular_order).weights);
}

}  // namespace berezin
