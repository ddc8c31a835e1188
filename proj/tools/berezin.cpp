// Batch driver: verification suites, single computations, calibration and group summaries.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <berezin/checks.hpp>

using namespace berezin;

namespace {

/// "x,y" or "x" to a complex number.
cplx parse_point(const std::string& s) {
    const auto comma = s.find(',');
    std::size_t pos = 0;
    try {
        const double x = std::stod(s.substr(0, comma), &pos);
        if (pos != (comma == std::string::npos ? s.size() : comma)) throw std::invalid_argument("");
        if (comma == std::string::npos) return {x, 0.0};
        const std::string rest = s.substr(comma + 1);
        const double y = std::stod(rest, &pos);
        if (pos != rest.size()) throw std::invalid_argument("");
        return {x, y};
    } catch (const std::exception&) {
        throw std::invalid_argument("cannot read point '" + s + "'; expected x,y");
    }
}

struct Options {
    RunConfig cfg;
    std::string out;
    std::string z = "0,0", zeta = "0.2,0", eta1 = "0.1,0.2", eta2 = "-0.3,0.1";
    std::string u1 = "0.2,0.1", v1 = "-0.1,0.3", u2 = "0.3,-0.2", v2 = "0.1,0";
    double sigma = 0.5;
    std::string what;
};

void add_config_options(CLI::App* app, Options& o) {
    auto& c = o.cfg;
    app->add_option("--r", c.r, "weight r (> 2)");
    app->add_option("--group", c.group, "octagon | trivial | file");
    app->add_option("--group-file", c.group_file, "group file; implies --group file");
    app->add_option("--depth", c.depth, "orbit table word length");
    app->add_option("--radial", c.radial, "radial order of disk rules");
    app->add_option("--angular", c.angular, "angular order of disk rules");
    app->add_option("--region-radial", c.region_radial, "radial order per sector of tile rules");
    app->add_option("--region-angular", c.region_angular, "angular order per sector of tile rules");
    app->add_option("--probes", c.probes, "probe-grid size");
    app->add_option("--n-max", c.n_max, "largest N of truncation sequences");
    app->add_option("--outer-cap", c.outer_cap, "outer word-length cap of orbit sums");
    app->add_option("--inner-cap", c.inner_cap, "inner word-length cap of orbit sums");
    app->add_option("--seed", c.seed, "probe sampling seed");
    app->add_option("--format", c.format, "json | csv");
    app->add_option("--out", o.out, "output path (default stdout)");
}

void emit(const Options& o, const std::string& text) {
    if (o.out.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + o.out + "'");
    f << text;
}

Report base_report(const RunConfig& cfg, const Constants& C) {
    Report rep;
    rep.config_hash = config_hash(cfg);
    rep.constants = {C.kappa_star, C.kappa_meanvalue, C.kappa_kernel, std::numeric_limits<double>::quiet_NaN()};
    return rep;
}

void push_complex(Report& rep, const std::string& name, const ComplexEstimate& e) {
    rep.results.push_back(row_info(name + ".re", e.value.real(), e.tail));
    rep.results.push_back(row_info(name + ".im", e.value.imag(), e.tail));
}

int cmd_verify(const Options& o) {
    const Context ctx = make_context(o.cfg);
    const auto checks = run_suite(ctx, [](const CheckResult& c) {
        std::fprintf(stderr, "criterion %d (%s): %s\n", c.criterion, c.title.c_str(), c.pass() ? "pass" : "FAIL");
    });
    const Report rep = make_report(ctx, checks);
    emit(o, render(rep, o.cfg.format));
    return rep.all_pass() ? 0 : 1;
}

int cmd_compute(const Options& o) {
    const Context ctx = make_context(o.cfg);
    const Weight& w = ctx.w;
    Report rep = base_report(o.cfg, ctx.C);
    const cplx z = parse_point(o.z), zeta = parse_point(o.zeta);
    const std::string& what = o.what;
    if (what == "kr") {
        const Estimate k = poincare_series(*ctx.table, z, zeta, w);
        rep.results.push_back(row_info("kr", k.value, k.tail));
    } else if (what == "eval") {
        const InvariantSymbol e = eval_vector(z, zeta, ctx.table, w);
        push_complex(rep, "eval", e.evaluate(parse_point(o.eta1), parse_point(o.eta2)));
    } else if (what == "star") {
        const InvariantSymbol A = rank_one_symbol(w, parse_point(o.u1), parse_point(o.v1));
        const InvariantSymbol B = rank_one_symbol(w, parse_point(o.u2), parse_point(o.v2));
        const InvariantSymbol P = star_product(A, B, build_disk_rule(w.r, o.cfg.radial, o.cfg.angular), ctx.C.kappa_star);
        push_complex(rep, "star", P.evaluate(z, zeta));
    } else if (what == "trace") {
        const InvariantSymbol e = eval_vector(z, zeta, ctx.table, w);
        if (ctx.trivial()) {
            const cplx t = trace_vn(e, build_disk_rule(0.0, o.cfg.radial, o.cfg.angular, w.r));
            push_complex(rep, "trace_vn", {t, 0.0});
        } else {
            const DiskRule rule0 = ctx.F->rule(0.0, o.cfg.region_radial * 2, o.cfg.region_angular * 4);
            const cplx t = trace_tau(e, *ctx.F, rule0);
            double tail = 0;
            for (const cplx& x : rule0.nodes) tail = std::max(tail, e.evaluate(x, x).tail);
            push_complex(rep, "trace_tau", {t, tail});
        }
    } else if (what == "lambda_norm") {
        const OrbitAveragedBump phi(ctx.F, zeta, o.sigma);
        const ToeplitzLambdaIntegrals I(w, build_disk_rule(w.r, o.cfg.radial, o.cfg.angular),
                                        build_disk_rule(0.0, o.cfg.radial / 2 + 1, o.cfg.angular / 2 + 1, w.r / 2));
        PointList starts = probe_grid(*ctx.F, o.cfg.probes, o.cfg.seed);
        starts.push_back(zeta);
        const LambdaSup L = toeplitz_lambda_sup(phi, I, starts);
        rep.results.push_back(row_info("lambda_norm", L.value));
        rep.results.push_back(row_info("lambda_norm.argmax_re", L.argmax.real()));
        rep.results.push_back(row_info("lambda_norm.argmax_im", L.argmax.imag()));
    } else if (what == "l1_seq") {
        if (ctx.trivial()) throw std::invalid_argument("l1_seq needs a cocompact group");
        const NormSequence seq = norm_sequence(eval_vector(z, zeta, ctx.table, w), ctx.F,
                                               {o.cfg.region_radial, o.cfg.region_angular}, o.cfg.n_max, ctx.C.kappa_op);
        for (const auto& s : seq.entries) {
            const std::string n = ".N=" + std::to_string(s.N);
            rep.results.push_back(row_info("l1" + n, s.l1()));
            rep.results.push_back(row_info("sqrtN_hs" + n, s.sqrtN_hs()));
            rep.results.push_back(row_info("hs_dimension_bound" + n, s.hs_dimension_bound()));
        }
    } else if (what == "sums") {
        const int outer = ctx.trivial() ? 0 : o.cfg.outer_cap, inner = ctx.trivial() ? 0 : o.cfg.inner_cap;
        const int Nmax = ctx.trivial() ? 1 : o.cfg.n_max;
        for (int N = 1; N <= Nmax; ++N) {
            const std::string n = ".N=" + std::to_string(N);
            const OrbitSum y = orbit_sum_yN(*ctx.table, N, w, outer);
            const OrbitSum c = orbit_sum_root_mean(*ctx.table, N, w, outer);
            const OrbitSum plain_sum = orbit_sum_plain(*ctx.table, N, w, outer, inner);
            const OrbitSum phased_sum = orbit_sum_phased(*ctx.table, N, w, outer, inner);
            rep.results.push_back(row_info("yN" + n, y.value, y.tail));
            rep.results.push_back(row_info("root_mean" + n, c.value, c.tail));
            rep.results.push_back(row_info("plain" + n, plain_sum.value, plain_sum.tail));
            rep.results.push_back(row_info("phased" + n, phased_sum.value, phased_sum.tail));
        }
    } else {
        throw std::invalid_argument("unknown compute target '" + what + "'");
    }
    emit(o, render(rep, o.cfg.format));
    return 0;
}

int cmd_calibrate(const Options& o) {
    o.cfg.validate();
    const Weight w(o.cfg.r);
    const Constants C = calibrate(w);
    Report rep = base_report(o.cfg, C);
    rep.results.push_back(row_info("printed_constant", C.printed_c));
    rep.results.push_back(row_info("kappa_star", C.kappa_star));
    rep.results.push_back(row_info("kappa_meanvalue", C.kappa_meanvalue));
    rep.results.push_back(row_info("kappa_kernel", C.kappa_kernel));
    rep.results.push_back(row_info("kappa_op", C.kappa_op));
    rep.results.push_back(row_info("kappa_pair", C.kappa_pair));
    rep.results.push_back(row_info("kappa_hs", C.kappa_hs));
    emit(o, render(rep, o.cfg.format));
    return 0;
}

int cmd_group_info(const Options& o) {
    o.cfg.validate();
    const FuchsianGroup g = load_configured_group(o.cfg);
    Report rep;
    rep.config_hash = config_hash(o.cfg);
    rep.constants = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                     std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    rep.results.push_back(row_info("generators", static_cast<double>(g.generators.size())));
    const int depth = g.is_trivial() ? 0 : o.cfg.depth;
    const auto t = std::make_shared<const OrbitTable>(enumerate_orbit(g, depth));
    for (int L = 0; L <= depth; ++L)
        rep.results.push_back(row_info("orbit_points.length<=" + std::to_string(L), double(t->shell_upto(L).size())));
    rep.results.push_back(row_info("reliable_radius", t->reliable_radius()));
    if (!g.is_trivial()) {
        try {
            const FundamentalDomain F(t, g);
            rep.results.push_back(row_info("domain.sides", double(F.side_points().size())));
            rep.results.push_back(row_info("domain.circumradius", F.circumradius()));
            rep.results.push_back(row_info("domain.covolume", covolume_sector(F)));
        } catch (const std::runtime_error& e) {
            std::fprintf(stderr, "group-info: no fundamental domain at depth %d: %s\n", depth, e.what());
        }
    }
    emit(o, render(rep, o.cfg.format));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Berezin quantization on hyperbolic surfaces: verification and computation driver"};
    app.require_subcommand(1);
    Options o;
    auto* verify = app.add_subcommand("verify", "run the verification suite for the configured group");
    auto* compute = app.add_subcommand("compute", "compute one quantity");
    auto* calib = app.add_subcommand("calibrate", "print the calibrated identity constants");
    auto* info = app.add_subcommand("group-info", "summarize the group, its orbit table and domain");
    for (auto* s : {verify, compute, calib, info}) add_config_options(s, o);
    compute->add_option("what", o.what, "kr | eval | star | trace | lambda_norm | l1_seq | sums")
        ->required()
        ->check(CLI::IsMember({"kr", "eval", "star", "trace", "lambda_norm", "l1_seq", "sums"}));
    compute->add_option("--z", o.z, "first point x,y");
    compute->add_option("--zeta", o.zeta, "second point x,y (bump center for lambda_norm)");
    compute->add_option("--eta1", o.eta1, "first evaluation point of eval");
    compute->add_option("--eta2", o.eta2, "second evaluation point of eval");
    compute->add_option("--u1", o.u1);
    compute->add_option("--v1", o.v1);
    compute->add_option("--u2", o.u2);
    compute->add_option("--v2", o.v2);
    compute->add_option("--sigma", o.sigma, "bump width for lambda_norm");
    CLI11_PARSE(app, argc, argv);
    if (!o.cfg.group_file.empty()) o.cfg.group = "file";
    try {
        if (*verify) return cmd_verify(o);
        if (*compute) return cmd_compute(o);
        if (*calib) return cmd_calibrate(o);
        return cmd_group_info(o);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "berezin: %s\n", e.what());
        return 2;
    }
}
