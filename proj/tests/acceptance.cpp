// Acceptance suite: one PASS/FAIL line per criterion, default octagon configuration.
#include <array>
#include <cstdio>
#include <cstdlib>

#include <berezin/checks.hpp>

using namespace berezin;

namespace {

/// Wall-time budgets in seconds, by criterion.
constexpr std::array<double, 12> budget{1, 5, 30, 60, 10, 120, 300, 300, 600, 600, 600, 0};

std::string run_cli(const std::string& args, int threads, int& status) {
    const std::string cmd = "BEREZIN_THREADS=" + std::to_string(threads) + " " + BEREZIN_CLI_PATH + " " + args +
                            " 2>/dev/null";
    std::string out;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) {
        status = -1;
        return out;
    }
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
    status = pclose(p);
    return out;
}

void print_rows(const std::vector<ResultRow>& rows) {
    for (const auto& r : rows)
        std::printf("    %-4s %-58s %.6e  tol %.3e\n", r.pass ? "ok" : "FAIL", r.name.c_str(), r.value, r.tolerance);
}

}  // namespace

int main() {
    std::setvbuf(stdout, nullptr, _IONBF, 0);
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig cfg;
    const Context ctx = make_context(cfg);
    std::printf("setup: %s, depth %d, %zu orbit points, config %s (%.1f s)\n", cfg.group.c_str(), cfg.depth,
                ctx.table->size(), config_hash(cfg).c_str(),
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

    int failed = 0;
    std::vector<CheckResult> results;
    for (const auto& e : all_checks()) {
        CheckResult r = run_check(e, ctx);
        const double limit = budget[e.criterion - 1];
        const bool in_time = r.seconds <= limit;
        const bool ok = r.pass() && in_time;
        failed += !ok;
        std::printf("%s criterion %d: %s (%.1f s, budget %.0f s%s)\n", ok ? "PASS" : "FAIL", e.criterion,
                    r.title.c_str(), r.seconds, limit, in_time ? "" : ", over budget");
        print_rows(r.rows);
        results.push_back(std::move(r));
    }

    // Byte identity of the verify report across repeated runs and thread counts.
    {
        const auto t = std::chrono::steady_clock::now();
        const std::string args = "verify --group trivial --format json";
        int s1 = 0, s2 = 0, s3 = 0;
        const std::string a = run_cli(args, 1, s1), b = run_cli(args, 1, s2), c = run_cli(args, 3, s3);
        set_thread_count(3);
        std::vector<CheckResult> again;
        for (const auto& e : all_checks())
            if (e.criterion <= 6) again.push_back(run_check(e, ctx));
        set_thread_count(0);
        std::vector<CheckResult> first(results.begin(), results.begin() + 6);
        const bool cli_same = !a.empty() && a == b && a == c && s1 == 0 && s2 == 0 && s3 == 0;
        const bool octagon_same = to_json(make_report(ctx, first)) == to_json(make_report(ctx, again));
        const bool ok = cli_same && octagon_same;
        failed += !ok;
        std::printf("%s criterion 12: determinism (%.1f s)\n", ok ? "PASS" : "FAIL",
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count());
        std::printf("    %-4s verify --group trivial: 2 runs at 1 thread, 1 run at 3 threads, %zu bytes\n",
                    cli_same ? "ok" : "FAIL", a.size());
        std::printf("    %-4s octagon criteria 1-6 report at 1 vs 3 threads\n", octagon_same ? "ok" : "FAIL");
    }

    std::printf("%d of 12 criteria failed\n", failed);
    return failed ? EXIT_FAILURE : EXIT_SUCCESS;
}
