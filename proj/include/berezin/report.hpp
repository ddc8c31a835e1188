#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace berezin {

/// Desk-scale limits enforced on every run.
struct Caps {
    static constexpr int max_depth = 6;
    static constexpr int max_N = 9;
    static constexpr int max_nodes_per_region = 10000;
    static constexpr int max_probes = 256;
};

struct RunConfig {
    double r = 8.0;
    std::string group = "octagon";  // octagon | trivial | file
    std::string group_file;
    int depth = 5;
    int radial = 48;        // radial order of lambda_0 disk rules
    int angular = 128;      // angular order of lambda_0 disk rules
    int region_radial = 6;  // per-sector orders of the tile rule used for compressions
    int region_angular = 4;
    int probes = 16;
    int n_max = 9;
    int outer_cap = 4;
    int inner_cap = 4;
    std::uint64_t seed = 1;
    std::string format = "json";

    void validate() const {
        auto bad = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
        if (!(r > 2)) bad("weight r must exceed 2");
        if (group != "octagon" && group != "trivial" && group != "file") bad("unknown group source " + group);
        if (group == "file" && group_file.empty()) bad("group file path missing");
        if (depth < 0 || depth > Caps::max_depth) bad("depth must lie in [0, " + std::to_string(Caps::max_depth) + "]");
        if (n_max < 1 || n_max > Caps::max_N) bad("N_max must lie in [1, " + std::to_string(Caps::max_N) + "]");
        if (radial < 2 || angular < 4) bad("quadrature orders too small");
        if (static_cast<long>(radial) * angular > 4L * Caps::max_nodes_per_region) bad("disk rule above the node cap");
        if (region_radial < 2 || region_angular < 2) bad("region rule orders too small");
        if (static_cast<long>(region_radial) * region_angular * 8 * n_max > Caps::max_nodes_per_region)
            bad("region rule above " + std::to_string(Caps::max_nodes_per_region) + " nodes");
        if (probes < 1 || probes > Caps::max_probes) bad("probe count out of range");
        if (outer_cap < 0 || outer_cap > Caps::max_depth || inner_cap < 0 || inner_cap > Caps::max_depth)
            bad("orbit-sum caps must lie in [0, " + std::to_string(Caps::max_depth) + "]");
        if (format != "json" && format != "csv") bad("format must be json or csv");
    }

    /// Canonical text of every field that affects results.
    std::string canonical() const {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", r);
        std::ostringstream s;
        s << "r=" << buf << ";group=" << group << ";group_file=" << group_file << ";depth=" << depth
          << ";radial=" << radial << ";angular=" << angular << ";region_radial=" << region_radial
          << ";region_angular=" << region_angular << ";probes=" << probes << ";n_max=" << n_max
          << ";outer_cap=" << outer_cap << ";inner_cap=" << inner_cap << ";seed=" << seed;
        return s.str();
    }
};

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string config_hash(const RunConfig& c) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(c.canonical())));
    return buf;
}

struct ResultRow {
    std::string name;
    double value = 0;
    double tail = 0;
    double tolerance = 0;
    bool pass = false;
};

inline bool finite(double x) { return std::isfinite(x); }

/// value <= tolerance.
inline ResultRow row_le(std::string name, double value, double tolerance, double tail = 0) {
    return {std::move(name), value, tail, tolerance, finite(value) && value <= tolerance};
}
/// value >= tolerance (tolerance read as a lower bound).
inline ResultRow row_ge(std::string name, double value, double bound, double tail = 0) {
    return {std::move(name), value, tail, bound, finite(value) && value >= bound};
}
/// Passes when the value exceeds the tolerance: used to assert that a wrong constant is rejected.
inline ResultRow row_rejects(std::string name, double value, double tolerance) {
    return {std::move(name), value, 0.0, tolerance, finite(value) && value > tolerance};
}
/// Reported quantity; passes when finite.
inline ResultRow row_info(std::string name, double value, double tail = 0) {
    return {std::move(name), value, tail, 0.0, finite(value)};
}

struct ConstantTable {
    double kappa_star = 0, kappa_meanvalue = 0, kappa_kernel = 0, M_r_hat = 0;
};

struct Report {
    std::string config_hash;
    ConstantTable constants;
    std::vector<ResultRow> results;

    bool all_pass() const {
        for (const auto& r : results)
            if (!r.pass) return false;
        return true;
    }
};

namespace detail {

/// JSON has no NaN or infinity; such values are written as null.
inline nlohmann::ordered_json num(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

/// %.17g; non-finite values are left empty, as JSON writes them null.
inline std::string g17(double x) {
    if (!std::isfinite(x)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string o = "\"";
    for (char c : s) {
        if (c == '"') o += '"';
        o += c;
    }
    return o + "\"";
}

}  // namespace detail

inline std::string to_json(const Report& rep) {
    nlohmann::ordered_json j;
    j["config_hash"] = rep.config_hash;
    j["constants"] = {{"kappa_star", detail::num(rep.constants.kappa_star)},
                      {"kappa_meanvalue", detail::num(rep.constants.kappa_meanvalue)},
                      {"kappa_kernel", detail::num(rep.constants.kappa_kernel)},
                      {"M_r_hat", detail::num(rep.constants.M_r_hat)}};
    j["results"] = nlohmann::ordered_json::array();
    for (const auto& r : rep.results)
        j["results"].push_back({{"name", r.name},
                                {"value", detail::num(r.value)},
                                {"tail", detail::num(r.tail)},
                                {"tolerance", detail::num(r.tolerance)},
                                {"pass", r.pass}});
    return j.dump(2) + "\n";
}

/// Flat rows: constants first, then results.
inline std::string to_csv(const Report& rep) {
    std::ostringstream s;
    s << "config_hash,kind,name,value,tail,tolerance,pass\n";
    const std::pair<const char*, double> cs[] = {{"kappa_star", rep.constants.kappa_star},
                                                 {"kappa_meanvalue", rep.constants.kappa_meanvalue},
                                                 {"kappa_kernel", rep.constants.kappa_kernel},
                                                 {"M_r_hat", rep.constants.M_r_hat}};
    for (const auto& [n, v] : cs) s << rep.config_hash << ",constant," << n << "," << detail::g17(v) << ",,,\n";
    for (const auto& r : rep.results)
        s << rep.config_hash << ",result," << detail::csv_field(r.name) << "," << detail::g17(r.value) << ","
          << detail::g17(r.tail) << "," << detail::g17(r.tolerance) << "," << (r.pass ? "true" : "false") << "\n";
    return s.str();
}

inline std::string render(const Report& rep, const std::string& format) {
    return format == "csv" ? to_csv(rep) : to_json(rep);
}

}  // namespace berezin
