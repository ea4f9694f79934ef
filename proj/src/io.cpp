#include "affine2f/io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "affine2f/errors.hpp"

namespace affine2f::io {

using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return buf.data();
}

void write_ensemble_csv(std::ostream& out, const PathEnsemble& ens) {
    out << "t";
    for (std::size_t k = 0; k < ens.n_paths; ++k) out << ",path_" << k << "_y,path_" << k << "_x";
    out << '\n';
    for (std::size_t j = 0; j < ens.grid.n_points(); ++j) {
        out << format_double(ens.grid.time(j));
        for (std::size_t k = 0; k < ens.n_paths; ++k) {
            out << ',' << format_double(ens.y_path(k)[j]) << ',' << format_double(ens.x_path(k)[j]);
        }
        out << '\n';
    }
}

namespace {

constexpr char kMagic[8] = {'A', '2', 'F', 'P', 'A', 'T', 'H', '1'};

template <class T>
void put(std::ostream& out, T v) {
    static_assert(std::endian::native == std::endian::little, "binary dump assumes little endian");
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ValidationError("truncated ensemble dump");
    return v;
}

}  // namespace

void write_ensemble_binary(std::ostream& out, const PathEnsemble& ens) {
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kSchemaVersion);
    put<std::uint8_t>(out, ens.scheme == Scheme::exact ? 0 : 1);
    const char pad[3] = {0, 0, 0};
    out.write(pad, sizeof(pad));
    put<std::uint64_t>(out, ens.master_seed);
    put<std::uint64_t>(out, ens.n_paths);
    put<std::uint64_t>(out, ens.grid.n_steps());
    put<double>(out, ens.grid.t_end());
    for (double v : {ens.params.a(), ens.params.b(), ens.params.m(), ens.params.theta(),
                     ens.params.alpha()}) {
        put<double>(out, v);
    }
    out.write(reinterpret_cast<const char*>(ens.y.data()),
              static_cast<std::streamsize>(ens.y.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(ens.x.data()),
              static_cast<std::streamsize>(ens.x.size() * sizeof(double)));
}

PathEnsemble read_ensemble_binary(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
        throw ValidationError("not an ensemble dump");
    }
    if (get<std::uint32_t>(in) != kSchemaVersion) throw ValidationError("unsupported dump version");
    const auto scheme = get<std::uint8_t>(in) == 0 ? Scheme::exact : Scheme::euler;
    char pad[3];
    in.read(pad, sizeof(pad));
    const auto seed = get<std::uint64_t>(in);
    const auto n_paths = get<std::uint64_t>(in);
    const auto n_steps = get<std::uint64_t>(in);
    const auto t_end = get<double>(in);
    std::array<double, 5> raw{};
    for (double& v : raw) v = get<double>(in);
    PathEnsemble ens{PathGrid(t_end, n_steps),
                     n_paths,
                     {},
                     {},
                     validate_params(raw[0], raw[1], raw[2], raw[3], raw[4]),
                     scheme,
                     seed};
    const std::size_t count = n_paths * (n_steps + 1);
    ens.y.resize(count);
    ens.x.resize(count);
    in.read(reinterpret_cast<char*>(ens.y.data()), static_cast<std::streamsize>(count * sizeof(double)));
    in.read(reinterpret_cast<char*>(ens.x.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw ValidationError("truncated ensemble dump");
    return ens;
}

json params_json(const ModelParams& p) {
    return {{"a", p.a()}, {"b", p.b()}, {"m", p.m()}, {"theta", p.theta()}, {"alpha", p.alpha()}};
}

json moment_table_json(const MomentTable& table, const ModelParams& p) {
    json entries = json::array();
    for (int d = 0; d <= table.max_order(); ++d) {
        for (int q = 0; q <= d; ++q) {
            entries.push_back({{"n", d - q}, {"p", q}, {"value", table.at(d - q, q)}});
        }
    }
    return {{"schema_version", kSchemaVersion},
            {"params", params_json(p)},
            {"max_order", table.max_order()},
            {"moments", entries}};
}

namespace {

// NaN is not representable in JSON; emit null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json ergodic_report_json(const ErgodicReport& r) {
    json j = {{"schema_version", kSchemaVersion},
              {"function", {{"n", r.f.n}, {"p", r.f.p}}},
              {"horizon", r.horizon},
              {"dt", r.dt},
              {"replicas", r.n_replicas},
              {"estimate", r.estimate},
              {"target", number_or_null(r.target)},
              {"std_error", r.std_error},
              {"exploratory", r.exploratory}};
    if (r.exploratory) {
        j["verdict"] = "exploratory";
    } else {
        j["verdict"] = r.pass ? "pass" : "fail";
    }
    return j;
}

json mixing_curve_json(const MixingCurve& c) {
    return {{"schema_version", kSchemaVersion},
            {"function", {{"n", c.g.n}, {"p", c.g.p}}},
            {"target", c.target},
            {"times", c.times},
            {"mc_mean", c.mc_mean},
            {"mc_std_error", c.mc_std_error},
            {"transient", c.transient},
            {"values", c.values},
            {"max_gap", c.max_gap},
            {"fitted_rate", c.fitted_rate},
            {"fit_residual", c.fit_residual}};
}

json drift_report_json(const DriftReport& r) {
    return {{"schema_version", kSchemaVersion},
            {"c1", r.c1},
            {"c2", r.c2},
            {"c", r.c},
            {"d", r.d},
            {"max_violation", r.max_violation},
            {"satisfied", r.satisfied()}};
}

void write_ergodic_report_csv(std::ostream& out, const ErgodicReport& r) {
    out << "n,p,horizon,dt,replicas,estimate,target,std_error,verdict\n";
    out << r.f.n << ',' << r.f.p << ',' << format_double(r.horizon) << ',' << format_double(r.dt)
        << ',' << r.n_replicas << ',' << format_double(r.estimate) << ','
        << format_double(r.target) << ',' << format_double(r.std_error) << ','
        << (r.exploratory ? "exploratory" : (r.pass ? "pass" : "fail")) << '\n';
}

void write_mixing_curve_csv(std::ostream& out, const MixingCurve& c) {
    out << "t,mc_mean,mc_std_error,transient,distance\n";
    for (std::size_t k = 0; k < c.times.size(); ++k) {
        out << format_double(c.times[k]) << ',' << format_double(c.mc_mean[k]) << ','
            << format_double(c.mc_std_error[k]) << ',' << format_double(c.transient[k]) << ','
            << format_double(c.values[k]) << '\n';
    }
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

ConfigMap parse_config(std::istream& in) {
    ConfigMap cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
        if (!cfg.emplace(key, value).second) {
            throw ValidationError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
    }
    return cfg;
}

ConfigMap load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    return parse_config(in);
}

std::string config_hash(const ConfigMap& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&](const std::string& s) {
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& [k, v] : cfg) feed(k + "=" + v + "\n");
    std::array<char, 17> buf{};
    std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(h));
    return buf.data();
}

}  // namespace affine2f::io
