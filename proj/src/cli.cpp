#include "affine2f/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "affine2f/acceptance.hpp"
#include "affine2f/ergodicity.hpp"
#include "affine2f/errors.hpp"
#include "affine2f/generator.hpp"
#include "affine2f/io.hpp"
#include "affine2f/riccati.hpp"
#include "affine2f/sampler.hpp"
#include "affine2f/stationary.hpp"

namespace affine2f::cli {

namespace {

using nlohmann::json;

// Every key accepted in a config file; flags are the same names with '-' for '_'.
const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "a", "b", "m", "theta", "alpha", "seed", "n_paths", "t_end", "n_steps", "scheme", "y0", "x0",
        "stationary_start", "lambda1", "lambda2", "t", "abs_tol", "rel_tol", "max_order", "y", "y_min",
        "y_max", "n_points", "series_tol", "n", "p", "horizon", "dt", "replicas", "substeps", "c1", "c",
        "grid", "x_max", "mutate", "only", "format", "output", "threads"};
    return keys;
}

// Keys that never change the content of an artifact and so stay out of the config hash.
const std::set<std::string> kUnhashed{"output", "threads"};

std::string flag_name(std::string key) {
    for (char& c : key)
        if (c == '_') c = '-';
    return "--" + key;
}

double parse_real(const std::string& key, const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ValidationError(key + ": expected a finite number, got '" + s + "'");
    }
    return v;
}

std::uint64_t parse_count(const std::string& key, const std::string& s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ValidationError(key + ": expected a nonnegative integer, got '" + s + "'");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ValidationError(key + ": expected true or false, got '" + s + "'");
}

/// Flag values, overriding config values, overriding defaults. Records the effective
/// settings for the config hash.
class Settings {
public:
    std::map<std::string, std::string> flags;
    std::map<std::string, CLI::Option*> options;
    io::ConfigMap file;
    io::ConfigMap effective;

    std::optional<std::string> lookup(const std::string& key) {
        const auto opt = options.find(key);
        if (opt != options.end() && opt->second->count() > 0) return flags.at(key);
        const auto it = file.find(key);
        if (it != file.end()) return it->second;
        return std::nullopt;
    }

    bool has(const std::string& key) { return lookup(key).has_value(); }

    std::string text(const std::string& key, const std::string& fallback) {
        const std::string v = lookup(key).value_or(fallback);
        record(key, v);
        return v;
    }

    double real(const std::string& key, std::optional<double> fallback = std::nullopt) {
        const auto raw = lookup(key);
        if (!raw && !fallback) throw ValidationError(flag_name(key) + " is required");
        const double v = raw ? parse_real(key, *raw) : *fallback;
        record(key, io::format_double(v));
        return v;
    }

    std::uint64_t count(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt) {
        const auto raw = lookup(key);
        if (!raw && !fallback) throw ValidationError(flag_name(key) + " is required");
        const std::uint64_t v = raw ? parse_count(key, *raw) : *fallback;
        record(key, std::to_string(v));
        return v;
    }

    int order(const std::string& key, int fallback) {
        const auto v = count(key, static_cast<std::uint64_t>(fallback));
        if (v > 64) throw ValidationError(key + " is too large");
        return static_cast<int>(v);
    }

    bool boolean(const std::string& key) {
        const auto raw = lookup(key);
        const bool v = raw && (raw->empty() || parse_bool(key, *raw));
        record(key, v ? "true" : "false");
        return v;
    }

    std::string hash() const {
        io::ConfigMap hashed;
        for (const auto& [k, v] : effective)
            if (!kUnhashed.contains(k)) hashed.emplace(k, v);
        return io::config_hash(hashed);
    }

private:
    void record(const std::string& key, const std::string& value) { effective[key] = value; }
};

struct Context {
    Settings& s;
    std::ostream& out;
    std::ostream& err;
    std::string command;
    std::string summary;
    int status = kOk;

    ModelParams params() {
        return validate_params(s.real("a", 1.0), s.real("b", 1.0), s.real("m", 0.0), s.real("theta", 1.0),
                               s.real("alpha", 2.0));
    }
    std::string format(std::initializer_list<const char*> allowed) {
        const std::string f = s.text("format", *allowed.begin());
        for (const char* a : allowed)
            if (f == a) return f;
        throw ValidationError("format '" + f + "' not supported by " + command);
    }
    unsigned threads() {
        const auto raw = s.lookup("threads");
        return raw ? static_cast<unsigned>(parse_count("threads", *raw)) : 0u;
    }
    State start() { return State(s.real("y0", 1.0), s.real("x0", 0.0)); }
    Tolerance tolerance() {
        const Tolerance def;
        return Tolerance{s.real("abs_tol", def.abs), s.real("rel_tol", def.rel)};
    }
};

// Writes to --output when given, otherwise to the tool's stdout.
template <class Writer>
void emit(Context& ctx, bool binary, Writer&& write) {
    const auto path = ctx.s.lookup("output");
    if (path && !path->empty()) {
        std::ofstream file(*path, binary ? std::ios::binary : std::ios::out);
        if (!file) throw ValidationError("cannot open output file '" + *path + "'");
        write(file);
        if (!file) throw ValidationError("failed writing output file '" + *path + "'");
    } else {
        if (binary) throw ValidationError("binary output needs --output");
        write(ctx.out);
    }
}

void emit_json(Context& ctx, json j) {
    j["config_hash"] = ctx.s.hash();
    if (!j.contains("schema_version")) j["schema_version"] = io::kSchemaVersion;
    emit(ctx, false, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

json complex_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

std::string num(double v) { return io::format_double(v); }

// ---------------------------------------------------------------------------

void cmd_simulate(Context& ctx) {
    const auto p = ctx.params();
    const auto seed = ctx.s.count("seed");
    const auto n_paths = ctx.s.count("n_paths", 1);
    const PathGrid grid(ctx.s.real("t_end", 1.0), ctx.s.count("n_steps", 100));
    const Scheme scheme = scheme_from_string(ctx.s.text("scheme", p.diffusion() ? "exact" : "euler"));
    InitialCondition init = StationaryStart{};
    if (!ctx.s.boolean("stationary_start")) init = ctx.start();
    const std::string format = ctx.format({"csv", "json", "binary"});
    const auto ens = simulate_joint(seed, init, grid, n_paths, scheme, p, ctx.threads());

    if (format == "csv") {
        emit(ctx, false, [&](std::ostream& o) { io::write_ensemble_csv(o, ens); });
    } else if (format == "binary") {
        emit(ctx, true, [&](std::ostream& o) { io::write_ensemble_binary(o, ens); });
    } else {
        json paths = json::array();
        for (std::size_t k = 0; k < ens.n_paths; ++k) {
            const auto y = ens.y_path(k), x = ens.x_path(k);
            paths.push_back({{"y", std::vector<double>(y.begin(), y.end())},
                             {"x", std::vector<double>(x.begin(), x.end())}});
        }
        std::vector<double> times(grid.n_points());
        for (std::size_t j = 0; j < times.size(); ++j) times[j] = grid.time(j);
        emit_json(ctx, {{"params", io::params_json(p)},
                        {"scheme", to_string(scheme)},
                        {"seed", seed},
                        {"t", times},
                        {"paths", paths}});
    }
    ctx.summary = "simulated " + std::to_string(n_paths) + " paths x " + std::to_string(grid.n_steps()) +
                  " steps (" + to_string(scheme) + ")";
}

void cmd_transform(Context& ctx) {
    const auto p = ctx.params();
    const LambdaPair lambda(ctx.s.real("lambda1"), ctx.s.real("lambda2", 0.0));
    const double t = ctx.s.real("t", 1.0);
    const State start = ctx.start();
    const Tolerance tol = ctx.tolerance();
    const std::string format = ctx.format({"json", "csv"});
    const auto terms = transform_terms(lambda, t, tol, p);
    const Complex e = transform_exponent(lambda, t, start, tol, p);
    const Complex value = std::exp(e);
    if (format == "json") {
        emit_json(ctx, {{"params", io::params_json(p)},
                        {"lambda1", lambda.lambda1},
                        {"lambda2", lambda.lambda2},
                        {"t", t},
                        {"y0", start.y},
                        {"x0", start.x},
                        {"v_t", terms.v_t},
                        {"exponent", complex_json(e)},
                        {"value", complex_json(value)},
                        {"modulus", std::abs(value)}});
    } else {
        emit(ctx, false, [&](std::ostream& o) {
            o << "t,v_t,exponent_re,exponent_im,value_re,value_im,modulus\n"
              << num(t) << ',' << num(terms.v_t) << ',' << num(e.real()) << ',' << num(e.imag()) << ','
              << num(value.real()) << ',' << num(value.imag()) << ',' << num(std::abs(value)) << '\n';
        });
    }
    ctx.summary = "transform modulus " + num(std::abs(value));
}

void cmd_stationary_cf(Context& ctx) {
    const auto p = ctx.params();
    const LambdaPair lambda(ctx.s.real("lambda1"), ctx.s.real("lambda2", 0.0));
    const Tolerance tol = ctx.tolerance();
    const std::string format = ctx.format({"json", "csv"});
    const Complex e = stationary_exponent(lambda, tol, p);
    const double horizon = stationary_truncation_time(lambda, tol, p);
    const Complex value = std::exp(e);
    if (format == "json") {
        emit_json(ctx, {{"params", io::params_json(p)},
                        {"lambda1", lambda.lambda1},
                        {"lambda2", lambda.lambda2},
                        {"truncation_time", horizon},
                        {"exponent", complex_json(e)},
                        {"value", complex_json(value)},
                        {"modulus", std::abs(value)}});
    } else {
        emit(ctx, false, [&](std::ostream& o) {
            o << "lambda1,lambda2,exponent_re,exponent_im,value_re,value_im,modulus\n"
              << num(lambda.lambda1) << ',' << num(lambda.lambda2) << ',' << num(e.real()) << ','
              << num(e.imag()) << ',' << num(value.real()) << ',' << num(value.imag()) << ','
              << num(std::abs(value)) << '\n';
        });
    }
    ctx.summary = "stationary transform modulus " + num(std::abs(value));
}

void cmd_moments(Context& ctx) {
    const auto p = ctx.params();
    const int order = ctx.s.order("max_order", 2);
    const std::string format = ctx.format({"json", "csv"});
    const bool transient = ctx.s.has("t");
    std::optional<MomentTable> table;
    double t = 0.0;
    State start;
    if (transient) {
        t = ctx.s.real("t");
        start = ctx.start();
        table = transient_moments(t, initial_moments(start, order), order, p);
    } else {
        table = stationary_moment_table(order, p);
    }
    if (format == "json") {
        json j = io::moment_table_json(*table, p);
        j["kind"] = transient ? "transient" : "stationary";
        if (transient) {
            j["t"] = t;
            j["y0"] = start.y;
            j["x0"] = start.x;
        }
        emit_json(ctx, j);
    } else {
        emit(ctx, false, [&](std::ostream& o) {
            o << "n,p,value\n";
            for (int d = 0; d <= order; ++d)
                for (int q = 0; q <= d; ++q) o << d - q << ',' << q << ',' << num(table->at(d - q, q)) << '\n';
        });
    }
    ctx.summary = std::string(transient ? "transient" : "stationary") + " moments up to order " +
                  std::to_string(order);
}

void cmd_density(Context& ctx) {
    const auto p = ctx.params();
    const double y0 = ctx.s.real("y0", 1.0);
    const double t = ctx.s.real("t", 1.0);
    const double series_tol = ctx.s.real("series_tol", 1e-16);
    const std::string format = ctx.format({"csv", "json"});
    std::vector<double> ys;
    if (ctx.s.has("y")) {
        ys.push_back(ctx.s.real("y"));
    } else {
        const double lo = ctx.s.real("y_min", 0.01), hi = ctx.s.real("y_max", 10.0);
        const auto n = ctx.s.count("n_points", 200);
        if (!(lo > 0.0 && hi >= lo) || n == 0) throw ValidationError("need 0 < y-min <= y-max and n-points >= 1");
        for (std::uint64_t i = 0; i < n; ++i) ys.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    }
    std::vector<double> dens;
    for (double y : ys) dens.push_back(cir_transition_density(y, y0, t, p, series_tol));
    if (format == "json") {
        emit_json(ctx, {{"params", io::params_json(p)}, {"y0", y0}, {"t", t}, {"y", ys}, {"density", dens}});
    } else {
        emit(ctx, false, [&](std::ostream& o) {
            o << "y,density\n";
            for (std::size_t i = 0; i < ys.size(); ++i) o << num(ys[i]) << ',' << num(dens[i]) << '\n';
        });
    }
    ctx.summary = "density at " + std::to_string(ys.size()) + " points";
}

PolySpec poly(Context& ctx, int n, int p) {
    return PolySpec{ctx.s.order("n", n), ctx.s.order("p", p)};
}

void cmd_ergodic(Context& ctx) {
    const auto p = ctx.params();
    const auto seed = ctx.s.count("seed");
    const PolySpec f = poly(ctx, 1, 0);
    const double horizon = ctx.s.real("horizon", 200.0);
    const double dt = ctx.s.real("dt", 0.01);
    const auto replicas = ctx.s.count("replicas", 32);
    const std::string format = ctx.format({"json", "csv"});
    const auto r = ergodic_report(p, f, horizon, dt, replicas, seed, ctx.threads());
    if (format == "json") {
        json j = io::ergodic_report_json(r);
        j["params"] = io::params_json(p);
        emit_json(ctx, j);
    } else {
        emit(ctx, false, [&](std::ostream& o) { io::write_ergodic_report_csv(o, r); });
    }
    ctx.summary = "time average of " + f.label() + " = " + num(r.estimate) +
                  (r.exploratory ? " (exploratory)" : " vs target " + num(r.target) + (r.pass ? " pass" : " FAIL"));
}

void cmd_mixing(Context& ctx) {
    const auto p = ctx.params();
    const auto seed = ctx.s.count("seed");
    const PolySpec g = poly(ctx, 1, 0);
    const PathGrid times(ctx.s.real("t_end", 5.0), ctx.s.count("n_steps", 20));
    const auto n_paths = ctx.s.count("n_paths", 1000);
    const State start(ctx.s.real("y0", 5.0), ctx.s.real("x0", 0.0));
    const auto substeps = ctx.s.count("substeps", 10);
    const std::string format = ctx.format({"json", "csv"});
    const auto c = mixing_decay(p, g, times, n_paths, start, seed, substeps, ctx.threads());
    if (format == "json") {
        json j = io::mixing_curve_json(c);
        j["params"] = io::params_json(p);
        emit_json(ctx, j);
    } else {
        emit(ctx, false, [&](std::ostream& o) { io::write_mixing_curve_csv(o, c); });
    }
    ctx.summary = "fitted decay rate of " + g.label() + " = " + num(c.fitted_rate);
}

void cmd_drift_check(Context& ctx) {
    const auto p = ctx.params();
    const double c1 = ctx.s.real("c1", 0.0);
    const double c = ctx.s.real("c", std::min(p.b(), p.theta()));
    const double y_max = ctx.s.real("y_max", 20.0);
    const double x_max = ctx.s.real("x_max", 20.0);
    const auto n = ctx.s.count("grid", 50);
    const std::string format = ctx.format({"json", "csv"});
    if (n < 2 || !(y_max > 0.0) || !(x_max > 0.0)) throw ValidationError("need grid >= 2 and positive extents");
    std::vector<State> grid;
    for (std::uint64_t i = 0; i < n; ++i)
        for (std::uint64_t j = 0; j < n; ++j)
            grid.emplace_back(y_max * i / (n - 1), -x_max + 2.0 * x_max * j / (n - 1));
    const auto r = lyapunov_drift_check(c1, c, grid, p);
    if (format == "json") {
        json j = io::drift_report_json(r);
        j["params"] = io::params_json(p);
        emit_json(ctx, j);
    } else {
        emit(ctx, false, [&](std::ostream& o) {
            o << "c1,c2,c,d,max_violation,satisfied\n"
              << num(r.c1) << ',' << num(r.c2) << ',' << num(r.c) << ',' << num(r.d) << ','
              << num(r.max_violation) << ',' << (r.satisfied() ? "true" : "false") << '\n';
        });
    }
    ctx.summary = "drift condition " + std::string(r.satisfied() ? "holds" : "VIOLATED") + ", max violation " +
                  num(r.max_violation);
    if (!r.satisfied()) ctx.status = kCheckFailed;
}

void cmd_selftest(Context& ctx) {
    AcceptanceOptions opt;
    opt.mutate = ctx.s.order("mutate", 0);
    opt.threads = ctx.threads();
    std::stringstream only(ctx.s.text("only", ""));
    for (std::string item; std::getline(only, item, ',');) {
        if (item.empty()) continue;
        const auto id = parse_count("only", item);
        if (id < 1 || id > kCriterionCount) throw ValidationError("criterion ids run from 1 to 12");
        opt.only.push_back(static_cast<int>(id));
    }
    const std::string format = ctx.format({"text", "json"});
    int failed = 0;
    json results = json::array();
    const auto report = [&](const CriterionResult& r) {
        if (!r.pass) ++failed;
        if (format == "text") {
            ctx.out << format_result(r) << std::endl;
        }
        results.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail},
                           {"seconds", r.seconds}});
    };
    const auto all = run_acceptance(opt, report);
    if (format == "json") emit_json(ctx, {{"mutate", opt.mutate}, {"criteria", results}});
    ctx.summary = std::to_string(all.size() - failed) + "/" + std::to_string(all.size()) + " criteria passed";
    if (failed) ctx.status = kCheckFailed;
}

struct Command {
    const char* name;
    const char* help;
    std::vector<std::string> keys;
    std::function<void(Context&)> body;
};

const std::vector<std::string> kCommon{"a", "b", "m", "theta", "alpha", "format", "output", "threads"};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    const std::vector<Command> commands{
        {"simulate", "Simulate (Y, X) paths",
         {"seed", "n_paths", "t_end", "n_steps", "scheme", "y0", "x0", "stationary_start"}, cmd_simulate},
        {"transform", "Fourier-Laplace transform of (Y_t, X_t)",
         {"lambda1", "lambda2", "t", "y0", "x0", "abs_tol", "rel_tol"}, cmd_transform},
        {"stationary-cf", "Fourier-Laplace transform of the stationary law",
         {"lambda1", "lambda2", "abs_tol", "rel_tol"}, cmd_stationary_cf},
        {"moments", "Stationary (or, with --t, transient) mixed moments",
         {"max_order", "t", "y0", "x0"}, cmd_moments},
        {"density", "Transition density of Y",
         {"y0", "t", "y", "y_min", "y_max", "n_points", "series_tol"}, cmd_density},
        {"ergodic", "Time averages against stationary moments",
         {"seed", "n", "p", "horizon", "dt", "replicas"}, cmd_ergodic},
        {"mixing", "Relaxation of E g(Y_t, X_t) toward stationarity",
         {"seed", "n", "p", "t_end", "n_steps", "n_paths", "y0", "x0", "substeps"}, cmd_mixing},
        {"drift-check", "Foster-Lyapunov drift inequality on a grid",
         {"c1", "c", "y_max", "x_max", "grid"}, cmd_drift_check},
        {"selftest", "Run the acceptance criteria", {"mutate", "only"}, cmd_selftest},
    };

    CLI::App app{"affine2f: two-factor affine process with alpha-stable driver"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "affine2f schema " + std::to_string(io::kSchemaVersion));
    std::string config_path;
    Settings settings;
    std::vector<std::pair<CLI::App*, const Command*>> subs;
    for (const auto& cmd : commands) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        sub->add_option("--config", config_path, "key = value configuration file");
        std::vector<std::string> keys = kCommon;
        keys.insert(keys.end(), cmd.keys.begin(), cmd.keys.end());
        for (const auto& key : keys) {
            const std::string flag = flag_name(key);
            if (key == "stationary_start") {
                settings.options[key] = sub->add_flag(flag, settings.flags[key], "Draw Y_0 from the stationary law");
            } else {
                settings.options[key] = sub->add_option(flag, settings.flags[key]);
            }
        }
        subs.emplace_back(sub, &cmd);
    }

    std::vector<std::string> args;
    for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kValidationError;
    }

    for (auto [sub, cmd] : subs) {
        if (!sub->parsed()) continue;
        // Options of other subcommands share storage keys; keep only this one's.
        std::map<std::string, CLI::Option*> own;
        for (auto* opt : sub->get_options()) {
            const std::string name = opt->get_single_name();
            std::string key = name;
            for (char& c : key)
                if (c == '-') c = '_';
            if (settings.options.contains(key)) own[key] = opt;
        }
        settings.options = own;
        Context ctx{settings, out, err, cmd->name, {}};
        try {
            if (!config_path.empty()) {
                settings.file = io::load_config(config_path);
                for (const auto& [key, value] : settings.file) {
                    if (!known_keys().contains(key)) throw ValidationError("unknown config key '" + key + "'");
                }
            }
            settings.effective["command"] = cmd->name;
            cmd->body(ctx);
        } catch (const ValidationError& e) {
            err << "affine2f " << cmd->name << ": error: " << e.what() << '\n';
            return kValidationError;
        } catch (const std::invalid_argument& e) {
            err << "affine2f " << cmd->name << ": error: " << e.what() << '\n';
            return kValidationError;
        } catch (const std::exception& e) {
            err << "affine2f " << cmd->name << ": numerical failure: " << e.what() << '\n';
            return kNumericalError;
        }
        err << "affine2f " << cmd->name << ": " << ctx.summary << " [config " << settings.hash() << "]\n";
        return ctx.status;
    }
    return kValidationError;
}

}  // namespace affine2f::cli
