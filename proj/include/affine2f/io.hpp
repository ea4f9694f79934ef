#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include <json.hpp>

#include "affine2f/ergodicity.hpp"
#include "affine2f/generator.hpp"
#include "affine2f/sampler.hpp"
#include "affine2f/stationary.hpp"

namespace affine2f::io {

inline constexpr int kSchemaVersion = 1;

/// Shortest-exact decimal form: 17 significant digits.
std::string format_double(double v);

/// CSV with header `t,path_0_y,path_0_x,path_1_y,...`, one row per grid time.
void write_ensemble_csv(std::ostream& out, const PathEnsemble& ens);

/// Little-endian binary dump:
///   8 bytes magic "A2FPATH1", u32 schema version, u8 scheme (0 exact, 1 euler),
///   3 bytes zero padding, u64 master seed, u64 n_paths, u64 n_steps, f64 t_end,
///   f64 a, b, m, theta, alpha, then n_paths*(n_steps+1) f64 Y values (path-major),
///   then the same count of X values.
void write_ensemble_binary(std::ostream& out, const PathEnsemble& ens);
PathEnsemble read_ensemble_binary(std::istream& in);

nlohmann::json params_json(const ModelParams& p);
nlohmann::json moment_table_json(const MomentTable& table, const ModelParams& p);
nlohmann::json ergodic_report_json(const ErgodicReport& r);
nlohmann::json mixing_curve_json(const MixingCurve& c);
nlohmann::json drift_report_json(const DriftReport& r);

void write_ergodic_report_csv(std::ostream& out, const ErgodicReport& r);
void write_mixing_curve_csv(std::ostream& out, const MixingCurve& c);

/// Flat `key = value` configuration; blank lines and `#` comments ignored.
using ConfigMap = std::map<std::string, std::string>;
ConfigMap parse_config(std::istream& in);
ConfigMap load_config(const std::string& path);

/// FNV-1a 64 over the canonical `key=value\n` lines (map order), as 16 hex digits.
std::string config_hash(const ConfigMap& cfg);

}  // namespace affine2f::io
