#include <doctest.h>

#include <sstream>
#include <string>

#include "affine2f/errors.hpp"
#include "affine2f/io.hpp"

using namespace affine2f;

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345.678}) CHECK(std::stod(io::format_double(v)) == v);
}

TEST_CASE("ensemble CSV layout") {
    const auto p = validate_params(1, 1, 0, 1, 2);
    const auto ens = simulate_joint(5, State(1, 0.5), PathGrid(1.0, 2), 2, Scheme::exact, p);
    std::ostringstream out;
    io::write_ensemble_csv(out, ens);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,path_0_y,path_0_x,path_1_y,path_1_x");
    std::getline(in, line);
    CHECK(line == "0,1,0.5,1,0.5");
    int rows = 1;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3);
}

TEST_CASE("binary ensemble round-trip") {
    const auto p = validate_params(1.5, 0.7, -0.2, 1.3, 1.6);
    const auto ens = simulate_joint(17, State(0.8, 0.1), PathGrid(2.0, 7), 3, Scheme::euler, p);
    std::stringstream buf;
    io::write_ensemble_binary(buf, ens);
    CHECK(buf.str().size() == 8 + 4 + 1 + 3 + 3 * 8 + 8 + 5 * 8 + 2 * 3 * 8 * 8);
    CHECK(buf.str().substr(0, 8) == "A2FPATH1");
    const auto back = io::read_ensemble_binary(buf);
    CHECK(back.y == ens.y);
    CHECK(back.x == ens.x);
    CHECK(back.params == ens.params);
    CHECK(back.scheme == ens.scheme);
    CHECK(back.master_seed == 17);
    CHECK(back.grid.n_steps() == 7);
    CHECK(back.grid.t_end() == 2.0);

    std::stringstream bad("NOTMAGIC........");
    CHECK_THROWS_AS(io::read_ensemble_binary(bad), ValidationError);
}

TEST_CASE("JSON carries the schema version and exact parameters") {
    const auto p = validate_params(1, 2, 0.3, 1, 2);
    const auto j = io::moment_table_json(stationary_moment_table(2, p), p);
    CHECK(j["schema_version"] == io::kSchemaVersion);
    CHECK(j["params"]["m"].get<double>() == 0.3);
    CHECK(j.dump().find("0.29999") == std::string::npos);
}

TEST_CASE("config parsing") {
    std::istringstream in("# comment\n a = 1.5\n\nseed=42  # trailing\nscheme = euler\n");
    const auto cfg = io::parse_config(in);
    CHECK(cfg.size() == 3);
    CHECK(cfg.at("a") == "1.5");
    CHECK(cfg.at("seed") == "42");
    CHECK(cfg.at("scheme") == "euler");

    std::istringstream dup("a = 1\na = 2\n");
    CHECK_THROWS_AS(io::parse_config(dup), ValidationError);
    std::istringstream junk("just words\n");
    CHECK_THROWS_AS(io::parse_config(junk), ValidationError);
    CHECK_THROWS_AS(io::load_config("/nonexistent/affine2f.cfg"), ValidationError);
}

TEST_CASE("config hash is stable and order-insensitive") {
    std::istringstream a("x = 1\ny = 2\n"), b("y = 2\nx = 1\n"), c("x = 1\ny = 3\n");
    const auto ha = io::config_hash(io::parse_config(a));
    CHECK(ha.size() == 16);
    CHECK(ha == io::config_hash(io::parse_config(b)));
    CHECK(ha != io::config_hash(io::parse_config(c)));
    // FNV-1a 64 of the empty input is the offset basis.
    CHECK(io::config_hash({}) == "cbf29ce484222325");
}
