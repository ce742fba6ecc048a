#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "vexp/config.hpp"
#include "vexp/csv.hpp"

using namespace vexp;

TEST_CASE("config text parses keys, comments and blank lines") {
    std::istringstream in(
        "# experiment\n"
        "instance = pure-power\n"
        "\n"
        "grid.n = 101   # inline comment\n"
        "decay.radii = 5, 10 ,15\n");
    const auto kv = parse_config_text(in);
    REQUIRE(kv.size() == 3);
    CHECK(kv.at("instance") == "pure-power");
    CHECK(kv.at("grid.n") == "101");
    const RunConfig c = apply_config(kv);
    CHECK(c.instance == "pure-power");
    CHECK(c.grid_n == 101);
    REQUIRE(c.decay_radii.size() == 3);
    CHECK(c.decay_radii[1] == 10.0);
    CHECK(c.grid_radius == 15.0); // untouched keys keep their defaults
}

TEST_CASE("malformed config lines report their line number") {
    std::istringstream in("instance = x\nnot a pair\n");
    try {
        parse_config_text(in);
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("duplicate keys are rejected by name") {
    std::istringstream in("grid.n = 5\ngrid.n = 7\n");
    try {
        parse_config_text(in);
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("grid.n") != std::string::npos);
    }
}

TEST_CASE("unknown keys are rejected by name") {
    try {
        apply_config({{"grid.m", "5"}});
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("grid.m") != std::string::npos);
    }
}

TEST_CASE("typed values are checked") {
    CHECK_THROWS_AS(apply_config({{"grid.n", "many"}}), ConfigError);
    CHECK_THROWS_AS(apply_config({{"grid.radius", "1.5x"}}), ConfigError);
    CHECK_THROWS_AS(apply_config({{"decay.radii", ""}}), ConfigError);
}

TEST_CASE("validation rejects out-of-range settings") {
    CHECK_THROWS_AS(apply_config({{"grid.dim", "3"}}), ConfigError);
    CHECK_THROWS_AS(apply_config({{"grid.n", "2"}}), ConfigError);
    CHECK_THROWS_AS(apply_config({{"grid.radius", "-1"}}), ConfigError);
    CHECK_THROWS_AS(apply_config({{"solver.tol", "0"}}), ConfigError);
    CHECK_THROWS_AS(apply_config({{"solver.variant", "sideways"}}), ConfigError);
    CHECK_THROWS_AS(apply_config({{"solver.path_points", "2"}}), ConfigError);
    CHECK_THROWS_AS(apply_config({{"multiplicity.k_grid", "0"}}), ConfigError);
    CHECK_THROWS_AS(apply_config({{"multiplicity.rho_grid", "1,-2"}}), ConfigError);
    CHECK_NOTHROW(apply_config({}));
}

TEST_CASE("manifest items cover every key and round-trip") {
    RunConfig c;
    c.grid_n = 77;
    c.solver_variant = "minus";
    c.multiplicity_k_grid = {2, 3};
    const auto items = c.items();
    std::map<std::string, std::string> kv(items.begin(), items.end());
    REQUIRE(kv.size() == items.size());
    const RunConfig back = apply_config(kv);
    CHECK(back.grid_n == 77);
    CHECK(back.solver_variant == "minus");
    CHECK(back.multiplicity_k_grid == std::vector<std::size_t>{2, 3});
    CHECK(back.items() == items);
}

TEST_CASE("missing config files raise a config error") {
    CHECK_THROWS_AS(load_config("/no/such/file.cfg"), ConfigError);
}

TEST_CASE("doubles render with 17 significant digits and round-trip") {
    CHECK(csv_double(0.0) == "0");
    CHECK(csv_double(1.5) == "1.5");
    for (double v : {1.0 / 3.0, 1e-300, -2.718281828459045, 1.4143611765855268}) {
        const std::string s = csv_double(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("csv files use LF endings and RFC quoting") {
    const std::string path = "test_csv_out.csv";
    {
        CsvWriter w(path, {"a", "b"});
        w.write_row({"1", "plain"});
        w.write_row({"2", "needs,\"quotes\""});
    }
    std::ifstream in(path, std::ios::binary);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(data == "a,b\n1,plain\n2,\"needs,\"\"quotes\"\"\"\n");
    CHECK(data.find('\r') == std::string::npos);
    std::remove(path.c_str());
}
