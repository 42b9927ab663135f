#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "mgmc/config.hpp"

using namespace mgmc;

namespace {
const char* kSample = R"(# experiment
[model]
d = 1
gamma2 = 0.25
; inline comment line
[run]
scales = 0.25, 0.125, 0.0625
orders = 1, 2
seed = 42
name-x = dense
)";
}

TEST_CASE("parse and typed access") {
    const Config cfg = Config::parse_string(kSample, "sample.ini");
    CHECK(cfg.get_int("model", "d", 0) == 1);
    CHECK(cfg.get_double("model", "gamma2", 0.0) == doctest::Approx(0.25));
    CHECK(cfg.get_u64("run", "seed", 0) == 42);
    CHECK(cfg.get_string("run", "name-x", "") == "dense");
    CHECK(cfg.get_string("run", "missing", "fallback") == "fallback");
    const auto scales = cfg.get_double_list("run", "scales");
    REQUIRE(scales.size() == 3);
    CHECK(scales[1] == doctest::Approx(0.125));
    const auto orders = cfg.get_int_list("run", "orders");
    REQUIRE(orders.size() == 2);
    CHECK(orders[1] == 2);
}

TEST_CASE("serialize round trip is the identity") {
    const Config cfg = Config::parse_string(kSample, "sample.ini");
    const std::string text = cfg.serialize();
    const Config cfg2 = Config::parse_string(text, "round.ini");
    CHECK(cfg2.serialize() == text);
    CHECK(cfg2.hash() == cfg.hash());
}

TEST_CASE("errors carry source locations") {
    CHECK_THROWS_WITH_AS(Config::parse_string("[a]\nx = 1\nx = 2\n", "f.ini"),
                         doctest::Contains("f.ini:3"), ConfigError);
    CHECK_THROWS_WITH_AS(Config::parse_string("x = 1\n", "f.ini"),
                         doctest::Contains("outside any [section]"), ConfigError);
    CHECK_THROWS_WITH_AS(Config::parse_string("[a]\nbad line\n", "f.ini"),
                         doctest::Contains("f.ini:2"), ConfigError);
    const Config cfg = Config::parse_string("[a]\nx = zzz\n", "f.ini");
    CHECK_THROWS_WITH_AS(cfg.get_double("a", "x", 0.0),
                         doctest::Contains("f.ini:2"), ConfigError);
    CHECK_THROWS_AS(cfg.get_int("a", "x", 0), ConfigError);
}

TEST_CASE("unknown keys are rejected by the allowlist") {
    const Config cfg = Config::parse_string("[a]\nx = 1\ny = 2\n", "f.ini");
    CHECK_NOTHROW(cfg.check_allowed({"a.x", "a.y"}));
    CHECK_THROWS_WITH_AS(cfg.check_allowed({"a.x"}),
                         doctest::Contains("unknown key 'a.y'"), ConfigError);
}

TEST_CASE("set updates or appends") {
    Config cfg = Config::parse_string("[a]\nx = 1\n", "f.ini");
    cfg.set("a", "x", "9");
    CHECK(cfg.get_int("a", "x", 0) == 9);
    cfg.set("b", "y", "3");
    CHECK(cfg.get_int("b", "y", 0) == 3);
    const std::uint64_t h1 = cfg.hash();
    cfg.set("a", "x", "10");
    CHECK(cfg.hash() != h1);
}
