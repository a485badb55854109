#include "ftrepair/case_studies.hpp"
#include "ftrepair/dsl.hpp"
#include "support/testkit.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace ftrepair;
using namespace ftrepair::dsl;

namespace {

const char* kMinimal =
    "model m { var x: 0..1; invariant: x == 0; program {}; environment {}; bad {}; restricted {}; faults {}; k: 2; }";

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string error_of(const std::string& text)
{
    try {
        parse_model(text);
    } catch (const ParseError& e) {
        return e.what();
    }
    return "";
}

std::string with_invariant(const std::string& inv)
{
    return "model m { var x: 0..3; var y: bool; invariant: " + inv + "; }";
}

}  // namespace

TEST_CASE("minimal model parses")
{
    const ModelSpec spec = parse_model(kMinimal);
    CHECK(spec.name == "m");
    REQUIRE(spec.variables.size() == 1);
    CHECK(spec.variables[0].name == "x");
    CHECK(spec.variables[0].lo == 0);
    CHECK(spec.variables[0].hi == 1);
    CHECK(spec.k == 2);
    CHECK(spec.program.empty());
}

TEST_CASE("a primed read in the invariant is rejected")
{
    std::string text = kMinimal;
    text.replace(text.find("x == 0"), 6, "x' == 0");
    CHECK(error_of(text).find("primed read in predicate") != std::string::npos);
}

TEST_CASE("errors carry line and column")
{
    const std::string text = "model m {\n  var x: 0..1;\n  invariant: z == 0;\n}\n";
    try {
        parse_model(text);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.where().line == 3);
        CHECK(e.where().column == 14);
        CHECK(std::string(e.what()).rfind("3:14: ", 0) == 0);
        CHECK(std::string(e.what()).find("unknown variable 'z'") != std::string::npos);
    }
}

TEST_CASE("static errors")
{
    CHECK(error_of(with_invariant("x + y == 1")).find("type error") != std::string::npos);
    CHECK(error_of(with_invariant("x && y")).find("type error") != std::string::npos);
    CHECK(error_of(with_invariant("x == y")).find("type error") != std::string::npos);
    CHECK(error_of(with_invariant("x")).find("type error") != std::string::npos);
    CHECK(error_of(with_invariant("x < 1 < 2")).size() > 0);
    CHECK(error_of("model m { var x: 0..1; }").find("missing invariant") != std::string::npos);
    CHECK(error_of("model m { invariant: true; }").find("no variables") != std::string::npos);
    CHECK(error_of("model m { var x: 0..1; var x: bool; invariant: true; }").find("declared twice") !=
          std::string::npos);
    CHECK(error_of("model m { var x: 2..1; invariant: true; }").find("empty range") != std::string::npos);
    CHECK(error_of("model m { var x: 0..1; invariant: true; invariant: true; }").find("duplicate section") !=
          std::string::npos);
    CHECK(error_of("model m { var x: 0..1; invariant: true; k: 1; }").find("greater than 1") != std::string::npos);
    CHECK(error_of("model m { var x: 0..1; invariant: true; colours {} }").find("unknown section") !=
          std::string::npos);
    CHECK(error_of("model m { var x: 0..1; invariant: true; } extra").find("trailing input") != std::string::npos);
    CHECK(error_of("model m { var x: 0..1; invariant: x # 1; }").find("unexpected character") != std::string::npos);
}

TEST_CASE("comments and optional separators")
{
    const ModelSpec spec = parse_model(
        "// leading comment\nmodel m {\n  var b: bool; // trailing\n  invariant: b;\n  program { b' == !b }\n"
        "  environment { b' == b; }\n}\n");
    CHECK(spec.program.size() == 1);
    CHECK(spec.environment.size() == 1);
    CHECK(spec.k == 2);
}

TEST_CASE("precedence and associativity")
{
    const ModelSpec spec = parse_model("model m { var x: 0..3; var a: bool; var b: bool; var c: bool; invariant: true; }");
    auto shown = [&](const std::string& text) { return to_string(spec, *parse_predicate(spec, text)); };
    CHECK(shown("a || b && c") == "(a || (b && c))");
    CHECK(shown("a => b => c") == "(a => (b => c))");
    CHECK(shown("a xor b && c") == "(a xor (b && c))");
    CHECK(shown("a || b xor c") == "(a || (b xor c))");
    CHECK(shown("x + 1 - 2 < 3") == "(((x + 1) - 2) < 3)");
    CHECK(shown("!a && b") == "(!(a) && b)");
    CHECK(shown("-x + 1 == 0") == "((-(x) + 1) == 0)");
    CHECK(shown("a == (x > 1)") == "(a == (x > 1))");
}

TEST_CASE("elaboration of small relations")
{
    SUBCASE("boolean flip")
    {
        const Model m =
            elaborate(parse_model("model m { var x: bool; invariant: true; environment { x' == !x; } }"));
        CHECK(m.size() == 2);
        CHECK(m.delta_e == Relation(2, {{0, 1}, {1, 0}}));
        CHECK(m.space.label(1) == "x=1");
    }
    SUBCASE("frame on a range")
    {
        const Model m = elaborate(parse_model("model m { var x: 0..2; invariant: true; program { x' == x; } }"));
        CHECK(m.delta_p == Relation(3, {{0, 0}, {1, 1}, {2, 2}}));
    }
    SUBCASE("unconstrained primes match every completion")
    {
        const Model m = elaborate(
            parse_model("model m { var x: 0..1; var y: 0..1; invariant: true; program { x == 0 && x' == 1; } }"));
        // x=0 states are 0 (y=0) and 1 (y=1); x'=1 states are 2 and 3.
        CHECK(m.delta_p == Relation(4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}}));
    }
    SUBCASE("negative ranges and k")
    {
        const ModelSpec spec = parse_model("model m { var t: -2..1; invariant: t < 0; k: 4; }");
        const Model m = elaborate(spec);
        CHECK(m.k == 4);
        CHECK(m.invariant == Predicate(4, {0, 1}));
        CHECK(decode_state(spec, 3) == std::vector<long>{1});
    }
}

TEST_CASE("state numbering is row-major over declaration order")
{
    const ModelSpec spec = parse_model("model m { var a: 0..2; var b: bool; var c: 1..2; invariant: true; }");
    // Independent mixed-radix count: id = (a * 2 + b) * 2 + (c - 1).
    for (long a = 0; a <= 2; ++a)
        for (long b = 0; b <= 1; ++b)
            for (long c = 1; c <= 2; ++c) {
                const auto id = static_cast<StateId>((a * 2 + b) * 2 + (c - 1));
                CHECK(decode_state(spec, id) == std::vector<long>{a, b, c});
            }
}

TEST_CASE("the shipped smart-grid file matches the generator")
{
    const ModelSpec spec = parse_model(slurp(FTREPAIR_MODELS_DIR "/smartgrid_db.model"));
    REQUIRE(spec.variables.size() == 5);
    CHECK(spec.variables[0].name == "V1");
    CHECK(spec.variables[1].name == "V2");
    CHECK(spec.variables[2].name == "VG");
    CHECK(spec.variables[3].boolean);
    CHECK(spec.variables[4].boolean);

    const Model parsed = elaborate(spec);
    CHECK(parsed.size() == 4u * 4u * 4u * 2u * 2u);
    const Model built = smart_grid_model(3, GridVariant::Db);
    CHECK(parsed.invariant == built.invariant);
    CHECK(parsed.delta_e == built.delta_e);
    CHECK(parsed.delta_b == built.delta_b);
    CHECK(parsed.delta_r == built.delta_r);
    CHECK(parsed.delta_p == built.delta_p);
    CHECK(parsed.space.labels == built.space.labels);
}

TEST_CASE("smart-grid source for db2 at k = 3 matches the generator")
{
    const Model parsed = elaborate(parse_model(smart_grid_source(1, GridVariant::Db2, 3)));
    const Model built = smart_grid_model(1, GridVariant::Db2, 3);
    CHECK(parsed.k == 3);
    CHECK(parsed.delta_b == built.delta_b);
    CHECK(parsed.delta_e == built.delta_e);
}

TEST_CASE("state cap")
{
    const ModelSpec spec = parse_model("model m { var a: 0..9; var b: 0..9; invariant: true; }");
    CHECK_THROWS_AS(elaborate(spec, 99), CapExceeded);
    CHECK(elaborate(spec, 100).size() == 100);

    ::setenv("FTREPAIR_STATE_CAP", "50", 1);
    CHECK(state_cap_from_env() == 50);
    CHECK_THROWS_AS(elaborate(spec), CapExceeded);
    ::setenv("FTREPAIR_STATE_CAP", "junk", 1);
    CHECK(state_cap_from_env() == kDefaultStateCap);
    ::unsetenv("FTREPAIR_STATE_CAP");
}

namespace {

// Random well-typed expression text over x: 0..3, y: bool, z: bool.
std::string random_int(testkit::Rng& rng, int depth, bool primes);
std::string random_bool(testkit::Rng& rng, int depth, bool primes)
{
    const char* vars[] = {"y", "z"};
    const int pick = rng.between(0, depth > 0 ? 6 : 1);
    const std::string prime = primes && rng.chance(0.5) ? "'" : "";
    switch (pick) {
    case 0: return rng.chance(0.5) ? "true" : "false";
    case 1: return std::string(vars[rng.between(0, 1)]) + prime;
    case 2: return "!" + random_bool(rng, depth - 1, primes);
    case 3: {
        const char* ops[] = {"&&", "||", "=>", "xor", "==", "!="};
        return "(" + random_bool(rng, depth - 1, primes) + " " + ops[rng.between(0, 5)] + " " +
               random_bool(rng, depth - 1, primes) + ")";
    }
    default: {
        const char* ops[] = {"==", "!=", "<", "<=", ">", ">="};
        return "(" + random_int(rng, depth - 1, primes) + " " + ops[rng.between(0, 5)] + " " +
               random_int(rng, depth - 1, primes) + ")";
    }
    }
}

std::string random_int(testkit::Rng& rng, int depth, bool primes)
{
    const int pick = rng.between(0, depth > 0 ? 4 : 1);
    switch (pick) {
    case 0: return std::to_string(rng.between(0, 5));
    case 1: return std::string("x") + (primes && rng.chance(0.5) ? "'" : "");
    case 2: return "-" + random_int(rng, depth - 1, primes);
    default:
        return "(" + random_int(rng, depth - 1, primes) + (rng.chance(0.5) ? " + " : " - ") +
               random_int(rng, depth - 1, primes) + ")";
    }
}

}  // namespace

TEST_CASE("property: pretty_print then parse_model is the identity on ASTs")
{
    testkit::Rng rng(7);
    for (int round = 0; round < 200; ++round) {
        std::string text = "model r" + std::to_string(round) + " {\n  var x: 0..3;\n  var y: bool;\n  var z: bool;\n";
        text += "  invariant: " + random_bool(rng, 3, false) + ";\n";
        const char* blocks[] = {"program", "environment", "bad", "restricted", "faults"};
        for (const char* b : blocks) {
            text += std::string("  ") + b + " {";
            for (int i = rng.between(0, 2); i > 0; --i)
                text += " " + random_bool(rng, 3, true) + ";";
            text += " }\n";
        }
        text += "  k: " + std::to_string(rng.between(2, 5)) + ";\n}\n";

        const ModelSpec spec = parse_model(text);
        const std::string printed = pretty_print(spec);
        const ModelSpec again = parse_model(printed);
        CHECK(again == spec);
        CHECK(pretty_print(again) == printed);
    }
}

TEST_CASE("property: elaboration is deterministic")
{
    const ModelSpec spec = parse_model(pressure_cooker_source());
    const Model a = elaborate(spec);
    const Model b = elaborate(spec);
    CHECK(a.delta_p == b.delta_p);
    CHECK(a.delta_e == b.delta_e);
    CHECK(a.faults == b.faults);
    CHECK(a.invariant == b.invariant);
    CHECK(a.space.labels == b.space.labels);
}

TEST_CASE("shipped model files all parse and round-trip")
{
    for (const char* file : {"smartgrid_db", "smartgrid_db2", "smartgrid_db2_k3", "pressure_cooker",
                             "pressure_cooker_no_valve"}) {
        CAPTURE(file);
        const ModelSpec spec = parse_model(slurp(std::string(FTREPAIR_MODELS_DIR "/") + file + ".model"));
        CHECK(parse_model(pretty_print(spec)) == spec);
    }
}
