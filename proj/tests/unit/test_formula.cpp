#include <string>
#include <vector>

#include "doctest.h"
#include "sheetlens/formula.hpp"

using namespace sheetlens;

namespace {

const char* kCrossCast =
    "=IF(ROUND(SUM(D12:D12),0)<>ROUND(P12,0),\"Cross Cast Error\",\"\")";

std::string r1c1_of(const std::string& text, const std::string& at) {
    Address a = parse_address(at, false);
    auto ast = parse_formula(text);
    return normalize_formula(*ast, a.coord).r1c1;
}

} // namespace

TEST_CASE("parse and render round-trip structurally") {
    const char* cases[] = {
        "=1+2*3",
        "=(1+2)*3",
        "=1-(2-3)",
        "=-3^2",
        "=2^3^2",
        "=A1&\" units\"",
        "=\"a\"\"b\"",
        "=SUM(A1:B2,3)",
        "=IF(A1>0,\"y\",\"n\")",
        "='My Sheet'!B2+1",
        "=[Plan.xls]North!A1",
        "='[Plan 2.xls]North'!A1:B2",
        "=-A1%",
        "=A1<>B1",
        "=A1<=B1",
        "=TRUE",
        "=#REF!+1",
        "=MyRate*2",
        "=$D12*PhasingTable!$C12",
        kCrossCast,
    };
    for (const char* text : cases) {
        CAPTURE(text);
        auto ast = parse_formula(text);
        std::string rendered = render_formula(*ast);
        auto again = parse_formula(rendered);
        CHECK(ast_equal(*ast, *again));
        CHECK(render_formula(*again) == rendered);
    }
}

TEST_CASE("rendering keeps only the parentheses a reparse needs") {
    CHECK(render_formula(*parse_formula("=(1+2)*3")) == "=(1+2)*3");
    CHECK(render_formula(*parse_formula("=1+(2*3)")) == "=1+2*3");
    CHECK(render_formula(*parse_formula("=1-(2-3)")) == "=1-(2-3)");
    CHECK(render_formula(*parse_formula("=(1-2)-3")) == "=1-2-3");
}

TEST_CASE("parse errors carry a position") {
    struct Case {
        const char* text;
        const char* what;
    };
    const Case cases[] = {
        {"", "formula"},
        {"A1+1", "formula"},
        {"=SUM(", ""},
        {"=1+", ""},
        {"=IF(A1,,2)", "empty argument"},
        {"=)", ""},
        {"=\"open", ""},
    };
    for (const Case& c : cases) {
        CAPTURE(c.text);
        bool threw = false;
        try {
            parse_formula(c.text);
        } catch (const ParseError& e) {
            threw = true;
            CHECK(e.position() <= std::string(c.text).size());
            if (*c.what)
                CHECK(std::string(e.what()).find(c.what) != std::string::npos);
        }
        CHECK(threw);
    }
}

TEST_CASE("ast_clone produces an equal deep copy") {
    auto ast = parse_formula(kCrossCast);
    auto copy = ast_clone(*ast);
    CHECK(copy.get() != ast.get());
    CHECK(ast_equal(*ast, *copy));
    CHECK_FALSE(ast_equal(*ast, *parse_formula("=1")));
}

TEST_CASE("normalization rewrites relative references against the origin") {
    CHECK(r1c1_of("=Q5+1", "R5") == "=RC[-1]+1");
    CHECK(r1c1_of("=SUM(D8:O8)", "P8") == "=SUM(RC[-12]:RC[-1])");
    CHECK(r1c1_of("=$B$2", "C3") == "=R2C2");
    CHECK(r1c1_of("=$D12*PhasingTable!$C12", "Q12") == "=RC4*PhasingTable!RC3");
    CHECK(r1c1_of("=A1", "A1") == "=RC");
    CHECK(r1c1_of("=B$1", "A2") == "=R1C[1]");
}

TEST_CASE("one pattern filled across a block normalizes identically") {
    CHECK(r1c1_of("=Q5+1", "R5") == r1c1_of("=R5+1", "S5"));
    CHECK(r1c1_of("=SUM(D8:O8)", "P8") == r1c1_of("=SUM(D9:O9)", "P9"));
    CHECK(r1c1_of("=A1*$C$1", "B1") != r1c1_of("=A2*$C$2", "B2"));
}

TEST_CASE("metrics count functions, operators, and nesting") {
    auto ast = parse_formula(kCrossCast);
    FormulaMetrics m = formula_metrics(*ast, kCrossCast);
    CHECK(m.func_count == 4);
    CHECK(m.operator_count == 1);
    CHECK(m.max_nesting_depth == 3);
    CHECK(m.complexity == 8);
    CHECK(m.max_if_depth == 1);
    CHECK(m.ref_count == 2);
    CHECK(m.length == static_cast<int>(std::string(kCrossCast).size()) - 1);
    CHECK(m.numeric_literals == std::vector<double>{0.0, 0.0});
    CHECK(m.function_names == std::vector<std::string>{"IF", "ROUND", "SUM"});
    CHECK_FALSE(m.has_external_ref);
}

TEST_CASE("metrics track IF chains, names, and external references") {
    auto ast = parse_formula("=IF(IF(A1,1,2),IF(B1,3,4),5)");
    FormulaMetrics m = formula_metrics(*ast, "");
    CHECK(m.max_if_depth == 2);
    CHECK(m.max_nesting_depth == 2);
    CHECK(m.length == 0);

    ast = parse_formula("=[Plan.xls]North!A1+MyRate");
    m = formula_metrics(*ast, "=[Plan.xls]North!A1+MyRate");
    CHECK(m.has_external_ref);
    CHECK(m.ref_count == 2);
    CHECK(m.func_count == 0);
    CHECK(m.operator_count == 1);
    CHECK(m.max_nesting_depth == 0);
}

TEST_CASE("unary operators count and bind tighter than power") {
    auto ast = parse_formula("=-3^2");
    FormulaMetrics m = formula_metrics(*ast, "");
    CHECK(m.operator_count == 2);
    CHECK(m.numeric_literals == std::vector<double>{3.0, 2.0});
}
