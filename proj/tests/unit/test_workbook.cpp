#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"
#include "sheetlens/workbook.hpp"

using namespace sheetlens;
using tst::one_sheet;

TEST_CASE("cell values infer their kind from the JSON shape") {
    auto loaded = load_workbook_json(one_sheet(
        R"("A1":{"v":1.5},"A2":{"v":"hi"},"A3":{"v":true},"A4":{"v":null},)"
        R"("A5":{"f":"=A1+1"},"A6":{"v":"#REF!","t":"e"})"), "t");
    CHECK(loaded.warnings.empty());
    const Sheet& s = loaded.workbook.sheets.at(0);
    CHECK(s.find_cell({1, 1})->literal == Value(1.5));
    CHECK(s.find_cell({1, 2})->literal == Value("hi"));
    CHECK(s.find_cell({1, 3})->literal == Value(true));
    CHECK(s.find_cell({1, 4})->literal.is_blank());
    CHECK(s.find_cell({1, 5})->formula == "=A1+1");
    CHECK(s.find_cell({1, 6})->literal == Value(ErrorCode::Ref));
}

TEST_CASE("type hints coerce and mismatches warn") {
    auto loaded = load_workbook_json(one_sheet(
        R"("A1":{"v":"2.5","t":"n"},"A2":{"v":"x","t":"n"},"A3":{"v":1,"t":"b"},)"
        R"("A4":{"v":"#NOPE!","t":"e"})"), "t");
    const Sheet& s = loaded.workbook.sheets.at(0);
    CHECK(s.find_cell({1, 1})->literal == Value(2.5));
    CHECK(s.find_cell({1, 2})->literal.is_blank());
    CHECK(s.find_cell({1, 3})->literal == Value(true));
    CHECK(s.find_cell({1, 4})->literal == Value(ErrorCode::Value));
    REQUIRE(loaded.warnings.size() == 2);
    CHECK(loaded.warnings[0].find("does not match type 'n'") != std::string::npos);
    CHECK(loaded.warnings[1].find("unknown error literal") != std::string::npos);
}

TEST_CASE("structural problems raise format errors") {
    CHECK_THROWS_AS(load_workbook_json("[]", "t"), LoadError);
    CHECK_THROWS_AS(load_workbook_json("{not json", "t"), LoadError);
    CHECK_THROWS_AS(load_workbook_json(
        R"({"name":"T","sheets":[{"name":"S","cells":{}},{"name":"S","cells":{}}]})", "t"),
        LoadError);
    CHECK_THROWS_AS(load_workbook_json(
        one_sheet(R"("A1":{"v":1},"a1":{"v":2})"), "t"), LoadError);
    CHECK_THROWS_AS(load_workbook_json(
        one_sheet(R"("NOPE":{"v":1})"), "t"), LoadError);
    try {
        load_workbook_json("[]", "t");
    } catch (const LoadError& e) {
        CHECK(e.kind() == LoadError::Kind::Format);
    }
}

TEST_CASE("missing files are distinguished from bad content") {
    bool threw = false;
    try {
        load_workbook("/nonexistent/nowhere.json");
    } catch (const LoadError& e) {
        threw = true;
        CHECK(e.kind() == LoadError::Kind::FileMissing);
    }
    CHECK(threw);
}

TEST_CASE("unknown keys are skipped with warnings") {
    auto loaded = load_workbook_json(
        R"({"name":"T","mystery":1,"sheets":[{"name":"S","odd":2,"cells":{)"
        R"("A1":{"v":1,"zap":3}}}]})", "t");
    CHECK(loaded.warnings.size() == 3);
    CHECK(loaded.workbook.sheets.at(0).find_cell({1, 1})->literal == Value(1.0));
}

TEST_CASE("sheet details load: visibility, hidden rows and columns, extras") {
    auto loaded = load_workbook_json(one_sheet(
        R"x("B2":{"f":"=SUM(A1:A2)","af":"B2:B3"})x",
        R"(,"visibility":"very_hidden","hidden_rows":[3,7],"hidden_cols":["Q","B"],)"
        R"("conditional_formats":[{"range":"E4:E9","rule":"=D4>1"}],"pivot_tables":2,)"
        R"("used_range":"A1:E9")",
        R"(,"saved_at":"1970-01-02T00:00:00Z","vba":{"components":2,"total_lines":40},)"
        R"("defined_names":{"Rate":"S!$C$3"},"external_links":["Plan.xls"],)"
        R"("properties":{"author":"pat"},"protection":{"structure_locked":true})"), "t");
    CHECK(loaded.warnings.empty());
    const Workbook& wb = loaded.workbook;
    const Sheet& s = wb.sheets.at(0);
    CHECK(s.visibility == SheetVisibility::VeryHidden);
    CHECK(s.hidden_rows == std::vector<int>{3, 7});
    CHECK(s.hidden_cols == std::vector<int>{2, 17});
    CHECK(s.conditional_formats.size() == 1);
    CHECK(s.pivot_tables == 2);
    CHECK(s.used_range == parse_range("A1:E9"));
    CHECK(s.find_cell({2, 2})->array_range == parse_range("B2:B3"));
    CHECK(wb.saved_at == 86400);
    CHECK(wb.vba.total_lines == 40);
    CHECK(wb.defined_names.at("Rate") == "S!$C$3");
    CHECK(wb.external_links == std::vector<std::string>{"Plan.xls"});
    CHECK(wb.properties.at("author") == "pat");
    CHECK(wb.protection.structure_locked);
    CHECK(wb.sheet_index("S") == 0);
    CHECK(wb.sheet_index("Nope") == -1);
}

TEST_CASE("rfc3339 timestamps parse and render") {
    CHECK(parse_rfc3339("1970-01-01T00:00:00Z") == 0);
    CHECK(parse_rfc3339("1970-01-02T00:00:00Z") == 86400);
    auto t = parse_rfc3339("2006-02-25T20:38:41Z");
    REQUIRE(t.has_value());
    CHECK(render_rfc3339(*t) == "2006-02-25T20:38:41Z");
    CHECK_FALSE(parse_rfc3339("2006-02-25").has_value());
    CHECK_FALSE(parse_rfc3339("not a date").has_value());
}

TEST_CASE("used_range_stats trims to the populated bounding box") {
    auto wb = tst::wb_from_json(one_sheet(
        R"("B2":{"v":1},"C3":{"v":"x"},"D9":{"v":null},"E2":{"f":"=B2"})",
        R"(,"used_range":"A1:J10")"));
    UsedRangeStats st = used_range_stats(wb.sheets.at(0));
    CHECK(st.declared_cells == 100);
    CHECK(st.populated_cells == 3);
    CHECK(st.trimmed_range == parse_range("B2:E3"));
    CHECK(st.blank_ratio == doctest::Approx(0.97));
}

TEST_CASE("used_range_stats without a declared range is empty") {
    auto wb = tst::wb_from_json(one_sheet(R"("B2":{"v":1})"));
    UsedRangeStats st = used_range_stats(wb.sheets.at(0));
    CHECK(st.declared_cells == 0);
    CHECK(st.blank_ratio == 0.0);
}

TEST_CASE("scale advice switches at the documented limits") {
    CHECK(scale_advice(50, 100000) == ScaleAdvice::Normal);
    CHECK(scale_advice(51, 0) == ScaleAdvice::ReviewDesign);
    CHECK(scale_advice(0, 100001) == ScaleAdvice::ReviewDesign);
    CHECK(scale_advice(201, 0) == ScaleAdvice::ConsiderMigration);
    CHECK(scale_advice(0, 500001) == ScaleAdvice::ConsiderMigration);
    CHECK(scale_advice(8, 2176) == ScaleAdvice::Normal);
    CHECK(scale_advice(210, 950000) == ScaleAdvice::ConsiderMigration);
}
