#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "sheetlens/report.hpp"

using namespace sheetlens;
using tst::Analyzed;
using tst::one_sheet;

TEST_CASE("sheet maps code every populated kind of cell") {
    Analyzed a(one_sheet(
        R"("A1":{"v":1},"B1":{"v":"12"},"C1":{"v":"label"},"D1":{"v":"#N/A","t":"e"},)"
        R"x("A2":{"f":"=A1+1"},"B2":{"f":"=SUM(A1:A2)","af":"B2:B3"},"C2":{"f":"=1/0"})x"));
    SheetMap m = sheet_map(a.wb, 0, &*a.result.eval);
    REQUIRE(m.bounds == parse_range("A1:D2"));
    REQUIRE(m.rows.size() == 2);
    CHECK(m.rows[0] == "NTLE");
    CHECK(m.rows[1] == "FAEB");

    SheetMap raw = sheet_map(a.wb, 0, nullptr);
    CHECK(raw.rows[1] == "FAFB");
}

TEST_CASE("an empty sheet maps to no bounds") {
    Analyzed a(R"({"name":"T","sheets":[{"name":"S","cells":{}}]})");
    SheetMap m = sheet_map(a.wb, 0, nullptr);
    CHECK_FALSE(m.bounds.has_value());
    CHECK(m.rows.empty());
}

TEST_CASE("a constant interrupting a formula run is reported") {
    Analyzed a(one_sheet(
        R"("A1":{"f":"=1"},"B1":{"f":"=2"},"C1":{"v":5},"D1":{"f":"=3"},"E1":{"f":"=4"})"));
    SheetMap m = sheet_map(a.wb, 0, nullptr);
    Config cfg;
    auto findings = layout_findings(m, cfg);
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].kind == "constant_interruption");
    CHECK(findings[0].cell == CellCoord{3, 1});
    CHECK(findings[0].detail == "breaks a horizontal run of 4 formulas");

    cfg.interruption_run_min = 5;
    CHECK(layout_findings(m, cfg).empty());
}

TEST_CASE("vertical interruptions are reported after horizontal ones") {
    Analyzed a(one_sheet(
        R"("A1":{"f":"=1"},"A2":{"v":9},"A3":{"f":"=2"},"A4":{"f":"=3"})"));
    Config cfg;
    auto findings = layout_findings(sheet_map(a.wb, 0, nullptr), cfg);
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].cell == CellCoord{1, 2});
    CHECK(findings[0].detail == "breaks a vertical run of 3 formulas");
}

TEST_CASE("jumble is the share of cells differing from their neighbours") {
    // 3x3 checkerboard of formulas and constants.
    Analyzed board(one_sheet(
        R"("A1":{"f":"=1"},"B1":{"v":1},"C1":{"f":"=1"},)"
        R"("A2":{"v":1},"B2":{"f":"=1"},"C2":{"v":1},)"
        R"("A3":{"f":"=1"},"B3":{"v":1},"C3":{"f":"=1"})"));
    Config cfg;
    CHECK(jumble_fraction(sheet_map(board.wb, 0, nullptr), cfg) == 1.0);

    Analyzed uniform(one_sheet(
        R"("A1":{"v":1},"B1":{"v":2},"A2":{"v":3},"B2":{"v":4})"));
    CHECK(jumble_fraction(sheet_map(uniform.wb, 0, nullptr), cfg) == 0.0);

    Analyzed empty(R"({"name":"T","sheets":[{"name":"S","cells":{}}]})");
    CHECK(jumble_fraction(sheet_map(empty.wb, 0, nullptr), cfg) == 0.0);
}

TEST_CASE("markdown anchors are lowercase slugs") {
    CHECK(sheet_anchor("North") == "sheet-north");
    CHECK(sheet_anchor("My  Sheet") == "sheet-my-sheet");
    CHECK(sheet_anchor("2024 Q1!") == "sheet-2024-q1");
    CHECK(sheet_anchor("--x") == "sheet-x");
}

TEST_CASE("format names parse case-sensitively") {
    CHECK(parse_format("text") == RenderFormat::Text);
    CHECK(parse_format("json") == RenderFormat::Json);
    CHECK(parse_format("md") == RenderFormat::Markdown);
    CHECK_FALSE(parse_format("xml").has_value());
    CHECK_FALSE(parse_format("JSON").has_value());
}

TEST_CASE("review sidecars merge onto the index") {
    Analyzed a(one_sheet(R"("A1":{"v":"Plan inputs"},"C1":{"v":"Alt title"},"B2":{"f":"=A1"})"));
    SheetIndex index = sheet_index(a.wb, a.result, a.config);
    REQUIRE(index.entries.size() == 1);
    CHECK(index.entries[0].description == "Plan inputs");
    CHECK(index.entries[0].review_status == ReviewStatus::Unreviewed);
    CHECK(index.entries[0].formula_count == 1);
    CHECK(index.entries[0].unique_count == 1);

    apply_review_json(index, a.wb, R"({
        "sheets": {
            "S": {"status": "reviewed", "groups": ["inputs"], "notes": "ok",
                  "description_cell": "C1"},
            "Ghost": {"status": "question"}
        }
    })", "review");
    CHECK(index.entries[0].review_status == ReviewStatus::Reviewed);
    CHECK(index.entries[0].groups == std::vector<std::string>{"inputs"});
    CHECK(index.entries[0].notes == "ok");
    CHECK(index.entries[0].description == "Alt title");
    CHECK(index.orphans == std::vector<std::string>{"Ghost"});

    apply_review_json(index, a.wb, R"({"sheets": {"S": {"status": "unheard_of"}}})",
                      "review");
    CHECK_FALSE(index.warnings.empty());
}

TEST_CASE("descriptions come only from a text cell") {
    Analyzed numeric(one_sheet(R"("A1":{"v":42})"));
    SheetIndex index = sheet_index(numeric.wb, numeric.result, numeric.config);
    CHECK(index.entries[0].description == "");
    CHECK(index.entries[0].description_source.coord == CellCoord{1, 1});

    Config cfg;
    cfg.description_cell = "not a cell";
    Analyzed bad(one_sheet(R"("A1":{"v":"x"})"), true, cfg);
    SheetIndex broken = sheet_index(bad.wb, bad.result, bad.config);
    CHECK(broken.entries[0].description == "");
    REQUIRE_FALSE(broken.warnings.empty());
    CHECK(broken.warnings[0].find("bad description cell") != std::string::npos);
}

TEST_CASE("a review file next to the workbook is picked up by path") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "sheetlens_review_test";
    fs::create_directories(dir);
    fs::path wb_path = dir / "plan.json";
    std::ofstream(wb_path) << one_sheet(R"("A1":{"v":"Inputs"})");
    std::ofstream(dir / "plan.json.review.json")
        << R"({"sheets": {"S": {"status": "in_progress"}}})";

    auto loaded = load_workbook(wb_path);
    Config cfg;
    AnalysisResult result = analyze_workbook(loaded.workbook, cfg);
    SheetIndex index = sheet_index(loaded.workbook, result, cfg);
    fs::remove_all(dir);
    REQUIRE(index.entries.size() == 1);
    CHECK(index.entries[0].review_status == ReviewStatus::InProgress);
}

TEST_CASE("renderers are deterministic and their JSON parses back") {
    Analyzed a(one_sheet(
        R"x("A1":{"v":"12"},"B1":{"f":"=A1+1"},"C1":{"f":"=SUM(A1:B1)"})x"));
    for (RenderFormat f : {RenderFormat::Text, RenderFormat::Json, RenderFormat::Markdown}) {
        CHECK(render_analysis(a.wb, a.result, f) == render_analysis(a.wb, a.result, f));
        std::string doc = render_analysis(a.wb, a.result, f);
        CHECK(!doc.empty());
        CHECK(doc.back() == '\n');
    }
    auto doc = nlohmann::json::parse(render_analysis(a.wb, a.result, RenderFormat::Json));
    CHECK(doc["rating"]["total_weight"] == 149);
    CHECK(doc["rating"]["overall_percent"] == doc["rating"]["overall_percent"].get<int>());
    CHECK(doc["workbook"]["name"] == "T.xls");
    CHECK(doc["factors"].size() == 25);

    auto metrics = nlohmann::json::parse(render_metrics(a.wb, a.result, RenderFormat::Json));
    CHECK(metrics["total_formulas"] == 2);
    auto uniques = nlohmann::json::parse(render_uniques(a.wb, a.result, RenderFormat::Json));
    CHECK(uniques["unique_formulas"].size() == 2);
}

TEST_CASE("review statuses round-trip through their names") {
    for (ReviewStatus s : {ReviewStatus::Unreviewed, ReviewStatus::InProgress,
                           ReviewStatus::Reviewed, ReviewStatus::Question})
        CHECK(review_status_from_text(review_status_text(s)) == s);
    CHECK_FALSE(review_status_from_text("done").has_value());
}

TEST_CASE("tracing a cell outside the graph falls back to the requested label") {
    Analyzed a(one_sheet(R"("A1":{"v":5})"));
    TraceNode t = trace_precedents(a.wb, a.result.graph, *a.result.eval, 0, {26, 9}, 3);
    CHECK(t.node == -1);
    std::string text = render_trace(a.wb, a.result.graph, t, "S!Z9", RenderFormat::Text);
    CHECK(text.find("S!Z9") != std::string::npos);
}
