#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "sheetlens/analysis.hpp"

using namespace sheetlens;
using tst::Analyzed;
using tst::one_sheet;

TEST_CASE("parsing walks sheets in order and cells row-major") {
    auto wb = tst::wb_from_json(R"({"name":"T","sheets":[
        {"name":"One","cells":{"B2":{"f":"=A1"},"A2":{"f":"=A1"},"C1":{"f":"=A1"}}},
        {"name":"Two","cells":{"A1":{"f":"=SUM("},"B1":{"f":"=1+1"}}}]})");
    ParsePass p = parse_workbook(wb);
    REQUIRE(p.formulas.size() == 5);
    CHECK(p.formulas[0].coord == CellCoord{3, 1});
    CHECK(p.formulas[1].coord == CellCoord{1, 2});
    CHECK(p.formulas[2].coord == CellCoord{2, 2});
    CHECK(p.formulas[3].sheet == 1);
    CHECK(p.formulas[3].ast == nullptr);
    CHECK(p.formulas[4].ast != nullptr);

    REQUIRE(p.failures.size() == 1);
    CHECK(p.failures[0].sheet == 1);
    CHECK(p.failures[0].coord == CellCoord{1, 1});
    CHECK(p.failures[0].text == "=SUM(");
    CHECK(p.failures[0].position <= p.failures[0].text.size());
    CHECK_FALSE(p.failures[0].message.empty());
}

TEST_CASE("unique formulas group by normalised pattern per sheet") {
    auto wb = tst::wb_from_json(R"x({"name":"T","sheets":[
        {"name":"One","cells":{
            "B1":{"f":"=A1*2"},"B2":{"f":"=A2*2"},"B3":{"f":"=A3*2"},
            "C1":{"f":"=SUM(A1:B1)"},
            "D1":{"f":"=$A$1"},"D2":{"f":"=$A$1"}}},
        {"name":"Two","cells":{"B9":{"f":"=A9*2"}}}]})x");
    ParsePass p = parse_workbook(wb);

    auto uniques = classify_unique_formulas(wb, p.formulas);
    REQUIRE(uniques.size() == 4);
    CHECK(uniques[0].r1c1 == "=RC[-1]*2");
    CHECK(uniques[0].sheet_name == "One");
    CHECK(uniques[0].first_found == CellCoord{2, 1});
    CHECK(uniques[0].instance_count == 3);
    CHECK(uniques[0].example_text == "=A1*2");
    CHECK(uniques[1].r1c1 == "=SUM(RC[-2]:RC[-1])");
    CHECK(uniques[2].r1c1 == "=R1C1");
    CHECK(uniques[2].instance_count == 2);
    CHECK(uniques[3].sheet_name == "Two");
    CHECK(uniques[3].r1c1 == "=RC[-1]*2");

    // The same pattern on two sheets collapses when asked to.
    auto wide = classify_unique_formulas(wb, p.formulas, true);
    REQUIRE(wide.size() == 3);
    CHECK(wide[0].r1c1 == "=RC[-1]*2");
    CHECK(wide[0].instance_count == 4);
    CHECK(wide[0].sheet_name == "One");
}

TEST_CASE("unparsable formulas are counted but not classified") {
    auto wb = tst::wb_from_json(one_sheet(R"("A1":{"f":"=(("},"B1":{"f":"=1"})"));
    ParsePass p = parse_workbook(wb);
    CHECK(p.formulas.size() == 2);
    CHECK(classify_unique_formulas(wb, p.formulas).size() == 1);
}

TEST_CASE("workbook metrics summarise the parse and evaluation") {
    Analyzed a(one_sheet(
        R"("A1":{"v":5},"A2":{"v":"note"},)"
        R"x("B1":{"f":"=A1*1000"},"B2":{"f":"=IF(A1>1,SUM(A1:A2),0)"})x",
        "", R"(,"vba":{"components":1,"total_lines":2})"));
    const WorkbookMetrics& m = a.result.metrics;
    CHECK(m.sheet_count == 1);
    CHECK(m.total_cells == 4);
    CHECK(m.total_formulas == 2);
    CHECK(m.total_unique_formulas == 2);
    CHECK(m.max_formula_length == static_cast<int>(std::string("IF(A1>1,SUM(A1:A2),0)").size()));
    CHECK(m.max_formula_complexity == 2 + 1 + 2);
    REQUIRE(m.largest_numeric_result.has_value());
    CHECK(*m.largest_numeric_result == 5000.0);
    CHECK(m.vba_lines == 2);
    CHECK(m.vba_components == 1);
    CHECK(m.file_size_bytes == 100);

    Analyzed dry(one_sheet(R"("A1":{"v":5},"B1":{"f":"=A1*1000"})"), false);
    CHECK_FALSE(dry.result.eval.has_value());
    CHECK_FALSE(dry.result.metrics.largest_numeric_result.has_value());
    CHECK(dry.result.metrics.total_formulas == 1);
}

TEST_CASE("analysis stitches evaluation back into the graph") {
    Analyzed a(one_sheet(
        R"("A1":{"v":"B2"},"B2":{"v":7},"C1":{"f":"=INDIRECT(A1)+1"})"));
    REQUIRE(a.result.eval.has_value());
    CHECK(a.result.eval->dynamic_edges.size() == 1);
    auto c1 = a.result.graph.cell_node(0, {3, 1});
    REQUIRE(c1.has_value());
    bool found = false;
    for (const GraphEdge& e : a.result.graph.edges) {
        const GraphNode& from = a.result.graph.nodes[static_cast<std::size_t>(e.precedent)];
        if (e.dependent == *c1 && e.dynamic && from.coord == CellCoord{2, 2} &&
            e.construct == "INDIRECT")
            found = true;
    }
    CHECK(found);
}

TEST_CASE("a blank-heavy declared range turns up as a finding") {
    Analyzed a(tst::read_fixture("usedrange.json"));
    REQUIRE(a.result.risk.used_range_findings.size() == 1);
    const UsedRangeFinding& u = a.result.risk.used_range_findings[0];
    CHECK(u.sheet_name == "Data");
    CHECK(u.stats.declared_cells == 26000);
    CHECK(u.stats.populated_cells == 10);
    CHECK(u.stats.blank_ratio == doctest::Approx(0.99962).epsilon(1e-4));
    REQUIRE(u.stats.trimmed_range.has_value());
    CHECK(render_range(*u.stats.trimmed_range) == "A1:C4");
    CHECK(a.result.risk.overall_rating_percent == 0);
}

TEST_CASE("static cycles keep the whole analysis honest") {
    Analyzed a(one_sheet(R"("A1":{"f":"=B1"},"B1":{"f":"=A1"},"C1":{"f":"=1"})"));
    REQUIRE(a.result.cycles.size() == 1);
    CHECK(a.result.cycles[0].nodes.size() == 2);
    REQUIRE(a.result.eval.has_value());
    CHECK(a.result.eval->static_cycle_cells.size() == 2);
    const Value* v = a.result.eval->value_at(0, {1, 1});
    REQUIRE(v != nullptr);
    CHECK(*v == Value(ErrorCode::Circ));
}
