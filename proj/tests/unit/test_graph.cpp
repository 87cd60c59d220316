#include <algorithm>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "sheetlens/analysis.hpp"
#include "sheetlens/graph.hpp"

using namespace sheetlens;
using tst::one_sheet;

namespace {

struct Built {
    Workbook wb;
    ParsePass pass;
    DepGraph graph;

    explicit Built(const std::string& json, GraphOptions options = {})
        : wb(tst::wb_from_json(json)), pass(parse_workbook(wb)) {
        std::vector<ParsedCell> cells;
        for (const FormulaCell& fc : pass.formulas)
            if (fc.ast) cells.push_back({fc.sheet, fc.coord, fc.ast.get(), &fc.text});
        graph = build_graph(wb, cells, options);
    }
};

bool has_edge(const DepGraph& g, const std::string& from, const std::string& to) {
    auto a = parse_address(from, false);
    auto b = parse_address(to, false);
    auto p = g.cell_node(0, a.coord);
    auto d = g.cell_node(0, b.coord);
    if (!p || !d) return false;
    return std::any_of(g.edges.begin(), g.edges.end(), [&](const GraphEdge& e) {
        return e.precedent == *p && e.dependent == *d;
    });
}

} // namespace

TEST_CASE("references become precedent edges") {
    Built b(one_sheet(R"("B1":{"f":"=A1"},"C1":{"f":"=B1+A1"})"));
    CHECK(has_edge(b.graph, "A1", "B1"));
    CHECK(has_edge(b.graph, "B1", "C1"));
    CHECK(has_edge(b.graph, "A1", "C1"));
    CHECK_FALSE(has_edge(b.graph, "C1", "A1"));

    auto c1 = b.graph.cell_node(0, {3, 1});
    REQUIRE(c1.has_value());
    CHECK(b.graph.precedents_of[*c1].size() == 2);
    CHECK(b.graph.node_label(*c1) == "S!C1");

    // Referenced-but-empty cells still get nodes.
    CHECK(b.graph.cell_node(0, {1, 1}).has_value());
    CHECK_FALSE(b.graph.cell_node(0, {9, 9}).has_value());
}

TEST_CASE("small ranges expand to per-member edges") {
    Built b(one_sheet(R"x("A1":{"v":1},"A2":{"v":2},"B1":{"f":"=SUM(A1:A3)"})x"));
    CHECK(has_edge(b.graph, "A1", "B1"));
    CHECK(has_edge(b.graph, "A2", "B1"));
    CHECK(has_edge(b.graph, "A3", "B1"));
    CHECK(b.graph.truncated_ranges == 0);
}

TEST_CASE("ranges past the member cap collapse into a coarse range node") {
    GraphOptions options;
    options.range_member_cap = 4;
    Built b(one_sheet(R"x("A1":{"v":1},"A9":{"v":2},"B1":{"f":"=SUM(A1:A9)"})x"), options);
    CHECK(b.graph.truncated_ranges == 1);
    auto range_node = std::find_if(b.graph.nodes.begin(), b.graph.nodes.end(),
                                   [](const GraphNode& n) { return n.kind == NodeKind::Range; });
    REQUIRE(range_node != b.graph.nodes.end());
    CHECK(range_node->coarse);
    int idx = static_cast<int>(range_node - b.graph.nodes.begin());
    CHECK(b.graph.node_label(idx) == "S!A1:A9");
    // Populated members feed the range node, which feeds the formula.
    auto b1 = b.graph.cell_node(0, {2, 1});
    REQUIRE(b1.has_value());
    bool range_to_formula = std::any_of(
        b.graph.edges.begin(), b.graph.edges.end(),
        [&](const GraphEdge& e) { return e.precedent == idx && e.dependent == *b1; });
    CHECK(range_to_formula);
    CHECK(b.graph.precedents_of[idx].size() == 2);
}

TEST_CASE("external references get external nodes and labels") {
    Built b(one_sheet(R"("B1":{"f":"=[Plan.xls]North!A1+1"})"));
    auto ext = std::find_if(b.graph.nodes.begin(), b.graph.nodes.end(),
                            [](const GraphNode& n) { return n.kind == NodeKind::External; });
    REQUIRE(ext != b.graph.nodes.end());
    CHECK(ext->book == "Plan.xls");
    CHECK(b.graph.node_label(static_cast<int>(ext - b.graph.nodes.begin())) ==
          "[Plan.xls]North!A1");
}

TEST_CASE("defined names resolve to edges") {
    Built b(tst::one_sheet(R"("C3":{"v":5},"B1":{"f":"=Rate*2"})", "",
                           R"(,"defined_names":{"Rate":"S!$C$3"})"));
    CHECK(has_edge(b.graph, "C3", "B1"));
}

TEST_CASE("find_cycles reports mutual, triangular, and self cycles") {
    Built two(one_sheet(R"("A1":{"f":"=B1"},"B1":{"f":"=A1"})"));
    auto cycles = find_cycles(two.graph);
    REQUIRE(cycles.size() == 1);
    CHECK(cycles[0].nodes.size() == 2);

    Built three(one_sheet(R"("A1":{"f":"=B1"},"B1":{"f":"=C1"},"C1":{"f":"=A1"})"));
    cycles = find_cycles(three.graph);
    REQUIRE(cycles.size() == 1);
    CHECK(cycles[0].nodes.size() == 3);

    Built self(one_sheet(R"("A1":{"f":"=A1+1"})"));
    cycles = find_cycles(self.graph);
    REQUIRE(cycles.size() == 1);
    CHECK(cycles[0].nodes.size() == 1);

    Built acyclic(one_sheet(R"("A1":{"v":1},"B1":{"f":"=A1"})"));
    CHECK(find_cycles(acyclic.graph).empty());
}

TEST_CASE("strongly_connected_components partitions every vertex") {
    std::vector<std::vector<int>> adj{{1}, {0, 2}, {}, {3}};
    auto comps = strongly_connected_components(adj);
    REQUIRE(comps.size() == 3);
    CHECK(comps[0] == std::vector<int>{0, 1});
    CHECK(comps[1] == std::vector<int>{2});
    CHECK(comps[2] == std::vector<int>{3});
}

TEST_CASE("precedent trees honor the depth limit and mark revisits") {
    Built chain(one_sheet(R"("B1":{"f":"=A1"},"C1":{"f":"=B1"})"));
    auto c1 = chain.graph.cell_node(0, {3, 1});
    REQUIRE(c1.has_value());
    TraceNode t = precedents_tree(chain.graph, *c1, 1);
    REQUIRE(t.children.size() == 1);
    CHECK(t.children[0].children.empty());
    t = precedents_tree(chain.graph, *c1, 2);
    REQUIRE(t.children.size() == 1);
    CHECK(t.children[0].children.size() == 1);

    Built loop(one_sheet(R"("A1":{"f":"=B1"},"B1":{"f":"=A1"})"));
    auto a1 = loop.graph.cell_node(0, {1, 1});
    REQUIRE(a1.has_value());
    t = precedents_tree(loop.graph, *a1, 5);
    REQUIRE(t.children.size() == 1);
    REQUIRE(t.children[0].children.size() == 1);
    CHECK(t.children[0].children[0].cyclic);
    CHECK(t.children[0].children[0].children.empty());
}

TEST_CASE("dependent trees mirror precedent trees") {
    Built chain(one_sheet(R"("B1":{"f":"=A1"},"C1":{"f":"=B1"})"));
    auto a1 = chain.graph.cell_node(0, {1, 1});
    REQUIRE(a1.has_value());
    TraceNode t = dependents_tree(chain.graph, *a1, 2);
    REQUIRE(t.children.size() == 1);
    CHECK(chain.graph.node_label(t.children[0].node) == "S!B1");
    REQUIRE(t.children[0].children.size() == 1);
    CHECK(chain.graph.node_label(t.children[0].children[0].node) == "S!C1");
}

TEST_CASE("sheet_matrix counts cross-sheet edges") {
    auto wb = tst::wb_from_json(
        R"({"name":"T","sheets":[{"name":"One","cells":{"A1":{"v":1}}},)"
        R"({"name":"Two","cells":{"A1":{"f":"=One!A1+One!B1"},"B1":{"f":"=A1"}}}]})");
    ParsePass pass = parse_workbook(wb);
    std::vector<ParsedCell> cells;
    for (const FormulaCell& fc : pass.formulas)
        cells.push_back({fc.sheet, fc.coord, fc.ast.get(), &fc.text});
    DepGraph g = build_graph(wb, cells);
    SheetMatrix m = sheet_matrix(g);
    CHECK(m.counts[0][1] == 2);
    CHECK(m.counts[1][1] == 1);
    CHECK(m.counts[1][0] == 0);
}

TEST_CASE("flow_stats classifies edge directions") {
    Built b(one_sheet(
        R"("B1":{"f":"=A1"},"A2":{"f":"=A1"},"A3":{"f":"=B9"})"));
    FlowStats f = flow_stats(b.graph, 0);
    CHECK(f.edges == 3);
    CHECK(f.rightward == 1);
    CHECK(f.same_column == 1);
    CHECK(f.same_row == 1);
    CHECK(f.downward == 1);
    CHECK(f.leftward == 1);
    CHECK(f.upward == 1);
    CHECK(f.backward_fraction == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("resolve_defined_name follows chains and refuses loops") {
    auto wb = tst::wb_from_json(one_sheet(R"("C3":{"v":1})", "",
        R"(,"defined_names":{"Rate":"S!$C$3","Alias":"Rate","Block":"S!A1:B2",)"
        R"("Loop":"Loop2","Loop2":"Loop"})"));
    auto r = resolve_defined_name(wb, "Rate");
    REQUIRE(r.has_value());
    CHECK(r->sheet == 0);
    CHECK(r->range == CellRange{{3, 3}, {3, 3}});
    auto alias = resolve_defined_name(wb, "alias");
    REQUIRE(alias.has_value());
    CHECK(alias->range == r->range);
    auto block = resolve_defined_name(wb, "Block");
    REQUIRE(block.has_value());
    CHECK(block->range == parse_range("A1:B2"));
    CHECK_FALSE(resolve_defined_name(wb, "Loop").has_value());
    CHECK_FALSE(resolve_defined_name(wb, "Nope").has_value());
}

TEST_CASE("merge_dynamic_edges drops duplicates and adds missing nodes") {
    Built b(one_sheet(R"("B1":{"f":"=A1"})"));
    std::size_t nodes_before = b.graph.nodes.size();
    std::size_t edges_before = b.graph.edges.size();

    std::vector<DynamicEdge> extra;
    extra.push_back({0, {1, 1}, 0, {2, 1}, "INDIRECT"});   // duplicates the static edge
    extra.push_back({0, {4, 7}, 0, {2, 1}, "INDIRECT"});   // D7 is new
    merge_dynamic_edges(b.graph, extra);

    CHECK(b.graph.nodes.size() == nodes_before + 1);
    CHECK(b.graph.edges.size() == edges_before + 1);
    auto d7 = b.graph.cell_node(0, {4, 7});
    REQUIRE(d7.has_value());
    auto b1 = b.graph.cell_node(0, {2, 1});
    bool dyn = std::any_of(b.graph.edges.begin(), b.graph.edges.end(), [&](const GraphEdge& e) {
        return e.precedent == *d7 && e.dependent == *b1 && e.dynamic &&
               e.construct == "INDIRECT";
    });
    CHECK(dyn);
}
