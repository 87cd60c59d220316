#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "sheetlens/formula.hpp"
#include "sheetlens/workbook.hpp"

namespace sheetlens {

// One parsed formula cell, the unit the graph and evaluator consume.
struct ParsedCell {
    int sheet = 0;
    CellCoord coord;
    const AstNode* ast = nullptr;
    const std::string* text = nullptr;
};

enum class NodeKind { Cell, External, Range };

struct GraphNode {
    NodeKind kind = NodeKind::Cell;
    int sheet = -1;                 // Cell/internal Range: index into workbook.sheets
    CellCoord coord{};              // Cell position, or Range start
    CellCoord range_end{};          // Range only
    std::string book;               // External cell / external Range
    std::string external_sheet;     // sheet name as written, External only
    bool coarse = false;            // Range node introduced by the expansion cap
};

struct GraphEdge {
    int precedent = 0;              // data flows precedent -> dependent
    int dependent = 0;
    bool dynamic = false;
    std::string construct;          // INDIRECT/OFFSET/... for dynamic edges
};

struct GraphOptions {
    long long range_member_cap = 4096;  // max cells a range expands to
    int name_resolution_depth = 16;
};

struct DepGraph {
    const Workbook* workbook = nullptr;
    std::vector<GraphNode> nodes;       // canonical order: cells (sheet, row-major),
                                        // then externals, then range nodes
    std::vector<GraphEdge> edges;
    std::vector<std::vector<int>> precedents_of;   // by node index
    std::vector<std::vector<int>> dependents_of;
    std::map<std::tuple<int, int, int>, int> cell_index;   // (sheet, row, col) -> node
    long long truncated_ranges = 0;     // ranges that hit the member cap

    std::optional<int> cell_node(int sheet, CellCoord coord) const;
    std::string node_label(int node) const;       // "North!P8", "[Plan.xls]North!A1", "North!D8:O8"
};

// Static reference edges for every parsed formula. Range references expand
// to per-member edges up to options.range_member_cap cells; larger ranges
// collapse into a single coarse range node fed by its populated members.
DepGraph build_graph(const Workbook& wb, std::span<const ParsedCell> cells,
                     const GraphOptions& options = {});

// Reference observed only at evaluation time (INDIRECT and friends), keyed
// by cell because the target may not exist in the static graph yet.
struct DynamicEdge {
    int from_sheet = 0;
    CellCoord from;                 // precedent
    int to_sheet = 0;
    CellCoord to;                   // dependent (the formula cell)
    std::string construct;

    auto tied() const { return std::tie(from_sheet, from, to_sheet, to, construct); }
    bool operator<(const DynamicEdge& o) const { return tied() < o.tied(); }
    bool operator==(const DynamicEdge& o) const { return tied() == o.tied(); }
};

// Adds evaluation-time edges to the graph. Endpoints missing from the
// static graph become new cell nodes; the whole node list is re-indexed so
// canonical ordering survives. Edges duplicating a static edge are dropped.
void merge_dynamic_edges(DepGraph& g, const std::vector<DynamicEdge>& extra);

struct Cycle {
    std::vector<int> nodes;         // sorted canonical indices
};

// Strongly connected components of size > 1 plus self-loops, ordered by
// smallest member.
std::vector<Cycle> find_cycles(const DepGraph& g);

// Tarjan over an arbitrary adjacency list; every vertex appears in exactly
// one component; members sorted; components ordered by smallest member.
std::vector<std::vector<int>> strongly_connected_components(
    const std::vector<std::vector<int>>& adjacency);

// Depth-limited expansion used by the precedent/dependent tracers.
struct TraceNode {
    int node = -1;
    std::optional<Value> value;         // filled by the evaluating tracer
    bool cyclic = false;                // node already on the path above
    bool dynamic = false;               // edge from parent was dynamic
    std::string construct;              // construct label for that edge
    std::vector<TraceNode> children;
};

TraceNode precedents_tree(const DepGraph& g, int node, int depth);
TraceNode dependents_tree(const DepGraph& g, int node, int depth);

// Cross-sheet static dependency counts; matrix[p][d] counts edges whose
// precedent lives on sheet p and dependent on sheet d.
struct SheetMatrix {
    std::vector<std::vector<long long>> counts;
    std::map<std::string, long long> external_in;   // book -> edges into this workbook
};

SheetMatrix sheet_matrix(const DepGraph& g);

// Reading-order statistics for the static edges of one sheet.
struct FlowStats {
    long long edges = 0;            // intra-sheet edges
    long long rightward = 0, leftward = 0, same_column = 0;
    long long downward = 0, upward = 0, same_row = 0;
    long long incoming_cross = 0;   // from another sheet or workbook
    long long outgoing_cross = 0;
    double backward_fraction = 0.0; // dependent strictly above or left of precedent
};

FlowStats flow_stats(const DepGraph& g, int sheet);

// Defined-name resolution: follows name-to-name chains up to `depth` hops
// and yields a concrete sheet-qualified cell or range.
struct ResolvedName {
    int sheet = -1;
    CellRange range;                // single cells have start == end
};

std::optional<ResolvedName> resolve_defined_name(const Workbook& wb, const std::string& name,
                                                 int depth = 16);

} // namespace sheetlens
