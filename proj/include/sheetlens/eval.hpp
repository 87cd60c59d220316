#pragma once

#include <map>
#include <span>
#include <tuple>
#include <vector>

#include "sheetlens/graph.hpp"
#include "sheetlens/workbook.hpp"

namespace sheetlens {

using CellKey = std::tuple<int, int, int>;   // sheet, row, col

inline CellKey cell_key(int sheet, CellCoord c) { return {sheet, c.row, c.col}; }

struct EvalResult {
    // Every formula cell lands in exactly one of these two maps.
    std::map<CellKey, Value> values;
    std::map<CellKey, std::string> unevaluated;   // cell -> unsupported function name

    // Reference edges only observable by running the formulas (INDIRECT and
    // friends), recorded during the final pass, deduplicated and sorted.
    std::vector<DynamicEdge> dynamic_edges;

    int passes = 1;                 // 1 = static order sufficed, up to 3
    long long error_cells = 0;      // formula cells whose value is an Error
    std::vector<CellKey> static_cycle_cells;   // pre-marked #CIRC!

    const Value* value_at(int sheet, CellCoord c) const {
        auto it = values.find(cell_key(sheet, c));
        return it == values.end() ? nullptr : &it->second;
    }
};

// Interprets every formula cell in graph topological order. Cells on a
// static cycle become #CIRC! without running. Formulas that read a cell
// whose value was not yet computed (possible only through dynamic
// constructs) trigger a second pass against the completed map; a third
// pass marks anything still unstable as #CIRC!.
EvalResult evaluate(const Workbook& wb, const DepGraph& g,
                    std::span<const ParsedCell> cells,
                    const std::vector<Cycle>& static_cycles);

// Depth-limited precedent tree for one cell, annotated with evaluated
// values and dynamic-edge construct labels. `g` should already contain the
// merged dynamic edges.
TraceNode trace_precedents(const Workbook& wb, const DepGraph& g, const EvalResult& eval,
                           int sheet, CellCoord coord, int depth);

// The function names evaluate() understands, uppercase, sorted.
std::span<const char* const> supported_functions();

} // namespace sheetlens
