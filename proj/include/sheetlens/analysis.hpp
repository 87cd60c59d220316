#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sheetlens/config.hpp"
#include "sheetlens/eval.hpp"
#include "sheetlens/formula.hpp"
#include "sheetlens/graph.hpp"
#include "sheetlens/risk.hpp"
#include "sheetlens/workbook.hpp"

namespace sheetlens {

// Every formula cell in sheet order then row-major. Cells whose text does
// not parse still get a FormulaCell (null ast, zeroed metrics) plus an
// entry in `failures`.
struct ParsePass {
    std::vector<FormulaCell> formulas;
    std::vector<ParseFailure> failures;
};

ParsePass parse_workbook(const Workbook& wb);

// Groups parsed formulas by normalised R1C1 text, per sheet by default so
// the same pattern on two sheets counts twice; workbook_wide collapses
// across sheets. Order of the result is first-encounter order.
std::vector<UniqueFormula> classify_unique_formulas(const Workbook& wb,
                                                    std::span<const FormulaCell> formulas,
                                                    bool workbook_wide = false);

struct WorkbookMetrics {
    int sheet_count = 0;
    long long total_cells = 0;           // populated cells, all sheets
    long long total_formulas = 0;        // includes unparsable formula cells
    long long total_unique_formulas = 0;
    int max_formula_length = 0;
    int max_formula_complexity = 0;
    std::optional<double> largest_numeric_result;   // magnitude; needs evaluation
    int vba_lines = 0;
    int vba_components = 0;
    long long file_size_bytes = 0;
};

WorkbookMetrics workbook_metrics(const Workbook& wb, std::span<const FormulaCell> formulas,
                                 const std::vector<UniqueFormula>& uniques,
                                 const EvalResult* eval);

struct AnalysisOptions {
    bool evaluate = true;
    bool workbook_wide_uniques = false;
    GraphOptions graph;
};

// Everything the reports draw from. Does not own the workbook: the graph
// keeps a pointer to it, so the caller must keep `wb` alive as long as the
// result is used.
struct AnalysisResult {
    std::vector<FormulaCell> formulas;
    std::vector<ParseFailure> parse_failures;
    std::vector<UniqueFormula> uniques;
    DepGraph graph;                      // dynamic edges merged in when evaluated
    std::vector<Cycle> cycles;           // on the merged graph
    std::optional<EvalResult> eval;
    WorkbookMetrics metrics;
    RiskReport risk;
    ScaleAdvice advice = ScaleAdvice::Normal;
    std::vector<std::string> warnings;   // config override problems and the like
};

// Parse, classify, graph, find cycles, optionally evaluate (merging the
// dynamic edges back and re-finding cycles), run the risk catalog, and
// judge scale.
AnalysisResult analyze_workbook(const Workbook& wb, const Config& config,
                                const AnalysisOptions& options = {});

} // namespace sheetlens
