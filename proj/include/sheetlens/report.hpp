#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sheetlens/analysis.hpp"
#include "sheetlens/config.hpp"
#include "sheetlens/links.hpp"
#include "sheetlens/workbook.hpp"

namespace sheetlens {

enum class ReviewStatus { Unreviewed, InProgress, Reviewed, Question };

const char* review_status_text(ReviewStatus s);
std::optional<ReviewStatus> review_status_from_text(const std::string& text);

struct IndexEntry {
    int sheet = 0;
    std::string name;
    std::string description;        // never fabricated: empty unless the cell holds text
    Address description_source;     // the cell consulted
    SheetVisibility visibility = SheetVisibility::Visible;
    std::vector<std::string> groups;
    ReviewStatus review_status = ReviewStatus::Unreviewed;
    std::string notes;
    long long formula_count = 0;
    long long unique_count = 0;
};

struct SheetIndex {
    std::vector<IndexEntry> entries;    // workbook sheet order
    std::vector<std::string> orphans;   // sidecar sheets missing from the workbook
    std::vector<std::string> warnings;
};

// Entries with descriptions from the configured cell (sidecar per-sheet
// overrides win) and review state merged from `<workbook path>.review.json`
// next to the source file, when one exists.
SheetIndex sheet_index(const Workbook& wb, const AnalysisResult& analysis,
                       const Config& config);

// Merges sidecar JSON directly; exposed for tests and callers that manage
// the file themselves.
void apply_review_json(SheetIndex& index, const Workbook& wb,
                       const std::string& json_text, const std::string& origin);

// One code per cell inside the trimmed populated bounds:
//   B blank   L text label   N numeric or boolean constant   F formula
//   A array formula   E error (evaluated when available, literals otherwise)
//   T number stored as text
struct SheetMap {
    std::string sheet_name;
    std::optional<CellRange> bounds;    // absent for an empty sheet
    std::vector<std::string> rows;      // bounds height strings of bounds width codes
};

SheetMap sheet_map(const Workbook& wb, int sheet, const EvalResult* eval);

// A constant sitting inside a formula run: an N cell with F neighbours on
// both sides along one axis, at least `interruption_run_min` F cells total.
struct LayoutFinding {
    std::string kind;                   // "constant_interruption"
    CellCoord cell;                     // the interrupting N cell
    std::string detail;
};

std::vector<LayoutFinding> layout_findings(const SheetMap& map, const Config& config);

// Fraction of populated cells whose code differs from at least
// `jumble_neighbor_min` of their in-bounds 4-neighbours (blank neighbours
// differ; missing ones are not counted).
double jumble_fraction(const SheetMap& map, const Config& config);

enum class RenderFormat { Text, Json, Markdown };

std::optional<RenderFormat> parse_format(const std::string& name);

// "#sheet-<lowercased-name-hyphenated>" target for markdown links.
std::string sheet_anchor(const std::string& name);

// Renderers are pure and byte-deterministic; every document ends with one
// trailing newline. JSON documents parse back into the same data.
std::string render_analysis(const Workbook& wb, const AnalysisResult& a, RenderFormat f);
std::string render_metrics(const Workbook& wb, const AnalysisResult& a, RenderFormat f);
std::string render_uniques(const Workbook& wb, const AnalysisResult& a, RenderFormat f);
std::string render_index(const SheetIndex& index, const std::string& group_filter,
                         RenderFormat f);
std::string render_sheet_map(const SheetMap& map, const std::vector<LayoutFinding>& findings,
                             double jumble, RenderFormat f);
std::string render_flow(const Workbook& wb, const DepGraph& g, int sheet, RenderFormat f);
// root_label names the requested cell when it has no graph node (tree.node
// is -1 for a cell nothing references and which references nothing).
std::string render_trace(const Workbook& wb, const DepGraph& g, const TraceNode& tree,
                         const std::string& root_label, RenderFormat f);
std::string render_links(const LinkGraph& links, RenderFormat f);
std::string render_eval(const Workbook& wb, const EvalResult& eval, RenderFormat f);

} // namespace sheetlens
