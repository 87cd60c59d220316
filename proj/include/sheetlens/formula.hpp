#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sheetlens/address.hpp"
#include "sheetlens/value.hpp"

namespace sheetlens {

enum class BinOp { Add, Sub, Mul, Div, Pow, Concat, Eq, Ne, Lt, Le, Gt, Ge };
enum class UnOp { Plus, Minus, Percent };

const char* binop_text(BinOp op);
const char* unop_text(UnOp op);

struct AstNode;
using AstPtr = std::unique_ptr<AstNode>;

struct NumberLit { double value; };
struct TextLit { std::string text; };
struct BoolLit { bool value; };
struct ErrorLit { ErrorCode code; };

// A1-style single reference; `book` is the external workbook name when the
// formula reaches outside this file ("[Plan.xls]North!A1").
struct RefNode {
    Address addr;
    std::optional<std::string> book;
};

// Rectangular reference. Sheet/book qualifiers live on `start`'s fields and
// apply to the whole range, as written ("North!D8:O8").
struct RangeNode {
    Address start;
    Address end;
    std::optional<std::string> book;
};

struct NameNode { std::string name; };

struct CallNode {
    std::string name;   // uppercase
    std::vector<AstPtr> args;
};

struct BinaryNode {
    BinOp op;
    AstPtr left;
    AstPtr right;
};

struct UnaryNode {
    UnOp op;
    AstPtr operand;
};

struct AstNode {
    std::variant<NumberLit, TextLit, BoolLit, ErrorLit, RefNode, RangeNode,
                 NameNode, CallNode, BinaryNode, UnaryNode> node;
};

bool ast_equal(const AstNode& a, const AstNode& b);
AstPtr ast_clone(const AstNode& n);

// Parses "=..." into an AST. Throws ParseError (with character position)
// on malformed input, including the empty-argument case "SUM(1,,2)".
AstPtr parse_formula(const std::string& text);

// Canonical A1 rendering: uppercase function names, no whitespace, minimal
// parentheses. render(parse(t)) reparses to an equal tree.
std::string render_formula(const AstNode& root);

// R1C1 rendering relative to `origin`: relative axes become signed offsets
// ("R[-1]C[2]"), absolute axes stay fixed ("R1C1"), zero offsets render as
// bare R / C. Two cells carry the same normalised text exactly when one
// formula fill-copies to the other.
struct NormalizedFormula {
    std::string r1c1;      // includes the leading '='
    CellCoord origin;
};

NormalizedFormula normalize_formula(const AstNode& root, CellCoord origin);

// Size and shape counters used by the risk measures.
struct FormulaMetrics {
    int length = 0;            // text length excluding '='
    int func_count = 0;
    int operator_count = 0;    // binary + unary operators
    int ref_count = 0;         // single refs + ranges + names
    int max_nesting_depth = 0; // deepest function-call nesting
    int max_if_depth = 0;      // deepest chain of IF inside IF
    int complexity = 0;        // func_count + operator_count + max_nesting_depth
    std::vector<double> numeric_literals;      // in source order
    std::vector<std::string> function_names;   // sorted, deduplicated
    bool has_external_ref = false;
};

FormulaMetrics formula_metrics(const AstNode& root, const std::string& text);

// One formula cell after the parse pass over a workbook.
struct FormulaCell {
    int sheet = 0;             // index into workbook.sheets
    CellCoord coord;
    std::string text;          // verbatim, '=' included
    AstPtr ast;                // null when the formula failed to parse
    FormulaMetrics metrics;    // zeroed when ast is null
    bool array = false;        // anchors an array-entered range
};

struct ParseFailure {
    int sheet = 0;
    CellCoord coord;
    std::string text;
    std::string message;
    std::size_t position = 0;
};

// Distinct formulas after R1C1 normalisation, grouped per sheet.
struct UniqueFormula {
    int sheet = 0;                 // index into workbook.sheets
    std::string sheet_name;
    std::string r1c1;
    CellCoord first_found;         // row-major earliest instance
    int instance_count = 0;
    std::string example_text;      // verbatim text at first_found
};

} // namespace sheetlens
