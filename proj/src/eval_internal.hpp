#pragma once

#include <functional>
#include <set>

#include "sheetlens/eval.hpp"

namespace sheetlens::detail {

// A reference produced while evaluating (from a ref, range, OFFSET or
// INDIRECT). `construct` names the dynamic construct that produced it, or
// is empty for plain static references.
struct RangeHandle {
    int sheet = -1;
    CellRange range;
    std::string construct;

    bool single() const { return range.start == range.end; }
};

// Evaluation intermediate: either a settled scalar or a reference.
struct XValue {
    Value scalar;
    std::optional<RangeHandle> handle;

    XValue(Value v) : scalar(std::move(v)) {}
    XValue(RangeHandle h) : scalar(Blank{}), handle(std::move(h)) {}
};

// Signals an unsupported function so the cell can be parked as
// unevaluated instead of receiving a value.
struct UnsupportedFunction {
    std::string name;
};

class Interpreter {
public:
    Interpreter(const Workbook& wb, const DepGraph& g, std::span<const ParsedCell> cells);

    EvalResult run(const std::vector<Cycle>& static_cycles);

    // -- helpers used by the function implementations ---------------------

    XValue eval(const AstNode& n);
    Value scalar(const AstNode& n);              // eval + deref
    Value deref(const XValue& v);

    // Reads one cell, recording a dynamic edge to the current cell when
    // `construct` is non-empty.
    Value read_cell(int sheet, CellCoord c, const std::string& construct);

    // Iterates populated members of a handle in row-major order. The
    // callback returns false to stop early.
    void for_members(const RangeHandle& h,
                     const std::function<bool(CellCoord, const Value&)>& fn);

    Value member_at(const RangeHandle& h, int row_off, int col_off,
                    const std::string& construct);

    const Workbook& workbook() const { return wb_; }
    int current_sheet() const { return current_->sheet; }

    static Value to_number(const Value& v);      // Number or Error
    static Value to_text_value(const Value& v);  // Text or Error
    static Value to_condition(const Value& v);   // Bool or Error
    static int compare(const Value& a, const Value& b);  // -1/0/1, errors pre-checked

private:
    friend XValue call_function(Interpreter&, const CallNode&);

    Value eval_formula_cell(const ParsedCell& pc);
    XValue eval_ref(const RefNode& ref);
    XValue eval_range(const RangeNode& range);
    Value eval_binary(const BinaryNode& b);
    Value eval_unary(const UnaryNode& u);

    std::vector<int> topo_order() const;

    const Workbook& wb_;
    const DepGraph& g_;
    std::span<const ParsedCell> cells_;
    std::map<CellKey, const ParsedCell*> formula_at_;
    std::map<CellKey, Value> values_;
    std::set<CellKey> circ_;
    std::vector<CellKey> circ_seeds_;
    std::map<CellKey, std::string> unevaluated_;
    std::set<std::tuple<CellKey, CellKey, std::string>> dynamic_;
    const ParsedCell* current_ = nullptr;
    int pass_ = 1;
    bool premature_read_ = false;
};

// Dispatch for the supported function set; throws UnsupportedFunction for
// anything else. OFFSET and INDIRECT yield reference handles, everything
// else a scalar.
XValue call_function(Interpreter& interp, const CallNode& call);

} // namespace sheetlens::detail
