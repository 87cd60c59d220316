#include "eval_internal.hpp"

#include <array>
#include <cmath>

namespace sheetlens {

std::span<const char* const> supported_functions() {
    static constexpr std::array<const char*, 18> names{
        "ABS", "AND", "COUNT", "COUNTA", "HLOOKUP", "IF", "INDEX", "INDIRECT",
        "MATCH", "MAX", "MIN", "NOT", "OFFSET", "OR", "ROUND", "SUM", "SUMIF",
        "VLOOKUP"};
    return {names.data(), names.size()};
}

namespace detail {

namespace {

using Args = const std::vector<AstPtr>&;

bool arity(const CallNode& c, std::size_t lo, std::size_t hi) {
    return c.args.size() >= lo && c.args.size() <= hi;
}

// Truncation toward zero, the way count-like numeric arguments behave.
int as_int(double d) { return static_cast<int>(d); }

Value bad_args() { return Value(ErrorCode::Value); }

// Numeric fold shared by SUM/MIN/MAX. Scalars coerce, range members only
// contribute when they are numbers, member errors win immediately.
template <typename Fold>
Value numeric_fold(Interpreter& I, const CallNode& c, Fold fold, bool& any) {
    for (const auto& arg : c.args) {
        XValue x = I.eval(*arg);
        if (x.handle) {
            Value stop = Value(Blank{});
            I.for_members(*x.handle, [&](CellCoord, const Value& v) {
                if (v.is_error()) { stop = v; return false; }
                if (v.is_number()) { fold(v.number()); any = true; }
                return true;
            });
            if (stop.is_error()) return stop;
        } else {
            Value n = Interpreter::to_number(x.scalar);
            if (n.is_error()) return n;
            fold(n.number());
            any = true;
        }
    }
    return Value(Blank{});
}

Value fn_sum(Interpreter& I, const CallNode& c) {
    if (c.args.empty()) return bad_args();
    double acc = 0;
    bool any = false;
    Value err = numeric_fold(I, c, [&](double d) { acc += d; }, any);
    return err.is_error() ? err : Value(acc);
}

Value fn_min(Interpreter& I, const CallNode& c) {
    if (c.args.empty()) return bad_args();
    double best = 0;
    bool any = false;
    Value err = numeric_fold(I, c, [&](double d) { best = any ? std::min(best, d) : d; any = true; }, any);
    if (err.is_error()) return err;
    return Value(any ? best : 0.0);
}

Value fn_max(Interpreter& I, const CallNode& c) {
    if (c.args.empty()) return bad_args();
    double best = 0;
    bool any = false;
    Value err = numeric_fold(I, c, [&](double d) { best = any ? std::max(best, d) : d; any = true; }, any);
    if (err.is_error()) return err;
    return Value(any ? best : 0.0);
}

Value fn_count(Interpreter& I, const CallNode& c) {
    if (c.args.empty()) return bad_args();
    long long n = 0;
    for (const auto& arg : c.args) {
        XValue x = I.eval(*arg);
        if (x.handle) {
            I.for_members(*x.handle, [&](CellCoord, const Value& v) {
                if (v.is_number()) ++n;
                return true;
            });
        } else {
            if (x.scalar.is_error()) return x.scalar;
            if (x.scalar.is_number()) ++n;
        }
    }
    return Value(static_cast<double>(n));
}

Value fn_counta(Interpreter& I, const CallNode& c) {
    if (c.args.empty()) return bad_args();
    long long n = 0;
    for (const auto& arg : c.args) {
        XValue x = I.eval(*arg);
        if (x.handle) {
            I.for_members(*x.handle, [&](CellCoord, const Value&) { ++n; return true; });
        } else if (!x.scalar.is_blank()) {
            ++n;    // errors are content too
        }
    }
    return Value(static_cast<double>(n));
}

Value fn_abs(Interpreter& I, const CallNode& c) {
    if (!arity(c, 1, 1)) return bad_args();
    Value n = Interpreter::to_number(I.scalar(*c.args[0]));
    return n.is_error() ? n : Value(std::fabs(n.number()));
}

Value fn_round(Interpreter& I, const CallNode& c) {
    if (!arity(c, 2, 2)) return bad_args();
    Value x = Interpreter::to_number(I.scalar(*c.args[0]));
    if (x.is_error()) return x;
    Value d = Interpreter::to_number(I.scalar(*c.args[1]));
    if (d.is_error()) return d;
    int digits = as_int(d.number());
    digits = std::clamp(digits, -15, 15);
    double factor = std::pow(10.0, std::abs(digits));
    // Half-away-from-zero on both sides of the decimal point.
    double out = digits >= 0 ? std::round(x.number() * factor) / factor
                             : std::round(x.number() / factor) * factor;
    if (!std::isfinite(out)) return Value(ErrorCode::Num);
    return Value(out);
}

Value fn_if(Interpreter& I, const CallNode& c) {
    if (!arity(c, 2, 3)) return bad_args();
    Value cond = Interpreter::to_condition(I.scalar(*c.args[0]));
    if (cond.is_error()) return cond;
    // Only the taken branch runs; errors in the other stay invisible.
    if (cond.boolean()) return I.scalar(*c.args[1]);
    if (c.args.size() == 3) return I.scalar(*c.args[2]);
    return Value(false);
}

Value logic_fold(Interpreter& I, const CallNode& c, bool conjunction) {
    if (c.args.empty()) return bad_args();
    bool acc = conjunction;
    bool any = false;
    for (const auto& arg : c.args) {
        XValue x = I.eval(*arg);
        if (x.handle) {
            Value stop = Value(Blank{});
            I.for_members(*x.handle, [&](CellCoord, const Value& v) {
                if (v.is_error()) { stop = v; return false; }
                if (v.is_number()) { any = true; acc = conjunction ? (acc && v.number() != 0) : (acc || v.number() != 0); }
                else if (v.is_bool()) { any = true; acc = conjunction ? (acc && v.boolean()) : (acc || v.boolean()); }
                return true;    // text members are ignored
            });
            if (stop.is_error()) return stop;
        } else {
            Value b = Interpreter::to_condition(x.scalar);
            if (b.is_error()) return b;
            any = true;
            acc = conjunction ? (acc && b.boolean()) : (acc || b.boolean());
        }
    }
    if (!any) return bad_args();
    return Value(acc);
}

Value fn_and(Interpreter& I, const CallNode& c) { return logic_fold(I, c, true); }
Value fn_or(Interpreter& I, const CallNode& c) { return logic_fold(I, c, false); }

Value fn_not(Interpreter& I, const CallNode& c) {
    if (!arity(c, 1, 1)) return bad_args();
    Value b = Interpreter::to_condition(I.scalar(*c.args[0]));
    return b.is_error() ? b : Value(!b.boolean());
}

// SUMIF criteria: an optional comparison prefix, then a number, text, or
// boolean operand. Bare criteria mean equality.
struct Criteria {
    BinOp op = BinOp::Eq;
    Value operand;
};

Criteria parse_criteria(const Value& v) {
    Criteria c;
    if (!v.is_text()) {
        c.operand = v;
        return c;
    }
    const std::string& t = v.text();
    std::size_t skip = 0;
    if (t.rfind("<>", 0) == 0) { c.op = BinOp::Ne; skip = 2; }
    else if (t.rfind(">=", 0) == 0) { c.op = BinOp::Ge; skip = 2; }
    else if (t.rfind("<=", 0) == 0) { c.op = BinOp::Le; skip = 2; }
    else if (t.rfind(">", 0) == 0) { c.op = BinOp::Gt; skip = 1; }
    else if (t.rfind("<", 0) == 0) { c.op = BinOp::Lt; skip = 1; }
    else if (t.rfind("=", 0) == 0) { c.op = BinOp::Eq; skip = 1; }
    std::string rest = t.substr(skip);
    if (text_looks_numeric(rest)) {
        try { c.operand = Value(std::stod(rest)); return c; }
        catch (const std::exception&) {}
    }
    c.operand = Value(rest);
    return c;
}

bool criteria_match(const Value& v, const Criteria& c) {
    const Value& o = c.operand;
    if (o.is_number()) {
        if (!v.is_number())
            return c.op == BinOp::Ne;   // "not equal to 10" admits non-numbers
        int cmp = v.number() < o.number() ? -1 : v.number() > o.number() ? 1 : 0;
        switch (c.op) {
            case BinOp::Eq: return cmp == 0;
            case BinOp::Ne: return cmp != 0;
            case BinOp::Lt: return cmp < 0;
            case BinOp::Le: return cmp <= 0;
            case BinOp::Gt: return cmp > 0;
            case BinOp::Ge: return cmp >= 0;
            default: return false;
        }
    }
    if (o.is_text()) {
        bool is_text = v.is_text();
        int cmp = is_text ? (ascii_lower(v.text()) < ascii_lower(o.text()) ? -1
                             : ascii_lower(v.text()) > ascii_lower(o.text()) ? 1 : 0)
                          : 0;
        switch (c.op) {
            case BinOp::Eq: return is_text && cmp == 0;
            case BinOp::Ne: return !(is_text && cmp == 0);
            case BinOp::Lt: return is_text && cmp < 0;
            case BinOp::Le: return is_text && cmp <= 0;
            case BinOp::Gt: return is_text && cmp > 0;
            case BinOp::Ge: return is_text && cmp >= 0;
            default: return false;
        }
    }
    if (o.is_bool()) {
        bool eq = v.is_bool() && v.boolean() == o.boolean();
        return c.op == BinOp::Ne ? !eq : eq;
    }
    if (o.is_blank()) {
        bool eq = v.is_blank();
        return c.op == BinOp::Ne ? !eq : eq;
    }
    return false;
}

Value fn_sumif(Interpreter& I, const CallNode& c) {
    if (!arity(c, 2, 3)) return bad_args();
    XValue range = I.eval(*c.args[0]);
    if (!range.handle) return range.scalar.is_error() ? range.scalar : bad_args();
    Value crit_value = I.scalar(*c.args[1]);
    if (crit_value.is_error()) return crit_value;
    Criteria crit = parse_criteria(crit_value);

    std::optional<RangeHandle> sum_range;
    if (c.args.size() == 3) {
        XValue sr = I.eval(*c.args[2]);
        if (!sr.handle) return sr.scalar.is_error() ? sr.scalar : bad_args();
        sum_range = *sr.handle;
    }

    const RangeHandle& test = *range.handle;
    double acc = 0;
    for (int row = test.range.start.row; row <= test.range.end.row; ++row) {
        for (int col = test.range.start.col; col <= test.range.end.col; ++col) {
            Value v = I.read_cell(test.sheet, {col, row}, test.construct);
            if (!criteria_match(v, crit)) continue;
            Value contribution = v;
            if (sum_range) {
                contribution = I.member_at(*sum_range, row - test.range.start.row,
                                           col - test.range.start.col, "");
            }
            if (contribution.is_error()) return contribution;
            if (contribution.is_number()) acc += contribution.number();
        }
    }
    return Value(acc);
}

// Shared scan for the approximate-match mode: largest comparable value not
// exceeding the key; later duplicates win. Returns the 0-based position or
// -1.
template <typename GetValue>
int approx_scan(int count, const Value& key, GetValue get) {
    int best = -1;
    Value best_v;
    for (int i = 0; i < count; ++i) {
        Value v = get(i);
        bool comparable = (key.is_number() && v.is_number()) ||
                          (key.is_text() && v.is_text()) ||
                          (key.is_bool() && v.is_bool());
        if (!comparable) continue;
        if (Interpreter::compare(v, key) > 0) continue;
        if (best == -1 || Interpreter::compare(v, best_v) >= 0) {
            best = i;
            best_v = v;
        }
    }
    return best;
}

template <typename GetValue>
int exact_scan(int count, const Value& key, GetValue get) {
    for (int i = 0; i < count; ++i) {
        Value v = get(i);
        bool comparable = (key.is_number() && v.is_number()) ||
                          (key.is_text() && v.is_text()) ||
                          (key.is_bool() && v.is_bool());
        if (comparable && Interpreter::compare(v, key) == 0) return i;
    }
    return -1;
}

Value lookup_impl(Interpreter& I, const CallNode& c, bool vertical) {
    if (!arity(c, 3, 4)) return bad_args();
    Value key = I.scalar(*c.args[0]);
    if (key.is_error()) return key;
    XValue table = I.eval(*c.args[1]);
    if (!table.handle) return table.scalar.is_error() ? table.scalar : bad_args();
    Value idx_v = Interpreter::to_number(I.scalar(*c.args[2]));
    if (idx_v.is_error()) return idx_v;
    int pick = as_int(idx_v.number());

    bool approximate = true;
    if (c.args.size() == 4) {
        Value flag = Interpreter::to_condition(I.scalar(*c.args[3]));
        if (flag.is_error()) return flag;
        approximate = flag.boolean();
    }

    const RangeHandle& h = *table.handle;
    int lanes = vertical ? h.range.height() : h.range.width();
    int breadth = vertical ? h.range.width() : h.range.height();
    if (pick < 1) return bad_args();
    if (pick > breadth) return Value(ErrorCode::Ref);

    auto key_at = [&](int i) {
        return vertical ? I.member_at(h, i, 0, "") : I.member_at(h, 0, i, "");
    };
    int found = approximate ? approx_scan(lanes, key, key_at) : exact_scan(lanes, key, key_at);
    if (found < 0) return Value(ErrorCode::NA);
    const char* construct = vertical ? "VLOOKUP" : "HLOOKUP";
    return vertical ? I.member_at(h, found, pick - 1, construct)
                    : I.member_at(h, pick - 1, found, construct);
}

Value fn_vlookup(Interpreter& I, const CallNode& c) { return lookup_impl(I, c, true); }
Value fn_hlookup(Interpreter& I, const CallNode& c) { return lookup_impl(I, c, false); }

Value fn_index(Interpreter& I, const CallNode& c) {
    if (!arity(c, 2, 3)) return bad_args();
    XValue range = I.eval(*c.args[0]);
    if (!range.handle) return range.scalar.is_error() ? range.scalar : bad_args();
    Value rv = Interpreter::to_number(I.scalar(*c.args[1]));
    if (rv.is_error()) return rv;
    int row = as_int(rv.number());
    int col = 1;
    if (c.args.size() == 3) {
        Value cv = Interpreter::to_number(I.scalar(*c.args[2]));
        if (cv.is_error()) return cv;
        col = as_int(cv.number());
    } else if (range.handle->range.height() == 1) {
        // Single-row vector: the one index walks along the row.
        col = row;
        row = 1;
    }
    if (row < 1 || col < 1) return bad_args();
    if (row > range.handle->range.height() || col > range.handle->range.width())
        return Value(ErrorCode::Ref);
    return I.member_at(*range.handle, row - 1, col - 1, "INDEX");
}

Value fn_match(Interpreter& I, const CallNode& c) {
    if (!arity(c, 2, 3)) return bad_args();
    Value key = I.scalar(*c.args[0]);
    if (key.is_error()) return key;
    XValue vec = I.eval(*c.args[1]);
    if (!vec.handle) return vec.scalar.is_error() ? vec.scalar : bad_args();
    int mode = 1;
    if (c.args.size() == 3) {
        Value mv = Interpreter::to_number(I.scalar(*c.args[2]));
        if (mv.is_error()) return mv;
        mode = as_int(mv.number());
    }
    if (mode != 0 && mode != 1) return bad_args();

    const RangeHandle& h = *vec.handle;
    bool column = h.range.width() == 1;
    bool row = h.range.height() == 1;
    if (!column && !row) return Value(ErrorCode::NA);
    int count = column ? h.range.height() : h.range.width();
    auto at = [&](int i) {
        return column ? I.member_at(h, i, 0, "") : I.member_at(h, 0, i, "");
    };
    int found = mode == 0 ? exact_scan(count, key, at) : approx_scan(count, key, at);
    if (found < 0) return Value(ErrorCode::NA);
    // Touch the matched cell so the dependency is visible in the graph.
    if (column) I.member_at(h, found, 0, "MATCH");
    else I.member_at(h, 0, found, "MATCH");
    return Value(static_cast<double>(found + 1));
}

XValue fn_offset(Interpreter& I, const CallNode& c) {
    if (!arity(c, 3, 5)) return bad_args();
    XValue base = I.eval(*c.args[0]);
    if (!base.handle) return base.scalar.is_error() ? base.scalar : bad_args();
    Value rv = Interpreter::to_number(I.scalar(*c.args[1]));
    if (rv.is_error()) return rv;
    Value cv = Interpreter::to_number(I.scalar(*c.args[2]));
    if (cv.is_error()) return cv;
    int height = base.handle->range.height();
    int width = base.handle->range.width();
    if (c.args.size() >= 4) {
        Value hv = Interpreter::to_number(I.scalar(*c.args[3]));
        if (hv.is_error()) return hv;
        height = as_int(hv.number());
    }
    if (c.args.size() == 5) {
        Value wv = Interpreter::to_number(I.scalar(*c.args[4]));
        if (wv.is_error()) return wv;
        width = as_int(wv.number());
    }
    if (height < 1 || width < 1) return Value(ErrorCode::Ref);
    CellCoord start{base.handle->range.start.col + as_int(cv.number()),
                    base.handle->range.start.row + as_int(rv.number())};
    if (start.col < 1 || start.row < 1) return Value(ErrorCode::Ref);
    CellCoord end{start.col + width - 1, start.row + height - 1};
    return RangeHandle{base.handle->sheet, {start, end}, "OFFSET"};
}

XValue fn_indirect(Interpreter& I, const CallNode& c) {
    if (!arity(c, 1, 1)) return bad_args();
    Value t = I.scalar(*c.args[0]);
    if (t.is_error()) return t;
    if (!t.is_text()) return Value(ErrorCode::Ref);
    const std::string& text = t.text();

    auto resolve_sheet = [&](const std::optional<std::string>& name) -> int {
        if (!name) return I.current_sheet();
        return I.workbook().sheet_index(*name);
    };

    try {
        Address a = parse_address(text, true);
        int sheet = resolve_sheet(a.sheet);
        if (sheet < 0) return Value(ErrorCode::Ref);
        return RangeHandle{sheet, {a.coord, a.coord}, "INDIRECT"};
    } catch (const std::exception&) {}

    // Sheet-qualified or bare range.
    std::string sheet_name, rest = text;
    bool has_sheet = false;
    if (!text.empty() && text[0] == '\'') {
        std::size_t p = 1;
        std::string name;
        for (;;) {
            if (p >= text.size()) return Value(ErrorCode::Ref);
            if (text[p] == '\'') {
                if (p + 1 < text.size() && text[p + 1] == '\'') { name += '\''; p += 2; continue; }
                ++p;
                break;
            }
            name += text[p++];
        }
        if (p >= text.size() || text[p] != '!') return Value(ErrorCode::Ref);
        sheet_name = name;
        rest = text.substr(p + 1);
        has_sheet = true;
    } else if (auto bang = text.find('!'); bang != std::string::npos) {
        if (bang == 0) return Value(ErrorCode::Ref);
        sheet_name = text.substr(0, bang);
        rest = text.substr(bang + 1);
        has_sheet = true;
    }
    int sheet = has_sheet ? I.workbook().sheet_index(sheet_name) : I.current_sheet();
    if (sheet < 0) return Value(ErrorCode::Ref);
    std::string cleaned;
    for (char ch : rest)
        if (ch != '$') cleaned += ch;
    try {
        return RangeHandle{sheet, parse_range(cleaned), "INDIRECT"};
    } catch (const std::exception&) {
        return Value(ErrorCode::Ref);
    }
}

} // namespace

XValue call_function(Interpreter& I, const CallNode& call) {
    const std::string& n = call.name;
    if (n == "SUM") return fn_sum(I, call);
    if (n == "MIN") return fn_min(I, call);
    if (n == "MAX") return fn_max(I, call);
    if (n == "COUNT") return fn_count(I, call);
    if (n == "COUNTA") return fn_counta(I, call);
    if (n == "ABS") return fn_abs(I, call);
    if (n == "ROUND") return fn_round(I, call);
    if (n == "IF") return fn_if(I, call);
    if (n == "AND") return fn_and(I, call);
    if (n == "OR") return fn_or(I, call);
    if (n == "NOT") return fn_not(I, call);
    if (n == "SUMIF") return fn_sumif(I, call);
    if (n == "VLOOKUP") return fn_vlookup(I, call);
    if (n == "HLOOKUP") return fn_hlookup(I, call);
    if (n == "INDEX") return fn_index(I, call);
    if (n == "MATCH") return fn_match(I, call);
    if (n == "OFFSET") return fn_offset(I, call);
    if (n == "INDIRECT") return fn_indirect(I, call);
    throw UnsupportedFunction{n};
}

} // namespace detail
} // namespace sheetlens
