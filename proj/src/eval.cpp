#include "eval_internal.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <queue>

namespace sheetlens {

using detail::Interpreter;

namespace detail {

Interpreter::Interpreter(const Workbook& wb, const DepGraph& g, std::span<const ParsedCell> cells)
    : wb_(wb), g_(g), cells_(cells) {
    for (const ParsedCell& pc : cells_)
        formula_at_[cell_key(pc.sheet, pc.coord)] = &pc;
}

// Kahn over the static graph with a min-heap on node index, so the visit
// sequence is a function of the graph alone. Static-cycle members are
// seeded as ready (their value is pinned to #CIRC! up front) which also
// releases everything downstream of a cycle.
std::vector<int> Interpreter::topo_order() const {
    const int n = static_cast<int>(g_.nodes.size());
    std::vector<int> indegree(n, 0);
    for (const GraphEdge& e : g_.edges)
        if (!e.dynamic) ++indegree[e.dependent];

    std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
    std::vector<bool> queued(n, false);
    for (int i = 0; i < n; ++i)
        if (indegree[i] == 0) { ready.push(i); queued[i] = true; }
    for (const CellKey& key : circ_seeds_) {
        auto it = g_.cell_index.find(key);
        if (it != g_.cell_index.end() && !queued[it->second]) {
            ready.push(it->second);
            queued[it->second] = true;
        }
    }

    std::vector<int> order;
    order.reserve(n);
    std::vector<bool> done(n, false);
    while (!ready.empty()) {
        int v = ready.top();
        ready.pop();
        if (done[v]) continue;
        done[v] = true;
        order.push_back(v);
        for (int w : g_.dependents_of[v]) {
            if (--indegree[w] <= 0 && !queued[w]) {
                ready.push(w);
                queued[w] = true;
            }
        }
    }
    // Anything not reached sits inside or below an unseeded cycle; visit it
    // in index order for determinism (values there are #CIRC! anyway).
    for (int i = 0; i < n; ++i)
        if (!done[i]) order.push_back(i);
    return order;
}

Value Interpreter::read_cell(int sheet, CellCoord c, const std::string& construct) {
    if (!construct.empty() && current_)
        dynamic_.emplace(CellKey{sheet, c.row, c.col},
                         cell_key(current_->sheet, current_->coord), construct);
    CellKey key{sheet, c.row, c.col};
    if (auto it = formula_at_.find(key); it != formula_at_.end()) {
        if (auto un = unevaluated_.find(key); un != unevaluated_.end())
            return Value(ErrorCode::Name);
        if (auto v = values_.find(key); v != values_.end())
            return v->second;
        // Only reachable through a dynamic construct on the first pass: the
        // static order would have computed the cell already.
        premature_read_ = true;
        return Value(Blank{});
    }
    if (sheet < 0 || sheet >= static_cast<int>(wb_.sheets.size())) return Value(ErrorCode::Ref);
    const CellContent* cell = wb_.sheets[sheet].find_cell(c);
    return cell ? cell->literal : Value(Blank{});
}

void Interpreter::for_members(const RangeHandle& h,
                              const std::function<bool(CellCoord, const Value&)>& fn) {
    if (h.sheet < 0 || h.sheet >= static_cast<int>(wb_.sheets.size())) return;
    const Sheet& sheet = wb_.sheets[h.sheet];
    auto it = sheet.cells.lower_bound({1, h.range.start.row});
    for (; it != sheet.cells.end() && it->first.row <= h.range.end.row; ++it) {
        if (!h.range.contains(it->first)) continue;
        Value v = read_cell(h.sheet, it->first, h.construct);
        if (v.is_blank()) continue;
        if (!fn(it->first, v)) return;
    }
}

Value Interpreter::member_at(const RangeHandle& h, int row_off, int col_off,
                             const std::string& construct) {
    CellCoord c{h.range.start.col + col_off, h.range.start.row + row_off};
    return read_cell(h.sheet, c, construct.empty() ? h.construct : construct);
}

Value Interpreter::to_number(const Value& v) {
    if (v.is_error()) return v;
    if (v.is_number()) return v;
    if (v.is_bool()) return Value(v.boolean() ? 1.0 : 0.0);
    if (v.is_blank()) return Value(0.0);
    const std::string& t = v.text();
    std::size_t b = 0, e = t.size();
    while (b < e && std::isspace(static_cast<unsigned char>(t[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(t[e - 1]))) --e;
    if (b < e) {
        try {
            std::size_t used = 0;
            double d = std::stod(t.substr(b, e - b), &used);
            if (used == e - b) return Value(d);
        } catch (const std::exception&) {}
    }
    return Value(ErrorCode::Value);
}

Value Interpreter::to_text_value(const Value& v) {
    if (v.is_error()) return v;
    return Value(render_value(v));
}

Value Interpreter::to_condition(const Value& v) {
    if (v.is_error()) return v;
    if (v.is_bool()) return v;
    if (v.is_number()) return Value(v.number() != 0.0);
    if (v.is_blank()) return Value(false);
    std::string t = ascii_lower(v.text());
    if (t == "true") return Value(true);
    if (t == "false") return Value(false);
    return Value(ErrorCode::Value);
}

// Comparison ordering: numbers sort below text, text below booleans; blanks
// match the other side's neutral value but are never silently booleans.
int Interpreter::compare(const Value& a, const Value& b) {
    return compare_values(a, b);
}

Value Interpreter::deref(const XValue& v) {
    if (!v.handle) return v.scalar;
    const RangeHandle& h = *v.handle;
    if (!h.single()) return Value(ErrorCode::Value);
    return read_cell(h.sheet, h.range.start, h.construct);
}

Value Interpreter::scalar(const AstNode& n) { return deref(eval(n)); }

XValue Interpreter::eval_ref(const RefNode& ref) {
    if (ref.book) return Value(ErrorCode::Ref);   // other workbooks are not loaded
    int sheet = current_->sheet;
    if (ref.addr.sheet) {
        sheet = wb_.sheet_index(*ref.addr.sheet);
        if (sheet < 0) return Value(ErrorCode::Ref);
    }
    return RangeHandle{sheet, {ref.addr.coord, ref.addr.coord}, ""};
}

XValue Interpreter::eval_range(const RangeNode& range) {
    if (range.book) return Value(ErrorCode::Ref);
    int sheet = current_->sheet;
    if (range.start.sheet) {
        sheet = wb_.sheet_index(*range.start.sheet);
        if (sheet < 0) return Value(ErrorCode::Ref);
    }
    CellRange r;
    r.start = {std::min(range.start.coord.col, range.end.coord.col),
               std::min(range.start.coord.row, range.end.coord.row)};
    r.end = {std::max(range.start.coord.col, range.end.coord.col),
             std::max(range.start.coord.row, range.end.coord.row)};
    return RangeHandle{sheet, r, ""};
}

Value Interpreter::eval_binary(const BinaryNode& b) {
    Value l = scalar(*b.left);
    if (l.is_error()) return l;
    Value r = scalar(*b.right);
    if (r.is_error()) return r;

    switch (b.op) {
        case BinOp::Concat: {
            Value lt = to_text_value(l);
            Value rt = to_text_value(r);
            return Value(lt.text() + rt.text());
        }
        case BinOp::Eq: return Value(compare(l, r) == 0);
        case BinOp::Ne: return Value(compare(l, r) != 0);
        case BinOp::Lt: return Value(compare(l, r) < 0);
        case BinOp::Le: return Value(compare(l, r) <= 0);
        case BinOp::Gt: return Value(compare(l, r) > 0);
        case BinOp::Ge: return Value(compare(l, r) >= 0);
        default: break;
    }

    Value ln = to_number(l);
    if (ln.is_error()) return ln;
    Value rn = to_number(r);
    if (rn.is_error()) return rn;
    double x = ln.number(), y = rn.number(), out = 0;
    switch (b.op) {
        case BinOp::Add: out = x + y; break;
        case BinOp::Sub: out = x - y; break;
        case BinOp::Mul: out = x * y; break;
        case BinOp::Div:
            if (y == 0.0) return Value(ErrorCode::Div0);
            out = x / y;
            break;
        case BinOp::Pow:
            if (x == 0.0 && y == 0.0) return Value(ErrorCode::Num);
            out = std::pow(x, y);
            break;
        default: break;
    }
    if (!std::isfinite(out)) return Value(ErrorCode::Num);
    return Value(out);
}

Value Interpreter::eval_unary(const UnaryNode& u) {
    Value v = scalar(*u.operand);
    if (v.is_error()) return v;
    switch (u.op) {
        case UnOp::Plus: return v;    // sign-preserving no-op
        case UnOp::Minus: {
            Value n = to_number(v);
            return n.is_error() ? n : Value(-n.number());
        }
        case UnOp::Percent: {
            Value n = to_number(v);
            return n.is_error() ? n : Value(n.number() / 100.0);
        }
    }
    return Value(ErrorCode::Value);
}

XValue Interpreter::eval(const AstNode& n) {
    return std::visit(
        [&](const auto& v) -> XValue {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, NumberLit>) return Value(v.value);
            else if constexpr (std::is_same_v<T, TextLit>) return Value(v.text);
            else if constexpr (std::is_same_v<T, BoolLit>) return Value(v.value);
            else if constexpr (std::is_same_v<T, ErrorLit>) return Value(v.code);
            else if constexpr (std::is_same_v<T, RefNode>) return eval_ref(v);
            else if constexpr (std::is_same_v<T, RangeNode>) return eval_range(v);
            else if constexpr (std::is_same_v<T, NameNode>) {
                auto resolved = resolve_defined_name(wb_, v.name);
                if (!resolved) return Value(ErrorCode::Name);
                return RangeHandle{resolved->sheet, resolved->range, ""};
            }
            else if constexpr (std::is_same_v<T, CallNode>) return call_function(*this, v);
            else if constexpr (std::is_same_v<T, BinaryNode>) return eval_binary(v);
            else return eval_unary(v);
        },
        n.node);
}

Value Interpreter::eval_formula_cell(const ParsedCell& pc) {
    current_ = &pc;
    return deref(eval(*pc.ast));
}

EvalResult Interpreter::run(const std::vector<Cycle>& static_cycles) {
    EvalResult result;

    for (const Cycle& cycle : static_cycles) {
        for (int idx : cycle.nodes) {
            const GraphNode& node = g_.nodes[idx];
            if (node.kind != NodeKind::Cell) continue;
            CellKey key = cell_key(node.sheet, node.coord);
            if (!formula_at_.count(key)) continue;
            circ_.insert(key);
            circ_seeds_.push_back(key);
            values_[key] = Value(ErrorCode::Circ);
            result.static_cycle_cells.push_back(key);
        }
    }

    std::vector<const ParsedCell*> sequence;
    sequence.reserve(cells_.size());
    for (int idx : topo_order()) {
        const GraphNode& node = g_.nodes[idx];
        if (node.kind != NodeKind::Cell) continue;
        auto it = formula_at_.find(cell_key(node.sheet, node.coord));
        if (it != formula_at_.end() && !circ_.count(it->first))
            sequence.push_back(it->second);
    }

    for (pass_ = 1; pass_ <= 3; ++pass_) {
        premature_read_ = false;
        dynamic_.clear();
        std::set<CellKey> changed;
        for (const ParsedCell* pc : sequence) {
            CellKey key = cell_key(pc->sheet, pc->coord);
            if (unevaluated_.count(key)) continue;
            Value v;
            try {
                v = eval_formula_cell(*pc);
            } catch (const UnsupportedFunction& u) {
                unevaluated_[key] = u.name;
                values_.erase(key);
                continue;
            }
            auto [it, fresh] = values_.emplace(key, v);
            if (!fresh) {
                if (!(it->second == v)) changed.insert(key);
                it->second = v;
            }
        }
        result.passes = pass_;
        if (pass_ == 1 && !premature_read_) break;
        if (pass_ == 2 && changed.empty()) break;
        if (pass_ == 3) {
            // Still moving after a recompute against a complete value map:
            // genuinely circular through a dynamic construct.
            for (const CellKey& key : changed)
                values_[key] = Value(ErrorCode::Circ);
            break;
        }
    }
    current_ = nullptr;

    result.values = std::move(values_);
    result.unevaluated = std::move(unevaluated_);
    for (const auto& [from, to, construct] : dynamic_) {
        DynamicEdge e;
        e.from_sheet = std::get<0>(from);
        e.from = {std::get<2>(from), std::get<1>(from)};
        e.to_sheet = std::get<0>(to);
        e.to = {std::get<2>(to), std::get<1>(to)};
        e.construct = construct;
        result.dynamic_edges.push_back(std::move(e));
    }
    std::sort(result.dynamic_edges.begin(), result.dynamic_edges.end());
    for (const auto& [key, value] : result.values)
        if (value.is_error()) ++result.error_cells;
    return result;
}

} // namespace detail

EvalResult evaluate(const Workbook& wb, const DepGraph& g,
                    std::span<const ParsedCell> cells,
                    const std::vector<Cycle>& static_cycles) {
    Interpreter interp(wb, g, cells);
    return interp.run(static_cycles);
}

namespace {

void annotate(const Workbook& wb, const DepGraph& g, const EvalResult& eval, TraceNode& t) {
    if (t.node >= 0) {
        const GraphNode& node = g.nodes[t.node];
        if (node.kind == NodeKind::Cell) {
            CellKey key = cell_key(node.sheet, node.coord);
            if (auto it = eval.values.find(key); it != eval.values.end()) {
                t.value = it->second;
            } else if (eval.unevaluated.count(key)) {
                t.value = Value(ErrorCode::Name);
            } else if (node.sheet >= 0 && node.sheet < static_cast<int>(wb.sheets.size())) {
                const CellContent* cell = wb.sheets[node.sheet].find_cell(node.coord);
                t.value = cell ? cell->literal : Value(Blank{});
            }
        }
    }
    for (TraceNode& child : t.children) annotate(wb, g, eval, child);
}

} // namespace

TraceNode trace_precedents(const Workbook& wb, const DepGraph& g, const EvalResult& eval,
                           int sheet, CellCoord coord, int depth) {
    TraceNode root;
    if (auto node = g.cell_node(sheet, coord)) {
        root = precedents_tree(g, *node, depth);
    } else {
        root.node = -1;
    }
    annotate(wb, g, eval, root);
    if (root.node == -1 && sheet >= 0 && sheet < static_cast<int>(wb.sheets.size())) {
        const CellContent* cell = wb.sheets[sheet].find_cell(coord);
        root.value = cell ? cell->literal : Value(Blank{});
    }
    return root;
}

} // namespace sheetlens
