#include "sheetlens/formula.hpp"

#include <algorithm>

namespace sheetlens {

namespace {

struct Counters {
    int funcs = 0;
    int operators = 0;
    int refs = 0;
    std::vector<double> literals;
    std::vector<std::string> names;
    bool external = false;
};

// Returns the function-nesting depth of the subtree while accumulating the
// flat counters.
int walk(const AstNode& n, Counters& c) {
    return std::visit(
        [&](const auto& v) -> int {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, CallNode>) {
                ++c.funcs;
                c.names.push_back(v.name);
                int deepest = 0;
                for (const auto& a : v.args) deepest = std::max(deepest, walk(*a, c));
                return deepest + 1;
            } else if constexpr (std::is_same_v<T, BinaryNode>) {
                ++c.operators;
                return std::max(walk(*v.left, c), walk(*v.right, c));
            } else if constexpr (std::is_same_v<T, UnaryNode>) {
                ++c.operators;
                return walk(*v.operand, c);
            } else if constexpr (std::is_same_v<T, RefNode> ||
                                 std::is_same_v<T, RangeNode>) {
                ++c.refs;
                if (v.book) c.external = true;
                return 0;
            } else if constexpr (std::is_same_v<T, NameNode>) {
                ++c.refs;
                return 0;
            } else if constexpr (std::is_same_v<T, NumberLit>) {
                c.literals.push_back(v.value);
                return 0;
            } else {
                return 0;
            }
        },
        n.node);
}

// Depth of IF calls stacked inside IF calls, other nodes pass through.
int if_depth(const AstNode& n) {
    return std::visit(
        [&](const auto& v) -> int {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, CallNode>) {
                int deepest = 0;
                for (const auto& a : v.args) deepest = std::max(deepest, if_depth(*a));
                return deepest + (v.name == "IF" ? 1 : 0);
            } else if constexpr (std::is_same_v<T, BinaryNode>) {
                return std::max(if_depth(*v.left), if_depth(*v.right));
            } else if constexpr (std::is_same_v<T, UnaryNode>) {
                return if_depth(*v.operand);
            } else {
                return 0;
            }
        },
        n.node);
}

} // namespace

FormulaMetrics formula_metrics(const AstNode& root, const std::string& text) {
    FormulaMetrics m;
    Counters c;
    m.max_nesting_depth = walk(root, c);
    m.func_count = c.funcs;
    m.operator_count = c.operators;
    m.ref_count = c.refs;
    m.max_if_depth = if_depth(root);
    m.length = text.empty() ? 0 : static_cast<int>(text.size()) - 1;
    m.complexity = m.func_count + m.operator_count + m.max_nesting_depth;
    m.numeric_literals = std::move(c.literals);
    std::sort(c.names.begin(), c.names.end());
    c.names.erase(std::unique(c.names.begin(), c.names.end()), c.names.end());
    m.function_names = std::move(c.names);
    m.has_external_ref = c.external;
    return m;
}

} // namespace sheetlens
