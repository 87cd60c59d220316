#include "sheetlens/formula.hpp"

namespace sheetlens {

namespace {

// Binding strength, atoms highest. Used to decide where parentheses are
// required to reproduce the tree.
int precedence(const AstNode& n) {
    return std::visit(
        [](const auto& v) -> int {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, BinaryNode>) {
                switch (v.op) {
                    case BinOp::Eq: case BinOp::Ne: case BinOp::Lt:
                    case BinOp::Le: case BinOp::Gt: case BinOp::Ge: return 1;
                    case BinOp::Concat: return 2;
                    case BinOp::Add: case BinOp::Sub: return 3;
                    case BinOp::Mul: case BinOp::Div: return 4;
                    case BinOp::Pow: return 5;
                }
                return 1;
            } else if constexpr (std::is_same_v<T, UnaryNode>) {
                return v.op == UnOp::Percent ? 7 : 6;
            } else {
                return 8;
            }
        },
        n.node);
}

bool book_needs_quoting(const std::string& book) {
    for (char ch : book) {
        bool plain = std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' ||
                     ch == '.' || ch == '-' || ch == ' ';
        // Spaces in the book name force quoting just like in sheet names.
        if (!plain || ch == ' ') return true;
    }
    return book.empty();
}

std::string quote_name(const std::string& name) {
    std::string out = "'";
    for (char ch : name) {
        out += ch;
        if (ch == '\'') out += '\'';
    }
    out += '\'';
    return out;
}

std::string ref_prefix(const std::optional<std::string>& book,
                       const std::optional<std::string>& sheet) {
    if (!book && !sheet) return "";
    std::string inner;
    bool quote = false;
    if (book) {
        inner = "[" + *book + "]" + (sheet ? *sheet : "");
        quote = book_needs_quoting(*book) || (sheet && sheet_name_needs_quoting(*sheet));
    } else {
        inner = *sheet;
        quote = sheet_name_needs_quoting(*sheet);
    }
    return (quote ? quote_name(inner) : inner) + "!";
}

std::string a1_part(const Address& a) {
    std::string out;
    if (a.col_abs) out += '$';
    out += column_name(a.coord.col);
    if (a.row_abs) out += '$';
    out += std::to_string(a.coord.row);
    return out;
}

std::string r1c1_axis(char axis, int value, bool abs, int origin) {
    std::string out(1, axis);
    if (abs) {
        out += std::to_string(value);
    } else if (int off = value - origin; off != 0) {
        out += '[' + std::to_string(off) + ']';
    }
    return out;
}

std::string r1c1_part(const Address& a, CellCoord origin) {
    return r1c1_axis('R', a.coord.row, a.row_abs, origin.row) +
           r1c1_axis('C', a.coord.col, a.col_abs, origin.col);
}

struct Renderer {
    bool r1c1 = false;
    CellCoord origin{};

    std::string ref_part(const Address& a) const {
        return r1c1 ? r1c1_part(a, origin) : a1_part(a);
    }

    std::string walk(const AstNode& n) const {
        return std::visit(
            [&](const auto& v) -> std::string {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, NumberLit>) {
                    return render_number(v.value);
                } else if constexpr (std::is_same_v<T, TextLit>) {
                    std::string out = "\"";
                    for (char ch : v.text) {
                        out += ch;
                        if (ch == '"') out += '"';
                    }
                    return out + '"';
                } else if constexpr (std::is_same_v<T, BoolLit>) {
                    return v.value ? "TRUE" : "FALSE";
                } else if constexpr (std::is_same_v<T, ErrorLit>) {
                    return error_text(v.code);
                } else if constexpr (std::is_same_v<T, RefNode>) {
                    return ref_prefix(v.book, v.addr.sheet) + ref_part(v.addr);
                } else if constexpr (std::is_same_v<T, RangeNode>) {
                    return ref_prefix(v.book, v.start.sheet) + ref_part(v.start) + ":" +
                           ref_part(v.end);
                } else if constexpr (std::is_same_v<T, NameNode>) {
                    return v.name;
                } else if constexpr (std::is_same_v<T, CallNode>) {
                    std::string out = v.name + "(";
                    for (std::size_t i = 0; i < v.args.size(); ++i) {
                        if (i) out += ',';
                        out += walk(*v.args[i]);
                    }
                    return out + ')';
                } else if constexpr (std::is_same_v<T, BinaryNode>) {
                    int mine = precedence(AstNode{BinaryNode{v.op, nullptr, nullptr}});
                    std::string left = child(*v.left, mine, false);
                    std::string right = child(*v.right, mine, true);
                    return left + binop_text(v.op) + right;
                } else {
                    static_assert(std::is_same_v<T, UnaryNode>);
                    if (v.op == UnOp::Percent)
                        return child(*v.operand, 7, false) + "%";
                    return std::string(unop_text(v.op)) + child(*v.operand, 6, false);
                }
            },
            n.node);
    }

    // Operators associate left, so a right-hand child of equal precedence
    // needs parentheses to survive a reparse; a left-hand one does not.
    std::string child(const AstNode& n, int parent_prec, bool right_side) const {
        int p = precedence(n);
        bool parens = right_side ? p <= parent_prec : p < parent_prec;
        std::string s = walk(n);
        return parens ? "(" + s + ")" : s;
    }
};

} // namespace

std::string render_formula(const AstNode& root) {
    Renderer r;
    return "=" + r.walk(root);
}

NormalizedFormula normalize_formula(const AstNode& root, CellCoord origin) {
    Renderer r{true, origin};
    return {"=" + r.walk(root), origin};
}

} // namespace sheetlens
