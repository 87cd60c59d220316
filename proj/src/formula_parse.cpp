#include "sheetlens/formula.hpp"

#include <array>
#include <cctype>
#include <charconv>

namespace sheetlens {

const char* binop_text(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
        case BinOp::Pow: return "^";
        case BinOp::Concat: return "&";
        case BinOp::Eq: return "=";
        case BinOp::Ne: return "<>";
        case BinOp::Lt: return "<";
        case BinOp::Le: return "<=";
        case BinOp::Gt: return ">";
        case BinOp::Ge: return ">=";
    }
    return "?";
}

const char* unop_text(UnOp op) {
    switch (op) {
        case UnOp::Plus: return "+";
        case UnOp::Minus: return "-";
        case UnOp::Percent: return "%";
    }
    return "?";
}

namespace {

enum class Tok { End, Number, String, Error, Ident, LParen, RParen, Comma, Colon, Op, Percent };

struct Token {
    Tok kind = Tok::End;
    std::size_t pos = 0;
    double num = 0.0;
    std::string text;                   // string body, error text, or operator
    std::optional<std::string> book;    // ident qualifiers
    std::optional<std::string> sheet;
    std::string core;                   // ident payload after qualifiers
};

bool ident_char(char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.' || ch == '$';
}

class Lexer {
public:
    Lexer(const std::string& text, std::size_t start) : text_(text), pos_(start) { advance(); }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
        tok_ = Token{};
        tok_.pos = pos_;
        if (pos_ >= text_.size()) { tok_.kind = Tok::End; return; }
        char ch = text_[pos_];

        if (std::isdigit(static_cast<unsigned char>(ch)) ||
            (ch == '.' && pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
            double out;
            auto res = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), out);
            if (res.ec != std::errc())
                throw ParseError("bad number literal", pos_);
            tok_.kind = Tok::Number;
            tok_.num = out;
            pos_ = static_cast<std::size_t>(res.ptr - text_.data());
            return;
        }

        if (ch == '"') { lex_string(); return; }
        if (ch == '#') { lex_error(); return; }

        switch (ch) {
            case '(': tok_.kind = Tok::LParen; ++pos_; return;
            case ')': tok_.kind = Tok::RParen; ++pos_; return;
            case ',': tok_.kind = Tok::Comma; ++pos_; return;
            case ':': tok_.kind = Tok::Colon; ++pos_; return;
            case '%': tok_.kind = Tok::Percent; ++pos_; return;
            default: break;
        }

        if (ch == '<' || ch == '>') {
            tok_.kind = Tok::Op;
            tok_.text = ch;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '=' || (ch == '<' && text_[pos_] == '>'))) {
                tok_.text += text_[pos_];
                ++pos_;
            }
            return;
        }
        if (std::string("=+-*/^&").find(ch) != std::string::npos) {
            tok_.kind = Tok::Op;
            tok_.text = ch;
            ++pos_;
            return;
        }

        if (ch == '\'' || ch == '[' || ch == '$' || ch == '_' ||
            std::isalpha(static_cast<unsigned char>(ch))) {
            lex_ident();
            return;
        }
        throw ParseError(std::string("unexpected character '") + ch + "'", pos_);
    }

    void lex_string() {
        std::size_t start = pos_++;
        std::string out;
        for (;;) {
            if (pos_ >= text_.size()) throw ParseError("unterminated string literal", start);
            char ch = text_[pos_];
            if (ch == '"') {
                if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
                    out += '"';
                    pos_ += 2;
                    continue;
                }
                ++pos_;
                break;
            }
            out += ch;
            ++pos_;
        }
        tok_.kind = Tok::String;
        tok_.text = std::move(out);
    }

    void lex_error() {
        static constexpr std::array<const char*, 8> codes{
            "#DIV/0!", "#VALUE!", "#NAME?", "#NULL!", "#CIRC!", "#NUM!", "#REF!", "#N/A"};
        for (const char* code : codes) {
            std::size_t n = std::char_traits<char>::length(code);
            if (text_.compare(pos_, n, code) == 0) {
                tok_.kind = Tok::Error;
                tok_.text = code;
                pos_ += n;
                return;
            }
        }
        throw ParseError("unknown error literal", pos_);
    }

    std::string lex_quoted() {
        std::size_t start = pos_++;
        std::string out;
        for (;;) {
            if (pos_ >= text_.size()) throw ParseError("unterminated quoted name", start);
            char ch = text_[pos_];
            if (ch == '\'') {
                if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '\'') {
                    out += '\'';
                    pos_ += 2;
                    continue;
                }
                ++pos_;
                return out;
            }
            out += ch;
            ++pos_;
        }
    }

    std::string lex_bracketed() {
        std::size_t start = pos_++;
        std::string out;
        for (;;) {
            if (pos_ >= text_.size()) throw ParseError("unterminated '[' in reference", start);
            char ch = text_[pos_++];
            if (ch == ']') return out;
            out += ch;
        }
    }

    std::string lex_ident_chars() {
        std::string out;
        while (pos_ < text_.size() && ident_char(text_[pos_])) out += text_[pos_++];
        return out;
    }

    void lex_ident() {
        tok_.kind = Tok::Ident;
        char ch = text_[pos_];
        if (ch == '\'') {
            std::string qualifier = lex_quoted();
            if (pos_ >= text_.size() || text_[pos_] != '!')
                throw ParseError("expected '!' after quoted name", pos_);
            ++pos_;
            if (!qualifier.empty() && qualifier[0] == '[') {
                auto close = qualifier.find(']');
                if (close == std::string::npos)
                    throw ParseError("unterminated '[' in reference", tok_.pos);
                tok_.book = qualifier.substr(1, close - 1);
                tok_.sheet = qualifier.substr(close + 1);
            } else {
                tok_.sheet = qualifier;
            }
            tok_.core = lex_ident_chars();
            if (tok_.core.empty())
                throw ParseError("expected cell or name after '!'", pos_);
            return;
        }
        if (ch == '[') {
            tok_.book = lex_bracketed();
            std::string sheet = lex_ident_chars();
            if (pos_ >= text_.size() || text_[pos_] != '!')
                throw ParseError("expected '!' after external sheet name", pos_);
            ++pos_;
            tok_.sheet = sheet;
            tok_.core = lex_ident_chars();
            if (tok_.core.empty())
                throw ParseError("expected cell or name after '!'", pos_);
            return;
        }
        std::string part = lex_ident_chars();
        if (part.empty())
            throw ParseError("expected identifier", pos_);
        if (pos_ < text_.size() && text_[pos_] == '!') {
            ++pos_;
            tok_.sheet = part;
            tok_.core = lex_ident_chars();
            if (tok_.core.empty())
                throw ParseError("expected cell or name after '!'", pos_);
            return;
        }
        tok_.core = part;
    }

    const std::string& text_;
    std::size_t pos_;
    Token tok_;
};

// "$AB$12" -> column/row plus the $ flags; nullopt when the identifier is
// not shaped like a cell.
struct CellCore {
    int col, row;
    bool col_abs, row_abs;
};

std::optional<CellCore> match_cell_core(const std::string& core) {
    std::size_t p = 0;
    CellCore out{0, 0, false, false};
    if (p < core.size() && core[p] == '$') { out.col_abs = true; ++p; }
    std::size_t letters = p;
    while (p < core.size() && std::isalpha(static_cast<unsigned char>(core[p]))) ++p;
    if (p == letters || p - letters > 5) return std::nullopt;
    std::string col = core.substr(letters, p - letters);
    if (p < core.size() && core[p] == '$') { out.row_abs = true; ++p; }
    std::size_t digits = p;
    while (p < core.size() && std::isdigit(static_cast<unsigned char>(core[p]))) ++p;
    if (p == digits || p != core.size() || p - digits > 8 || core[digits] == '0') return std::nullopt;
    out.col = column_number(col);
    out.row = std::stoi(core.substr(digits));
    return out;
}

bool equals_ci(const std::string& a, const char* b) {
    std::size_t n = std::char_traits<char>::length(b);
    if (a.size() != n) return false;
    for (std::size_t i = 0; i < n; ++i)
        if (std::toupper(static_cast<unsigned char>(a[i])) != b[i]) return false;
    return true;
}

AstPtr make(AstNode&& n) { return std::make_unique<AstNode>(std::move(n)); }

class Parser {
public:
    Parser(const std::string& text) : lex_(text, 1) {}

    AstPtr run() {
        AstPtr root = comparison();
        if (lex_.peek().kind != Tok::End)
            throw ParseError("unexpected trailing input", lex_.peek().pos);
        return root;
    }

private:
    AstPtr comparison() {
        AstPtr left = concat();
        for (;;) {
            const Token& t = lex_.peek();
            if (t.kind != Tok::Op) return left;
            BinOp op;
            if (t.text == "=") op = BinOp::Eq;
            else if (t.text == "<>") op = BinOp::Ne;
            else if (t.text == "<") op = BinOp::Lt;
            else if (t.text == "<=") op = BinOp::Le;
            else if (t.text == ">") op = BinOp::Gt;
            else if (t.text == ">=") op = BinOp::Ge;
            else return left;
            lex_.take();
            left = make({BinaryNode{op, std::move(left), concat()}});
        }
    }

    AstPtr concat() {
        AstPtr left = additive();
        while (lex_.peek().kind == Tok::Op && lex_.peek().text == "&") {
            lex_.take();
            left = make({BinaryNode{BinOp::Concat, std::move(left), additive()}});
        }
        return left;
    }

    AstPtr additive() {
        AstPtr left = multiplicative();
        for (;;) {
            const Token& t = lex_.peek();
            if (t.kind != Tok::Op || (t.text != "+" && t.text != "-")) return left;
            BinOp op = t.text == "+" ? BinOp::Add : BinOp::Sub;
            lex_.take();
            left = make({BinaryNode{op, std::move(left), multiplicative()}});
        }
    }

    AstPtr multiplicative() {
        AstPtr left = power();
        for (;;) {
            const Token& t = lex_.peek();
            if (t.kind != Tok::Op || (t.text != "*" && t.text != "/")) return left;
            BinOp op = t.text == "*" ? BinOp::Mul : BinOp::Div;
            lex_.take();
            left = make({BinaryNode{op, std::move(left), power()}});
        }
    }

    AstPtr power() {
        AstPtr left = unary();
        while (lex_.peek().kind == Tok::Op && lex_.peek().text == "^") {
            lex_.take();
            left = make({BinaryNode{BinOp::Pow, std::move(left), unary()}});
        }
        return left;
    }

    AstPtr unary() {
        const Token& t = lex_.peek();
        if (t.kind == Tok::Op && (t.text == "+" || t.text == "-")) {
            UnOp op = t.text == "+" ? UnOp::Plus : UnOp::Minus;
            lex_.take();
            return make({UnaryNode{op, unary()}});
        }
        return postfix();
    }

    AstPtr postfix() {
        AstPtr node = primary();
        while (lex_.peek().kind == Tok::Percent) {
            lex_.take();
            node = make({UnaryNode{UnOp::Percent, std::move(node)}});
        }
        return node;
    }

    AstPtr primary() {
        Token t = lex_.take();
        switch (t.kind) {
            case Tok::Number:
                return make({NumberLit{t.num}});
            case Tok::String:
                return make({TextLit{std::move(t.text)}});
            case Tok::Error:
                return make({ErrorLit{*error_from_text(t.text)}});
            case Tok::LParen: {
                AstPtr inner = comparison();
                expect_rparen(lex_.peek().pos);
                return inner;
            }
            case Tok::Ident:
                return ident(std::move(t));
            default:
                throw ParseError("expected a value, reference, or function", t.pos);
        }
    }

    void expect_rparen(std::size_t pos) {
        Token t = lex_.take();
        if (t.kind != Tok::RParen) throw ParseError("expected ')'", pos);
    }

    AstPtr ident(Token t) {
        bool qualified = t.book || t.sheet;
        if (lex_.peek().kind == Tok::LParen) {
            if (qualified)
                throw ParseError("function names cannot carry a sheet qualifier", t.pos);
            return call(std::move(t));
        }
        if (!qualified && equals_ci(t.core, "TRUE")) return make({BoolLit{true}});
        if (!qualified && equals_ci(t.core, "FALSE")) return make({BoolLit{false}});

        auto cell = match_cell_core(t.core);
        if (!cell) {
            if (qualified)
                throw ParseError("expected a cell reference after '!'", t.pos);
            if (lex_.peek().kind == Tok::Colon)
                throw ParseError("range corners must be cell references", lex_.peek().pos);
            return make({NameNode{std::move(t.core)}});
        }
        Address start{t.sheet, {cell->col, cell->row}, cell->col_abs, cell->row_abs};
        if (lex_.peek().kind == Tok::Colon) {
            lex_.take();
            Token second = lex_.take();
            if (second.kind != Tok::Ident || second.book || second.sheet)
                throw ParseError("range corners must be cell references", second.pos);
            auto end_cell = match_cell_core(second.core);
            if (!end_cell)
                throw ParseError("range corners must be cell references", second.pos);
            Address end{std::nullopt, {end_cell->col, end_cell->row}, end_cell->col_abs, end_cell->row_abs};
            return make({RangeNode{std::move(start), std::move(end), std::move(t.book)}});
        }
        return make({RefNode{std::move(start), std::move(t.book)}});
    }

    AstPtr call(Token t) {
        std::string name = t.core;
        for (char& ch : name) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        lex_.take();    // '('
        CallNode node{std::move(name), {}};
        if (lex_.peek().kind == Tok::RParen) {
            lex_.take();
            return make({std::move(node)});
        }
        for (;;) {
            if (lex_.peek().kind == Tok::Comma || lex_.peek().kind == Tok::RParen)
                throw ParseError("empty argument", lex_.peek().pos);
            node.args.push_back(comparison());
            Token next = lex_.take();
            if (next.kind == Tok::RParen) break;
            if (next.kind != Tok::Comma)
                throw ParseError("expected ',' or ')' in argument list", next.pos);
        }
        return make({std::move(node)});
    }

    Lexer lex_;
};

} // namespace

AstPtr parse_formula(const std::string& text) {
    if (text.empty() || text[0] != '=')
        throw ParseError("formula must start with '='", 0);
    if (text.size() == 1)
        throw ParseError("formula has no body", 1);
    return Parser(text).run();
}

bool ast_equal(const AstNode& a, const AstNode& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& lhs) -> bool {
            using T = std::decay_t<decltype(lhs)>;
            const T& rhs = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, NumberLit>) return lhs.value == rhs.value;
            else if constexpr (std::is_same_v<T, TextLit>) return lhs.text == rhs.text;
            else if constexpr (std::is_same_v<T, BoolLit>) return lhs.value == rhs.value;
            else if constexpr (std::is_same_v<T, ErrorLit>) return lhs.code == rhs.code;
            else if constexpr (std::is_same_v<T, RefNode>)
                return lhs.addr == rhs.addr && lhs.book == rhs.book;
            else if constexpr (std::is_same_v<T, RangeNode>)
                return lhs.start == rhs.start && lhs.end == rhs.end && lhs.book == rhs.book;
            else if constexpr (std::is_same_v<T, NameNode>) return lhs.name == rhs.name;
            else if constexpr (std::is_same_v<T, CallNode>) {
                if (lhs.name != rhs.name || lhs.args.size() != rhs.args.size()) return false;
                for (std::size_t i = 0; i < lhs.args.size(); ++i)
                    if (!ast_equal(*lhs.args[i], *rhs.args[i])) return false;
                return true;
            } else if constexpr (std::is_same_v<T, BinaryNode>) {
                return lhs.op == rhs.op && ast_equal(*lhs.left, *rhs.left) &&
                       ast_equal(*lhs.right, *rhs.right);
            } else {
                static_assert(std::is_same_v<T, UnaryNode>);
                return lhs.op == rhs.op && ast_equal(*lhs.operand, *rhs.operand);
            }
        },
        a.node);
}

AstPtr ast_clone(const AstNode& n) {
    return std::visit(
        [](const auto& v) -> AstPtr {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, CallNode>) {
                CallNode out{v.name, {}};
                out.args.reserve(v.args.size());
                for (const auto& a : v.args) out.args.push_back(ast_clone(*a));
                return std::make_unique<AstNode>(AstNode{std::move(out)});
            } else if constexpr (std::is_same_v<T, BinaryNode>) {
                return std::make_unique<AstNode>(
                    AstNode{BinaryNode{v.op, ast_clone(*v.left), ast_clone(*v.right)}});
            } else if constexpr (std::is_same_v<T, UnaryNode>) {
                return std::make_unique<AstNode>(AstNode{UnaryNode{v.op, ast_clone(*v.operand)}});
            } else {
                return std::make_unique<AstNode>(AstNode{v});
            }
        },
        n.node);
}

} // namespace sheetlens
