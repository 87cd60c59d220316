#include "sheetlens/address.hpp"

#include <cctype>

namespace sheetlens {

std::string column_name(int col) {
    if (col < 1) throw std::invalid_argument("column number must be >= 1");
    std::string out;
    while (col > 0) {
        int rem = (col - 1) % 26;
        out.insert(out.begin(), static_cast<char>('A' + rem));
        col = (col - 1) / 26;
    }
    return out;
}

int column_number(const std::string& letters) {
    if (letters.empty() || letters.size() > 5)
        throw std::invalid_argument("bad column letters: " + letters);
    long long n = 0;
    for (char ch : letters) {
        if (!std::isalpha(static_cast<unsigned char>(ch)))
            throw std::invalid_argument("bad column letters: " + letters);
        n = n * 26 + (std::toupper(static_cast<unsigned char>(ch)) - 'A' + 1);
    }
    return static_cast<int>(n);
}

namespace {

// Parses the "$AP$42" part starting at text[pos]; advances pos.
bool scan_coord(const std::string& text, std::size_t& pos, Address& out) {
    std::size_t p = pos;
    if (p < text.size() && text[p] == '$') { out.col_abs = true; ++p; }
    std::size_t letters = p;
    while (p < text.size() && std::isalpha(static_cast<unsigned char>(text[p]))) ++p;
    if (p == letters || p - letters > 5) return false;
    std::string col = text.substr(letters, p - letters);
    if (p < text.size() && text[p] == '$') { out.row_abs = true; ++p; }
    std::size_t digits = p;
    while (p < text.size() && std::isdigit(static_cast<unsigned char>(text[p]))) ++p;
    if (p == digits || p - digits > 8 || text[digits] == '0') return false;
    out.coord.col = column_number(col);
    out.coord.row = std::stoi(text.substr(digits, p - digits));
    pos = p;
    return true;
}

} // namespace

Address parse_address(const std::string& text, bool allow_sheet) {
    Address a;
    std::size_t pos = 0;
    if (allow_sheet) {
        if (!text.empty() && text[0] == '\'') {
            std::string sheet;
            std::size_t p = 1;
            for (;;) {
                if (p >= text.size()) throw ParseError("unterminated quoted sheet name", 0);
                if (text[p] == '\'') {
                    if (p + 1 < text.size() && text[p + 1] == '\'') { sheet += '\''; p += 2; continue; }
                    ++p;
                    break;
                }
                sheet += text[p++];
            }
            if (p >= text.size() || text[p] != '!')
                throw ParseError("expected '!' after sheet name", p);
            a.sheet = sheet;
            pos = p + 1;
        } else if (auto bang = text.find('!'); bang != std::string::npos) {
            if (bang == 0) throw ParseError("empty sheet name", 0);
            a.sheet = text.substr(0, bang);
            pos = bang + 1;
        }
    }
    if (!scan_coord(text, pos, a) || pos != text.size())
        throw ParseError("not a cell address: " + text, pos);
    return a;
}

CellRange parse_range(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) {
        Address a = parse_address(text, false);
        return {a.coord, a.coord};
    }
    Address a = parse_address(text.substr(0, colon), false);
    Address b = parse_address(text.substr(colon + 1), false);
    CellRange r;
    r.start = {std::min(a.coord.col, b.coord.col), std::min(a.coord.row, b.coord.row)};
    r.end = {std::max(a.coord.col, b.coord.col), std::max(a.coord.row, b.coord.row)};
    return r;
}

std::string render_coord(CellCoord c) {
    return column_name(c.col) + std::to_string(c.row);
}

std::string render_range(const CellRange& r) {
    if (r.start == r.end) return render_coord(r.start);
    return render_coord(r.start) + ":" + render_coord(r.end);
}

bool sheet_name_needs_quoting(const std::string& name) {
    if (name.empty()) return true;
    if (std::isdigit(static_cast<unsigned char>(name[0]))) return true;
    for (char ch : name) {
        bool plain = std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.';
        if (!plain) return true;
    }
    return false;
}

std::string render_address(const Address& a) {
    std::string out;
    if (a.sheet) {
        if (sheet_name_needs_quoting(*a.sheet)) {
            out += '\'';
            for (char ch : *a.sheet) {
                out += ch;
                if (ch == '\'') out += '\'';
            }
            out += '\'';
        } else {
            out += *a.sheet;
        }
        out += '!';
    }
    if (a.col_abs) out += '$';
    out += column_name(a.coord.col);
    if (a.row_abs) out += '$';
    out += std::to_string(a.coord.row);
    return out;
}

} // namespace sheetlens
