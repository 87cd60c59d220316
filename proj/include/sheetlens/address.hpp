#pragma once

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>

namespace sheetlens {

// Thrown by the address and formula parsers. `position` is a 0-based
// character offset into the text handed to the parser.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what), position_(position) {}

    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

// 1-based column/row pair. Row-major ordering (row first, then column) so
// that iterating a sorted container walks cells the way a reader scans a
// sheet.
struct CellCoord {
    int col = 1;
    int row = 1;

    bool operator==(const CellCoord&) const = default;
    auto operator<=>(const CellCoord& o) const {
        if (auto c = row <=> o.row; c != 0) return c;
        return col <=> o.col;
    }
};

// A single cell reference as written in a formula: optional sheet
// qualifier plus $-absoluteness flags for each axis.
struct Address {
    std::optional<std::string> sheet;
    CellCoord coord;
    bool col_abs = false;
    bool row_abs = false;

    bool operator==(const Address&) const = default;
};

// Rectangular region, kept normalised (start <= end on both axes).
struct CellRange {
    CellCoord start;
    CellCoord end;

    bool operator==(const CellRange&) const = default;

    bool contains(CellCoord c) const {
        return c.row >= start.row && c.row <= end.row &&
               c.col >= start.col && c.col <= end.col;
    }
    long long area() const {
        return static_cast<long long>(end.row - start.row + 1) *
               static_cast<long long>(end.col - start.col + 1);
    }
    int width() const { return end.col - start.col + 1; }
    int height() const { return end.row - start.row + 1; }
};

// Column letter conversions. 1 -> "A", 26 -> "Z", 27 -> "AA", 42 -> "AP".
std::string column_name(int col);
int column_number(const std::string& letters);

// "AP42" / "$AP$42", optionally "Sheet1!B2" or "'My Sheet'!B2" when
// allow_sheet is set. Throws ParseError on anything else.
Address parse_address(const std::string& text, bool allow_sheet = true);

// "A1:X27" (bare coordinates, no sheet). Normalises reversed corners.
CellRange parse_range(const std::string& text);

std::string render_coord(CellCoord c);
std::string render_range(const CellRange& r);

// Renders with $ markers and sheet qualifier; sheet names that need it are
// single-quoted with '' escaping.
std::string render_address(const Address& a);

// True when a sheet name can appear before '!' without quotes.
bool sheet_name_needs_quoting(const std::string& name);

} // namespace sheetlens
