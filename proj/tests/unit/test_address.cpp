#include "doctest.h"
#include "sheetlens/address.hpp"

using namespace sheetlens;

TEST_CASE("column names and numbers are a bijection") {
    CHECK(column_name(1) == "A");
    CHECK(column_name(26) == "Z");
    CHECK(column_name(27) == "AA");
    CHECK(column_name(52) == "AZ");
    CHECK(column_name(53) == "BA");
    CHECK(column_name(702) == "ZZ");
    CHECK(column_name(703) == "AAA");
    CHECK(column_name(16384) == "XFD");
    for (int n = 1; n <= 18278; ++n)
        CHECK(column_number(column_name(n)) == n);
    CHECK(column_number("a") == 1);
    CHECK(column_number("xfd") == 16384);
    CHECK_THROWS_AS(column_name(0), std::invalid_argument);
    CHECK_THROWS_AS(column_number(""), std::invalid_argument);
    CHECK_THROWS_AS(column_number("A1"), std::invalid_argument);
    CHECK_THROWS_AS(column_number("ABCDEF"), std::invalid_argument);
}

TEST_CASE("parse_address handles absoluteness and sheet qualifiers") {
    Address a = parse_address("B4");
    CHECK(a.coord == CellCoord{2, 4});
    CHECK_FALSE(a.sheet.has_value());
    CHECK_FALSE(a.col_abs);
    CHECK_FALSE(a.row_abs);

    a = parse_address("$B$4");
    CHECK(a.col_abs);
    CHECK(a.row_abs);
    CHECK(parse_address("$B4").col_abs);
    CHECK_FALSE(parse_address("$B4").row_abs);
    CHECK(parse_address("B$4").row_abs);
    CHECK(parse_address("b4").coord == CellCoord{2, 4});

    a = parse_address("Sheet1!C3");
    CHECK(a.sheet == "Sheet1");
    CHECK(a.coord == CellCoord{3, 3});

    a = parse_address("'My Sheet'!A1");
    CHECK(a.sheet == "My Sheet");

    a = parse_address("'It''s'!B2");
    CHECK(a.sheet == "It's");
}

TEST_CASE("parse_address rejects malformed input") {
    CHECK_THROWS_AS(parse_address(""), ParseError);
    CHECK_THROWS_AS(parse_address("4B"), ParseError);
    CHECK_THROWS_AS(parse_address("A0"), ParseError);
    CHECK_THROWS_AS(parse_address("A"), ParseError);
    CHECK_THROWS_AS(parse_address("A1B"), ParseError);
    CHECK_THROWS_AS(parse_address("!A1"), ParseError);
    CHECK_THROWS_AS(parse_address("'Open!A1"), ParseError);
    CHECK_THROWS_AS(parse_address("Sheet1!A1", false), ParseError);
    bool threw = false;
    try {
        parse_address("'Oops'A1");
    } catch (const ParseError& e) {
        threw = true;
        CHECK(e.position() == 6);
    }
    CHECK(threw);
}

TEST_CASE("parse_range accepts single cells and unordered corners") {
    CellRange r = parse_range("A1:C4");
    CHECK(r.start == CellCoord{1, 1});
    CHECK(r.end == CellCoord{3, 4});
    CHECK(parse_range("C4:A1") == r);
    CHECK(parse_range("B2") == CellRange{{2, 2}, {2, 2}});
    CHECK(r.area() == 12);
    CHECK(r.width() == 3);
    CHECK(r.height() == 4);
    CHECK(r.contains({2, 2}));
    CHECK_FALSE(r.contains({4, 2}));
    CHECK_THROWS_AS(parse_range("A1:"), ParseError);
}

TEST_CASE("render round-trips") {
    CHECK(render_coord({16, 8}) == "P8");
    CHECK(render_range({{4, 8}, {15, 8}}) == "D8:O8");
    CHECK(render_address(parse_address("$AP$42")) == "$AP$42");
    CHECK(render_address(parse_address("North!P8")) == "North!P8");
    CHECK(render_address(parse_address("'My Sheet'!A$1")) == "'My Sheet'!A$1");
    CHECK(render_address(parse_address("'It''s'!B2")) == "'It''s'!B2");
}

TEST_CASE("sheet names that could confuse a reference get quoted") {
    CHECK_FALSE(sheet_name_needs_quoting("North"));
    CHECK_FALSE(sheet_name_needs_quoting("Phasing_Table.v2"));
    CHECK(sheet_name_needs_quoting(""));
    CHECK(sheet_name_needs_quoting("My Sheet"));
    CHECK(sheet_name_needs_quoting("2006plan"));
    CHECK(sheet_name_needs_quoting("a-b"));
}

TEST_CASE("coordinates order row-major") {
    CHECK(CellCoord{5, 1} < CellCoord{1, 2});
    CHECK(CellCoord{1, 2} < CellCoord{2, 2});
}
