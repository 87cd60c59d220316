#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace sheetlens {

enum class ErrorCode {
    Div0,     // #DIV/0!
    NA,       // #N/A
    Ref,      // #REF!
    Value,    // #VALUE!
    Name,     // #NAME?
    Num,      // #NUM!
    Null,     // #NULL!
    Circ,     // #CIRC!  marks cells on an unresolved cycle
};

const char* error_text(ErrorCode code);
std::optional<ErrorCode> error_from_text(const std::string& text);

struct Blank {
    bool operator==(const Blank&) const = default;
};

// A spreadsheet scalar. Blank means "cell exists but holds nothing" and is
// distinct from both 0 and "".
class Value {
public:
    Value() : v_(Blank{}) {}
    Value(double n) : v_(n) {}
    Value(bool b) : v_(b) {}
    Value(std::string s) : v_(std::move(s)) {}
    Value(const char* s) : v_(std::string(s)) {}
    Value(ErrorCode e) : v_(e) {}
    Value(Blank b) : v_(b) {}

    bool is_blank() const { return std::holds_alternative<Blank>(v_); }
    bool is_number() const { return std::holds_alternative<double>(v_); }
    bool is_text() const { return std::holds_alternative<std::string>(v_); }
    bool is_bool() const { return std::holds_alternative<bool>(v_); }
    bool is_error() const { return std::holds_alternative<ErrorCode>(v_); }

    double number() const { return std::get<double>(v_); }
    const std::string& text() const { return std::get<std::string>(v_); }
    bool boolean() const { return std::get<bool>(v_); }
    ErrorCode error() const { return std::get<ErrorCode>(v_); }

    bool operator==(const Value&) const = default;

private:
    std::variant<Blank, double, bool, std::string, ErrorCode> v_;
};

// Shortest text that round-trips the number (std::to_chars general form).
std::string render_number(double n);

// Display form: numbers via render_number, TRUE/FALSE, error codes, text
// verbatim, blank as "".
std::string render_value(const Value& v);

// True when `text` lexes as a plain decimal number (the "number stored as
// text" test). Leading/trailing spaces count as numeric-looking.
bool text_looks_numeric(const std::string& text);

// Spreadsheet ordering: numbers sort below text, text below booleans; text
// compares ASCII case-insensitively. Blank pairs with a number as 0 and with
// text as "", but sorts below booleans. Errors are not ordered here.
int compare_values(const Value& a, const Value& b);

std::string ascii_lower(std::string_view s);

} // namespace sheetlens
