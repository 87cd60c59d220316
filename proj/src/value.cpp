#include "sheetlens/value.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdlib>

namespace sheetlens {

namespace {
constexpr std::array<std::pair<ErrorCode, const char*>, 8> kErrorNames{{
    {ErrorCode::Div0, "#DIV/0!"},
    {ErrorCode::NA, "#N/A"},
    {ErrorCode::Ref, "#REF!"},
    {ErrorCode::Value, "#VALUE!"},
    {ErrorCode::Name, "#NAME?"},
    {ErrorCode::Num, "#NUM!"},
    {ErrorCode::Null, "#NULL!"},
    {ErrorCode::Circ, "#CIRC!"},
}};
}

const char* error_text(ErrorCode code) {
    for (auto& [c, name] : kErrorNames)
        if (c == code) return name;
    return "#VALUE!";
}

std::optional<ErrorCode> error_from_text(const std::string& text) {
    for (auto& [c, name] : kErrorNames)
        if (text == name) return c;
    return std::nullopt;
}

std::string render_number(double n) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, n);
    return std::string(buf, res.ptr);
}

std::string render_value(const Value& v) {
    if (v.is_blank()) return "";
    if (v.is_number()) return render_number(v.number());
    if (v.is_bool()) return v.boolean() ? "TRUE" : "FALSE";
    if (v.is_error()) return error_text(v.error());
    return v.text();
}

bool text_looks_numeric(const std::string& text) {
    std::size_t b = 0, e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    if (b == e) return false;
    const char* first = text.data() + b;
    const char* last = text.data() + e;
    double out;
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

int compare_values(const Value& a, const Value& b) {
    auto rank = [](const Value& v) { return v.is_number() ? 0 : v.is_text() ? 1 : v.is_bool() ? 2 : -1; };
    auto cmp_num = [](double x, double y) { return x < y ? -1 : x > y ? 1 : 0; };
    auto cmp_text = [](const std::string& x, const std::string& y) {
        std::string lx = ascii_lower(x), ly = ascii_lower(y);
        return lx < ly ? -1 : lx > ly ? 1 : 0;
    };
    if (a.is_blank() && b.is_blank()) return 0;
    if (a.is_blank()) {
        if (b.is_number()) return cmp_num(0.0, b.number());
        if (b.is_text()) return cmp_text("", b.text());
        return -1;   // blank sorts below booleans
    }
    if (b.is_blank()) return -compare_values(b, a);
    int ra = rank(a), rb = rank(b);
    if (ra != rb) return ra < rb ? -1 : 1;
    if (a.is_number()) return cmp_num(a.number(), b.number());
    if (a.is_text()) return cmp_text(a.text(), b.text());
    return cmp_num(a.boolean() ? 1 : 0, b.boolean() ? 1 : 0);
}

} // namespace sheetlens
