#include "sheetlens/workbook.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

using nlohmann::json;

namespace sheetlens {

const char* visibility_text(SheetVisibility v) {
    switch (v) {
        case SheetVisibility::Visible: return "visible";
        case SheetVisibility::Hidden: return "hidden";
        case SheetVisibility::VeryHidden: return "very_hidden";
    }
    return "visible";
}

const Sheet* Workbook::find_sheet(std::string_view name) const {
    int idx = sheet_index(name);
    return idx < 0 ? nullptr : &sheets[idx];
}

int Workbook::sheet_index(std::string_view name) const {
    std::string want = ascii_lower(name);
    for (std::size_t i = 0; i < sheets.size(); ++i)
        if (ascii_lower(sheets[i].name) == want) return static_cast<int>(i);
    return -1;
}

namespace {

[[noreturn]] void format_error(const std::string& msg) {
    throw LoadError(LoadError::Kind::Format, msg);
}

void warn_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                       const std::string& where, std::vector<std::string>& warnings) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) { ok = true; break; }
        if (!ok)
            warnings.push_back(where + ": unknown key '" + it.key() + "' ignored");
    }
}

bool valid_defined_name(const std::string& name) {
    if (name.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(name[0])) && name[0] != '_') return false;
    return std::all_of(name.begin(), name.end(), [](char ch) {
        return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.';
    });
}

Value parse_cell_value(const json& v, const std::string& type_hint,
                       const std::string& where, std::vector<std::string>& warnings) {
    if (type_hint == "n") {
        if (v.is_number()) return Value(v.get<double>());
        if (v.is_string()) {
            try { return Value(std::stod(v.get<std::string>())); }
            catch (...) {}
        }
        warnings.push_back(where + ": value does not match type 'n'");
        return Value(Blank{});
    }
    if (type_hint == "s") {
        if (v.is_string()) return Value(v.get<std::string>());
        return Value(v.dump());
    }
    if (type_hint == "b") {
        if (v.is_boolean()) return Value(v.get<bool>());
        if (v.is_number()) return Value(v.get<double>() != 0.0);
        warnings.push_back(where + ": value does not match type 'b'");
        return Value(Blank{});
    }
    if (type_hint == "e") {
        if (v.is_string()) {
            if (auto code = error_from_text(v.get<std::string>())) return Value(*code);
            warnings.push_back(where + ": unknown error literal " + v.dump());
            return Value(ErrorCode::Value);
        }
        warnings.push_back(where + ": value does not match type 'e'");
        return Value(ErrorCode::Value);
    }
    if (!type_hint.empty()) {
        warnings.push_back(where + ": unknown stored type '" + type_hint + "'");
    }
    // No (usable) hint: infer from the JSON type.
    if (v.is_null()) return Value(Blank{});
    if (v.is_number()) return Value(v.get<double>());
    if (v.is_boolean()) return Value(v.get<bool>());
    if (v.is_string()) return Value(v.get<std::string>());
    warnings.push_back(where + ": unsupported value shape " + v.dump());
    return Value(Blank{});
}

Sheet parse_sheet(const json& js, int index, std::vector<std::string>& warnings) {
    if (!js.is_object()) format_error("sheet entry " + std::to_string(index) + " is not an object");
    Sheet sheet;
    if (auto it = js.find("name"); it != js.end() && it->is_string() && !it->get<std::string>().empty()) {
        sheet.name = it->get<std::string>();
    } else {
        sheet.name = "Sheet" + std::to_string(index + 1);
        warnings.push_back("sheet entry " + std::to_string(index) + " has no name; using '" + sheet.name + "'");
    }
    const std::string where = "sheet '" + sheet.name + "'";
    warn_unknown_keys(js, {"name", "visibility", "used_range", "hidden_rows", "hidden_cols",
                           "conditional_formats", "pivot_tables", "cells"}, where, warnings);

    if (auto it = js.find("visibility"); it != js.end()) {
        std::string v = it->is_string() ? it->get<std::string>() : std::string();
        if (v == "visible") sheet.visibility = SheetVisibility::Visible;
        else if (v == "hidden") sheet.visibility = SheetVisibility::Hidden;
        else if (v == "very_hidden") sheet.visibility = SheetVisibility::VeryHidden;
        else warnings.push_back(where + ": unknown visibility " + it->dump() + "; treated as visible");
    }

    if (auto it = js.find("used_range"); it != js.end()) {
        if (!it->is_string()) format_error(where + ": used_range must be a string range");
        try {
            sheet.used_range = parse_range(it->get<std::string>());
        } catch (const std::exception& e) {
            format_error(where + ": bad used_range: " + e.what());
        }
    }

    if (auto it = js.find("hidden_rows"); it != js.end() && it->is_array()) {
        for (const auto& r : *it) {
            if (r.is_number_integer() && r.get<int>() >= 1) sheet.hidden_rows.push_back(r.get<int>());
            else warnings.push_back(where + ": bad hidden row " + r.dump());
        }
        std::sort(sheet.hidden_rows.begin(), sheet.hidden_rows.end());
    }
    if (auto it = js.find("hidden_cols"); it != js.end() && it->is_array()) {
        for (const auto& c : *it) {
            if (c.is_string()) {
                try { sheet.hidden_cols.push_back(column_number(c.get<std::string>())); continue; }
                catch (...) {}
            }
            warnings.push_back(where + ": bad hidden column " + c.dump());
        }
        std::sort(sheet.hidden_cols.begin(), sheet.hidden_cols.end());
    }

    if (auto it = js.find("conditional_formats"); it != js.end() && it->is_array()) {
        for (const auto& cf : *it) {
            ConditionalFormat f;
            if (cf.is_object()) {
                f.range = cf.value("range", "");
                f.rule = cf.value("rule", "");
            }
            sheet.conditional_formats.push_back(std::move(f));
        }
    }
    if (auto it = js.find("pivot_tables"); it != js.end()) {
        if (it->is_number_integer() && it->get<int>() >= 0)
            sheet.pivot_tables = it->get<int>();
        else
            warnings.push_back(where + ": pivot_tables must be a non-negative count");
    }

    if (auto it = js.find("cells"); it != js.end()) {
        if (!it->is_object()) format_error(where + ": cells must be an object");
        for (auto cell = it->begin(); cell != it->end(); ++cell) {
            CellCoord coord;
            try {
                coord = parse_address(cell.key(), false).coord;
            } catch (const std::exception&) {
                format_error(where + ": bad cell address '" + cell.key() + "'");
            }
            if (sheet.cells.count(coord))
                format_error(where + ": duplicate cell address '" + cell.key() + "'");
            const std::string cell_where = where + " cell " + cell.key();
            if (!cell->is_object()) format_error(cell_where + ": cell entry is not an object");
            warn_unknown_keys(*cell, {"v", "t", "f", "af"}, cell_where, warnings);

            CellContent content;
            if (auto f = cell->find("f"); f != cell->end()) {
                if (!f->is_string()) format_error(cell_where + ": formula must be a string");
                std::string text = f->get<std::string>();
                if (text.empty() || text[0] != '=') {
                    warnings.push_back(cell_where + ": formula lacks '='; one was added");
                    text.insert(text.begin(), '=');
                }
                content.formula = std::move(text);
                if (auto af = cell->find("af"); af != cell->end() && af->is_string()) {
                    try { content.array_range = parse_range(af->get<std::string>()); }
                    catch (const std::exception&) {
                        warnings.push_back(cell_where + ": bad array range; ignored");
                    }
                }
            } else {
                std::string hint = cell->value("t", "");
                if (auto v = cell->find("v"); v != cell->end())
                    content.literal = parse_cell_value(*v, hint, cell_where, warnings);
            }
            sheet.cells.emplace(coord, std::move(content));
        }
    }

    if (!sheet.used_range && !sheet.cells.empty()) {
        CellRange box{sheet.cells.begin()->first, sheet.cells.begin()->first};
        for (const auto& [coord, _] : sheet.cells) {
            box.start.col = std::min(box.start.col, coord.col);
            box.start.row = std::min(box.start.row, coord.row);
            box.end.col = std::max(box.end.col, coord.col);
            box.end.row = std::max(box.end.row, coord.row);
        }
        sheet.used_range = box;
    }
    if (sheet.used_range) {
        for (const auto& [coord, _] : sheet.cells)
            if (!sheet.used_range->contains(coord))
                warnings.push_back(where + ": cell " + render_coord(coord) + " lies outside used_range");
    }
    return sheet;
}

} // namespace

LoadResult load_workbook_json(const std::string& json_text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        format_error(origin + ": " + e.what());
    }
    if (!doc.is_object()) format_error(origin + ": workbook document must be a JSON object");

    LoadResult result;
    Workbook& wb = result.workbook;
    auto& warnings = result.warnings;

    warn_unknown_keys(doc, {"name", "file_size_bytes", "saved_at", "properties", "protection",
                            "vba", "defined_names", "external_links", "sheets"}, origin, warnings);

    if (auto it = doc.find("name"); it != doc.end() && it->is_string() && !it->get<std::string>().empty()) {
        wb.name = it->get<std::string>();
    } else {
        wb.name = std::filesystem::path(origin).stem().string();
        if (wb.name.empty()) wb.name = "workbook";
        warnings.push_back(origin + ": workbook name missing; using '" + wb.name + "'");
    }

    if (auto it = doc.find("file_size_bytes"); it != doc.end()) {
        if (it->is_number_integer() && it->get<long long>() >= 0) {
            wb.file_size_bytes = it->get<long long>();
        } else {
            warnings.push_back(origin + ": bad file_size_bytes " + it->dump() + "; using 0");
        }
    }

    if (auto it = doc.find("saved_at"); it != doc.end()) {
        if (it->is_string()) {
            wb.saved_at = parse_rfc3339(it->get<std::string>());
            if (!wb.saved_at)
                warnings.push_back(origin + ": unparseable saved_at " + it->dump());
        } else {
            warnings.push_back(origin + ": saved_at must be a string timestamp");
        }
    }

    if (auto it = doc.find("properties"); it != doc.end() && it->is_object()) {
        for (auto p = it->begin(); p != it->end(); ++p)
            wb.properties[p.key()] = p->is_string() ? p->get<std::string>() : p->dump();
    }

    if (auto it = doc.find("protection"); it != doc.end() && it->is_object()) {
        warn_unknown_keys(*it, {"structure_locked", "open_password_required"}, origin + " protection", warnings);
        wb.protection.structure_locked = it->value("structure_locked", false);
        wb.protection.open_password_required = it->value("open_password_required", false);
    }

    if (auto it = doc.find("vba"); it != doc.end() && it->is_object()) {
        warn_unknown_keys(*it, {"components", "total_lines"}, origin + " vba", warnings);
        wb.vba.components = std::max(0, it->value("components", 0));
        wb.vba.total_lines = std::max(0, it->value("total_lines", 0));
    }

    if (auto it = doc.find("defined_names"); it != doc.end() && it->is_object()) {
        for (auto n = it->begin(); n != it->end(); ++n) {
            if (!valid_defined_name(n.key())) {
                warnings.push_back(origin + ": defined name '" + n.key() + "' is not a valid identifier; skipped");
                continue;
            }
            wb.defined_names[n.key()] = n->is_string() ? n->get<std::string>() : n->dump();
        }
    }

    if (auto it = doc.find("external_links"); it != doc.end() && it->is_array()) {
        for (const auto& link : *it) {
            if (link.is_string()) wb.external_links.push_back(link.get<std::string>());
            else warnings.push_back(origin + ": bad external link entry " + link.dump());
        }
    }

    auto sheets = doc.find("sheets");
    if (sheets == doc.end() || !sheets->is_array() || sheets->empty())
        format_error(origin + ": workbook must declare a non-empty sheets array");
    for (std::size_t i = 0; i < sheets->size(); ++i) {
        Sheet sheet = parse_sheet((*sheets)[i], static_cast<int>(i), warnings);
        for (const Sheet& existing : wb.sheets)
            if (ascii_lower(existing.name) == ascii_lower(sheet.name))
                format_error(origin + ": duplicate sheet name '" + sheet.name + "'");
        wb.sheets.push_back(std::move(sheet));
    }
    return result;
}

LoadResult load_workbook(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec) || ec)
        throw LoadError(LoadError::Kind::FileMissing, "cannot open " + path.string());
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw LoadError(LoadError::Kind::FileMissing, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    LoadResult result = load_workbook_json(buf.str(), path.filename().string());
    result.workbook.source_path = path.string();
    return result;
}

UsedRangeStats used_range_stats(const Sheet& sheet) {
    UsedRangeStats stats;
    if (!sheet.used_range) return stats;
    stats.declared_cells = sheet.used_range->area();
    std::optional<CellRange> box;
    for (const auto& [coord, content] : sheet.cells) {
        if (!content.is_formula() && content.literal.is_blank()) continue;
        if (!sheet.used_range->contains(coord)) continue;
        ++stats.populated_cells;
        if (!box) {
            box = CellRange{coord, coord};
        } else {
            box->start.col = std::min(box->start.col, coord.col);
            box->start.row = std::min(box->start.row, coord.row);
            box->end.col = std::max(box->end.col, coord.col);
            box->end.row = std::max(box->end.row, coord.row);
        }
    }
    stats.trimmed_range = box;
    if (stats.declared_cells > 0)
        stats.blank_ratio = 1.0 - static_cast<double>(stats.populated_cells) /
                                      static_cast<double>(stats.declared_cells);
    return stats;
}

ScaleAdvice scale_advice(int sheet_count, long long total_formulas,
                         const ScaleLimits& limits) {
    if (sheet_count > limits.migration_sheets || total_formulas > limits.migration_formulas)
        return ScaleAdvice::ConsiderMigration;
    if (sheet_count > limits.design_sheets || total_formulas > limits.design_formulas)
        return ScaleAdvice::ReviewDesign;
    return ScaleAdvice::Normal;
}

const char* scale_advice_text(ScaleAdvice a) {
    switch (a) {
        case ScaleAdvice::ReviewDesign: return "review_design";
        case ScaleAdvice::ConsiderMigration: return "consider_migration";
        default: return "normal";
    }
}

std::optional<std::int64_t> parse_rfc3339(const std::string& text) {
    int y, mo, d, h, mi, s;
    int consumed = 0;
    if (std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &y, &mo, &d, &h, &mi, &s, &consumed) != 6)
        return std::nullopt;
    std::size_t pos = static_cast<std::size_t>(consumed);
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    int offset = 0;
    if (pos < text.size()) {
        char zc = text[pos];
        if (zc == 'Z' || zc == 'z') {
            ++pos;
        } else if (zc == '+' || zc == '-') {
            int oh, om, n = 0;
            if (std::sscanf(text.c_str() + pos + 1, "%2d:%2d%n", &oh, &om, &n) != 2 || n != 5)
                return std::nullopt;
            offset = (oh * 3600 + om * 60) * (zc == '-' ? -1 : 1);
            pos += 6;
        }
    }
    if (pos != text.size()) return std::nullopt;
    std::tm tm{};
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = s;
    std::time_t t = timegm(&tm);
    if (t == static_cast<std::time_t>(-1)) return std::nullopt;
    return static_cast<std::int64_t>(t) - offset;
}

std::string render_rfc3339(std::int64_t seconds) {
    std::time_t t = static_cast<std::time_t>(seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace sheetlens
