#include "sheetlens/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace sheetlens {

using njson = nlohmann::json;

const char* review_status_text(ReviewStatus s) {
    switch (s) {
        case ReviewStatus::Unreviewed: return "unreviewed";
        case ReviewStatus::InProgress: return "in_progress";
        case ReviewStatus::Reviewed: return "reviewed";
        case ReviewStatus::Question: return "question";
    }
    return "?";
}

std::optional<ReviewStatus> review_status_from_text(const std::string& text) {
    if (text == "unreviewed") return ReviewStatus::Unreviewed;
    if (text == "in_progress") return ReviewStatus::InProgress;
    if (text == "reviewed") return ReviewStatus::Reviewed;
    if (text == "question") return ReviewStatus::Question;
    return std::nullopt;
}

std::optional<RenderFormat> parse_format(const std::string& name) {
    if (name == "text") return RenderFormat::Text;
    if (name == "json") return RenderFormat::Json;
    if (name == "md") return RenderFormat::Markdown;
    return std::nullopt;
}

std::string sheet_anchor(const std::string& name) {
    std::string out = "sheet-";
    bool dash = false;
    for (char ch : name) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            if (dash && out.back() != '-') out += '-';
            dash = false;
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        } else {
            dash = true;
        }
    }
    return out;
}

namespace {

std::string cell_label(const Workbook& wb, int sheet, CellCoord c) {
    Address a;
    a.sheet = wb.sheets[static_cast<std::size_t>(sheet)].name;
    a.coord = c;
    return render_address(a);
}

std::string kb_text(long long bytes) {
    return std::to_string(std::llround(bytes / 1024.0)) + " Kb";
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

njson value_json(const Value& v) {
    if (v.is_number()) return v.number();
    if (v.is_text()) return v.text();
    if (v.is_bool()) return v.boolean();
    if (v.is_error()) return njson{{"error", error_text(v.error())}};
    return nullptr;
}

std::string dump(const njson& doc) { return doc.dump(2) + "\n"; }

void section(std::string& out, const std::string& title) {
    if (!out.empty()) out += '\n';
    out += title + '\n';
    out += std::string(title.size(), '-') + '\n';
}

std::string md_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        if (ch == '|')
            out += "\\|";
        else if (ch == '\n')
            out += ' ';
        else
            out += ch;
    }
    return out;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string text() const {
        std::vector<std::size_t> w(header.size());
        for (std::size_t c = 0; c < header.size(); ++c) w[c] = header[c].size();
        for (const auto& r : rows)
            for (std::size_t c = 0; c < r.size() && c < w.size(); ++c)
                w[c] = std::max(w[c], r[c].size());
        std::string out;
        auto line = [&](const std::vector<std::string>& cells) {
            std::string s;
            for (std::size_t c = 0; c < header.size(); ++c) {
                std::string cell = c < cells.size() ? cells[c] : "";
                s += cell;
                if (c + 1 < header.size()) s.append(w[c] - cell.size() + 2, ' ');
            }
            while (!s.empty() && s.back() == ' ') s.pop_back();
            out += s + '\n';
        };
        line(header);
        std::string dashes;
        for (std::size_t c = 0; c < header.size(); ++c) {
            dashes += std::string(w[c], '-');
            if (c + 1 < header.size()) dashes += "  ";
        }
        out += dashes + '\n';
        for (const auto& r : rows) line(r);
        return out;
    }

    std::string markdown() const {
        auto row_line = [&](const std::vector<std::string>& cells) {
            std::string s = "|";
            for (std::size_t c = 0; c < header.size(); ++c)
                s += " " + (c < cells.size() ? md_escape(cells[c]) : "") + " |";
            return s + "\n";
        };
        std::string out = row_line(header);
        out += "|";
        for (std::size_t c = 0; c < header.size(); ++c) out += " --- |";
        out += "\n";
        for (const auto& r : rows) out += row_line(r);
        return out;
    }
};

void read_description(IndexEntry& e, const Workbook& wb, const std::string& cell_text,
                      std::vector<std::string>& warnings) {
    try {
        Address a = parse_address(cell_text, false);
        e.description_source = a;
        e.description.clear();
        const CellContent* c =
            wb.sheets[static_cast<std::size_t>(e.sheet)].find_cell(a.coord);
        if (c && !c->is_formula() && c->literal.is_text())
            e.description = c->literal.text();
    } catch (const ParseError&) {
        warnings.push_back("bad description cell \"" + cell_text + "\" for sheet " +
                           e.name);
    }
}

} // namespace

SheetIndex sheet_index(const Workbook& wb, const AnalysisResult& analysis,
                       const Config& config) {
    SheetIndex idx;
    std::vector<long long> fcount(wb.sheets.size(), 0), ucount(wb.sheets.size(), 0);
    for (const FormulaCell& fc : analysis.formulas)
        ++fcount[static_cast<std::size_t>(fc.sheet)];
    for (const UniqueFormula& u : analysis.uniques)
        ++ucount[static_cast<std::size_t>(u.sheet)];
    for (std::size_t s = 0; s < wb.sheets.size(); ++s) {
        IndexEntry e;
        e.sheet = static_cast<int>(s);
        e.name = wb.sheets[s].name;
        e.visibility = wb.sheets[s].visibility;
        e.formula_count = fcount[s];
        e.unique_count = ucount[s];
        read_description(e, wb, config.description_cell, idx.warnings);
        idx.entries.push_back(std::move(e));
    }
    if (!wb.source_path.empty()) {
        std::filesystem::path sidecar(wb.source_path + ".review.json");
        std::error_code ec;
        if (std::filesystem::is_regular_file(sidecar, ec)) {
            std::ifstream in(sidecar);
            std::ostringstream buf;
            buf << in.rdbuf();
            apply_review_json(idx, wb, buf.str(), sidecar.string());
        }
    }
    return idx;
}

void apply_review_json(SheetIndex& index, const Workbook& wb, const std::string& json_text,
                       const std::string& origin) {
    njson doc = njson::parse(json_text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        index.warnings.push_back(origin + ": sidecar is not a JSON object");
        return;
    }
    for (const auto& [key, value] : doc.items())
        if (key != "sheets")
            index.warnings.push_back(origin + ": unknown key \"" + key + "\"");
    if (!doc.contains("sheets")) return;
    const njson& sheets = doc["sheets"];
    if (!sheets.is_object()) {
        index.warnings.push_back(origin + ": \"sheets\" is not an object");
        return;
    }
    for (const auto& [name, entry] : sheets.items()) {
        int s = wb.sheet_index(name);
        if (s < 0) {
            index.orphans.push_back(name);
            continue;
        }
        IndexEntry& e = index.entries[static_cast<std::size_t>(s)];
        if (!entry.is_object()) {
            index.warnings.push_back(origin + ": entry for \"" + name +
                                     "\" is not an object");
            continue;
        }
        for (const auto& [key, value] : entry.items()) {
            if (key == "status") {
                if (auto st = value.is_string()
                                  ? review_status_from_text(value.get<std::string>())
                                  : std::nullopt)
                    e.review_status = *st;
                else
                    index.warnings.push_back(origin + ": bad status for \"" + name + "\"");
            } else if (key == "groups") {
                if (value.is_array()) {
                    e.groups.clear();
                    for (const njson& g : value)
                        if (g.is_string()) e.groups.push_back(g.get<std::string>());
                } else {
                    index.warnings.push_back(origin + ": bad groups for \"" + name + "\"");
                }
            } else if (key == "notes") {
                if (value.is_string())
                    e.notes = value.get<std::string>();
                else
                    index.warnings.push_back(origin + ": bad notes for \"" + name + "\"");
            } else if (key == "description_cell") {
                if (value.is_string())
                    read_description(e, wb, value.get<std::string>(), index.warnings);
                else
                    index.warnings.push_back(origin + ": bad description_cell for \"" +
                                             name + "\"");
            } else {
                index.warnings.push_back(origin + ": unknown key \"" + key + "\" for \"" +
                                         name + "\"");
            }
        }
    }
}

SheetMap sheet_map(const Workbook& wb, int sheet, const EvalResult* eval) {
    const Sheet& sh = wb.sheets[static_cast<std::size_t>(sheet)];
    SheetMap m;
    m.sheet_name = sh.name;
    std::optional<CellRange> bounds;
    for (const auto& [coord, cell] : sh.cells) {
        if (!cell.is_formula() && cell.literal.is_blank()) continue;
        if (!bounds) {
            bounds = CellRange{coord, coord};
        } else {
            bounds->start.col = std::min(bounds->start.col, coord.col);
            bounds->start.row = std::min(bounds->start.row, coord.row);
            bounds->end.col = std::max(bounds->end.col, coord.col);
            bounds->end.row = std::max(bounds->end.row, coord.row);
        }
    }
    m.bounds = bounds;
    if (!bounds) return m;
    for (int row = bounds->start.row; row <= bounds->end.row; ++row) {
        std::string line(static_cast<std::size_t>(bounds->width()), 'B');
        for (int col = bounds->start.col; col <= bounds->end.col; ++col) {
            const CellContent* c = sh.find_cell({col, row});
            if (!c) continue;
            char code = 'B';
            if (c->is_formula()) {
                code = 'F';
                if (c->array_range) {
                    code = 'A';
                } else if (eval) {
                    const Value* v = eval->value_at(sheet, {col, row});
                    if (v && v->is_error()) code = 'E';
                }
            } else if (c->literal.is_error()) {
                code = 'E';
            } else if (c->literal.is_text()) {
                code = text_looks_numeric(c->literal.text()) ? 'T' : 'L';
            } else if (!c->literal.is_blank()) {
                code = 'N';
            }
            line[static_cast<std::size_t>(col - bounds->start.col)] = code;
        }
        m.rows.push_back(std::move(line));
    }
    return m;
}

std::vector<LayoutFinding> layout_findings(const SheetMap& map, const Config& config) {
    std::vector<LayoutFinding> out;
    if (!map.bounds) return out;
    int h = static_cast<int>(map.rows.size());
    int w = h > 0 ? static_cast<int>(map.rows.front().size()) : 0;
    auto code = [&](int r, int c) { return map.rows[static_cast<std::size_t>(r)]
                                              [static_cast<std::size_t>(c)]; };
    auto run = [&](int r, int c, int dr, int dc) {
        int n = 0;
        for (int rr = r + dr, cc = c + dc; rr >= 0 && rr < h && cc >= 0 && cc < w;
             rr += dr, cc += dc) {
            if (code(rr, cc) != 'F') break;
            ++n;
        }
        return n;
    };
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (code(r, c) != 'N') continue;
            CellCoord at{map.bounds->start.col + c, map.bounds->start.row + r};
            int left = run(r, c, 0, -1), right = run(r, c, 0, 1);
            if (left >= 1 && right >= 1 && left + right >= config.interruption_run_min)
                out.push_back({"constant_interruption", at,
                               "breaks a horizontal run of " +
                                   std::to_string(left + right) + " formulas"});
            int up = run(r, c, -1, 0), down = run(r, c, 1, 0);
            if (up >= 1 && down >= 1 && up + down >= config.interruption_run_min)
                out.push_back({"constant_interruption", at,
                               "breaks a vertical run of " + std::to_string(up + down) +
                                   " formulas"});
        }
    }
    return out;
}

double jumble_fraction(const SheetMap& map, const Config& config) {
    if (!map.bounds) return 0.0;
    int h = static_cast<int>(map.rows.size());
    int w = h > 0 ? static_cast<int>(map.rows.front().size()) : 0;
    auto code = [&](int r, int c) { return map.rows[static_cast<std::size_t>(r)]
                                              [static_cast<std::size_t>(c)]; };
    long long populated = 0, jumbled = 0;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            char me = code(r, c);
            if (me == 'B') continue;
            ++populated;
            int differing = 0;
            const int dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, -1, 1};
            for (int k = 0; k < 4; ++k) {
                int rr = r + dr[k], cc = c + dc[k];
                if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                if (code(rr, cc) != me) ++differing;
            }
            if (differing >= config.jumble_neighbor_min) ++jumbled;
        }
    }
    return populated == 0 ? 0.0 : static_cast<double>(jumbled) / populated;
}

std::string render_analysis(const Workbook& wb, const AnalysisResult& a, RenderFormat f) {
    const RiskReport& r = a.risk;
    if (f == RenderFormat::Json) {
        njson doc;
        doc["workbook"] = {{"name", wb.name},
                           {"sheet_count", a.metrics.sheet_count},
                           {"file_size_bytes", wb.file_size_bytes},
                           {"saved_at", wb.saved_at ? njson(render_rfc3339(*wb.saved_at))
                                                    : njson(nullptr)}};
        doc["rating"] = {{"overall_percent", r.overall_rating_percent},
                         {"triggered_weight", r.triggered_weight},
                         {"total_weight", r.total_weight}};
        doc["factors"] = njson::array();
        for (std::size_t i = 0; i < r.catalog.size(); ++i) {
            const RiskFactor& fac = r.catalog[i];
            const Finding& fd = r.findings[i];
            njson jf = {{"id", fac.id},
                        {"title", fac.title},
                        {"category", category_text(fac.category)},
                        {"kind", fac.kind == FactorKind::Measure ? "measure" : "presence"},
                        {"weight", fac.weight},
                        {"status", status_text(fd.status)}};
            if (fac.threshold) jf["threshold"] = *fac.threshold;
            if (fd.measured_value) jf["measured_value"] = *fd.measured_value;
            if (fd.example_address) jf["example_address"] = *fd.example_address;
            if (fd.example_formula) jf["example_formula"] = *fd.example_formula;
            if (fd.detail) jf["detail"] = *fd.detail;
            doc["factors"].push_back(std::move(jf));
        }
        doc["used_range_findings"] = njson::array();
        for (const UsedRangeFinding& u : r.used_range_findings) {
            njson ju = {{"sheet", u.sheet_name},
                        {"declared_cells", u.stats.declared_cells},
                        {"populated_cells", u.stats.populated_cells},
                        {"blank_ratio", u.stats.blank_ratio}};
            if (u.stats.trimmed_range)
                ju["trimmed_range"] = render_range(*u.stats.trimmed_range);
            doc["used_range_findings"].push_back(std::move(ju));
        }
        doc["skipped"] = r.skipped;
        doc["metrics"] = {{"sheet_count", a.metrics.sheet_count},
                          {"total_cells", a.metrics.total_cells},
                          {"total_formulas", a.metrics.total_formulas},
                          {"total_unique_formulas", a.metrics.total_unique_formulas},
                          {"max_formula_length", a.metrics.max_formula_length},
                          {"max_formula_complexity", a.metrics.max_formula_complexity},
                          {"vba_lines", a.metrics.vba_lines},
                          {"vba_components", a.metrics.vba_components},
                          {"file_size_bytes", a.metrics.file_size_bytes}};
        if (a.metrics.largest_numeric_result)
            doc["metrics"]["largest_numeric_result"] = *a.metrics.largest_numeric_result;
        doc["scale_advice"] = scale_advice_text(a.advice);
        doc["parse_failures"] = njson::array();
        for (const ParseFailure& pf : a.parse_failures)
            doc["parse_failures"].push_back({{"cell", cell_label(wb, pf.sheet, pf.coord)},
                                             {"message", pf.message},
                                             {"position", pf.position}});
        doc["warnings"] = a.warnings;
        return dump(doc);
    }

    Table t;
    t.header = {"Title", "Category", "Weight", "Status", "Value", "Example"};
    for (std::size_t i = 0; i < r.catalog.size(); ++i) {
        const RiskFactor& fac = r.catalog[i];
        const Finding& fd = r.findings[i];
        t.rows.push_back({fac.title, category_text(fac.category),
                          std::to_string(fac.weight), status_text(fd.status),
                          fd.measured_value ? render_number(*fd.measured_value) : "",
                          fd.example_address.value_or("")});
    }
    std::vector<std::string> details;
    for (std::size_t i = 0; i < r.catalog.size(); ++i)
        if (r.findings[i].detail)
            details.push_back(r.catalog[i].title + ": " + *r.findings[i].detail);
    std::vector<std::string> used;
    for (const UsedRangeFinding& u : r.used_range_findings)
        used.push_back(u.sheet_name + ": blank ratio " + fixed(u.stats.blank_ratio, 5) +
                       (u.stats.trimmed_range
                            ? ", content " + render_range(*u.stats.trimmed_range)
                            : ""));
    std::vector<std::string> failures;
    for (const ParseFailure& pf : a.parse_failures)
        failures.push_back(cell_label(wb, pf.sheet, pf.coord) + ": " + pf.message +
                           " at " + std::to_string(pf.position));

    if (f == RenderFormat::Markdown) {
        std::string out = "# Risk analysis: " + wb.name + "\n\n";
        out += "**Overall risk rating: " + std::to_string(r.overall_rating_percent) +
               "%** (" + std::to_string(r.triggered_weight) + "/" +
               std::to_string(r.total_weight) + ")\n\n";
        out += "Scale advice: " + std::string(scale_advice_text(a.advice)) + "\n\n";
        out += t.markdown();
        out += "\n## Details\n\n";
        if (details.empty()) out += "none\n";
        for (const std::string& d : details) out += "- " + md_escape(d) + "\n";
        out += "\n## Used range findings\n\n";
        if (used.empty()) out += "none\n";
        for (const std::string& d : used) out += "- " + md_escape(d) + "\n";
        out += "\n## Parse failures\n\n";
        if (failures.empty()) out += "none\n";
        for (const std::string& d : failures) out += "- " + md_escape(d) + "\n";
        if (!r.skipped.empty()) {
            out += "\n## Skipped\n\n";
            for (const std::string& s : r.skipped) out += "- " + s + "\n";
        }
        return out;
    }

    std::string out = "Workbook: " + wb.name + "\n";
    out += "Sheets: " + std::to_string(a.metrics.sheet_count) +
           "  Formulas: " + std::to_string(a.metrics.total_formulas) +
           "  Unique: " + std::to_string(a.metrics.total_unique_formulas) +
           "  Size: " + kb_text(wb.file_size_bytes) + "\n";
    out += "Overall risk rating: " + std::to_string(r.overall_rating_percent) + "% (" +
           std::to_string(r.triggered_weight) + "/" + std::to_string(r.total_weight) +
           ")\n";
    out += "Scale advice: " + std::string(scale_advice_text(a.advice)) + "\n";
    section(out, "Factors");
    out += t.text();
    section(out, "Details");
    if (details.empty()) out += "none\n";
    for (const std::string& d : details) out += d + "\n";
    section(out, "Used range findings");
    if (used.empty()) out += "none\n";
    for (const std::string& d : used) out += d + "\n";
    section(out, "Parse failures");
    if (failures.empty()) out += "none\n";
    for (const std::string& d : failures) out += d + "\n";
    if (!r.skipped.empty()) {
        std::string joined;
        for (const std::string& s : r.skipped) {
            if (!joined.empty()) joined += ", ";
            joined += s;
        }
        out += "\nSkipped (no evaluation): " + joined + "\n";
    }
    return out;
}

std::string render_metrics(const Workbook& wb, const AnalysisResult& a, RenderFormat f) {
    const WorkbookMetrics& m = a.metrics;
    if (f == RenderFormat::Json) {
        njson doc = {{"workbook", wb.name},
                     {"sheet_count", m.sheet_count},
                     {"total_cells", m.total_cells},
                     {"total_formulas", m.total_formulas},
                     {"total_unique_formulas", m.total_unique_formulas},
                     {"max_formula_length", m.max_formula_length},
                     {"max_formula_complexity", m.max_formula_complexity},
                     {"vba_lines", m.vba_lines},
                     {"vba_components", m.vba_components},
                     {"file_size_bytes", m.file_size_bytes},
                     {"scale_advice", scale_advice_text(a.advice)}};
        if (m.largest_numeric_result)
            doc["largest_numeric_result"] = *m.largest_numeric_result;
        return dump(doc);
    }
    std::vector<std::pair<std::string, std::string>> lines = {
        {"Workbook", wb.name},
        {"Sheets", std::to_string(m.sheet_count)},
        {"Cells", std::to_string(m.total_cells)},
        {"Formulas", std::to_string(m.total_formulas)},
        {"Unique formulas", std::to_string(m.total_unique_formulas)},
        {"Longest formula", std::to_string(m.max_formula_length)},
        {"Most complex formula", std::to_string(m.max_formula_complexity)},
        {"Largest result",
         m.largest_numeric_result ? render_number(*m.largest_numeric_result) : "unknown"},
        {"VBA lines", std::to_string(m.vba_lines)},
        {"VBA components", std::to_string(m.vba_components)},
        {"Size", kb_text(m.file_size_bytes)},
        {"Scale advice", scale_advice_text(a.advice)},
    };
    std::string out;
    if (f == RenderFormat::Markdown) {
        Table t;
        t.header = {"Metric", "Value"};
        for (auto& [k, v] : lines) t.rows.push_back({k, v});
        out = "# Metrics: " + wb.name + "\n\n" + t.markdown();
    } else {
        for (auto& [k, v] : lines) out += k + ": " + v + "\n";
    }
    return out;
}

std::string render_uniques(const Workbook& wb, const AnalysisResult& a, RenderFormat f) {
    std::map<std::pair<int, CellCoord>, const FormulaCell*> at;
    for (const FormulaCell& fc : a.formulas) at[{fc.sheet, fc.coord}] = &fc;
    auto metrics_of = [&](const UniqueFormula& u) -> const FormulaMetrics* {
        auto it = at.find({u.sheet, u.first_found});
        return it == at.end() ? nullptr : &it->second->metrics;
    };
    auto first_label = [](const UniqueFormula& u) {
        return "$" + column_name(u.first_found.col) + "$" +
               std::to_string(u.first_found.row);
    };
    if (f == RenderFormat::Json) {
        njson doc;
        doc["workbook"] = wb.name;
        doc["unique_formulas"] = njson::array();
        for (const UniqueFormula& u : a.uniques) {
            const FormulaMetrics* m = metrics_of(u);
            njson ju = {{"sheet", u.sheet_name},
                        {"first_found", first_label(u)},
                        {"instances", u.instance_count},
                        {"r1c1", u.r1c1},
                        {"example", u.example_text}};
            if (m) {
                ju["length"] = m->length;
                ju["complexity"] = m->complexity;
            }
            doc["unique_formulas"].push_back(std::move(ju));
        }
        return dump(doc);
    }
    Table t;
    t.header = {"Sheet", "First", "Count", "Length", "Complexity", "Formula"};
    for (const UniqueFormula& u : a.uniques) {
        const FormulaMetrics* m = metrics_of(u);
        t.rows.push_back({u.sheet_name, first_label(u), std::to_string(u.instance_count),
                          m ? std::to_string(m->length) : "",
                          m ? std::to_string(m->complexity) : "", u.r1c1});
    }
    if (f == RenderFormat::Markdown)
        return "# Unique formulas: " + wb.name + "\n\n" + t.markdown();
    std::string out = "Unique formulas: " + std::to_string(a.uniques.size()) + "\n\n";
    out += t.text();
    return out;
}

std::string render_index(const SheetIndex& index, const std::string& group_filter,
                         RenderFormat f) {
    std::vector<const IndexEntry*> picked;
    for (const IndexEntry& e : index.entries) {
        if (!group_filter.empty() &&
            std::find(e.groups.begin(), e.groups.end(), group_filter) == e.groups.end())
            continue;
        picked.push_back(&e);
    }
    auto groups_of = [](const IndexEntry& e) {
        std::string s;
        for (const std::string& g : e.groups) {
            if (!s.empty()) s += ", ";
            s += g;
        }
        return s;
    };
    if (f == RenderFormat::Json) {
        njson doc;
        doc["sheets"] = njson::array();
        for (const IndexEntry* e : picked)
            doc["sheets"].push_back({{"name", e->name},
                                     {"description", e->description},
                                     {"description_source", render_address(Address{
                                          std::nullopt, e->description_source.coord,
                                          false, false})},
                                     {"visibility", visibility_text(e->visibility)},
                                     {"groups", e->groups},
                                     {"review_status", review_status_text(e->review_status)},
                                     {"notes", e->notes},
                                     {"formula_count", e->formula_count},
                                     {"unique_count", e->unique_count}});
        doc["orphans"] = index.orphans;
        doc["warnings"] = index.warnings;
        return dump(doc);
    }
    Table t;
    t.header = {"Sheet", "Status", "Visibility", "Formulas", "Unique", "Groups",
                "Description"};
    for (const IndexEntry* e : picked)
        t.rows.push_back({e->name, review_status_text(e->review_status),
                          visibility_text(e->visibility), std::to_string(e->formula_count),
                          std::to_string(e->unique_count), groups_of(*e), e->description});
    if (f == RenderFormat::Markdown) {
        std::string out = "# Sheet index\n\n";
        for (const IndexEntry* e : picked)
            out += "- [" + md_escape(e->name) + "](#" + sheet_anchor(e->name) + ")\n";
        out += "\n" + t.markdown();
        for (const IndexEntry* e : picked) {
            out += "\n## <a id=\"" + sheet_anchor(e->name) + "\"></a>" +
                   md_escape(e->name) + "\n\n";
            out += "- Status: " + std::string(review_status_text(e->review_status)) + "\n";
            out += "- Visibility: " + std::string(visibility_text(e->visibility)) + "\n";
            if (!e->description.empty())
                out += "- Description: " + md_escape(e->description) + "\n";
            if (!e->groups.empty()) out += "- Groups: " + md_escape(groups_of(*e)) + "\n";
            if (!e->notes.empty()) out += "- Notes: " + md_escape(e->notes) + "\n";
            out += "- Formulas: " + std::to_string(e->formula_count) + " (" +
                   std::to_string(e->unique_count) + " unique)\n";
        }
        if (!index.orphans.empty()) {
            out += "\n## Orphaned review entries\n\n";
            for (const std::string& o : index.orphans) out += "- " + md_escape(o) + "\n";
        }
        return out;
    }
    std::string out = t.text();
    if (!index.orphans.empty()) {
        section(out, "Orphaned review entries");
        for (const std::string& o : index.orphans) out += o + "\n";
    }
    if (!index.warnings.empty()) {
        section(out, "Warnings");
        for (const std::string& w : index.warnings) out += w + "\n";
    }
    return out;
}

std::string render_sheet_map(const SheetMap& map, const std::vector<LayoutFinding>& findings,
                             double jumble, RenderFormat f) {
    if (f == RenderFormat::Json) {
        njson doc;
        doc["sheet"] = map.sheet_name;
        doc["bounds"] = map.bounds ? njson(render_range(*map.bounds)) : njson(nullptr);
        doc["rows"] = map.rows;
        doc["findings"] = njson::array();
        for (const LayoutFinding& lf : findings)
            doc["findings"].push_back({{"kind", lf.kind},
                                       {"cell", render_coord(lf.cell)},
                                       {"detail", lf.detail}});
        doc["jumble"] = jumble;
        return dump(doc);
    }
    std::string grid;
    if (map.bounds) {
        int width = static_cast<int>(std::to_string(map.bounds->end.row).size());
        for (std::size_t i = 0; i < map.rows.size(); ++i) {
            std::string num = std::to_string(map.bounds->start.row + static_cast<int>(i));
            grid += std::string(static_cast<std::size_t>(width) - num.size(), ' ') + num +
                    "  " + map.rows[i] + "\n";
        }
    }
    if (f == RenderFormat::Markdown) {
        std::string out = "# Sheet map: " + map.sheet_name + "\n\n";
        out += "Bounds: " + (map.bounds ? render_range(*map.bounds) : "none") + "\n\n";
        if (!grid.empty()) out += "```\n" + grid + "```\n";
        out += "\n## Findings\n\n";
        if (findings.empty()) out += "none\n";
        for (const LayoutFinding& lf : findings)
            out += "- " + render_coord(lf.cell) + ": " + md_escape(lf.detail) + "\n";
        out += "\nJumble: " + fixed(jumble, 4) + "\n";
        return out;
    }
    std::string out = "Sheet: " + map.sheet_name + "\n";
    out += "Bounds: " + (map.bounds ? render_range(*map.bounds) : "none") + "\n";
    out += grid;
    section(out, "Findings");
    if (findings.empty()) out += "none\n";
    for (const LayoutFinding& lf : findings)
        out += render_coord(lf.cell) + ": " + lf.detail + "\n";
    out += "\nJumble: " + fixed(jumble, 4) + "\n";
    return out;
}

std::string render_flow(const Workbook& wb, const DepGraph& g, int sheet, RenderFormat f) {
    FlowStats st = flow_stats(g, sheet);
    const std::string& name = wb.sheets[static_cast<std::size_t>(sheet)].name;
    if (f == RenderFormat::Json) {
        njson doc = {{"sheet", name},
                     {"edges", st.edges},
                     {"rightward", st.rightward},
                     {"leftward", st.leftward},
                     {"same_column", st.same_column},
                     {"downward", st.downward},
                     {"upward", st.upward},
                     {"same_row", st.same_row},
                     {"incoming_cross", st.incoming_cross},
                     {"outgoing_cross", st.outgoing_cross},
                     {"backward_fraction", st.backward_fraction}};
        return dump(doc);
    }
    std::vector<std::pair<std::string, std::string>> lines = {
        {"Sheet", name},
        {"Intra-sheet edges", std::to_string(st.edges)},
        {"Rightward", std::to_string(st.rightward)},
        {"Leftward", std::to_string(st.leftward)},
        {"Same column", std::to_string(st.same_column)},
        {"Downward", std::to_string(st.downward)},
        {"Upward", std::to_string(st.upward)},
        {"Same row", std::to_string(st.same_row)},
        {"Incoming cross-sheet", std::to_string(st.incoming_cross)},
        {"Outgoing cross-sheet", std::to_string(st.outgoing_cross)},
        {"Backward fraction", fixed(st.backward_fraction, 4)},
    };
    if (f == RenderFormat::Markdown) {
        std::string out = "# Flow: " + name + "\n\n";
        for (auto& [k, v] : lines)
            if (k != "Sheet") out += "- " + k + ": " + v + "\n";
        return out;
    }
    std::string out;
    for (auto& [k, v] : lines) out += k + ": " + v + "\n";
    return out;
}

namespace {

std::string trace_label(const DepGraph& g, const TraceNode& t,
                        const std::string& fallback) {
    return t.node >= 0 ? g.node_label(t.node) : fallback;
}

njson trace_json(const DepGraph& g, const TraceNode& t, const std::string& fallback) {
    njson j;
    j["label"] = trace_label(g, t, fallback);
    if (t.value) j["value"] = value_json(*t.value);
    if (t.dynamic) {
        j["dynamic"] = true;
        j["construct"] = t.construct;
    }
    j["cyclic"] = t.cyclic;
    j["children"] = njson::array();
    for (const TraceNode& c : t.children)
        j["children"].push_back(trace_json(g, c, fallback));
    return j;
}

void trace_lines(std::string& out, const DepGraph& g, const TraceNode& t,
                 const std::string& fallback, int depth, bool bullets) {
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    if (bullets) out += "- ";
    out += trace_label(g, t, fallback);
    if (t.value) out += " = " + render_value(*t.value);
    if (t.dynamic) out += " (" + t.construct + ")";
    if (t.cyclic) out += " (cycle)";
    out += '\n';
    for (const TraceNode& c : t.children)
        trace_lines(out, g, c, fallback, depth + 1, bullets);
}

} // namespace

std::string render_trace(const Workbook& wb, const DepGraph& g, const TraceNode& tree,
                         const std::string& root_label, RenderFormat f) {
    (void)wb;
    if (f == RenderFormat::Json) return dump(trace_json(g, tree, root_label));
    std::string out;
    if (f == RenderFormat::Markdown) {
        out = "# Precedents of " + trace_label(g, tree, root_label) + "\n\n";
        trace_lines(out, g, tree, root_label, 0, true);
    } else {
        trace_lines(out, g, tree, root_label, 0, false);
    }
    return out;
}

std::string render_links(const LinkGraph& links, RenderFormat f) {
    auto path_of = [&](int n) { return links.nodes[static_cast<std::size_t>(n)].path; };
    auto stamp = [](std::int64_t t) { return render_rfc3339(t); };
    if (f == RenderFormat::Json) {
        njson doc;
        doc["files"] = njson::array();
        for (const FileNode& n : links.nodes) {
            njson jn = {{"path", n.path}, {"exists", n.exists}};
            if (n.saved_at) {
                jn["saved_at"] = stamp(*n.saved_at);
                jn["saved_at_source"] = n.saved_at_source;
            }
            if (n.load_error) jn["load_error"] = *n.load_error;
            doc["files"].push_back(std::move(jn));
        }
        doc["missing"] = links.missing_count();
        doc["edges"] = njson::array();
        for (const FileEdge& e : links.edges)
            doc["edges"].push_back({{"dependent", path_of(e.dependent)},
                                    {"precedent", path_of(e.precedent)},
                                    {"references", e.references}});
        doc["file_cycles"] = njson::array();
        for (const FileCycle& c : links.file_cycles) {
            njson jc;
            jc["files"] = njson::array();
            for (int n : c.nodes) jc["files"].push_back(path_of(n));
            jc["cell_confirmed"] = c.cell_confirmed;
            if (!c.note.empty()) jc["note"] = c.note;
            doc["file_cycles"].push_back(std::move(jc));
        }
        doc["cell_cycles"] = njson::array();
        for (const CellCycle& c : links.cell_cycles) {
            njson jc = njson::array();
            for (const CellCycleMember& m : c.members)
                jc.push_back({{"file", path_of(m.file)}, {"cell", m.cell}});
            doc["cell_cycles"].push_back(std::move(jc));
        }
        doc["stale_edges"] = njson::array();
        for (const StaleEdge& s : links.stale_edges)
            doc["stale_edges"].push_back({{"dependent", path_of(s.dependent)},
                                          {"dependent_saved", stamp(s.dependent_saved)},
                                          {"precedent", path_of(s.precedent)},
                                          {"precedent_saved", stamp(s.precedent_saved)}});
        doc["notes"] = links.notes;
        return dump(doc);
    }

    std::vector<std::string> file_lines;
    for (const FileNode& n : links.nodes) {
        std::string line = n.path;
        if (!n.exists) line += "  [missing]";
        if (n.load_error) line += "  [load error]";
        if (n.saved_at) line += "  (saved " + stamp(*n.saved_at) + " via " +
                                n.saved_at_source + ")";
        file_lines.push_back(std::move(line));
    }
    std::vector<std::string> edge_lines;
    for (const FileEdge& e : links.edges)
        edge_lines.push_back(path_of(e.dependent) + " -> " + path_of(e.precedent) + " (" +
                             std::to_string(e.references) +
                             (e.references == 1 ? " reference)" : " references)"));
    std::vector<std::string> cycle_lines;
    for (const FileCycle& c : links.file_cycles) {
        std::string line;
        for (int n : c.nodes) {
            if (!line.empty()) line += ", ";
            line += path_of(n);
        }
        line += c.cell_confirmed ? "  [confirmed by cell loop]" : "  [" + c.note + "]";
        cycle_lines.push_back(std::move(line));
    }
    std::vector<std::string> cell_lines;
    for (const CellCycle& c : links.cell_cycles) {
        std::string line;
        for (const CellCycleMember& m : c.members) {
            if (!line.empty()) line += " -> ";
            line += std::filesystem::path(path_of(m.file)).filename().string() + " " +
                    m.cell;
        }
        cell_lines.push_back(std::move(line));
    }
    std::vector<std::string> stale_lines;
    for (const StaleEdge& s : links.stale_edges)
        stale_lines.push_back(path_of(s.dependent) + " (saved " +
                              stamp(s.dependent_saved) + ") depends on " +
                              path_of(s.precedent) + " (saved " +
                              stamp(s.precedent_saved) + ")");

    auto block = [&](std::string& out, const char* title,
                     const std::vector<std::string>& lines, bool md) {
        if (md) {
            out += "\n## " + std::string(title) + "\n\n";
            if (lines.empty()) out += "none\n";
            for (const std::string& l : lines) out += "- " + md_escape(l) + "\n";
        } else {
            section(out, title);
            if (lines.empty()) out += "none\n";
            for (const std::string& l : lines) out += l + "\n";
        }
    };

    std::string out;
    bool md = f == RenderFormat::Markdown;
    if (md)
        out = "# Link scan\n\nMissing files: " + std::to_string(links.missing_count()) +
              "\n";
    else
        out = "Missing files: " + std::to_string(links.missing_count()) + "\n";
    block(out, "Files", file_lines, md);
    block(out, "Edges", edge_lines, md);
    block(out, "File cycles", cycle_lines, md);
    block(out, "Cell cycles", cell_lines, md);
    block(out, "Stale edges", stale_lines, md);
    block(out, "Notes", links.notes, md);
    return out;
}

std::string render_eval(const Workbook& wb, const EvalResult& eval, RenderFormat f) {
    auto label = [&](const CellKey& k) {
        return cell_label(wb, std::get<0>(k), {std::get<2>(k), std::get<1>(k)});
    };
    if (f == RenderFormat::Json) {
        njson doc;
        doc["values"] = njson::object();
        njson errors = njson::array();
        for (const auto& [key, value] : eval.values) {
            doc["values"][label(key)] = value_json(value);
            if (value.is_error()) errors.push_back(label(key));
        }
        doc["errors"] = std::move(errors);
        doc["unevaluated"] = njson::array();
        for (const auto& [key, fn] : eval.unevaluated)
            doc["unevaluated"].push_back({{"cell", label(key)}, {"function", fn}});
        doc["dynamic_edges"] = njson::array();
        for (const DynamicEdge& e : eval.dynamic_edges)
            doc["dynamic_edges"].push_back(
                {{"precedent", cell_label(wb, e.from_sheet, e.from)},
                 {"dependent", cell_label(wb, e.to_sheet, e.to)},
                 {"construct", e.construct}});
        doc["passes"] = eval.passes;
        return dump(doc);
    }
    std::vector<std::string> value_lines, error_lines, pending, dyn;
    for (const auto& [key, value] : eval.values) {
        value_lines.push_back(label(key) + " = " + render_value(value));
        if (value.is_error()) error_lines.push_back(label(key) + " = " +
                                                    render_value(value));
    }
    for (const auto& [key, fn] : eval.unevaluated)
        pending.push_back(label(key) + ": " + fn);
    for (const DynamicEdge& e : eval.dynamic_edges)
        dyn.push_back(cell_label(wb, e.from_sheet, e.from) + " -> " +
                      cell_label(wb, e.to_sheet, e.to) + " (" + e.construct + ")");

    bool md = f == RenderFormat::Markdown;
    std::string out;
    auto block = [&](const char* title, const std::vector<std::string>& lines) {
        if (md) {
            out += "\n## " + std::string(title) + "\n\n";
            if (lines.empty()) out += "none\n";
            for (const std::string& l : lines) out += "- " + md_escape(l) + "\n";
        } else {
            section(out, title);
            if (lines.empty()) out += "none\n";
            for (const std::string& l : lines) out += l + "\n";
        }
    };
    if (md)
        out = "# Evaluation\n\nPasses: " + std::to_string(eval.passes) + "\n";
    else
        out = "Passes: " + std::to_string(eval.passes) + "\n";
    block("Values", value_lines);
    block("Errors", error_lines);
    block("Unevaluated", pending);
    block("Dynamic edges", dyn);
    return out;
}

} // namespace sheetlens
