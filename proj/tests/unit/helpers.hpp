#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "sheetlens/analysis.hpp"
#include "sheetlens/workbook.hpp"

namespace tst {

using namespace sheetlens;

inline Workbook wb_from_json(const std::string& text) {
    return load_workbook_json(text, "inline").workbook;
}

inline std::string fixture_path(const std::string& name) {
    return std::string(SHEETLENS_FIXTURES) + "/" + name;
}

inline std::string read_fixture(const std::string& name) {
    std::ifstream in(fixture_path(name));
    if (!in) throw std::runtime_error("missing fixture " + name);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Wraps a cells object into a one-sheet workbook document. `sheet_extra`
// and `wb_extra` are raw JSON fragments starting with a comma.
inline std::string one_sheet(const std::string& cells,
                             const std::string& sheet_extra = "",
                             const std::string& wb_extra = "") {
    return R"({"name":"T.xls","file_size_bytes":100,"sheets":[{"name":"S","cells":{)" +
           cells + "}" + sheet_extra + "}]" + wb_extra + "}";
}

// Keeps the workbook alive next to the analysis that points into it.
struct Analyzed {
    Workbook wb;
    Config config;
    AnalysisResult result;

    explicit Analyzed(const std::string& json, bool evaluate = true, Config cfg = {})
        : wb(wb_from_json(json)), config(std::move(cfg)) {
        AnalysisOptions opt;
        opt.evaluate = evaluate;
        result = analyze_workbook(wb, config, opt);
    }
};

inline const Finding& finding(const AnalysisResult& r, const std::string& id) {
    for (std::size_t i = 0; i < r.risk.catalog.size(); ++i)
        if (r.risk.catalog[i].id == id) return r.risk.findings[i];
    throw std::runtime_error("no factor " + id);
}

} // namespace tst
