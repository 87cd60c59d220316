#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sheetlens/analysis.hpp"
#include "sheetlens/config.hpp"
#include "sheetlens/links.hpp"
#include "sheetlens/report.hpp"

namespace py = pybind11;
using namespace sheetlens;

namespace {

struct Loaded {
    Workbook wb;
    Config config;
};

Loaded load(const std::string& path, const std::optional<std::string>& config_path) {
    Loaded out;
    std::vector<std::string> warnings;
    out.config = resolve_config(config_path, warnings);
    LoadResult r = load_workbook(path);
    out.wb = std::move(r.workbook);
    return out;
}

AnalysisResult run(const Loaded& in, bool evaluate, bool workbook_wide = false) {
    AnalysisOptions opt;
    opt.evaluate = evaluate;
    opt.workbook_wide_uniques = workbook_wide;
    return analyze_workbook(in.wb, in.config, opt);
}

std::string analyze_json(const std::string& path, bool evaluate,
                         const std::optional<std::string>& config_path) {
    Loaded in = load(path, config_path);
    return render_analysis(in.wb, run(in, evaluate), RenderFormat::Json);
}

std::string metrics_json(const std::string& path,
                         const std::optional<std::string>& config_path) {
    Loaded in = load(path, config_path);
    return render_metrics(in.wb, run(in, true), RenderFormat::Json);
}

std::string unique_formulas_json(const std::string& path, bool workbook_wide,
                                 const std::optional<std::string>& config_path) {
    Loaded in = load(path, config_path);
    return render_uniques(in.wb, run(in, false, workbook_wide), RenderFormat::Json);
}

std::string index_json(const std::string& path, const std::string& group,
                       const std::optional<std::string>& config_path) {
    Loaded in = load(path, config_path);
    AnalysisResult res = run(in, false);
    SheetIndex idx = sheet_index(in.wb, res, in.config);
    return render_index(idx, group, RenderFormat::Json);
}

std::string sheet_map_json(const std::string& path, const std::string& sheet,
                           const std::optional<std::string>& config_path) {
    Loaded in = load(path, config_path);
    int s = in.wb.sheet_index(sheet);
    if (s < 0) throw py::value_error("no sheet named \"" + sheet + "\"");
    AnalysisResult res = run(in, true);
    SheetMap m = sheet_map(in.wb, s, res.eval ? &*res.eval : nullptr);
    std::vector<LayoutFinding> findings = layout_findings(m, in.config);
    return render_sheet_map(m, findings, jumble_fraction(m, in.config),
                            RenderFormat::Json);
}

std::string flow_json(const std::string& path, const std::string& sheet,
                      const std::optional<std::string>& config_path) {
    Loaded in = load(path, config_path);
    int s = in.wb.sheet_index(sheet);
    if (s < 0) throw py::value_error("no sheet named \"" + sheet + "\"");
    AnalysisResult res = run(in, false);
    return render_flow(in.wb, res.graph, s, RenderFormat::Json);
}

std::string trace_json(const std::string& path, const std::string& cell, int depth,
                       const std::optional<std::string>& config_path) {
    Address addr = parse_address(cell, true);
    if (!addr.sheet) throw py::value_error("trace needs a sheet-qualified cell");
    Loaded in = load(path, config_path);
    int s = in.wb.sheet_index(*addr.sheet);
    if (s < 0) throw py::value_error("no sheet named \"" + *addr.sheet + "\"");
    AnalysisResult res = run(in, true);
    TraceNode tree = trace_precedents(in.wb, res.graph, *res.eval, s, addr.coord, depth);
    Address canonical{in.wb.sheets[static_cast<std::size_t>(s)].name, addr.coord, false,
                      false};
    return render_trace(in.wb, res.graph, tree, render_address(canonical),
                        RenderFormat::Json);
}

std::string links_json(const std::vector<std::string>& paths, int jobs) {
    LinkOptions opt;
    opt.jobs = jobs;
    return render_links(scan_links(paths, opt), RenderFormat::Json);
}

std::string eval_json(const std::string& path,
                      const std::optional<std::string>& config_path) {
    Loaded in = load(path, config_path);
    AnalysisResult res = run(in, true);
    return render_eval(in.wb, *res.eval, RenderFormat::Json);
}

int overall_rating(const std::string& path,
                   const std::optional<std::string>& config_path) {
    Loaded in = load(path, config_path);
    return run(in, true).risk.overall_rating_percent;
}

std::string normalize_r1c1(const std::string& formula, const std::string& origin) {
    Address at = parse_address(origin, false);
    AstPtr ast = parse_formula(formula);
    return normalize_formula(*ast, at.coord).r1c1;
}

} // namespace

PYBIND11_MODULE(_sheetlens, m) {
    m.doc() = "Spreadsheet review toolkit core";

    py::register_exception<LoadError>(m, "LoadError");
    py::register_exception<ParseError>(m, "FormulaError");

    m.def("analyze_json", &analyze_json, py::arg("path"), py::arg("evaluate") = true,
          py::arg("config_path") = std::nullopt,
          "Risk report, metrics and scale advice as a JSON document");
    m.def("metrics_json", &metrics_json, py::arg("path"),
          py::arg("config_path") = std::nullopt);
    m.def("unique_formulas_json", &unique_formulas_json, py::arg("path"),
          py::arg("workbook_wide") = false, py::arg("config_path") = std::nullopt);
    m.def("index_json", &index_json, py::arg("path"), py::arg("group") = std::string(),
          py::arg("config_path") = std::nullopt);
    m.def("sheet_map_json", &sheet_map_json, py::arg("path"), py::arg("sheet"),
          py::arg("config_path") = std::nullopt);
    m.def("flow_json", &flow_json, py::arg("path"), py::arg("sheet"),
          py::arg("config_path") = std::nullopt);
    m.def("trace_json", &trace_json, py::arg("path"), py::arg("cell"),
          py::arg("depth") = 3, py::arg("config_path") = std::nullopt);
    m.def("links_json", &links_json, py::arg("paths"), py::arg("jobs") = 0);
    m.def("eval_json", &eval_json, py::arg("path"),
          py::arg("config_path") = std::nullopt);
    m.def("overall_rating", &overall_rating, py::arg("path"),
          py::arg("config_path") = std::nullopt,
          "Overall risk rating percent after evaluation");
    m.def("normalize_r1c1", &normalize_r1c1, py::arg("formula"),
          py::arg("origin") = std::string("A1"),
          "Fill-invariant relative form of a formula written at origin");
    m.def("column_name", &column_name, py::arg("number"));
    m.def("column_number", &column_number, py::arg("name"));
    m.def("supported_functions", [] {
        std::vector<std::string> out;
        for (const char* f : supported_functions()) out.emplace_back(f);
        return out;
    });
}
