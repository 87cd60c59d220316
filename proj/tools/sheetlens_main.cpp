#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sheetlens/analysis.hpp"
#include "sheetlens/config.hpp"
#include "sheetlens/links.hpp"
#include "sheetlens/report.hpp"

using namespace sheetlens;

namespace {

constexpr int kOk = 0;
constexpr int kFailAbove = 1;
constexpr int kUsage = 2;
constexpr int kMissing = 3;
constexpr int kBadFormat = 4;

void warn_all(const std::vector<std::string>& warnings) {
    for (const std::string& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

int fail(int code, const std::string& message) {
    std::fprintf(stderr, "error: %s\n", message.c_str());
    return code;
}

int load_error_code(const LoadError& e) {
    return e.kind() == LoadError::Kind::FileMissing ? kMissing : kBadFormat;
}

struct CommonArgs {
    std::string format = "text";
    std::string config_path;
};

void add_common(CLI::App* sub, CommonArgs& c) {
    sub->add_option("--format", c.format, "Output format: text, json, or md")
        ->check(CLI::IsMember({"text", "json", "md"}));
    sub->add_option("--config", c.config_path, "Config file path");
}

struct Inputs {
    Workbook wb;
    Config config;
};

// Loads config then workbook; prints warnings. Returns an exit code on
// failure, nullopt when ready.
std::optional<int> load_inputs(const std::string& path, const CommonArgs& c, Inputs& out) {
    std::vector<std::string> warnings;
    try {
        std::optional<std::string> explicit_path;
        if (!c.config_path.empty()) explicit_path = c.config_path;
        out.config = resolve_config(explicit_path, warnings);
    } catch (const LoadError& e) {
        return fail(load_error_code(e), e.what());
    }
    try {
        LoadResult loaded = load_workbook(path);
        out.wb = std::move(loaded.workbook);
        warnings.insert(warnings.end(), loaded.warnings.begin(), loaded.warnings.end());
    } catch (const LoadError& e) {
        return fail(load_error_code(e), e.what());
    }
    warn_all(warnings);
    return std::nullopt;
}

void emit(const std::string& doc) { std::fwrite(doc.data(), 1, doc.size(), stdout); }

int find_sheet(const Workbook& wb, const std::string& name) {
    int s = wb.sheet_index(name);
    if (s < 0) std::fprintf(stderr, "error: no sheet named \"%s\"\n", name.c_str());
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spreadsheet review toolkit: risk scan, formula census, "
                 "dependency tracing, and workbook link mapping"};
    app.require_subcommand(1);

    CommonArgs common;

    auto* analyze = app.add_subcommand("analyze", "Risk report, metrics and scale advice");
    std::string analyze_path;
    bool no_eval = false;
    std::optional<int> fail_above;
    analyze->add_option("workbook", analyze_path, "Workbook JSON document")->required();
    analyze->add_flag("--no-eval", no_eval, "Skip evaluation; eval-dependent checks degrade");
    analyze->add_option("--fail-above", fail_above,
                        "Exit 1 when the rating exceeds this percent")
        ->check(CLI::Range(0, 100));
    add_common(analyze, common);

    auto* metrics = app.add_subcommand("metrics", "Workbook size and complexity numbers");
    std::string metrics_path;
    metrics->add_option("workbook", metrics_path, "Workbook JSON document")->required();
    add_common(metrics, common);

    auto* uniques = app.add_subcommand("unique-formulas",
                                       "Distinct formula patterns after fill normalization");
    std::string uniques_path;
    bool workbook_wide = false;
    uniques->add_option("workbook", uniques_path, "Workbook JSON document")->required();
    uniques->add_flag("--workbook-wide", workbook_wide,
                      "Group patterns across sheets instead of per sheet");
    add_common(uniques, common);

    auto* index = app.add_subcommand("index", "Sheet index with review state");
    std::string index_path, group_filter;
    index->add_option("workbook", index_path, "Workbook JSON document")->required();
    index->add_option("--group", group_filter, "Only sheets tagged with this group");
    add_common(index, common);

    auto* sheet_map_cmd = app.add_subcommand("sheet-map", "Cell-type layout map of one sheet");
    std::string map_sheet, map_path;
    sheet_map_cmd->add_option("sheet", map_sheet, "Sheet name")->required();
    sheet_map_cmd->add_option("workbook", map_path, "Workbook JSON document")->required();
    add_common(sheet_map_cmd, common);

    auto* flow = app.add_subcommand("flow", "Reading-order flow statistics of one sheet");
    std::string flow_sheet, flow_path;
    flow->add_option("sheet", flow_sheet, "Sheet name")->required();
    flow->add_option("workbook", flow_path, "Workbook JSON document")->required();
    add_common(flow, common);

    auto* trace = app.add_subcommand("trace", "Evaluating precedent trace of one cell");
    std::string trace_cell, trace_path;
    int trace_depth = 3;
    trace->add_option("cell", trace_cell, "Sheet-qualified cell, e.g. North!P8")->required();
    trace->add_option("workbook", trace_path, "Workbook JSON document")->required();
    trace->add_option("--depth", trace_depth, "Levels of precedents to expand")
        ->check(CLI::Range(0, 1000000));
    add_common(trace, common);

    auto* links = app.add_subcommand("links", "Cross-workbook link graph over files");
    std::vector<std::string> link_roots;
    int jobs = 0;
    links->add_option("paths", link_roots, "Directories or workbook documents")->required();
    links->add_option("--jobs", jobs, "Parallel file loads; 0 means logical cores")
        ->check(CLI::Range(0, 4096));
    add_common(links, common);

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate formulas; dump values and errors");
    std::string eval_path;
    eval_cmd->add_option("workbook", eval_path, "Workbook JSON document")->required();
    add_common(eval_cmd, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    RenderFormat fmt = *parse_format(common.format);

    try {
        if (*analyze) {
            Inputs in;
            if (auto rc = load_inputs(analyze_path, common, in)) return *rc;
            AnalysisOptions opt;
            opt.evaluate = !no_eval;
            AnalysisResult res = analyze_workbook(in.wb, in.config, opt);
            warn_all(res.warnings);
            emit(render_analysis(in.wb, res, fmt));
            if (fail_above && res.risk.overall_rating_percent > *fail_above)
                return kFailAbove;
            return kOk;
        }
        if (*metrics) {
            Inputs in;
            if (auto rc = load_inputs(metrics_path, common, in)) return *rc;
            AnalysisResult res = analyze_workbook(in.wb, in.config);
            warn_all(res.warnings);
            emit(render_metrics(in.wb, res, fmt));
            return kOk;
        }
        if (*uniques) {
            Inputs in;
            if (auto rc = load_inputs(uniques_path, common, in)) return *rc;
            AnalysisOptions opt;
            opt.evaluate = false;
            opt.workbook_wide_uniques = workbook_wide;
            AnalysisResult res = analyze_workbook(in.wb, in.config, opt);
            warn_all(res.warnings);
            emit(render_uniques(in.wb, res, fmt));
            return kOk;
        }
        if (*index) {
            Inputs in;
            if (auto rc = load_inputs(index_path, common, in)) return *rc;
            AnalysisOptions opt;
            opt.evaluate = false;
            AnalysisResult res = analyze_workbook(in.wb, in.config, opt);
            warn_all(res.warnings);
            SheetIndex idx = sheet_index(in.wb, res, in.config);
            emit(render_index(idx, group_filter, fmt));
            return kOk;
        }
        if (*sheet_map_cmd) {
            Inputs in;
            if (auto rc = load_inputs(map_path, common, in)) return *rc;
            int s = find_sheet(in.wb, map_sheet);
            if (s < 0) return kUsage;
            AnalysisResult res = analyze_workbook(in.wb, in.config);
            warn_all(res.warnings);
            SheetMap m = sheet_map(in.wb, s, res.eval ? &*res.eval : nullptr);
            std::vector<LayoutFinding> findings = layout_findings(m, in.config);
            emit(render_sheet_map(m, findings, jumble_fraction(m, in.config), fmt));
            return kOk;
        }
        if (*flow) {
            Inputs in;
            if (auto rc = load_inputs(flow_path, common, in)) return *rc;
            int s = find_sheet(in.wb, flow_sheet);
            if (s < 0) return kUsage;
            AnalysisOptions opt;
            opt.evaluate = false;
            AnalysisResult res = analyze_workbook(in.wb, in.config, opt);
            warn_all(res.warnings);
            emit(render_flow(in.wb, res.graph, s, fmt));
            return kOk;
        }
        if (*trace) {
            Address addr;
            try {
                addr = parse_address(trace_cell, true);
            } catch (const ParseError& e) {
                return fail(kUsage, "bad cell \"" + trace_cell + "\": " + e.what());
            }
            if (!addr.sheet)
                return fail(kUsage, "trace needs a sheet-qualified cell, e.g. North!P8");
            Inputs in;
            if (auto rc = load_inputs(trace_path, common, in)) return *rc;
            int s = find_sheet(in.wb, *addr.sheet);
            if (s < 0) return kUsage;
            AnalysisResult res = analyze_workbook(in.wb, in.config);
            warn_all(res.warnings);
            TraceNode tree =
                trace_precedents(in.wb, res.graph, *res.eval, s, addr.coord, trace_depth);
            Address canonical{in.wb.sheets[static_cast<std::size_t>(s)].name, addr.coord,
                              false, false};
            emit(render_trace(in.wb, res.graph, tree, render_address(canonical), fmt));
            return kOk;
        }
        if (*links) {
            for (const std::string& root : link_roots) {
                std::error_code ec;
                if (!std::filesystem::exists(root, ec))
                    return fail(kMissing, "no such path: " + root);
            }
            LinkOptions opt;
            opt.jobs = jobs;
            LinkGraph graph = scan_links(link_roots, opt);
            emit(render_links(graph, fmt));
            return kOk;
        }
        if (*eval_cmd) {
            Inputs in;
            if (auto rc = load_inputs(eval_path, common, in)) return *rc;
            AnalysisResult res = analyze_workbook(in.wb, in.config);
            warn_all(res.warnings);
            emit(render_eval(in.wb, *res.eval, fmt));
            return kOk;
        }
    } catch (const LoadError& e) {
        return fail(load_error_code(e), e.what());
    } catch (const std::invalid_argument& e) {
        return fail(kUsage, e.what());
    }
    return kUsage;
}
