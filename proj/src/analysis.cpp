#include "sheetlens/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

namespace sheetlens {

ParsePass parse_workbook(const Workbook& wb) {
    ParsePass out;
    for (std::size_t s = 0; s < wb.sheets.size(); ++s) {
        for (const auto& [coord, cell] : wb.sheets[s].cells) {
            if (!cell.is_formula()) continue;
            FormulaCell fc;
            fc.sheet = static_cast<int>(s);
            fc.coord = coord;
            fc.text = *cell.formula;
            fc.array = cell.array_range.has_value();
            try {
                fc.ast = parse_formula(fc.text);
                fc.metrics = formula_metrics(*fc.ast, fc.text);
            } catch (const ParseError& e) {
                out.failures.push_back(
                    {fc.sheet, fc.coord, fc.text, e.what(), e.position()});
            }
            out.formulas.push_back(std::move(fc));
        }
    }
    return out;
}

std::vector<UniqueFormula> classify_unique_formulas(const Workbook& wb,
                                                    std::span<const FormulaCell> formulas,
                                                    bool workbook_wide) {
    std::vector<UniqueFormula> out;
    std::map<std::pair<int, std::string>, std::size_t> index;
    for (const FormulaCell& fc : formulas) {
        if (!fc.ast) continue;
        std::string key = normalize_formula(*fc.ast, fc.coord).r1c1;
        int bucket = workbook_wide ? -1 : fc.sheet;
        auto [it, fresh] = index.try_emplace({bucket, std::move(key)}, out.size());
        if (fresh) {
            UniqueFormula u;
            u.sheet = fc.sheet;
            u.sheet_name = wb.sheets[static_cast<std::size_t>(fc.sheet)].name;
            u.r1c1 = it->first.second;
            u.first_found = fc.coord;
            u.instance_count = 1;
            u.example_text = fc.text;
            out.push_back(std::move(u));
        } else {
            ++out[it->second].instance_count;
        }
    }
    return out;
}

WorkbookMetrics workbook_metrics(const Workbook& wb, std::span<const FormulaCell> formulas,
                                 const std::vector<UniqueFormula>& uniques,
                                 const EvalResult* eval) {
    WorkbookMetrics m;
    m.sheet_count = static_cast<int>(wb.sheets.size());
    for (const Sheet& s : wb.sheets) m.total_cells += static_cast<long long>(s.cells.size());
    m.total_formulas = static_cast<long long>(formulas.size());
    m.total_unique_formulas = static_cast<long long>(uniques.size());
    for (const FormulaCell& fc : formulas) {
        m.max_formula_length = std::max(m.max_formula_length, fc.metrics.length);
        m.max_formula_complexity = std::max(m.max_formula_complexity, fc.metrics.complexity);
    }
    if (eval) {
        for (const auto& [key, value] : eval->values) {
            if (!value.is_number()) continue;
            double mag = std::abs(value.number());
            if (!m.largest_numeric_result || mag > *m.largest_numeric_result)
                m.largest_numeric_result = mag;
        }
    }
    m.vba_lines = wb.vba.total_lines;
    m.vba_components = wb.vba.components;
    m.file_size_bytes = wb.file_size_bytes;
    return m;
}

AnalysisResult analyze_workbook(const Workbook& wb, const Config& config,
                                const AnalysisOptions& options) {
    AnalysisResult r;
    configured_catalog(config, &r.warnings);   // surface override problems once

    ParsePass pass = parse_workbook(wb);
    r.formulas = std::move(pass.formulas);
    r.parse_failures = std::move(pass.failures);
    r.uniques = classify_unique_formulas(wb, r.formulas, options.workbook_wide_uniques);

    std::vector<ParsedCell> parsed;
    parsed.reserve(r.formulas.size());
    for (const FormulaCell& fc : r.formulas)
        if (fc.ast) parsed.push_back({fc.sheet, fc.coord, fc.ast.get(), &fc.text});

    r.graph = build_graph(wb, parsed, options.graph);
    std::vector<Cycle> static_cycles = find_cycles(r.graph);

    if (options.evaluate) {
        r.eval = evaluate(wb, r.graph, parsed, static_cycles);
        merge_dynamic_edges(r.graph, r.eval->dynamic_edges);
        r.cycles = find_cycles(r.graph);
    } else {
        r.cycles = std::move(static_cycles);
    }

    const EvalResult* ev = r.eval ? &*r.eval : nullptr;
    r.metrics = workbook_metrics(wb, r.formulas, r.uniques, ev);
    r.risk = run_catalog(wb, r.formulas, r.uniques, r.graph, r.cycles, ev, config);
    r.advice = scale_advice(r.metrics.sheet_count, r.metrics.total_formulas, config.scale);
    return r;
}

} // namespace sheetlens
