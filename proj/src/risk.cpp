#include "sheetlens/risk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

namespace sheetlens {

const char* category_text(FactorCategory c) {
    switch (c) {
        case FactorCategory::High: return "high";
        case FactorCategory::Significant: return "significant";
        case FactorCategory::ComplexLogic: return "complex_logic";
        case FactorCategory::Measure: return "measure";
    }
    return "?";
}

const char* status_text(FindingStatus s) {
    switch (s) {
        case FindingStatus::Found: return "found";
        case FindingStatus::NotFound: return "not_found";
        case FindingStatus::AboveLimit: return "above_limit";
        case FindingStatus::WithinLimit: return "within_limit";
    }
    return "?";
}

std::vector<RiskFactor> default_catalog() {
    using C = FactorCategory;
    auto p = [](const char* id, const char* title, C cat, int weight) {
        return RiskFactor{id, title, cat, FactorKind::Presence, weight, std::nullopt};
    };
    auto m = [](const char* id, const char* title, int weight, double limit) {
        return RiskFactor{id, title, C::Measure, FactorKind::Measure, weight, limit};
    };
    return {
        p("circular_refs", "Circular References", C::High, 10),
        p("text_stored_numbers", "Cells Displaying A Number But Storing Text", C::High, 10),
        p("mixed_formula_constants", "Mixed Formulas And Values", C::High, 10),
        p("formula_errors", "Formulas Evaluating To An Error", C::High, 10),
        p("vlookup_unordered", "Vlookups Expecting An Ordered List", C::High, 8),
        p("hlookup_unordered", "Hlookups Expecting An Ordered List", C::High, 8),
        p("external_links", "Links To External Workbooks", C::Significant, 5),
        p("very_hidden_sheets", "Presence Of Very Hidden Sheets", C::Significant, 5),
        p("hidden_rows_cols", "Hidden Rows Or Columns", C::Significant, 3),
        p("plus_equals_construct", "\"=*\" Construct", C::Significant, 3),
        p("conditional_formatting", "Conditional Formatting", C::Significant, 3),
        p("pivot_tables", "Use Of Pivot Tables", C::Significant, 3),
        p("array_formulas", "Array Formulas", C::ComplexLogic, 8),
        p("nested_ifs", "Nested If Statements", C::ComplexLogic, 6),
        p("sumif_use", "Use Of Sumif", C::ComplexLogic, 5),
        p("database_functions", "Use Of Database Functions (Dsum Etc)", C::ComplexLogic, 5),
        p("indirect_use", "Use Of Indirect", C::ComplexLogic, 5),
        m("longest_formula", "Longest Formula", 7, 100),
        m("most_complex_formula", "Most Complex Formula", 7, 7),
        m("total_formulas", "Total Number Of Formulas", 5, 1000),
        m("unique_formulas", "Total Number Of Unique Formulas", 5, 10),
        m("workbook_size", "Workbook Size", 5, 102400),
        m("sheet_count", "No Of Worksheets", 5, 5),
        m("vba_lines", "Total All Lines of VBA Code", 8, 0),
        m("largest_result", "Largest Formula Result", 0, 10000),
    };
}

std::vector<RiskFactor> configured_catalog(const Config& config,
                                           std::vector<std::string>* warnings) {
    auto catalog = default_catalog();
    for (const auto& [id, over] : config.factors) {
        auto it = std::find_if(catalog.begin(), catalog.end(),
                               [&](const RiskFactor& f) { return f.id == id; });
        if (it == catalog.end()) {
            if (warnings) warnings->push_back("config: unknown risk factor \"" + id + "\"");
            continue;
        }
        if (over.weight) it->weight = *over.weight;
        if (over.threshold) {
            if (it->kind == FactorKind::Measure)
                it->threshold = *over.threshold;
            else if (warnings)
                warnings->push_back("config: factor \"" + id + "\" takes no threshold");
        }
    }
    return catalog;
}

namespace {

std::string cell_ref(const Workbook& wb, int sheet, CellCoord c) {
    Address a;
    a.sheet = wb.sheets[static_cast<std::size_t>(sheet)].name;
    a.coord = c;
    a.col_abs = true;
    a.row_abs = true;
    return render_address(a);
}

std::string counted(long long n, const char* noun) {
    std::string out = std::to_string(n) + ' ' + noun;
    if (n != 1) out += 's';
    return out;
}

template <typename F>
void walk_ast(const AstNode& n, F& visit) {
    visit(n);
    if (auto* c = std::get_if<CallNode>(&n.node)) {
        for (const auto& a : c->args) walk_ast(*a, visit);
    } else if (auto* b = std::get_if<BinaryNode>(&n.node)) {
        walk_ast(*b->left, visit);
        walk_ast(*b->right, visit);
    } else if (auto* u = std::get_if<UnaryNode>(&n.node)) {
        walk_ast(*u->operand, visit);
    }
}

// Signed value of a numeric or boolean literal, looking through unary +/-.
std::optional<double> literal_number(const AstNode& n) {
    if (auto* u = std::get_if<UnaryNode>(&n.node)) {
        if (u->op == UnOp::Percent) return std::nullopt;
        auto inner = literal_number(*u->operand);
        if (!inner) return std::nullopt;
        return u->op == UnOp::Minus ? -*inner : *inner;
    }
    if (auto* num = std::get_if<NumberLit>(&n.node)) return num->value;
    if (auto* b = std::get_if<BoolLit>(&n.node)) return b->value ? 1.0 : 0.0;
    return std::nullopt;
}

// First numeric literal that is not on the exempt list, skipping a literal
// digit count in ROUND's second argument when configured.
std::optional<double> embedded_constant(const AstNode& root, const Config& cfg) {
    auto exempt = [&](double v) {
        return std::find(cfg.exempt_literals.begin(), cfg.exempt_literals.end(), v) !=
               cfg.exempt_literals.end();
    };
    std::optional<double> hit;
    auto rec = [&](auto&& self, const AstNode& n) -> void {
        if (hit) return;
        if (auto* num = std::get_if<NumberLit>(&n.node)) {
            if (!exempt(num->value)) hit = num->value;
        } else if (auto* c = std::get_if<CallNode>(&n.node)) {
            for (std::size_t i = 0; i < c->args.size(); ++i) {
                if (cfg.exempt_round_digits && c->name == "ROUND" && i == 1 &&
                    std::holds_alternative<NumberLit>(c->args[i]->node))
                    continue;
                self(self, *c->args[i]);
            }
        } else if (auto* b = std::get_if<BinaryNode>(&n.node)) {
            self(self, *b->left);
            self(self, *b->right);
        } else if (auto* u = std::get_if<UnaryNode>(&n.node)) {
            self(self, *u->operand);
        }
    };
    rec(rec, root);
    return hit;
}

// Cell value as far as a static check can know it: literals directly,
// formula cells only through evaluation results.
std::optional<Value> readable_value(const Workbook& wb, const EvalResult* eval, int sheet,
                                    CellCoord c) {
    const CellContent* cell = wb.sheets[static_cast<std::size_t>(sheet)].find_cell(c);
    if (!cell) return Value(Blank{});
    if (cell->is_formula()) {
        if (!eval) return std::nullopt;
        if (const Value* v = eval->value_at(sheet, c)) return *v;
        return std::nullopt;
    }
    return cell->literal;
}

// Walks the lookup vector (first column or first row of the table range)
// until the first blank and reports whether the values seen ascend.
std::string order_detail(const Workbook& wb, const EvalResult* eval, int home_sheet,
                         const CallNode& call, bool vertical) {
    if (call.args.size() < 2) return "order unverified";
    int sheet = home_sheet;
    CellRange r;
    if (auto* rg = std::get_if<RangeNode>(&call.args[1]->node)) {
        if (rg->book) return "order unverified";
        if (rg->start.sheet) {
            sheet = wb.sheet_index(*rg->start.sheet);
            if (sheet < 0) return "order unverified";
        }
        CellCoord a = rg->start.coord, b = rg->end.coord;
        r = {{std::min(a.col, b.col), std::min(a.row, b.row)},
             {std::max(a.col, b.col), std::max(a.row, b.row)}};
    } else if (auto* nm = std::get_if<NameNode>(&call.args[1]->node)) {
        auto res = resolve_defined_name(wb, nm->name);
        if (!res || res->sheet < 0) return "order unverified";
        sheet = res->sheet;
        r = res->range;
    } else {
        return "order unverified";
    }
    std::vector<Value> seen;
    int steps = vertical ? r.height() : r.width();
    for (int i = 0; i < steps; ++i) {
        CellCoord c = vertical ? CellCoord{r.start.col, r.start.row + i}
                               : CellCoord{r.start.col + i, r.start.row};
        auto v = readable_value(wb, eval, sheet, c);
        if (!v) return "order unverified";
        if (v->is_blank()) break;
        if (v->is_error()) return "order unverified";
        seen.push_back(std::move(*v));
    }
    for (std::size_t i = 1; i < seen.size(); ++i)
        if (compare_values(seen[i - 1], seen[i]) > 0) return "confirmed unordered";
    return "sorted";
}

} // namespace

RiskReport run_catalog(const Workbook& wb, std::span<const FormulaCell> formulas,
                       const std::vector<UniqueFormula>& uniques, const DepGraph& graph,
                       const std::vector<Cycle>& cycles, const EvalResult* eval,
                       const Config& config) {
    RiskReport rep;
    rep.catalog = configured_catalog(config);
    for (const RiskFactor& f : rep.catalog) rep.total_weight += f.weight;
    if (rep.total_weight == 0)
        throw std::invalid_argument("risk catalog weights sum to zero");

    std::map<CellKey, const FormulaCell*> by_key;
    for (const FormulaCell& fc : formulas) by_key[cell_key(fc.sheet, fc.coord)] = &fc;

    auto presence = [](const RiskFactor& f, bool hit) {
        Finding fd;
        fd.factor_id = f.id;
        fd.status = hit ? FindingStatus::Found : FindingStatus::NotFound;
        return fd;
    };
    auto measure = [](const RiskFactor& f, double value) {
        Finding fd;
        fd.factor_id = f.id;
        fd.measured_value = value;
        fd.status = (f.threshold && value > *f.threshold) ? FindingStatus::AboveLimit
                                                          : FindingStatus::WithinLimit;
        return fd;
    };
    auto skip = [&rep](const RiskFactor& f) {
        Finding fd;
        fd.factor_id = f.id;
        fd.status = f.kind == FactorKind::Measure ? FindingStatus::WithinLimit
                                                  : FindingStatus::NotFound;
        fd.detail = "skipped: no evaluation";
        rep.skipped.push_back(f.id);
        return fd;
    };
    auto witness_formula = [&](Finding& fd, const FormulaCell& fc) {
        fd.example_address = cell_ref(wb, fc.sheet, fc.coord);
        fd.example_formula = fc.text;
    };
    // First parsed formula whose metrics or tree satisfy `pred`, in sheet
    // then row-major order (the order `formulas` arrives in).
    auto first_formula = [&](auto&& pred) -> const FormulaCell* {
        for (const FormulaCell& fc : formulas)
            if (fc.ast && pred(fc)) return &fc;
        return nullptr;
    };
    auto uses_function = [](const FormulaCell& fc, const char* name) {
        return std::binary_search(fc.metrics.function_names.begin(),
                                  fc.metrics.function_names.end(), name);
    };

    auto lookup_factor = [&](const RiskFactor& f, const char* fname, bool vertical) {
        Finding fd;
        fd.factor_id = f.id;
        fd.status = FindingStatus::NotFound;
        for (const FormulaCell& fc : formulas) {
            if (!fc.ast || !uses_function(fc, fname)) continue;
            const CallNode* call = nullptr;
            bool mode_constant = true;
            auto visit = [&](const AstNode& n) {
                if (call) return;
                auto* c = std::get_if<CallNode>(&n.node);
                if (!c || c->name != fname) return;
                if (c->args.size() < 4) {
                    call = c;
                    return;
                }
                if (auto v = literal_number(*c->args[3])) {
                    if (*v != 0) call = c;
                } else {
                    call = c;
                    mode_constant = false;
                }
            };
            walk_ast(*fc.ast, visit);
            if (!call) continue;
            fd.status = FindingStatus::Found;
            witness_formula(fd, fc);
            fd.detail = mode_constant ? order_detail(wb, eval, fc.sheet, *call, vertical)
                                      : "mode not constant";
            break;
        }
        return fd;
    };

    for (const RiskFactor& f : rep.catalog) {
        Finding fd;
        if (f.id == "circular_refs") {
            std::set<int> cells;
            for (const Cycle& cy : cycles)
                for (int n : cy.nodes)
                    if (graph.nodes[static_cast<std::size_t>(n)].kind == NodeKind::Cell)
                        cells.insert(n);
            fd = presence(f, !cycles.empty());
            if (!cycles.empty()) {
                int n0 = cycles.front().nodes.front();
                const GraphNode& gn = graph.nodes[static_cast<std::size_t>(n0)];
                fd.example_address = gn.kind == NodeKind::Cell
                                         ? cell_ref(wb, gn.sheet, gn.coord)
                                         : graph.node_label(n0);
                if (gn.kind == NodeKind::Cell) {
                    auto it = by_key.find(cell_key(gn.sheet, gn.coord));
                    if (it != by_key.end()) fd.example_formula = it->second->text;
                }
                fd.detail = counted(static_cast<long long>(cells.size()), "cell") +
                            " across " +
                            counted(static_cast<long long>(cycles.size()), "cycle");
            }
        } else if (f.id == "text_stored_numbers") {
            long long count = 0;
            fd = presence(f, false);
            for (std::size_t s = 0; s < wb.sheets.size(); ++s) {
                for (const auto& [coord, cell] : wb.sheets[s].cells) {
                    if (cell.is_formula() || !cell.literal.is_text() ||
                        !text_looks_numeric(cell.literal.text()))
                        continue;
                    if (count++ == 0)
                        fd.example_address = cell_ref(wb, static_cast<int>(s), coord);
                }
            }
            if (count > 0) {
                fd.status = FindingStatus::Found;
                fd.detail = counted(count, "cell") + " storing numeric text";
            }
        } else if (f.id == "mixed_formula_constants") {
            long long count = 0;
            std::optional<double> first_literal;
            fd = presence(f, false);
            for (const FormulaCell& fc : formulas) {
                if (!fc.ast) continue;
                auto lit = embedded_constant(*fc.ast, config);
                if (!lit) continue;
                if (count++ == 0) {
                    witness_formula(fd, fc);
                    first_literal = lit;
                }
            }
            if (count > 0) {
                fd.status = FindingStatus::Found;
                fd.detail = counted(count, "formula") + " embedding constants; first embeds " +
                            render_number(*first_literal);
            }
        } else if (f.id == "formula_errors") {
            if (!eval) {
                fd = skip(f);
            } else {
                long long count = 0;
                fd = presence(f, false);
                for (const auto& [key, value] : eval->values) {
                    if (!value.is_error()) continue;
                    if (count++ == 0) {
                        fd.example_address = cell_ref(
                            wb, std::get<0>(key), {std::get<2>(key), std::get<1>(key)});
                        auto it = by_key.find(key);
                        if (it != by_key.end()) fd.example_formula = it->second->text;
                        fd.detail = std::string("first is ") + error_text(value.error());
                    }
                }
                if (count > 0) {
                    fd.status = FindingStatus::Found;
                    fd.detail = counted(count, "formula") + " evaluating to an error; " +
                                *fd.detail;
                }
            }
        } else if (f.id == "vlookup_unordered") {
            fd = lookup_factor(f, "VLOOKUP", true);
        } else if (f.id == "hlookup_unordered") {
            fd = lookup_factor(f, "HLOOKUP", false);
        } else if (f.id == "external_links") {
            std::set<std::string> books(wb.external_links.begin(), wb.external_links.end());
            for (const FormulaCell& fc : formulas) {
                if (!fc.ast || !fc.metrics.has_external_ref) continue;
                auto visit = [&](const AstNode& n) {
                    if (auto* ref = std::get_if<RefNode>(&n.node)) {
                        if (ref->book) books.insert(*ref->book);
                    } else if (auto* rg = std::get_if<RangeNode>(&n.node)) {
                        if (rg->book) books.insert(*rg->book);
                    }
                };
                walk_ast(*fc.ast, visit);
            }
            fd = presence(f, !books.empty());
            if (!books.empty()) {
                std::string joined;
                for (const auto& b : books) {
                    if (!joined.empty()) joined += ", ";
                    joined += b;
                }
                fd.detail = joined;
                if (const FormulaCell* fc = first_formula(
                        [](const FormulaCell& c) { return c.metrics.has_external_ref; }))
                    witness_formula(fd, *fc);
            }
        } else if (f.id == "very_hidden_sheets") {
            fd = presence(f, false);
            for (const Sheet& s : wb.sheets) {
                if (s.visibility != SheetVisibility::VeryHidden) continue;
                fd.status = FindingStatus::Found;
                fd.detail = s.name;
                break;
            }
        } else if (f.id == "hidden_rows_cols") {
            fd = presence(f, false);
            for (const Sheet& s : wb.sheets) {
                if (s.hidden_rows.empty() && s.hidden_cols.empty()) continue;
                fd.status = FindingStatus::Found;
                fd.detail = s.hidden_cols.empty()
                                ? s.name + " row " + std::to_string(s.hidden_rows.front()) +
                                      " is hidden"
                                : s.name + " column " + column_name(s.hidden_cols.front()) +
                                      " is hidden";
                break;
            }
        } else if (f.id == "plus_equals_construct") {
            long long count = 0;
            fd = presence(f, false);
            for (std::size_t s = 0; s < wb.sheets.size(); ++s) {
                for (const auto& [coord, cell] : wb.sheets[s].cells) {
                    if (!cell.is_formula()) continue;
                    const std::string& t = *cell.formula;
                    if (t.size() < 2 || t[0] != '=' ||
                        (t[1] != '+' && t[1] != '-' && t[1] != '*'))
                        continue;
                    if (count++ == 0) {
                        fd.example_address = cell_ref(wb, static_cast<int>(s), coord);
                        fd.example_formula = t;
                    }
                }
            }
            if (count > 0) {
                fd.status = FindingStatus::Found;
                fd.detail = counted(count, "formula") + " opening with +, - or *";
            }
        } else if (f.id == "conditional_formatting") {
            long long rules = 0;
            fd = presence(f, false);
            for (std::size_t s = 0; s < wb.sheets.size(); ++s) {
                for (const ConditionalFormat& cf : wb.sheets[s].conditional_formats) {
                    if (rules++ == 0) {
                        try {
                            CellRange r = parse_range(cf.range);
                            fd.example_address = cell_ref(wb, static_cast<int>(s), r.start);
                        } catch (const ParseError&) {
                        }
                        fd.example_formula = cf.rule;
                    }
                }
            }
            if (rules > 0) {
                fd.status = FindingStatus::Found;
                fd.detail = counted(rules, "rule");
            }
        } else if (f.id == "pivot_tables") {
            fd = presence(f, false);
            for (const Sheet& s : wb.sheets) {
                if (s.pivot_tables <= 0) continue;
                fd.status = FindingStatus::Found;
                fd.detail = s.name;
                break;
            }
        } else if (f.id == "array_formulas") {
            const FormulaCell* fc =
                first_formula([](const FormulaCell& c) { return c.array; });
            fd = presence(f, fc != nullptr);
            if (fc) {
                witness_formula(fd, *fc);
                const CellContent* cell =
                    wb.sheets[static_cast<std::size_t>(fc->sheet)].find_cell(fc->coord);
                if (cell && cell->array_range)
                    fd.detail = "entered over " + render_range(*cell->array_range);
            }
        } else if (f.id == "nested_ifs") {
            const FormulaCell* fc = first_formula(
                [](const FormulaCell& c) { return c.metrics.max_if_depth >= 2; });
            fd = presence(f, fc != nullptr);
            if (fc) {
                witness_formula(fd, *fc);
                fd.detail = "IF nested " + std::to_string(fc->metrics.max_if_depth) + " deep";
            }
        } else if (f.id == "sumif_use") {
            const FormulaCell* fc = first_formula(
                [&](const FormulaCell& c) { return uses_function(c, "SUMIF"); });
            fd = presence(f, fc != nullptr);
            if (fc) witness_formula(fd, *fc);
        } else if (f.id == "database_functions") {
            static const char* const kDatabase[] = {"DAVERAGE", "DCOUNT", "DCOUNTA",
                                                    "DGET",     "DMAX",   "DMIN",
                                                    "DPRODUCT", "DSTDEV", "DSUM",
                                                    "DVAR"};
            const char* hit_name = nullptr;
            const FormulaCell* fc = first_formula([&](const FormulaCell& c) {
                for (const char* name : kDatabase)
                    if (uses_function(c, name)) {
                        hit_name = name;
                        return true;
                    }
                return false;
            });
            fd = presence(f, fc != nullptr);
            if (fc) {
                witness_formula(fd, *fc);
                fd.detail = hit_name;
            }
        } else if (f.id == "indirect_use") {
            const FormulaCell* fc = first_formula(
                [&](const FormulaCell& c) { return uses_function(c, "INDIRECT"); });
            fd = presence(f, fc != nullptr);
            if (fc) witness_formula(fd, *fc);
        } else if (f.id == "longest_formula") {
            const FormulaCell* best = nullptr;
            for (const FormulaCell& fc : formulas)
                if (!best || fc.metrics.length > best->metrics.length) best = &fc;
            fd = measure(f, best ? best->metrics.length : 0);
            if (best) witness_formula(fd, *best);
        } else if (f.id == "most_complex_formula") {
            const FormulaCell* best = nullptr;
            for (const FormulaCell& fc : formulas)
                if (!best || fc.metrics.complexity > best->metrics.complexity) best = &fc;
            fd = measure(f, best ? best->metrics.complexity : 0);
            if (best) {
                witness_formula(fd, *best);
                fd.detail = counted(best->metrics.func_count, "function") + ", " +
                            counted(best->metrics.operator_count, "operator") + ", depth " +
                            std::to_string(best->metrics.max_nesting_depth);
            }
        } else if (f.id == "total_formulas") {
            long long count = 0;
            for (const Sheet& s : wb.sheets)
                for (const auto& [coord, cell] : s.cells)
                    if (cell.is_formula()) ++count;
            fd = measure(f, static_cast<double>(count));
        } else if (f.id == "unique_formulas") {
            fd = measure(f, static_cast<double>(uniques.size()));
        } else if (f.id == "workbook_size") {
            fd = measure(f, static_cast<double>(wb.file_size_bytes));
            fd.detail = std::to_string(std::llround(wb.file_size_bytes / 1024.0)) + " Kb";
        } else if (f.id == "sheet_count") {
            fd = measure(f, static_cast<double>(wb.sheets.size()));
        } else if (f.id == "vba_lines") {
            fd = measure(f, wb.vba.total_lines);
            if (wb.vba.total_lines > 0)
                fd.detail = counted(wb.vba.total_lines, "line") + " in " +
                            counted(wb.vba.components, "component");
        } else if (f.id == "largest_result") {
            if (!eval) {
                fd = skip(f);
            } else {
                std::optional<double> best;
                CellKey best_key{};
                for (const auto& [key, value] : eval->values) {
                    if (!value.is_number()) continue;
                    double mag = std::abs(value.number());
                    if (!best || mag > *best) {
                        best = mag;
                        best_key = key;
                    }
                }
                fd = measure(f, best.value_or(0.0));
                if (best) {
                    fd.example_address = cell_ref(wb, std::get<0>(best_key),
                                                  {std::get<2>(best_key),
                                                   std::get<1>(best_key)});
                    auto it = by_key.find(best_key);
                    if (it != by_key.end()) fd.example_formula = it->second->text;
                    char buf[32];
                    std::snprintf(buf, sizeof buf, "%.1E", *best);
                    fd.detail = buf;
                }
            }
        } else {
            fd.factor_id = f.id;
        }
        rep.findings.push_back(std::move(fd));
    }

    for (std::size_t i = 0; i < rep.catalog.size(); ++i)
        if (rep.findings[i].triggered()) rep.triggered_weight += rep.catalog[i].weight;
    rep.overall_rating_percent = static_cast<int>(
        std::floor(100.0 * rep.triggered_weight / rep.total_weight + 0.5));

    for (std::size_t s = 0; s < wb.sheets.size(); ++s) {
        UsedRangeStats stats = used_range_stats(wb.sheets[s]);
        if (stats.declared_cells > 0 && stats.blank_ratio > config.blank_ratio_threshold)
            rep.used_range_findings.push_back(
                {static_cast<int>(s), wb.sheets[s].name, stats});
    }
    return rep;
}

} // namespace sheetlens
