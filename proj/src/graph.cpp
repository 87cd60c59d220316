#include "sheetlens/graph.hpp"

#include <algorithm>
#include <tuple>

namespace sheetlens {

namespace {

// Sortable node identity; map order doubles as the canonical node order:
// internal cells (sheet, row-major), then external cells, then ranges.
struct NodeKey {
    int group = 0;                  // 0 cell, 1 external, 2 range
    int sheet = -1;
    std::string book_l, sheet_l;    // lowercased, externals only
    CellCoord a{};                  // cell coord or range start
    CellCoord b{};                  // range end

    auto tied() const { return std::tie(group, sheet, book_l, sheet_l, a, b); }
    bool operator<(const NodeKey& o) const { return tied() < o.tied(); }
    bool operator==(const NodeKey& o) const { return tied() == o.tied(); }
};

struct NodeData {
    bool coarse = false;
    std::string book_display, sheet_display;
};

struct Builder {
    const Workbook& wb;
    const GraphOptions& options;
    std::map<NodeKey, NodeData> keys;
    std::set<std::pair<NodeKey, NodeKey>> edge_keys;
    long long truncated = 0;

    NodeKey cell_key(int sheet, CellCoord c) const { return {0, sheet, "", "", c, {}}; }

    NodeKey external_key(const std::string& book, const std::string& sheet, CellCoord c) {
        NodeKey k{1, -1, ascii_lower(book), ascii_lower(sheet), c, {}};
        auto [it, fresh] = keys.try_emplace(k);
        if (fresh) {
            it->second.book_display = book;
            it->second.sheet_display = sheet;
        }
        return k;
    }

    NodeKey external_range_key(const std::string& book, const std::string& sheet, CellRange r) {
        NodeKey k{2, -1, ascii_lower(book), ascii_lower(sheet), r.start, r.end};
        auto [it, fresh] = keys.try_emplace(k);
        if (fresh) {
            it->second.book_display = book;
            it->second.sheet_display = sheet;
        }
        return k;
    }

    void add_edge(const NodeKey& precedent, const NodeKey& dependent) {
        keys.try_emplace(precedent);
        keys.try_emplace(dependent);
        edge_keys.emplace(precedent, dependent);
    }

    void add_internal_range(int sheet, CellRange r, const NodeKey& dep) {
        if (r.area() <= options.range_member_cap) {
            for (int row = r.start.row; row <= r.end.row; ++row)
                for (int col = r.start.col; col <= r.end.col; ++col)
                    add_edge(cell_key(sheet, {col, row}), dep);
            return;
        }
        // Too many members to expand: one coarse node stands in for the
        // range, fed by whichever members actually hold content.
        ++truncated;
        NodeKey range_key{2, sheet, "", "", r.start, r.end};
        auto [it, fresh] = keys.try_emplace(range_key);
        it->second.coarse = true;
        add_edge(range_key, dep);
        const Sheet& s = wb.sheets[sheet];
        auto lo = s.cells.lower_bound({1, r.start.row});
        for (auto cell = lo; cell != s.cells.end() && cell->first.row <= r.end.row; ++cell)
            if (r.contains(cell->first))
                add_edge(cell_key(sheet, cell->first), range_key);
    }

    void walk(const AstNode& n, int origin_sheet, const NodeKey& dep) {
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, RefNode>) {
                    if (v.book) {
                        add_edge(external_key(*v.book, v.addr.sheet.value_or(""), v.addr.coord), dep);
                        return;
                    }
                    int sheet = origin_sheet;
                    if (v.addr.sheet) {
                        sheet = wb.sheet_index(*v.addr.sheet);
                        if (sheet < 0) return;   // unresolvable sheet, no edge
                    }
                    add_edge(cell_key(sheet, v.addr.coord), dep);
                } else if constexpr (std::is_same_v<T, RangeNode>) {
                    CellRange r;
                    r.start = {std::min(v.start.coord.col, v.end.coord.col),
                               std::min(v.start.coord.row, v.end.coord.row)};
                    r.end = {std::max(v.start.coord.col, v.end.coord.col),
                             std::max(v.start.coord.row, v.end.coord.row)};
                    if (v.book) {
                        add_edge(external_range_key(*v.book, v.start.sheet.value_or(""), r), dep);
                        return;
                    }
                    int sheet = origin_sheet;
                    if (v.start.sheet) {
                        sheet = wb.sheet_index(*v.start.sheet);
                        if (sheet < 0) return;
                    }
                    add_internal_range(sheet, r, dep);
                } else if constexpr (std::is_same_v<T, NameNode>) {
                    auto resolved = resolve_defined_name(wb, v.name, options.name_resolution_depth);
                    if (resolved)
                        add_internal_range(resolved->sheet, resolved->range, dep);
                } else if constexpr (std::is_same_v<T, CallNode>) {
                    for (const auto& a : v.args) walk(*a, origin_sheet, dep);
                } else if constexpr (std::is_same_v<T, BinaryNode>) {
                    walk(*v.left, origin_sheet, dep);
                    walk(*v.right, origin_sheet, dep);
                } else if constexpr (std::is_same_v<T, UnaryNode>) {
                    walk(*v.operand, origin_sheet, dep);
                }
            },
            n.node);
    }
};

} // namespace

DepGraph build_graph(const Workbook& wb, std::span<const ParsedCell> cells,
                     const GraphOptions& options) {
    Builder b{wb, options, {}, {}, 0};
    for (const ParsedCell& pc : cells) {
        NodeKey dep = b.cell_key(pc.sheet, pc.coord);
        b.keys.try_emplace(dep);
        b.walk(*pc.ast, pc.sheet, dep);
    }

    DepGraph g;
    g.workbook = &wb;
    g.truncated_ranges = b.truncated;
    std::map<NodeKey, int> index;
    for (auto& [key, data] : b.keys) {
        int id = static_cast<int>(g.nodes.size());
        index.emplace(key, id);
        GraphNode node;
        node.sheet = key.sheet;
        node.coord = key.a;
        if (key.group == 0) {
            node.kind = NodeKind::Cell;
            g.cell_index[{key.sheet, key.a.row, key.a.col}] = id;
        } else if (key.group == 1) {
            node.kind = NodeKind::External;
            node.book = data.book_display;
            node.external_sheet = data.sheet_display;
        } else {
            node.kind = NodeKind::Range;
            node.range_end = key.b;
            node.coarse = data.coarse;
            node.book = data.book_display;
            node.external_sheet = data.sheet_display;
        }
        g.nodes.push_back(std::move(node));
    }

    g.precedents_of.assign(g.nodes.size(), {});
    g.dependents_of.assign(g.nodes.size(), {});
    for (const auto& [prec_key, dep_key] : b.edge_keys) {
        GraphEdge e;
        e.precedent = index.at(prec_key);
        e.dependent = index.at(dep_key);
        g.edges.push_back(e);
    }
    std::sort(g.edges.begin(), g.edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
        return std::tie(a.precedent, a.dependent) < std::tie(b.precedent, b.dependent);
    });
    for (const GraphEdge& e : g.edges) {
        g.precedents_of[e.dependent].push_back(e.precedent);
        g.dependents_of[e.precedent].push_back(e.dependent);
    }
    return g;
}

std::optional<int> DepGraph::cell_node(int sheet, CellCoord coord) const {
    auto it = cell_index.find({sheet, coord.row, coord.col});
    if (it == cell_index.end()) return std::nullopt;
    return it->second;
}

std::string DepGraph::node_label(int node) const {
    const GraphNode& n = nodes[node];
    auto prefix = [&](const std::string& book, const std::string& sheet) {
        Address a{sheet, n.coord, false, false};
        std::string label = render_address(a);
        if (!book.empty()) {
            Address plain{std::nullopt, n.coord, false, false};
            label = "[" + book + "]" + sheet + "!" + render_address(plain);
        }
        return label;
    };
    switch (n.kind) {
        case NodeKind::Cell: {
            Address a{workbook->sheets[n.sheet].name, n.coord, false, false};
            return render_address(a);
        }
        case NodeKind::External:
            return prefix(n.book, n.external_sheet);
        case NodeKind::Range: {
            std::string sheet = n.sheet >= 0 ? workbook->sheets[n.sheet].name : n.external_sheet;
            std::string body = render_range({n.coord, n.range_end});
            std::string head = n.book.empty() ? sheet : "[" + n.book + "]" + sheet;
            if (n.book.empty() && sheet_name_needs_quoting(sheet))
                head = "'" + sheet + "'";
            return head + "!" + body;
        }
    }
    return "?";
}

void merge_dynamic_edges(DepGraph& g, const std::vector<DynamicEdge>& extra) {
    if (extra.empty()) return;

    // Endpoints the static graph never saw become new cell nodes. They must
    // slot into the cell block in canonical order, so the node list is
    // rebuilt and every index remapped.
    std::set<std::tuple<int, int, int>> missing;
    for (const DynamicEdge& e : extra) {
        std::tuple<int, int, int> a{e.from_sheet, e.from.row, e.from.col};
        std::tuple<int, int, int> b{e.to_sheet, e.to.row, e.to.col};
        if (!g.cell_index.count(a)) missing.insert(a);
        if (!g.cell_index.count(b)) missing.insert(b);
    }
    if (!missing.empty()) {
        for (const auto& key : missing) g.cell_index.emplace(key, -1);
        std::vector<GraphNode> nodes;
        nodes.reserve(g.nodes.size() + missing.size());
        std::vector<int> remap(g.nodes.size(), -1);
        for (auto& [key, old_id] : g.cell_index) {
            int id = static_cast<int>(nodes.size());
            if (old_id >= 0) {
                remap[old_id] = id;
                nodes.push_back(g.nodes[old_id]);
            } else {
                GraphNode n;
                n.sheet = std::get<0>(key);
                n.coord = {std::get<2>(key), std::get<1>(key)};
                nodes.push_back(n);
            }
            old_id = id;
        }
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            if (g.nodes[i].kind == NodeKind::Cell) continue;
            remap[i] = static_cast<int>(nodes.size());
            nodes.push_back(g.nodes[i]);
        }
        for (GraphEdge& e : g.edges) {
            e.precedent = remap[e.precedent];
            e.dependent = remap[e.dependent];
        }
        g.nodes = std::move(nodes);
    }

    std::set<std::pair<int, int>> seen;
    for (const GraphEdge& e : g.edges) seen.emplace(e.precedent, e.dependent);
    for (const DynamicEdge& e : extra) {
        int from = g.cell_index.at({e.from_sheet, e.from.row, e.from.col});
        int to = g.cell_index.at({e.to_sheet, e.to.row, e.to.col});
        if (!seen.emplace(from, to).second) continue;
        GraphEdge d;
        d.precedent = from;
        d.dependent = to;
        d.dynamic = true;
        d.construct = e.construct;
        g.edges.push_back(d);
    }
    std::sort(g.edges.begin(), g.edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
        return std::tie(a.precedent, a.dependent) < std::tie(b.precedent, b.dependent);
    });
    g.precedents_of.assign(g.nodes.size(), {});
    g.dependents_of.assign(g.nodes.size(), {});
    for (const GraphEdge& e : g.edges) {
        g.precedents_of[e.dependent].push_back(e.precedent);
        g.dependents_of[e.precedent].push_back(e.dependent);
    }
}

std::vector<std::vector<int>> strongly_connected_components(
    const std::vector<std::vector<int>>& adjacency) {
    const int n = static_cast<int>(adjacency.size());
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<bool> onstack(n, false);
    std::vector<int> stack;
    std::vector<std::vector<int>> components;
    int counter = 0;

    // Iterative Tarjan: each work frame remembers how many children of the
    // node were already visited, so arbitrarily deep chains cannot overrun
    // the call stack.
    std::vector<std::pair<int, std::size_t>> work;
    for (int start = 0; start < n; ++start) {
        if (index[start] != -1) continue;
        work.emplace_back(start, 0);
        while (!work.empty()) {
            int v = work.back().first;
            if (work.back().second == 0) {
                index[v] = low[v] = counter++;
                stack.push_back(v);
                onstack[v] = true;
            }
            bool descended = false;
            while (work.back().second < adjacency[v].size()) {
                int w = adjacency[v][work.back().second++];
                if (index[w] == -1) {
                    work.emplace_back(w, 0);
                    descended = true;
                    break;
                }
                if (onstack[w]) low[v] = std::min(low[v], index[w]);
            }
            if (descended) continue;
            if (low[v] == index[v]) {
                std::vector<int> comp;
                for (;;) {
                    int w = stack.back();
                    stack.pop_back();
                    onstack[w] = false;
                    comp.push_back(w);
                    if (w == v) break;
                }
                std::sort(comp.begin(), comp.end());
                components.push_back(std::move(comp));
            }
            work.pop_back();
            if (!work.empty())
                low[work.back().first] = std::min(low[work.back().first], low[v]);
        }
    }
    std::sort(components.begin(), components.end(),
              [](const auto& a, const auto& b) { return a[0] < b[0]; });
    return components;
}

std::vector<Cycle> find_cycles(const DepGraph& g) {
    auto components = strongly_connected_components(g.dependents_of);
    std::set<std::pair<int, int>> edge_set;
    for (const GraphEdge& e : g.edges) edge_set.emplace(e.precedent, e.dependent);
    std::vector<Cycle> cycles;
    for (auto& comp : components) {
        if (comp.size() > 1 || edge_set.count({comp[0], comp[0]}))
            cycles.push_back({std::move(comp)});
    }
    return cycles;
}

namespace {

const GraphEdge* find_edge(const DepGraph& g, int precedent, int dependent) {
    auto it = std::lower_bound(g.edges.begin(), g.edges.end(), std::pair{precedent, dependent},
                               [](const GraphEdge& e, const std::pair<int, int>& key) {
                                   return std::tie(e.precedent, e.dependent) < std::tie(key.first, key.second);
                               });
    if (it != g.edges.end() && it->precedent == precedent && it->dependent == dependent)
        return &*it;
    return nullptr;
}

void expand(const DepGraph& g, TraceNode& out, int depth, bool towards_precedents,
            std::set<int>& path) {
    if (depth <= 0) return;
    path.insert(out.node);
    const auto& next = towards_precedents ? g.precedents_of[out.node] : g.dependents_of[out.node];
    for (int neighbor : next) {
        TraceNode child;
        child.node = neighbor;
        const GraphEdge* e = towards_precedents ? find_edge(g, neighbor, out.node)
                                                : find_edge(g, out.node, neighbor);
        if (e) {
            child.dynamic = e->dynamic;
            child.construct = e->construct;
        }
        if (path.count(neighbor)) {
            child.cyclic = true;       // already on this path; do not descend
        } else {
            expand(g, child, depth - 1, towards_precedents, path);
        }
        out.children.push_back(std::move(child));
    }
    path.erase(out.node);
}

} // namespace

TraceNode precedents_tree(const DepGraph& g, int node, int depth) {
    TraceNode root;
    root.node = node;
    std::set<int> path;
    expand(g, root, depth, true, path);
    return root;
}

TraceNode dependents_tree(const DepGraph& g, int node, int depth) {
    TraceNode root;
    root.node = node;
    std::set<int> path;
    expand(g, root, depth, false, path);
    return root;
}

SheetMatrix sheet_matrix(const DepGraph& g) {
    SheetMatrix m;
    std::size_t n = g.workbook ? g.workbook->sheets.size() : 0;
    m.counts.assign(n, std::vector<long long>(n, 0));
    for (const GraphEdge& e : g.edges) {
        if (e.dynamic) continue;
        const GraphNode& p = g.nodes[e.precedent];
        const GraphNode& d = g.nodes[e.dependent];
        if (d.sheet < 0) continue;
        if (p.kind == NodeKind::External || (p.kind == NodeKind::Range && p.sheet < 0)) {
            ++m.external_in[ascii_lower(p.book)];
            continue;
        }
        m.counts[p.sheet][d.sheet]++;
    }
    return m;
}

FlowStats flow_stats(const DepGraph& g, int sheet) {
    FlowStats f;
    long long backward = 0;
    for (const GraphEdge& e : g.edges) {
        if (e.dynamic) continue;
        const GraphNode& p = g.nodes[e.precedent];
        const GraphNode& d = g.nodes[e.dependent];
        bool p_here = p.kind == NodeKind::Cell && p.sheet == sheet;
        bool d_here = d.kind == NodeKind::Cell && d.sheet == sheet;
        if (p_here && d_here) {
            ++f.edges;
            int dc = d.coord.col - p.coord.col;
            int dr = d.coord.row - p.coord.row;
            (dc > 0 ? f.rightward : dc < 0 ? f.leftward : f.same_column)++;
            (dr > 0 ? f.downward : dr < 0 ? f.upward : f.same_row)++;
            if (dr < 0 || dc < 0) ++backward;
        } else if (d_here && !(p.kind == NodeKind::Range && p.sheet == sheet)) {
            ++f.incoming_cross;
        } else if (p_here && !(d.kind == NodeKind::Range && d.sheet == sheet)) {
            ++f.outgoing_cross;
        }
    }
    if (f.edges > 0)
        f.backward_fraction = static_cast<double>(backward) / static_cast<double>(f.edges);
    return f;
}

std::optional<ResolvedName> resolve_defined_name(const Workbook& wb, const std::string& name,
                                                 int depth) {
    if (depth <= 0) return std::nullopt;
    const std::string want = ascii_lower(name);
    const std::string* value = nullptr;
    for (const auto& [key, v] : wb.defined_names)
        if (ascii_lower(key) == want) { value = &v; break; }
    if (!value) return std::nullopt;

    std::string text = *value;
    if (!text.empty() && text[0] == '=') text.erase(text.begin());
    if (text.empty()) return std::nullopt;

    // Name-to-name chains.
    bool identifier = std::isalpha(static_cast<unsigned char>(text[0])) || text[0] == '_';
    if (identifier && std::all_of(text.begin(), text.end(), [](char ch) {
            return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.';
        })) {
        try { parse_address(text, false); }
        catch (const std::exception&) { return resolve_defined_name(wb, text, depth - 1); }
    }

    try {
        Address a = parse_address(text, true);
        if (!a.sheet) return std::nullopt;
        int idx = wb.sheet_index(*a.sheet);
        if (idx < 0) return std::nullopt;
        return ResolvedName{idx, {a.coord, a.coord}};
    } catch (const std::exception&) {}

    // Sheet-qualified range: split the '!' respecting a quoted sheet name.
    std::string sheet, rest;
    if (text[0] == '\'') {
        std::size_t p = 1;
        for (;;) {
            if (p >= text.size()) return std::nullopt;
            if (text[p] == '\'') {
                if (p + 1 < text.size() && text[p + 1] == '\'') { sheet += '\''; p += 2; continue; }
                ++p;
                break;
            }
            sheet += text[p++];
        }
        if (p >= text.size() || text[p] != '!') return std::nullopt;
        rest = text.substr(p + 1);
    } else {
        auto bang = text.find('!');
        if (bang == std::string::npos || bang == 0) return std::nullopt;
        sheet = text.substr(0, bang);
        rest = text.substr(bang + 1);
    }
    int idx = wb.sheet_index(sheet);
    if (idx < 0) return std::nullopt;
    std::string cleaned;
    for (char ch : rest)
        if (ch != '$') cleaned += ch;
    try {
        return ResolvedName{idx, parse_range(cleaned)};
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

} // namespace sheetlens
