#include "sheetlens/links.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include "sheetlens/analysis.hpp"
#include "sheetlens/graph.hpp"
#include "sheetlens/workbook.hpp"

namespace sheetlens {
namespace {

namespace fs = std::filesystem;

constexpr long long kRangeMemberCap = 4096;

bool glob_match(std::string_view pat, std::string_view s) {
    std::size_t p = 0, i = 0;
    std::size_t star = std::string_view::npos, mark = 0;
    while (i < s.size()) {
        if (p < pat.size() && (pat[p] == '?' || pat[p] == s[i])) {
            ++p;
            ++i;
        } else if (p < pat.size() && pat[p] == '*') {
            star = p++;
            mark = i;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            i = ++mark;
        } else {
            return false;
        }
    }
    while (p < pat.size() && pat[p] == '*') ++p;
    return p == pat.size();
}

std::string normalize_path(const fs::path& p) {
    std::error_code ec;
    fs::path abs = fs::absolute(p, ec);
    if (ec) abs = p;
    fs::path canon = fs::weakly_canonical(abs, ec);
    if (ec) canon = abs.lexically_normal();
    return canon.generic_string();
}

// The referencing file's directory wins over the scan roots; each location
// tries the name as written, then with ".json" appended, then with the
// extension replaced by ".json".
std::string resolve_reference(const std::string& book, const fs::path& ref_dir,
                              const std::vector<std::string>& root_dirs) {
    fs::path as_given(book);
    std::vector<fs::path> candidates{as_given, fs::path(book + ".json"),
                                     fs::path(as_given).replace_extension(".json")};
    std::vector<fs::path> dirs{ref_dir};
    for (const std::string& r : root_dirs) dirs.emplace_back(r);
    for (const fs::path& dir : dirs) {
        for (const fs::path& cand : candidates) {
            std::error_code ec;
            fs::path p = dir / cand;
            if (fs::is_regular_file(p, ec)) return normalize_path(p);
        }
    }
    return normalize_path(ref_dir / as_given);
}

std::optional<std::int64_t> file_mtime(const std::string& path) {
    std::error_code ec;
    auto ft = fs::last_write_time(path, ec);
    if (ec) return std::nullopt;
    auto sys = std::chrono::time_point_cast<std::chrono::seconds>(
        ft - fs::file_time_type::clock::now() + std::chrono::system_clock::now());
    return std::chrono::duration_cast<std::chrono::seconds>(sys.time_since_epoch()).count();
}

struct LoadedFile {
    std::string path;
    bool exists = false;
    std::optional<std::int64_t> saved_at;
    std::string saved_at_source;
    std::optional<std::string> load_error;
    std::unique_ptr<Workbook> wb;
    std::vector<FormulaCell> formulas;
    std::map<std::string, long long> refs;   // resolved target path -> count
};

template <typename F>
void walk_books(const AstNode& n, F&& on_book) {
    if (auto* r = std::get_if<RefNode>(&n.node)) {
        if (r->book) on_book(*r->book);
    } else if (auto* g = std::get_if<RangeNode>(&n.node)) {
        if (g->book) on_book(*g->book);
    } else if (auto* c = std::get_if<CallNode>(&n.node)) {
        for (const auto& a : c->args) walk_books(*a, on_book);
    } else if (auto* b = std::get_if<BinaryNode>(&n.node)) {
        walk_books(*b->left, on_book);
        walk_books(*b->right, on_book);
    } else if (auto* u = std::get_if<UnaryNode>(&n.node)) {
        walk_books(*u->operand, on_book);
    }
}

LoadedFile load_one(const std::string& path, const std::vector<std::string>& root_dirs) {
    LoadedFile lf;
    lf.path = path;
    std::error_code ec;
    if (!fs::exists(path, ec)) return lf;
    lf.exists = true;
    if (auto mt = file_mtime(path)) {
        lf.saved_at = mt;
        lf.saved_at_source = "mtime";
    }
    try {
        LoadResult lr = load_workbook(path);
        lf.wb = std::make_unique<Workbook>(std::move(lr.workbook));
    } catch (const LoadError& e) {
        lf.load_error = e.what();
        return lf;
    }
    if (lf.wb->saved_at) {
        lf.saved_at = lf.wb->saved_at;
        lf.saved_at_source = "document";
    }
    lf.formulas = parse_workbook(*lf.wb).formulas;

    fs::path dir = fs::path(path).parent_path();
    auto add = [&](const std::string& book) {
        ++lf.refs[resolve_reference(book, dir, root_dirs)];
    };
    for (const std::string& book : lf.wb->external_links) add(book);
    for (const FormulaCell& fc : lf.formulas)
        if (fc.ast && fc.metrics.has_external_ref) walk_books(*fc.ast, add);
    for (const auto& [name, text] : lf.wb->defined_names) {
        try {
            AstPtr ast = parse_formula(text.empty() || text[0] != '='
                                           ? "=" + text
                                           : text);
            walk_books(*ast, add);
        } catch (const ParseError&) {
        }
    }
    return lf;
}

// Cross-file cell graph: every populated cell of every loaded workbook can
// become a node; edges follow both internal and book-qualified references.
class CellUnion {
public:
    CellUnion(const std::vector<const LoadedFile*>& files,
              const std::map<std::string, int>& node_of_path,
              const std::vector<std::string>& root_dirs)
        : files_(files), node_of_path_(node_of_path), root_dirs_(root_dirs) {}

    void build() {
        for (std::size_t i = 0; i < files_.size(); ++i)
            if (files_[i] && files_[i]->wb) add_file(static_cast<int>(i));
    }

    std::vector<CellCycle> cross_file_cycles() const {
        std::vector<std::vector<int>> comps = strongly_connected_components(adj_);
        std::vector<std::pair<std::tuple<int, int, int, int>, CellCycle>> keyed;
        for (const auto& comp : comps) {
            if (comp.size() < 2) continue;
            std::set<int> file_set;
            for (int n : comp) file_set.insert(std::get<0>(key_of_[n]));
            if (file_set.size() < 2) continue;
            std::vector<std::tuple<int, int, int, int>> keys;
            for (int n : comp) keys.push_back(key_of_[n]);
            std::sort(keys.begin(), keys.end());
            CellCycle cy;
            for (const auto& [file, sheet, row, col] : keys) {
                Address a;
                a.sheet = files_[file]->wb->sheets[static_cast<std::size_t>(sheet)].name;
                a.coord = {col, row};
                cy.members.push_back({file, render_address(a)});
            }
            keyed.emplace_back(keys.front(), std::move(cy));
        }
        std::sort(keyed.begin(), keyed.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<CellCycle> out;
        for (auto& [k, cy] : keyed) out.push_back(std::move(cy));
        return out;
    }

private:
    int id_of(int file, int sheet, CellCoord c) {
        auto key = std::make_tuple(file, sheet, c.row, c.col);
        auto [it, fresh] = ids_.try_emplace(key, static_cast<int>(key_of_.size()));
        if (fresh) {
            key_of_.push_back(key);
            adj_.emplace_back();
        }
        return it->second;
    }

    void edge(int from, int to) { adj_[static_cast<std::size_t>(from)].push_back(to); }

    const LoadedFile* target_of(int file, const std::string& book) {
        auto key = std::make_pair(file, book);
        auto it = resolved_.find(key);
        if (it == resolved_.end()) {
            fs::path dir = fs::path(files_[file]->path).parent_path();
            it = resolved_.emplace(key, resolve_reference(book, dir, root_dirs_)).first;
        }
        auto node = node_of_path_.find(it->second);
        if (node == node_of_path_.end()) return nullptr;
        const LoadedFile* lf = files_[static_cast<std::size_t>(node->second)];
        return lf && lf->wb ? lf : nullptr;
    }

    int file_index(const LoadedFile* lf) const {
        return node_of_path_.at(lf->path);
    }

    void range_edges(const LoadedFile& target, int target_file, int sheet, CellCoord a,
                     CellCoord b, int dependent) {
        CellRange r{{std::min(a.col, b.col), std::min(a.row, b.row)},
                    {std::max(a.col, b.col), std::max(a.row, b.row)}};
        if (r.area() > kRangeMemberCap) return;
        const Sheet& sh = target.wb->sheets[static_cast<std::size_t>(sheet)];
        for (auto it = sh.cells.lower_bound({r.start.col, r.start.row});
             it != sh.cells.end() && it->first.row <= r.end.row; ++it) {
            if (it->first.col < r.start.col || it->first.col > r.end.col) continue;
            edge(id_of(target_file, sheet, it->first), dependent);
        }
    }

    void add_file(int file) {
        const LoadedFile& lf = *files_[file];
        const Workbook& wb = *lf.wb;
        for (const FormulaCell& fc : lf.formulas) {
            if (!fc.ast) continue;
            int dep = id_of(file, fc.sheet, fc.coord);
            auto visit = [&](auto&& self, const AstNode& n) -> void {
                if (auto* r = std::get_if<RefNode>(&n.node)) {
                    const LoadedFile* t = &lf;
                    int tf = file;
                    if (r->book) {
                        t = target_of(file, *r->book);
                        if (!t) return;
                        tf = file_index(t);
                    }
                    int sheet = r->addr.sheet ? t->wb->sheet_index(*r->addr.sheet)
                                              : (r->book ? -1 : fc.sheet);
                    if (sheet < 0) return;
                    edge(id_of(tf, sheet, r->addr.coord), dep);
                } else if (auto* g = std::get_if<RangeNode>(&n.node)) {
                    const LoadedFile* t = &lf;
                    int tf = file;
                    if (g->book) {
                        t = target_of(file, *g->book);
                        if (!t) return;
                        tf = file_index(t);
                    }
                    int sheet = g->start.sheet ? t->wb->sheet_index(*g->start.sheet)
                                               : (g->book ? -1 : fc.sheet);
                    if (sheet < 0) return;
                    range_edges(*t, tf, sheet, g->start.coord, g->end.coord, dep);
                } else if (auto* nm = std::get_if<NameNode>(&n.node)) {
                    auto res = resolve_defined_name(wb, nm->name);
                    if (!res || res->sheet < 0) return;
                    range_edges(lf, file, res->sheet, res->range.start, res->range.end,
                                dep);
                } else if (auto* c = std::get_if<CallNode>(&n.node)) {
                    for (const auto& a : c->args) self(self, *a);
                } else if (auto* b = std::get_if<BinaryNode>(&n.node)) {
                    self(self, *b->left);
                    self(self, *b->right);
                } else if (auto* u = std::get_if<UnaryNode>(&n.node)) {
                    self(self, *u->operand);
                }
            };
            visit(visit, *fc.ast);
        }
    }

    const std::vector<const LoadedFile*>& files_;
    const std::map<std::string, int>& node_of_path_;
    const std::vector<std::string>& root_dirs_;
    std::map<std::tuple<int, int, int, int>, int> ids_;
    std::vector<std::tuple<int, int, int, int>> key_of_;
    std::vector<std::vector<int>> adj_;
    std::map<std::pair<int, std::string>, std::string> resolved_;
};

} // namespace

LinkGraph scan_links(const std::vector<std::string>& roots, const LinkOptions& options) {
    std::vector<std::string> root_dirs;
    std::vector<std::string> seeds;
    for (const std::string& r : roots) {
        std::error_code ec;
        fs::path p(r);
        if (fs::is_directory(p, ec)) {
            root_dirs.push_back(p.string());
            for (fs::recursive_directory_iterator it(p, ec), end; !ec && it != end;
                 it.increment(ec)) {
                if (!it->is_regular_file(ec)) continue;
                if (glob_match(options.glob, it->path().filename().string()))
                    seeds.push_back(normalize_path(it->path()));
            }
        } else {
            seeds.push_back(normalize_path(p));
        }
    }
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

    // Transitive load: workers pull paths, parse, and feed newly referenced
    // paths back into the queue. Everything is merged deterministically
    // after the pool drains.
    std::map<std::string, LoadedFile> files;
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::string> queue(seeds.begin(), seeds.end());
    std::set<std::string> scheduled(seeds.begin(), seeds.end());
    int active = 0;

    auto worker = [&] {
        std::unique_lock lock(mu);
        for (;;) {
            cv.wait(lock, [&] { return !queue.empty() || active == 0; });
            if (queue.empty()) {
                if (active == 0) return;
                continue;
            }
            std::string path = queue.front();
            queue.pop_front();
            ++active;
            lock.unlock();
            LoadedFile lf = load_one(path, root_dirs);
            lock.lock();
            for (const auto& [target, count] : lf.refs)
                if (scheduled.insert(target).second) queue.push_back(target);
            files.emplace(path, std::move(lf));
            --active;
            cv.notify_all();
        }
    };

    int jobs = options.jobs > 0 ? options.jobs
                                : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<int>(jobs, static_cast<int>(scheduled.size()) + 1);
    std::vector<std::thread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    LinkGraph out;

    // Case-insensitive path order, exact path as the tiebreak.
    std::vector<const LoadedFile*> ordered;
    for (const auto& [path, lf] : files) ordered.push_back(&lf);
    std::sort(ordered.begin(), ordered.end(), [](const LoadedFile* a, const LoadedFile* b) {
        std::string la = ascii_lower(a->path), lb = ascii_lower(b->path);
        return std::tie(la, a->path) < std::tie(lb, b->path);
    });
    std::map<std::string, int> node_of_path;
    for (const LoadedFile* lf : ordered) {
        node_of_path[lf->path] = static_cast<int>(out.nodes.size());
        out.nodes.push_back(
            {lf->path, lf->exists, lf->saved_at, lf->saved_at_source, lf->load_error});
    }

    std::map<std::pair<int, int>, long long> edge_refs;
    for (const LoadedFile* lf : ordered) {
        int dep = node_of_path.at(lf->path);
        for (const auto& [target, count] : lf->refs)
            edge_refs[{dep, node_of_path.at(target)}] += count;
    }
    for (const auto& [key, count] : edge_refs)
        out.edges.push_back({key.first, key.second, count});

    for (const FileNode& n : out.nodes) {
        const LoadedFile& lf = files.at(n.path);
        if (lf.load_error)
            out.notes.push_back("load error: " + n.path + ": " + *lf.load_error);
    }

    std::vector<std::vector<int>> adj(out.nodes.size());
    std::set<int> self_loop;
    for (const FileEdge& e : out.edges) {
        adj[static_cast<std::size_t>(e.dependent)].push_back(e.precedent);
        if (e.dependent == e.precedent) self_loop.insert(e.dependent);
    }
    for (const auto& comp : strongly_connected_components(adj)) {
        if (comp.size() < 2 && !self_loop.count(comp.front())) continue;
        out.file_cycles.push_back({comp, false, ""});
    }

    CellUnion cells(ordered, node_of_path, root_dirs);
    cells.build();
    out.cell_cycles = cells.cross_file_cycles();

    for (FileCycle& cy : out.file_cycles) {
        std::set<int> members(cy.nodes.begin(), cy.nodes.end());
        for (const CellCycle& cc : out.cell_cycles) {
            bool inside = true;
            for (const CellCycleMember& m : cc.members)
                if (!members.count(m.file)) {
                    inside = false;
                    break;
                }
            if (inside) {
                cy.cell_confirmed = true;
                break;
            }
        }
        if (!cy.cell_confirmed) {
            bool missing = false;
            for (int n : cy.nodes) {
                const FileNode& fn = out.nodes[static_cast<std::size_t>(n)];
                if (!fn.exists || fn.load_error) missing = true;
            }
            cy.note = missing ? "unconfirmed (missing file)" : "no cell-level loop found";
        }
    }

    std::set<std::string> no_time_noted;
    for (const FileEdge& e : out.edges) {
        const FileNode& dep = out.nodes[static_cast<std::size_t>(e.dependent)];
        const FileNode& pre = out.nodes[static_cast<std::size_t>(e.precedent)];
        if (!pre.exists) continue;   // reported as missing, staleness is moot
        if (!dep.saved_at || !pre.saved_at) {
            for (const FileNode* n : {&dep, &pre})
                if (n->exists && !n->saved_at && no_time_noted.insert(n->path).second)
                    out.notes.push_back("saved time unknown for " + n->path +
                                        "; staleness not checked");
            continue;
        }
        if (*pre.saved_at > *dep.saved_at)
            out.stale_edges.push_back({e.dependent, e.precedent, *dep.saved_at,
                                       *pre.saved_at});
    }
    return out;
}

} // namespace sheetlens
