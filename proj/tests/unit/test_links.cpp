#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "sheetlens/links.hpp"
#include "sheetlens/report.hpp"

using namespace sheetlens;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path dir;
    explicit TempDir(const std::string& name) : dir(fs::temp_directory_path() / name) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    void write(const std::string& name, const std::string& text) const {
        std::ofstream(dir / name) << text;
    }
};

std::string book(const std::string& name, const std::string& cells,
                 const std::string& extra = "") {
    return R"({"name":")" + name + R"(","sheets":[{"name":"S","cells":{)" + cells +
           "}}]" + extra + "}";
}

int node_named(const LinkGraph& g, const std::string& filename) {
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        if (fs::path(g.nodes[i].path).filename() == filename) return static_cast<int>(i);
    return -1;
}

} // namespace

TEST_CASE("references become counted edges and absent targets become nodes") {
    TempDir t("sheetlens_links_hub");
    t.write("Hub.json",
            book("Hub", R"("A1":{"f":"='[B.json]S'!A1+[B.json]S!A2"})",
                 R"(,"external_links":["B.json","Missing.json"],)"
                 R"("defined_names":{"Ext":"[C.json]S!A1"},)"
                 R"("saved_at":"2021-01-01T00:00:00Z")"));
    t.write("B.json", book("B", R"("A1":{"v":1},"A2":{"v":2})"));
    t.write("C.json", book("C", R"("A1":{"v":3})"));
    t.write("readme.txt", "not a workbook");

    LinkGraph g = scan_links({t.dir.string()});
    REQUIRE(g.nodes.size() == 4);
    int b = node_named(g, "B.json"), c = node_named(g, "C.json");
    int hub = node_named(g, "Hub.json"), miss = node_named(g, "Missing.json");
    CHECK(b == 0);
    CHECK(c == 1);
    CHECK(hub == 2);
    CHECK(miss == 3);
    CHECK(g.missing_count() == 1);

    CHECK(g.nodes[miss].exists == false);
    CHECK_FALSE(g.nodes[miss].saved_at.has_value());
    CHECK(g.nodes[miss].saved_at_source == "");
    CHECK(g.nodes[b].exists);
    CHECK(g.nodes[b].saved_at.has_value());
    CHECK(g.nodes[b].saved_at_source == "mtime");
    CHECK(g.nodes[hub].saved_at == 1609459200);
    CHECK(g.nodes[hub].saved_at_source == "document");

    // Declared link plus two formula references; the defined name adds one
    // more aimed at C.
    REQUIRE(g.edges.size() == 3);
    CHECK(g.edges[0].dependent == hub);
    CHECK(g.edges[0].precedent == b);
    CHECK(g.edges[0].references == 3);
    CHECK(g.edges[1].precedent == c);
    CHECK(g.edges[1].references == 1);
    CHECK(g.edges[2].precedent == miss);
    CHECK(g.edges[2].references == 1);

    CHECK(g.file_cycles.empty());
    CHECK(g.cell_cycles.empty());
}

TEST_CASE("a file that will not load is kept as a node with a note") {
    TempDir t("sheetlens_links_broken");
    t.write("Good.json", book("Good", "", R"(,"external_links":["Broken.json"])"));
    t.write("Broken.json", "{ nope");

    LinkGraph g = scan_links({t.dir.string()});
    REQUIRE(g.nodes.size() == 2);
    int broken = node_named(g, "Broken.json");
    CHECK(g.nodes[broken].exists);
    REQUIRE(g.nodes[broken].load_error.has_value());
    CHECK(g.nodes[broken].saved_at_source == "mtime");
    CHECK(g.missing_count() == 0);
    REQUIRE(g.notes.size() == 1);
    CHECK(g.notes[0].rfind("load error: ", 0) == 0);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].dependent == node_named(g, "Good.json"));
    CHECK(g.edges[0].precedent == broken);
}

TEST_CASE("a ring of files is a cycle confirmed by its cell loop") {
    TempDir t("sheetlens_links_ring");
    t.write("A.json", book("A", R"("A1":{"f":"=[B]S!A1+1"})"));
    t.write("B.json", book("B", R"("A1":{"f":"=[C]S!A1+1"})"));
    t.write("C.json", book("C", R"("A1":{"f":"=[A]S!A1+1"})"));

    LinkGraph g = scan_links({t.dir.string()});
    REQUIRE(g.nodes.size() == 3);
    REQUIRE(g.edges.size() == 3);
    REQUIRE(g.file_cycles.size() == 1);
    CHECK(g.file_cycles[0].nodes == std::vector<int>{0, 1, 2});
    CHECK(g.file_cycles[0].cell_confirmed);
    CHECK(g.file_cycles[0].note == "");
    REQUIRE(g.cell_cycles.size() == 1);
    REQUIRE(g.cell_cycles[0].members.size() == 3);
    CHECK(g.cell_cycles[0].members[0].file == 0);
    CHECK(g.cell_cycles[0].members[0].cell == "S!A1");
    CHECK(g.cell_cycles[0].members[2].file == 2);

    // Seeding from one file still pulls the others in transitively.
    LinkGraph from_file = scan_links({(t.dir / "A.json").string()});
    CHECK(from_file.nodes.size() == 3);
    CHECK(from_file.file_cycles.size() == 1);
}

TEST_CASE("a file cycle with no cell loop says so") {
    TempDir t("sheetlens_links_softring");
    t.write("A.json", book("A", R"("A1":{"f":"=[B]S!B1"})"));
    t.write("B.json", book("B", R"("A1":{"f":"=[A]S!B2"})"));

    LinkGraph g = scan_links({t.dir.string()});
    REQUIRE(g.file_cycles.size() == 1);
    CHECK_FALSE(g.file_cycles[0].cell_confirmed);
    CHECK(g.file_cycles[0].note == "no cell-level loop found");
    CHECK(g.cell_cycles.empty());
}

TEST_CASE("an input saved after its dependent is stale") {
    TempDir t("sheetlens_links_stale");
    t.write("D.json", book("D", R"("A1":{"f":"=[P]S!A1"})",
                           R"(,"saved_at":"2020-01-01T00:00:00Z")"));
    t.write("P.json", book("P", R"("A1":{"v":1})",
                           R"(,"saved_at":"2021-01-01T00:00:00Z")"));
    t.write("Q.json", book("Q", R"("A1":{"f":"=[R]S!A1"})",
                           R"(,"saved_at":"2021-01-01T00:00:00Z")"));
    t.write("R.json", book("R", R"("A1":{"v":1})",
                           R"(,"saved_at":"2020-01-01T00:00:00Z")"));

    LinkGraph g = scan_links({t.dir.string()});
    for (const FileNode& n : g.nodes) CHECK(n.saved_at_source == "document");
    REQUIRE(g.stale_edges.size() == 1);
    CHECK(g.stale_edges[0].dependent == node_named(g, "D.json"));
    CHECK(g.stale_edges[0].precedent == node_named(g, "P.json"));
    CHECK(g.stale_edges[0].dependent_saved == 1577836800);
    CHECK(g.stale_edges[0].precedent_saved == 1609459200);
}

TEST_CASE("worker count does not change the result") {
    TempDir t("sheetlens_links_jobs");
    t.write("A.json", book("A", R"("A1":{"f":"=[B]S!A1+1"})"));
    t.write("B.json", book("B", R"("A1":{"f":"=[C]S!A1+1"})"));
    t.write("C.json", book("C", R"("A1":{"f":"=[A]S!A1+1"})"));
    t.write("D.json", book("D", R"("A1":{"f":"=[A]S!A1"})",
                           R"(,"external_links":["Nowhere.json"])"));

    LinkOptions one, four;
    one.jobs = 1;
    four.jobs = 4;
    LinkGraph g1 = scan_links({t.dir.string()}, one);
    LinkGraph g4 = scan_links({t.dir.string()}, four);
    CHECK(render_links(g1, RenderFormat::Json) == render_links(g4, RenderFormat::Json));
    CHECK(render_links(g1, RenderFormat::Text) == render_links(g4, RenderFormat::Text));
    CHECK(render_links(g1, RenderFormat::Markdown) == render_links(g4, RenderFormat::Markdown));
}
