#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sheetlens {

struct LinkOptions {
    int jobs = 0;               // parallel file loads; 0 means hardware concurrency
    std::string glob = "*.json";
};

struct FileNode {
    std::string path;           // normalized absolute path, '/' separators
    bool exists = false;
    std::optional<std::int64_t> saved_at;
    std::string saved_at_source;    // "document", "mtime", or "" when unknown
    std::optional<std::string> load_error;  // file exists but would not load
};

// Data flows precedent -> dependent; `references` counts every formula
// reference, defined name, and declared link from the dependent into the
// precedent.
struct FileEdge {
    int dependent = 0;
    int precedent = 0;
    long long references = 0;
};

struct FileCycle {
    std::vector<int> nodes;         // sorted node indices
    bool cell_confirmed = false;    // a concrete cell loop crosses these files
    std::string note;               // why confirmation is missing, empty otherwise
};

struct CellCycleMember {
    int file = 0;                   // node index
    std::string cell;               // "North!P8"
};

// A strongly connected set of cells spanning at least two files.
struct CellCycle {
    std::vector<CellCycleMember> members;
};

// The precedent was saved after the dependent: the dependent may be holding
// values computed from an older version of its input.
struct StaleEdge {
    int dependent = 0;
    int precedent = 0;
    std::int64_t dependent_saved = 0;
    std::int64_t precedent_saved = 0;
};

struct LinkGraph {
    std::vector<FileNode> nodes;    // sorted by path, case-insensitively
    std::vector<FileEdge> edges;    // sorted by (dependent, precedent)
    std::vector<FileCycle> file_cycles;
    std::vector<CellCycle> cell_cycles;
    std::vector<StaleEdge> stale_edges;
    std::vector<std::string> notes; // load errors, skipped staleness checks

    long long missing_count() const {
        long long n = 0;
        for (const FileNode& f : nodes) n += f.exists ? 0 : 1;
        return n;
    }
};

// Scans the roots (directories matched against `glob`, or single files),
// loads every workbook found plus everything they reference, transitively,
// and assembles the file dependency graph. Reference targets resolve
// against the referencing file's directory first, then each root, trying
// the name as written, with ".json" appended, and with the extension
// swapped for ".json". Loads run on `jobs` worker threads; the result does
// not depend on scheduling.
LinkGraph scan_links(const std::vector<std::string>& roots, const LinkOptions& options = {});

} // namespace sheetlens
