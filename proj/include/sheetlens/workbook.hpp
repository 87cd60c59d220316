#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sheetlens/address.hpp"
#include "sheetlens/value.hpp"

namespace sheetlens {

class LoadError : public std::runtime_error {
public:
    enum class Kind { FileMissing, Format };

    LoadError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

enum class SheetVisibility { Visible, Hidden, VeryHidden };

const char* visibility_text(SheetVisibility v);

struct ConditionalFormat {
    std::string range;
    std::string rule;
};

struct CellContent {
    Value literal;                          // ignored when formula is set
    std::optional<std::string> formula;     // verbatim, '=' included
    std::optional<CellRange> array_range;   // entered-range for array formulas

    bool is_formula() const { return formula.has_value(); }
};

struct Sheet {
    std::string name;
    SheetVisibility visibility = SheetVisibility::Visible;
    std::optional<CellRange> used_range;
    std::vector<int> hidden_rows;           // sorted, 1-based
    std::vector<int> hidden_cols;           // sorted column numbers
    std::vector<ConditionalFormat> conditional_formats;
    int pivot_tables = 0;
    std::map<CellCoord, CellContent> cells; // row-major order

    const CellContent* find_cell(CellCoord c) const {
        auto it = cells.find(c);
        return it == cells.end() ? nullptr : &it->second;
    }
};

struct Protection {
    bool structure_locked = false;
    bool open_password_required = false;
};

struct VbaInfo {
    int components = 0;
    int total_lines = 0;
};

struct Workbook {
    std::string name;
    std::string source_path;                    // empty when parsed from a string
    long long file_size_bytes = 0;
    std::optional<std::int64_t> saved_at;       // seconds since epoch, UTC
    std::map<std::string, std::string> properties;
    Protection protection;
    VbaInfo vba;
    std::map<std::string, std::string> defined_names;
    std::vector<std::string> external_links;    // declared target book names
    std::vector<Sheet> sheets;

    const Sheet* find_sheet(std::string_view name) const;
    int sheet_index(std::string_view name) const;   // -1 when absent
};

struct LoadResult {
    Workbook workbook;
    std::vector<std::string> warnings;
};

// Reads the canonical JSON interchange form. Unknown keys are skipped with
// a warning; structural problems (duplicate sheet names, duplicate cell
// addresses, bad ranges, non-object sheets) throw LoadError.
LoadResult load_workbook(const std::filesystem::path& path);
LoadResult load_workbook_json(const std::string& json_text, const std::string& origin);

// Declared-vs-populated footprint of one sheet. populated counts non-blank
// stored cells inside used_range; trimmed_range is their bounding box.
struct UsedRangeStats {
    long long declared_cells = 0;
    long long populated_cells = 0;
    std::optional<CellRange> trimmed_range;
    double blank_ratio = 0.0;   // 1 - populated/declared, 0 when declared == 0
};

UsedRangeStats used_range_stats(const Sheet& sheet);

enum class ScaleAdvice { Normal, ReviewDesign, ConsiderMigration };

struct ScaleLimits {
    int design_sheets = 50;
    long long design_formulas = 100000;
    int migration_sheets = 200;
    long long migration_formulas = 500000;
};

// Spreadsheets past these sizes stop being reviewable as spreadsheets.
ScaleAdvice scale_advice(int sheet_count, long long total_formulas,
                         const ScaleLimits& limits = {});

const char* scale_advice_text(ScaleAdvice a);

// RFC 3339 timestamps, UTC. parse returns nullopt on malformed input.
std::optional<std::int64_t> parse_rfc3339(const std::string& text);
std::string render_rfc3339(std::int64_t seconds);

} // namespace sheetlens
