#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sheetlens/config.hpp"
#include "sheetlens/eval.hpp"
#include "sheetlens/formula.hpp"
#include "sheetlens/graph.hpp"
#include "sheetlens/workbook.hpp"

namespace sheetlens {

enum class FactorCategory { High, Significant, ComplexLogic, Measure };
enum class FactorKind { Presence, Measure };
enum class FindingStatus { Found, NotFound, AboveLimit, WithinLimit };

const char* category_text(FactorCategory c);
const char* status_text(FindingStatus s);

struct RiskFactor {
    std::string id;
    std::string title;
    FactorCategory category = FactorCategory::High;
    FactorKind kind = FactorKind::Presence;
    int weight = 0;
    std::optional<double> threshold;    // measures only; triggered when strictly above
};

// The built-in factor list in report order. Weights sum to 149.
std::vector<RiskFactor> default_catalog();

// Default catalog with per-factor weight/threshold overrides applied.
// Unknown ids and thresholds on presence factors append to `warnings`.
std::vector<RiskFactor> configured_catalog(const Config& config,
                                           std::vector<std::string>* warnings = nullptr);

struct Finding {
    std::string factor_id;
    FindingStatus status = FindingStatus::NotFound;
    std::optional<double> measured_value;        // measures always set one unless skipped
    std::optional<std::string> example_address;  // "PhasingTable!$C$6"
    std::optional<std::string> example_formula;  // verbatim text at the example
    std::optional<std::string> detail;

    bool triggered() const {
        return status == FindingStatus::Found || status == FindingStatus::AboveLimit;
    }
};

// Sheet whose declared used range is mostly blank. Carries no weight; it
// flags a corrupt or stale used range for the reviewer.
struct UsedRangeFinding {
    int sheet = 0;
    std::string sheet_name;
    UsedRangeStats stats;
};

struct RiskReport {
    std::vector<RiskFactor> catalog;             // as applied, report order
    std::vector<Finding> findings;               // parallel to catalog
    std::vector<UsedRangeFinding> used_range_findings;
    std::vector<std::string> skipped;            // factor ids needing evaluation
    int triggered_weight = 0;
    int total_weight = 0;
    int overall_rating_percent = 0;              // round(100 * triggered / total)
};

// Runs every factor. `formulas` must be ordered by sheet then row-major
// (the parse pass emits that order). `eval` may be null: the two factors
// that need evaluated values then report untriggered, carry a
// "skipped: no evaluation" detail, and land in `skipped`.
// Throws std::invalid_argument when the catalog weights sum to zero.
RiskReport run_catalog(const Workbook& wb,
                       std::span<const FormulaCell> formulas,
                       const std::vector<UniqueFormula>& uniques,
                       const DepGraph& graph,
                       const std::vector<Cycle>& cycles,
                       const EvalResult* eval,
                       const Config& config);

} // namespace sheetlens
