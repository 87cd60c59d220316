#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sheetlens/workbook.hpp"

namespace sheetlens {

struct FactorOverride {
    std::optional<int> weight;
    std::optional<double> threshold;
};

// Tunable knobs; everything defaults to the documented catalog behaviour.
struct Config {
    std::map<std::string, FactorOverride> factors;
    std::vector<double> exempt_literals{0.0, 1.0};
    bool exempt_round_digits = true;      // literal second argument of ROUND
    double blank_ratio_threshold = 0.5;
    std::string description_cell = "A1";
    ScaleLimits scale;
    int interruption_run_min = 3;         // layout constant-interruption
    int jumble_neighbor_min = 2;          // neighbors that must differ
};

// Parses a config JSON document. Unknown keys warn; structural problems
// (non-object document, bad factor entries) throw LoadError{Format}.
Config parse_config_json(const std::string& json_text, const std::string& origin,
                         std::vector<std::string>& warnings);

// Resolution order: explicit path, then $SHEETLENS_CONFIG, then
// ./sheetlens.config.json when present, else defaults. An explicit or
// env-named file that cannot be read throws LoadError{FileMissing}.
Config resolve_config(const std::optional<std::string>& explicit_path,
                      std::vector<std::string>& warnings);

} // namespace sheetlens
