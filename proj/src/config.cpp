#include "sheetlens/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace sheetlens {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& origin, const std::string& what) {
    throw LoadError(LoadError::Kind::Format, origin + ": " + what);
}

} // namespace

Config parse_config_json(const std::string& json_text, const std::string& origin,
                         std::vector<std::string>& warnings) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        bad(origin, e.what());
    }
    if (!doc.is_object()) bad(origin, "config document must be a JSON object");

    Config cfg;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& key = it.key();
        const json& v = it.value();
        if (key == "factors") {
            if (!v.is_array()) bad(origin, "factors must be an array");
            for (const json& f : v) {
                if (!f.is_object() || !f.contains("id") || !f["id"].is_string())
                    bad(origin, "factor entries need a string id");
                FactorOverride o;
                if (f.contains("weight")) {
                    if (!f["weight"].is_number_integer() || f["weight"].get<int>() < 0 ||
                        f["weight"].get<int>() > 10)
                        bad(origin, "factor weight must be an integer in [0,10]");
                    o.weight = f["weight"].get<int>();
                }
                if (f.contains("threshold")) {
                    if (!f["threshold"].is_number())
                        bad(origin, "factor threshold must be a number");
                    o.threshold = f["threshold"].get<double>();
                }
                for (auto fk = f.begin(); fk != f.end(); ++fk)
                    if (fk.key() != "id" && fk.key() != "weight" && fk.key() != "threshold")
                        warnings.push_back(origin + ": unknown factor key '" + fk.key() + "'");
                cfg.factors[f["id"].get<std::string>()] = o;
            }
        } else if (key == "exempt_literals") {
            if (!v.is_array()) bad(origin, "exempt_literals must be an array of numbers");
            cfg.exempt_literals.clear();
            for (const json& n : v) {
                if (!n.is_number()) bad(origin, "exempt_literals must be an array of numbers");
                cfg.exempt_literals.push_back(n.get<double>());
            }
        } else if (key == "exempt_round_digits") {
            if (!v.is_boolean()) bad(origin, "exempt_round_digits must be a boolean");
            cfg.exempt_round_digits = v.get<bool>();
        } else if (key == "blank_ratio_threshold") {
            if (!v.is_number()) bad(origin, "blank_ratio_threshold must be a number");
            cfg.blank_ratio_threshold = v.get<double>();
        } else if (key == "description_cell") {
            if (!v.is_string()) bad(origin, "description_cell must be a string");
            cfg.description_cell = v.get<std::string>();
        } else if (key == "scale") {
            if (!v.is_object()) bad(origin, "scale must be an object");
            auto take = [&](const char* name, auto& slot) {
                if (v.contains(name)) {
                    if (!v[name].is_number_integer()) bad(origin, std::string(name) + " must be an integer");
                    slot = v[name].get<std::decay_t<decltype(slot)>>();
                }
            };
            take("design_sheets", cfg.scale.design_sheets);
            take("design_formulas", cfg.scale.design_formulas);
            take("migration_sheets", cfg.scale.migration_sheets);
            take("migration_formulas", cfg.scale.migration_formulas);
        } else if (key == "interruption_run_min") {
            if (!v.is_number_integer()) bad(origin, "interruption_run_min must be an integer");
            cfg.interruption_run_min = v.get<int>();
        } else if (key == "jumble_neighbor_min") {
            if (!v.is_number_integer()) bad(origin, "jumble_neighbor_min must be an integer");
            cfg.jumble_neighbor_min = v.get<int>();
        } else {
            warnings.push_back(origin + ": unknown config key '" + key + "'");
        }
    }
    return cfg;
}

Config resolve_config(const std::optional<std::string>& explicit_path,
                      std::vector<std::string>& warnings) {
    namespace fs = std::filesystem;
    std::string path;
    bool required = false;
    if (explicit_path) {
        path = *explicit_path;
        required = true;
    } else if (const char* env = std::getenv("SHEETLENS_CONFIG"); env && *env) {
        path = env;
        required = true;
    } else if (fs::exists("sheetlens.config.json")) {
        path = "sheetlens.config.json";
    }
    if (path.empty()) return Config{};

    std::ifstream in(path, std::ios::binary);
    if (!in) {
        if (required)
            throw LoadError(LoadError::Kind::FileMissing, "cannot read config file: " + path);
        warnings.push_back("cannot read config file: " + path + "; using defaults");
        return Config{};
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_json(buf.str(), path, warnings);
}

} // namespace sheetlens
