"""Spreadsheet review toolkit: risk scanning, formula census, dependency
tracing and cross-workbook link mapping over the canonical JSON interchange
form. Thin wrappers over the native module; every report is the same JSON
document the command line emits."""

import json

try:
    from sheetlens._sheetlens import (  # type: ignore[import-not-found]
        FormulaError,
        LoadError,
        analyze_json,
        column_name,
        column_number,
        eval_json,
        flow_json,
        index_json,
        links_json,
        metrics_json,
        normalize_r1c1,
        overall_rating,
        sheet_map_json,
        supported_functions,
        trace_json,
        unique_formulas_json,
    )
except ImportError:  # build-tree layout: extension sits next to the package
    from _sheetlens import (  # type: ignore[import-not-found]
        FormulaError,
        LoadError,
        analyze_json,
        column_name,
        column_number,
        eval_json,
        flow_json,
        index_json,
        links_json,
        metrics_json,
        normalize_r1c1,
        overall_rating,
        sheet_map_json,
        supported_functions,
        trace_json,
        unique_formulas_json,
    )

__all__ = [
    "FormulaError",
    "LoadError",
    "analyze",
    "analyze_json",
    "column_name",
    "column_number",
    "evaluate",
    "eval_json",
    "flow",
    "flow_json",
    "index",
    "index_json",
    "links",
    "links_json",
    "metrics",
    "metrics_json",
    "normalize_r1c1",
    "overall_rating",
    "sheet_map",
    "sheet_map_json",
    "supported_functions",
    "trace",
    "trace_json",
    "unique_formulas",
    "unique_formulas_json",
]


def analyze(path, evaluate=True, config_path=None):
    """Full risk report as a dict; see analyze_json for the raw document."""
    return json.loads(analyze_json(str(path), evaluate, config_path))


def metrics(path, config_path=None):
    return json.loads(metrics_json(str(path), config_path))


def unique_formulas(path, workbook_wide=False, config_path=None):
    doc = json.loads(unique_formulas_json(str(path), workbook_wide, config_path))
    return doc["unique_formulas"]


def index(path, group="", config_path=None):
    return json.loads(index_json(str(path), group, config_path))


def sheet_map(path, sheet, config_path=None):
    return json.loads(sheet_map_json(str(path), sheet, config_path))


def flow(path, sheet, config_path=None):
    return json.loads(flow_json(str(path), sheet, config_path))


def trace(path, cell, depth=3, config_path=None):
    return json.loads(trace_json(str(path), cell, depth, config_path))


def links(paths, jobs=0):
    return json.loads(links_json([str(p) for p in paths], jobs))


def evaluate(path, config_path=None):
    return json.loads(eval_json(str(path), config_path))
