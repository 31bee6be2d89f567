"""Crash scenario reconstruction from accident report abstracts.

Thin wrapper over the native ``_core`` module: documents cross the boundary
as JSON strings with the same schemas the CLI reads and writes; this layer
converts them to and from plain dicts.
"""

import json as _json

from . import _core

__version__ = "0.1.0"

__all__ = [
    "extract",
    "plan",
    "validate",
    "generate_tests",
    "render_svg",
    "srr",
    "accuracy_csv",
]


def _dumps(doc):
    return doc if isinstance(doc, str) else _json.dumps(doc)


def extract(report_text, mode="mock"):
    """Extract an accident abstract from crash report text.

    ``mode="mock"`` uses the deterministic rule-based extractor; ``"live"``
    posts to the endpoint in ``CRASHSYNTH_LLM_ENDPOINT``. Returns a dict.
    """
    return _json.loads(_core.extract_report(report_text, mode))


def plan(map_doc, abstract, max_scenarios=3, seed=42):
    """Plan concrete scenarios for an abstract on a map.

    Both documents may be dicts or JSON strings. Returns a list of scenario
    dicts (possibly empty when every candidate site is infeasible). Raises
    ValueError when the map offers no candidate site at all.
    """
    out = _core.plan_scenarios(_dumps(map_doc), _dumps(abstract), max_scenarios, seed)
    return [_json.loads(s) for s in out]


def validate(map_doc, scenarios):
    """Replay scenarios against a map and score them.

    Returns a verdict dict with per-scenario pass/fail entries and the
    scenario reconstruction rate over the underlying reports.
    """
    texts = [_dumps(s) for s in scenarios]
    return _json.loads(_core.validate_scenarios(_dumps(map_doc), texts))


def generate_tests(scenario):
    """Turn a scenario into one ADS test case per vehicle participant."""
    return [_json.loads(t) for t in _core.generate_test_cases(_dumps(scenario))]


def render_svg(map_doc, scenario):
    """Render a scenario on its map to an SVG document (string)."""
    return _core.render_svg(_dumps(map_doc), _dumps(scenario))


def srr(verdicts):
    """Scenario reconstruction rate over per-report scenario verdict lists.

    A report counts only when it has scenarios and every one passed.
    """
    return _core.compute_srr([list(v) for v in verdicts])


def accuracy_csv(predictions, golds):
    """Per-attribute accuracy table (CSV text) for predicted vs gold abstracts."""
    return _core.accuracy_table([_dumps(p) for p in predictions], [_dumps(g) for g in golds])
