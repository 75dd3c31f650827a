"""Controversial event detection over tweet streams.

Thin Python layer over the C++ core. JSON-producing functions return strings;
``detect_report`` and friends parse them for convenience.
"""

import json

from ._cdet import (
    CdetError,
    ClusterState,
    detect,
    evaluate,
    extract_terms,
    generate,
    is_credible,
    market,
    normalize_url,
    reference_scenario,
    return_stats,
    sentiment,
    zscore,
)

__all__ = [
    "CdetError",
    "ClusterState",
    "detect",
    "detect_report",
    "evaluate",
    "extract_terms",
    "generate",
    "is_credible",
    "market",
    "normalize_url",
    "reference_scenario",
    "return_stats",
    "sentiment",
    "zscore",
]


def detect_report(**config):
    """Run detection with keyword config (same keys as the JSON config) and return the parsed report."""
    return json.loads(detect(json.dumps(config)))
