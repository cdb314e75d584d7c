"""Boundary-condition experiments for 1D hyperbolic systems.

Configurations are dicts with the same keys as the JSON files read by the
``hypbc`` command-line tool.
"""

import json

from . import _core
from ._core import (
    CONFIG_VERSION,
    ConfigError,
    check_forcing_bound,
    dambreak_exact,
    f_tilde,
    metric_names,
    problem_ids,
)

__all__ = [
    "CONFIG_VERSION",
    "ConfigError",
    "check_forcing_bound",
    "dambreak_exact",
    "f_tilde",
    "metric_names",
    "parse_config",
    "problem_ids",
    "render_report",
    "run",
    "sweep",
]


def _text(config, overrides):
    if isinstance(config, str):
        config = json.loads(config)
    merged = dict(config)
    merged.update(overrides)
    return json.dumps(merged)


def parse_config(config, **overrides):
    """Validated configuration with defaults filled in, and the list of warnings."""
    text, warnings = _core.parse_config(_text(config, overrides))
    return json.loads(text), list(warnings)


def run(config, **overrides):
    """Runs one configuration and returns metrics, snapshots and boundary series."""
    out = _core.run(_text(config, overrides))
    out["config"] = json.loads(out["config"])
    return out


def sweep(config, ladder=(), threads=0, **overrides):
    """Runs a resolution ladder; the report carries fitted orders and checks."""
    return json.loads(_core.sweep(_text(config, overrides), list(ladder), threads))


def render_report(report):
    """Plain-text table of a sweep report (dict or JSON text)."""
    if not isinstance(report, str):
        report = json.dumps(report)
    return _core.render_report(report)
