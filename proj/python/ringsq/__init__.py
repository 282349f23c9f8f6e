"""Pair generation and squeezing in a coupled microring.

Configs are the same JSON documents the ``simulate`` CLI reads; pass a dict
or a JSON string.
"""

import json

from . import _core
from ._core import ConfigError, Error, NotConverged, scenario_names

__all__ = [
    "ConfigError",
    "Error",
    "NotConverged",
    "figures_of_merit",
    "normalize_config",
    "run_pulsed",
    "run_scenario",
    "scenario_names",
]


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def normalize_config(config):
    """Validated config with every default filled in, as a dict."""
    return json.loads(_core.normalize_config(_text(config)))


def run_pulsed(config):
    """Single pulsed run; photon numbers, correlations and output moments."""
    return _core.run_pulsed(_text(config))


def run_scenario(config, out_dir="", threads=1):
    """Run the configured scenario and write its tables; returns the outcome."""
    return _core.run_scenario(_text(config), out_dir, threads)


def figures_of_merit(config):
    """Linewidth, escape efficiency and finesse of each resonance."""
    return _core.figures_of_merit(_text(config))
