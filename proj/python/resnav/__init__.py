"""Python bindings for the resnav navigation stack."""

import json as _json

from ._resnav import (
    ConfigError,
    Error,
    InvalidArgument,
    NumericError,
    cluster,
    detect_wall,
    fit_wall,
    gate,
    normalize_angle,
    run_acceptance,
    wall_follow_steer,
)
from ._resnav import run_scenario_file as _run_scenario_file

__all__ = [
    "ConfigError",
    "Error",
    "InvalidArgument",
    "NumericError",
    "cluster",
    "detect_wall",
    "fit_wall",
    "gate",
    "normalize_angle",
    "run_acceptance",
    "run_scenario",
    "wall_follow_steer",
]


def run_scenario(path, seed=None):
    """Run a scenario file. Returns (summary dict, trace CSV text)."""
    summary, csv = _run_scenario_file(str(path), seed)
    return _json.loads(summary), csv
