"""Primal-dual semi-smooth Newton for TV denoising of S² and SPD(3) images."""

import json

from ._core import (
    ConfigError,
    Error,
    exact_rof_delta,
    lemniscate,
    q_rates,
    rotations_image,
    spd_dist,
    spd_exp,
    spd_image,
    spd_log,
    sphere_dist,
    sphere_exp,
    sphere_log,
)
from ._core import run_config as _run_config


def run(config):
    """Run an experiment from a config dict and return the summary dict."""
    return json.loads(_run_config(json.dumps(config)))


__all__ = [
    "ConfigError",
    "Error",
    "exact_rof_delta",
    "lemniscate",
    "q_rates",
    "rotations_image",
    "run",
    "spd_dist",
    "spd_exp",
    "spd_image",
    "spd_log",
    "sphere_dist",
    "sphere_exp",
    "sphere_log",
]
