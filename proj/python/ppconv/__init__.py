"""Simulation lab for Poisson process convergence of run and Voronoi radius processes."""

import json

from ._ppconv import (
    BernoulliModel,
    Box,
    Density,
    PpconvError,
    Window,
    alpha2,
    circumradius,
    circumradius_process,
    consecutive_ratio_statistic,
    estimate_p_k,
    experiment_kinds,
    inradius,
    inradius_process,
    is_cell_bounded,
    ks_distance,
    run_indicators,
    run_process,
    sample_poisson,
)
from . import _ppconv


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def describe(config):
    """Resolved schedule of an experiment config (dict or JSON text)."""
    return json.loads(_ppconv.describe_json(_text(config)))


def run_experiment(config):
    """Run an experiment config (dict or JSON text) and return the report dict."""
    return json.loads(_ppconv.run_experiment_json(_text(config)))


def load_config(path):
    with open(path) as fh:
        return json.load(fh)


__all__ = [
    "BernoulliModel", "Box", "Density", "PpconvError", "Window", "alpha2", "circumradius",
    "circumradius_process", "consecutive_ratio_statistic", "describe", "estimate_p_k",
    "experiment_kinds", "inradius", "inradius_process", "is_cell_bounded", "ks_distance",
    "load_config", "run_experiment", "run_indicators", "run_process", "sample_poisson",
]
