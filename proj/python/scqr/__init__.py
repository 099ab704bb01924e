"""Sorting composite quantile regression networks."""

import json
from pathlib import Path

from . import _scqr
from ._scqr import (
    CsvError,
    Model,
    TrainingError,
    cdf,
    composite_loss,
    evaluate,
    generate,
    hard_sort,
    isotonic_regression,
    quantile,
    soft_sort,
)

__all__ = [
    "CsvError",
    "Model",
    "TrainingError",
    "cdf",
    "composite_loss",
    "evaluate",
    "generate",
    "hard_sort",
    "isotonic_regression",
    "quantile",
    "run_experiment",
    "soft_sort",
]


def run_experiment(kind, **config):
    """Runs "exp1", "exp2" or "bench" with config overrides and returns summary.json as a dict."""
    if "out_dir" in config:
        config["out_dir"] = str(config["out_dir"])
    out = Path(_scqr.run_experiment(kind, json.dumps(config)))
    return json.loads((out / "summary.json").read_text())
