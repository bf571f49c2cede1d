"""Python bindings for the sqpm market core."""

import json

from ._sqpm import (
    Error,
    axioms,
    cost,
    price,
    project_simplex,
    quote,
    steepest_step,
)
from ._sqpm import run_scenario as _run_scenario

__all__ = [
    "Error",
    "axioms",
    "cost",
    "price",
    "project_simplex",
    "quote",
    "run_scenario",
    "steepest_step",
]


def run_scenario(config_text):
    """Run a scenario from config text; the summary comes back parsed."""
    out = _run_scenario(config_text)
    out["summary"] = json.loads(out["summary"])
    return out
