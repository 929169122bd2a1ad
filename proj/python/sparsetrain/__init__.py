"""Token masking, token merging and key-subset selection for sparse training."""

import json as _json

from ._core import (
    argsort_desc,
    infobatch_step,
    plan_mask,
    prumerge,
    quartiles,
    run_selection,
    softmax,
)
from . import _core


def simulate(config=None):
    """Run the synthetic dense/sparse/subset experiment and return the reports."""
    return _json.loads(_core._simulate_json(_json.dumps(config or {})))


__all__ = [
    "argsort_desc",
    "infobatch_step",
    "plan_mask",
    "prumerge",
    "quartiles",
    "run_selection",
    "simulate",
    "softmax",
]
