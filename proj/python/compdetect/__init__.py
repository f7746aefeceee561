# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The compdetect Authors
"""Compensatory-movement detection from upper-limb skeleton sequences."""

import json as _json

from . import _core
from ._core import (
    CLASS_NAMES,
    canonical_graph,
    compute_metrics,
    cross_entropy,
    fit_channel_stats,
    generate,
    gradient_check,
    knn_classify,
    normalize_adjacency,
    resample,
    spline_eval,
)

__version__ = _core.__version__


def compare(config=None):
    """Runs the model comparison; `config` is a dict in the CLI config layout."""
    return _json.loads(_core.compare(_json.dumps(config or {})))


def ablate(config=None):
    """Runs the GCN / GCN-LSTM / GCN-LSTM-ATT ablation."""
    return _json.loads(_core.ablate(_json.dumps(config or {})))


__all__ = [
    "CLASS_NAMES",
    "ablate",
    "canonical_graph",
    "compare",
    "compute_metrics",
    "cross_entropy",
    "fit_channel_stats",
    "generate",
    "gradient_check",
    "knn_classify",
    "normalize_adjacency",
    "resample",
    "spline_eval",
]
