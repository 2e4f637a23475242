# Copyright (c) 2026, the qsteer authors.
# SPDX-License-Identifier: Apache-2.0
"""Steerable-weight labeling and feature extraction for two-qubit states."""

from ._core import (
    __version__,
    compute_assemblage,
    extract_features,
    haar_unitary,
    label_state,
    mse,
    r_squared,
    random_density,
    scheme_dim,
    werner_state,
)

__all__ = [
    "__version__",
    "compute_assemblage",
    "extract_features",
    "haar_unitary",
    "label_state",
    "mse",
    "r_squared",
    "random_density",
    "scheme_dim",
    "werner_state",
]
